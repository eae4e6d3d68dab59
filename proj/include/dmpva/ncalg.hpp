#pragma once

// Free noncommutative difference algebra: letters u_{i,n}, words, polynomials.

#include "coeff.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace dmpva {

/// Exact coefficient field.
using Q = Rational;
inline bool qzero(const Q& q) { return q.sign() == 0; }
inline std::string qstr(const Q& q) { return q.str(); }
inline Q qparse(const std::string& s) { return Q(s); }

/// A generator u_{var,shift}. The packing makes integer order equal (var, shift) order.
using Letter = std::uint64_t;

/// Slot separator inside flattened tensor keys; never a valid letter.
constexpr Letter kSep = 0;

inline Letter make_letter(int var, long shift) {
    auto biased = std::uint32_t(std::int32_t(shift)) ^ 0x80000000u;
    return (std::uint64_t(var + 1) << 32) | biased;
}
inline int var_of(Letter l) { return int(l >> 32) - 1; }
inline long shift_of(Letter l) { return long(std::int32_t(std::uint32_t(l) ^ 0x80000000u)); }

using Word = boost::container::small_vector<Letter, 8>;

/// Length first, then lexicographic on (var, shift).
struct WordLess {
    bool operator()(const Word& a, const Word& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
};

/// Residue of n modulo e in [0, e); identity when e == 0.
inline long reduce_mod(long n, long e) {
    if (e == 0) return n;
    long r = n % e;
    return r < 0 ? r + e : r;
}

inline Letter shift_letter(Letter l, long m, long order) {
    return make_letter(var_of(l), reduce_mod(shift_of(l) + m, order));
}

/// Variables plus the order of S (0 means infinite).
struct Signature {
    std::vector<std::string> names;
    long order = 0;

    Signature() = default;
    Signature(std::vector<std::string> n, long e = 0) : names(std::move(n)), order(e) {
        if (names.empty()) throw std::invalid_argument("signature needs at least one variable");
        if (order < 0) throw std::invalid_argument("shift order must be >= 1 or infinite");
        std::set<std::string> seen(names.begin(), names.end());
        if (seen.size() != names.size()) throw std::invalid_argument("variable names must be distinct");
    }
    int size() const { return int(names.size()); }
    bool finite() const { return order != 0; }
    long reduce(long n) const { return reduce_mod(n, order); }
    int index_of(const std::string& name) const {
        for (int i = 0; i < size(); ++i)
            if (names[i] == name) return i;
        return -1;
    }
    bool operator==(const Signature&) const = default;
};

/// Sort by key, merge equal keys, drop zeros.
template <class K, class Less>
void normalize_terms(std::vector<std::pair<K, Q>>& v, Less less) {
    std::sort(v.begin(), v.end(), [&](const auto& a, const auto& b) { return less(a.first, b.first); });
    std::size_t out = 0;
    for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i + 1;
        Q sum = v[i].second;
        while (j < v.size() && !less(v[i].first, v[j].first)) sum += v[j++].second;
        if (!qzero(sum)) {
            if (out != i) v[out].first = std::move(v[i].first);
            v[out].second = sum;
            ++out;
        }
        i = j;
    }
    v.resize(out);
}

/// Element of R_l: finite sum of words with nonzero rational coefficients.
class Poly {
public:
    using Term = std::pair<Word, Q>;

    Poly() = default;
    explicit Poly(std::vector<Term> terms) : terms_(std::move(terms)) { normalize_terms(terms_, WordLess{}); }

    static Poly constant(const Q& c) { return Poly({{Word{}, c}}); }
    static Poly one() { return constant(1); }
    static Poly word(Word w, const Q& c = 1) { return Poly({{std::move(w), c}}); }
    static Poly gen(int var, long shift = 0) { return word(Word{make_letter(var, shift)}); }

    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    bool operator==(const Poly&) const = default;

    Poly operator+(const Poly& o) const {
        std::vector<Term> t = terms_;
        t.insert(t.end(), o.terms_.begin(), o.terms_.end());
        return Poly(std::move(t));
    }
    Poly operator-() const {
        Poly r = *this;
        for (auto& [w, c] : r.terms_) c = -c;
        return r;
    }
    Poly operator-(const Poly& o) const { return *this + (-o); }
    Poly operator*(const Q& s) const {
        if (qzero(s)) return {};
        Poly r = *this;
        for (auto& [w, c] : r.terms_) c *= s;
        return r;
    }
    /// Concatenation product.
    Poly operator*(const Poly& o) const {
        std::vector<Term> t;
        t.reserve(terms_.size() * o.terms_.size());
        for (const auto& [a, ca] : terms_)
            for (const auto& [b, cb] : o.terms_) {
                Word w = a;
                w.insert(w.end(), b.begin(), b.end());
                t.emplace_back(std::move(w), ca * cb);
            }
        return Poly(std::move(t));
    }
    Poly& operator+=(const Poly& o) { return *this = *this + o; }
    Poly& operator-=(const Poly& o) { return *this = *this - o; }

    /// Largest word length, -1 for zero.
    int degree() const { return terms_.empty() ? -1 : int(terms_.back().first.size()); }

private:
    std::vector<Term> terms_;
};

inline Poly operator*(const Q& s, const Poly& p) { return p * s; }

inline Poly power(const Poly& p, int k) {
    if (k < 0) throw std::invalid_argument("negative power");
    Poly r = Poly::one();
    for (int i = 0; i < k; ++i) r = r * p;
    return r;
}

inline Word shift_word(const Word& w, long m, long order) {
    Word r = w;
    for (auto& l : r) l = shift_letter(l, m, order);
    return r;
}

/// The automorphism S^m.
inline Poly shift(const Poly& p, long m, long order = 0) {
    std::vector<Poly::Term> t;
    t.reserve(p.size());
    for (const auto& [w, c] : p.terms()) t.emplace_back(shift_word(w, m, order), c);
    return Poly(std::move(t));
}

/// Reduce every shift modulo the signature order.
inline Poly reduce(const Poly& p, const Signature& sig) { return shift(p, 0, sig.order); }

inline Poly nc_mul(const Poly& p, const Poly& q) { return p * q; }

/// All (var, shift) pairs that occur in p, i.e. where the partial derivative is nonzero.
inline std::set<std::pair<int, long>> support(const Poly& p) {
    std::set<std::pair<int, long>> s;
    for (const auto& [w, c] : p.terms())
        for (Letter l : w) s.emplace(var_of(l), shift_of(l));
    return s;
}

}  // namespace dmpva
