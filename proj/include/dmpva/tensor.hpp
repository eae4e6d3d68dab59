#pragma once

// Tensor powers V^{⊗k}, k <= 4, with the structural operations on them.

#include <array>
#include <span>

#include "ncalg.hpp"

namespace dmpva {

/// k-tuple of words flattened into one sequence, slots separated by kSep.
using Key = boost::container::small_vector<Letter, 14>;

struct KeyLess {
    bool operator()(const Key& a, const Key& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
};

using Span = std::span<const Letter>;

inline Span as_span(const Word& w) { return {w.data(), w.size()}; }

/// Splits a key into its slots.
inline std::array<Span, 4> slots_of(const Key& k, int arity) {
    std::array<Span, 4> out{};
    const Letter* b = k.data();
    const Letter* e = k.data() + k.size();
    for (int s = 0; s < arity; ++s) {
        const Letter* p = b;
        while (p != e && *p != kSep) ++p;
        out[s] = Span(b, std::size_t(p - b));
        b = (p == e) ? e : p + 1;
    }
    return out;
}

/// Appends slots one at a time; each slot may be assembled from several pieces.
class KeyBuilder {
public:
    KeyBuilder& slot() {
        if (started_) key_.push_back(kSep);
        started_ = true;
        return *this;
    }
    KeyBuilder& put(Span s) {
        key_.insert(key_.end(), s.begin(), s.end());
        return *this;
    }
    KeyBuilder& put(Letter l) {
        key_.push_back(l);
        return *this;
    }
    KeyBuilder& put_shifted(Span s, long m, long order) {
        if (m == 0) return put(s);
        for (Letter l : s) key_.push_back(shift_letter(l, m, order));
        return *this;
    }
    Key take() { return std::move(key_); }

private:
    Key key_;
    bool started_ = false;
};

enum class Insert { MulLeft, MulRight, TensorLeft, TensorRight, OuterL, OuterR, InnerL, InnerR };
enum class Side { Left, Right };

/// Element of V^{⊗k}.
class Tensor {
public:
    using Term = std::pair<Key, Q>;

    explicit Tensor(int arity = 2) : arity_(arity) { check_arity(arity); }
    Tensor(int arity, std::vector<Term> terms) : arity_(arity), terms_(std::move(terms)) {
        check_arity(arity);
        normalize_terms(terms_, KeyLess{});
    }

    /// p_1 ⊗ ... ⊗ p_k, expanded multilinearly.
    static Tensor pure(const std::vector<Poly>& factors) {
        int k = int(factors.size());
        std::vector<Term> acc{{Key{}, Q(1)}};
        for (int s = 0; s < k; ++s) {
            std::vector<Term> next;
            for (const auto& [key, c] : acc)
                for (const auto& [w, cw] : factors[s].terms()) {
                    Key nk = key;
                    if (s > 0) nk.push_back(kSep);
                    nk.insert(nk.end(), w.begin(), w.end());
                    next.emplace_back(std::move(nk), c * cw);
                }
            acc = std::move(next);
        }
        return Tensor(k, std::move(acc));
    }
    static Tensor words(const std::vector<Word>& ws, const Q& c = 1) {
        KeyBuilder kb;
        for (const auto& w : ws) kb.slot().put(as_span(w));
        return Tensor(int(ws.size()), {{kb.take(), c}});
    }
    static Tensor unit(int arity) { return words(std::vector<Word>(std::size_t(arity)), 1); }
    static Tensor from_poly(const Poly& p) {
        std::vector<Term> t;
        for (const auto& [w, c] : p.terms()) t.emplace_back(Key(w.begin(), w.end()), c);
        return Tensor(1, std::move(t));
    }

    int arity() const { return arity_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    bool operator==(const Tensor& o) const { return arity_ == o.arity_ && terms_ == o.terms_; }

    Tensor operator+(const Tensor& o) const {
        same_arity(o);
        std::vector<Term> t = terms_;
        t.insert(t.end(), o.terms_.begin(), o.terms_.end());
        return Tensor(arity_, std::move(t));
    }
    Tensor operator-() const {
        Tensor r = *this;
        for (auto& [k, c] : r.terms_) c = -c;
        return r;
    }
    Tensor operator-(const Tensor& o) const { return *this + (-o); }
    Tensor operator*(const Q& s) const {
        if (qzero(s)) return Tensor(arity_);
        Tensor r = *this;
        for (auto& [k, c] : r.terms_) c *= s;
        return r;
    }
    Tensor& operator+=(const Tensor& o) { return *this = *this + o; }
    Tensor& operator-=(const Tensor& o) { return *this = *this - o; }

    /// Factor-wise product (a1⊗...⊗ak)(b1⊗...⊗bk) = a1b1⊗...⊗akbk.
    Tensor operator*(const Tensor& o) const {
        same_arity(o);
        std::vector<Term> t;
        for (const auto& [ka, ca] : terms_) {
            auto sa = slots_of(ka, arity_);
            for (const auto& [kb, cb] : o.terms_) {
                auto sb = slots_of(kb, arity_);
                KeyBuilder b;
                for (int s = 0; s < arity_; ++s) b.slot().put(sa[s]).put(sb[s]);
                t.emplace_back(b.take(), ca * cb);
            }
        }
        return Tensor(arity_, std::move(t));
    }

    Poly to_poly() const {
        if (arity_ != 1) throw std::invalid_argument("to_poly needs arity 1");
        std::vector<Poly::Term> t;
        for (const auto& [k, c] : terms_) t.emplace_back(Word(k.begin(), k.end()), c);
        return Poly(std::move(t));
    }

private:
    static void check_arity(int k) {
        if (k < 1 || k > 4) throw std::invalid_argument("tensor arity must be in 1..4");
    }
    void same_arity(const Tensor& o) const {
        if (o.arity_ != arity_) throw std::invalid_argument("mixed tensor arities");
    }

    int arity_;
    std::vector<Term> terms_;
};

inline Tensor operator*(const Q& s, const Tensor& t) { return t * s; }

/// Applies f(slots, coeff, out) to every term, collecting into a tensor of the given arity.
template <class F>
Tensor transform_terms(const Tensor& t, int out_arity, F f) {
    std::vector<Tensor::Term> out;
    out.reserve(t.size());
    for (const auto& [k, c] : t.terms()) f(slots_of(k, t.arity()), c, out);
    return Tensor(out_arity, std::move(out));
}

/// a_1⊗...⊗a_n ↦ a_n⊗a_1⊗...⊗a_{n-1}.
inline Tensor sigma(const Tensor& t) {
    int n = t.arity();
    return transform_terms(t, n, [n](const auto& s, const Q& c, auto& out) {
        KeyBuilder b;
        b.slot().put(s[n - 1]);
        for (int i = 0; i < n - 1; ++i) b.slot().put(s[i]);
        out.emplace_back(b.take(), c);
    });
}

inline Tensor sigma_pow(const Tensor& t, int k) {
    Tensor r = t;
    for (int i = 0; i < ((k % t.arity()) + t.arity()) % t.arity(); ++i) r = sigma(r);
    return r;
}

/// (a⊗b)•(c⊗d) = ac⊗db.
inline Tensor bullet(const Tensor& A, const Tensor& B) {
    if (A.arity() != 2 || B.arity() != 2) throw std::invalid_argument("bullet needs arity 2");
    std::vector<Tensor::Term> out;
    out.reserve(A.size() * B.size());
    for (const auto& [ka, ca] : A.terms()) {
        auto a = slots_of(ka, 2);
        for (const auto& [kb, cb] : B.terms()) {
            auto b = slots_of(kb, 2);
            KeyBuilder kbld;
            kbld.slot().put(a[0]).put(b[0]);
            kbld.slot().put(b[1]).put(a[1]);
            out.emplace_back(kbld.take(), ca * cb);
        }
    }
    return Tensor(2, std::move(out));
}

/// Slot-wise S^m.
inline Tensor shift_tensor(const Tensor& t, long m, long order = 0) {
    int n = t.arity();
    return transform_terms(t, n, [&](const auto& s, const Q& c, auto& out) {
        KeyBuilder b;
        for (int i = 0; i < n; ++i) b.slot().put_shifted(s[i], m, order);
        out.emplace_back(b.take(), c);
    });
}

/// Concatenation of all factors.
inline Poly mult(const Tensor& t) {
    std::vector<Poly::Term> out;
    out.reserve(t.size());
    for (const auto& [k, c] : t.terms()) {
        Word w;
        for (Letter l : k)
            if (l != kSep) w.push_back(l);
        out.emplace_back(std::move(w), c);
    }
    return Poly(std::move(out));
}

/**
 * Module actions and tensor insertions with a polynomial b.
 *
 * MulLeft: b ∗_i t multiplies b on the left of factor i (0-based).
 * MulRight: t ∗_i b multiplies b on the right of factor n-1-i (0-based).
 * TensorLeft: b ⊗_i t puts b after the first i factors.
 * TensorRight: t ⊗_i b puts b after the first n-i factors.
 * Outer/Inner only for k = 2: OuterL bA'⊗A'', OuterR A'⊗A''b, InnerL A'⊗bA'', InnerR A'b⊗A''.
 */
inline Tensor insert(const Tensor& t, int i, const Poly& b, Insert mode) {
    int n = t.arity();
    bool outer_inner = mode == Insert::OuterL || mode == Insert::OuterR || mode == Insert::InnerL ||
                       mode == Insert::InnerR;
    if (outer_inner && n != 2) throw std::invalid_argument("inner/outer insertion needs arity 2");
    bool tensoring = mode == Insert::TensorLeft || mode == Insert::TensorRight;
    if (tensoring && n + 1 > 4) throw std::invalid_argument("tensor insertion exceeds arity 4");
    if (i < 0 || (tensoring && i > n)) throw std::invalid_argument("invalid slot index");
    int slot = 0;
    bool left = true;
    switch (mode) {
        case Insert::MulLeft: slot = i % n; break;
        case Insert::MulRight: slot = ((n - 1 - i) % n + n) % n; left = false; break;
        case Insert::OuterL: slot = 0; break;
        case Insert::OuterR: slot = 1; left = false; break;
        case Insert::InnerL: slot = 1; break;
        case Insert::InnerR: slot = 0; left = false; break;
        case Insert::TensorLeft: slot = i; break;
        case Insert::TensorRight: slot = n - i; break;
    }
    int out_arity = tensoring ? n + 1 : n;
    std::vector<Tensor::Term> out;
    for (const auto& [k, c] : t.terms()) {
        auto s = slots_of(k, n);
        for (const auto& [w, cw] : b.terms()) {
            KeyBuilder kb;
            for (int j = 0; j < n; ++j) {
                if (tensoring && j == slot) kb.slot().put(as_span(w));
                kb.slot();
                if (!tensoring && j == slot && left) kb.put(as_span(w));
                kb.put(s[j]);
                if (!tensoring && j == slot && !left) kb.put(as_span(w));
            }
            if (tensoring && slot == n) kb.slot().put(as_span(w));
            out.emplace_back(kb.take(), c * cw);
        }
    }
    return Tensor(out_arity, std::move(out));
}

/**
 * The six actions of V⊗V on V⊗3.
 *
 * Left:  A•1X = x⊗A'y⊗zA'',  A•2X = A'x⊗y⊗zA'',  A•3X = A'x⊗yA''⊗z.
 * Right: X•1A = x⊗yA'⊗A''z,  X•2A = xA'⊗y⊗A''z,  X•3A = xA'⊗A''y⊗z.
 */
inline Tensor bullet_i(const Tensor& A, const Tensor& X, int i, Side side) {
    if (A.arity() != 2 || X.arity() != 3) throw std::invalid_argument("bullet_i needs A in V⊗2, X in V⊗3");
    if (i < 1 || i > 3) throw std::invalid_argument("bullet_i index must be 1, 2 or 3");
    std::vector<Tensor::Term> out;
    for (const auto& [ka, ca] : A.terms()) {
        auto a = slots_of(ka, 2);
        for (const auto& [kx, cx] : X.terms()) {
            auto x = slots_of(kx, 3);
            KeyBuilder b;
            if (side == Side::Left) {
                if (i == 1) b.slot().put(x[0]).slot().put(a[0]).put(x[1]).slot().put(x[2]).put(a[1]);
                if (i == 2) b.slot().put(a[0]).put(x[0]).slot().put(x[1]).slot().put(x[2]).put(a[1]);
                if (i == 3) b.slot().put(a[0]).put(x[0]).slot().put(x[1]).put(a[1]).slot().put(x[2]);
            } else {
                if (i == 1) b.slot().put(x[0]).slot().put(x[1]).put(a[0]).slot().put(a[1]).put(x[2]);
                if (i == 2) b.slot().put(x[0]).put(a[0]).slot().put(x[1]).slot().put(a[1]).put(x[2]);
                if (i == 3) b.slot().put(x[0]).put(a[0]).slot().put(a[1]).put(x[1]).slot().put(x[2]);
            }
            out.emplace_back(b.take(), ca * cx);
        }
    }
    return Tensor(3, std::move(out));
}

/// ∂/∂u_{i,n}: each matching letter splits its word into prefix ⊗ suffix.
inline Tensor partial(const Poly& p, int var, long n) {
    Letter target = make_letter(var, n);
    std::vector<Tensor::Term> out;
    for (const auto& [w, c] : p.terms())
        for (std::size_t t = 0; t < w.size(); ++t)
            if (w[t] == target) {
                KeyBuilder b;
                b.slot().put(Span(w.data(), t)).slot().put(Span(w.data() + t + 1, w.size() - t - 1));
                out.emplace_back(b.take(), c);
            }
    return Tensor(2, std::move(out));
}

/// ∂/∂u_{i,n} applied in one slot (1-based), the resulting pair spliced in place.
inline Tensor partial_at(const Tensor& t, int slot, int var, long n) {
    int k = t.arity();
    if (slot < 1 || slot > k) throw std::invalid_argument("invalid slot");
    if (k + 1 > 4) throw std::invalid_argument("partial_at exceeds arity 4");
    Letter target = make_letter(var, n);
    return transform_terms(t, k + 1, [&](const auto& s, const Q& c, auto& out) {
        Span w = s[slot - 1];
        for (std::size_t p = 0; p < w.size(); ++p) {
            if (w[p] != target) continue;
            KeyBuilder b;
            for (int j = 0; j < k; ++j) {
                if (j == slot - 1)
                    b.slot().put(w.subspan(0, p)).slot().put(w.subspan(p + 1));
                else
                    b.slot().put(s[j]);
            }
            out.emplace_back(b.take(), c);
        }
    });
}

inline Tensor partial_left(const Tensor& t, int var, long n) { return partial_at(t, 1, var, n); }
inline Tensor partial_right(const Tensor& t, int var, long n) { return partial_at(t, t.arity(), var, n); }

/// Letters occurring in any slot.
inline std::set<std::pair<int, long>> support(const Tensor& t) {
    std::set<std::pair<int, long>> s;
    for (const auto& [k, c] : t.terms())
        for (Letter l : k)
            if (l != kSep) s.emplace(var_of(l), shift_of(l));
    return s;
}

}  // namespace dmpva
