#pragma once

// Laurent polynomials in formal variables with tensor coefficients, and matrix difference operators.

#include <map>

#include "tensor.hpp"

namespace dmpva {

/// Exponent vector for up to three formal variables (λ, μ, and a marked x).
using Exp = std::array<long, 3>;

/**
 * Finite sum Σ e^{Exp} T_Exp with T_Exp in V^{⊗k}. In finite order mode every exponent is
 * reduced modulo the order when the value is built.
 */
class Laurent {
public:
    struct Term {
        Exp e;
        Key k;
        Q c;
        Term() = default;
        Term(Exp e_, Key k_, Q c_) : e(e_), k(std::move(k_)), c(std::move(c_)) {}
        Term(const Term&) = default;
        Term(Term&& o) noexcept : e(o.e), k(std::move(o.k)), c(std::move(o.c)) {}
        Term& operator=(const Term&) = default;
        Term& operator=(Term&& o) noexcept {
            e = o.e;
            k = std::move(o.k);
            c.swap(o.c);
            return *this;
        }
        bool operator==(const Term& o) const { return e == o.e && k == o.k && c == o.c; }
    };

    explicit Laurent(int arity = 2, int nvars = 1, long order = 0) : arity_(arity), nvars_(nvars), order_(order) {
        if (nvars < 0 || nvars > 3) throw std::invalid_argument("at most three formal variables");
    }
    Laurent(int arity, int nvars, long order, std::vector<Term> terms) : Laurent(arity, nvars, order) {
        terms_ = std::move(terms);
        normalize();
    }
    /// Single coefficient e^{exp} t.
    static Laurent monomial(const Tensor& t, Exp exp, int nvars = 1, long order = 0) {
        Laurent r(t.arity(), nvars, order);
        for (const auto& [k, c] : t.terms()) r.terms_.push_back({exp, k, c});
        r.normalize();
        return r;
    }

    int arity() const { return arity_; }
    int nvars() const { return nvars_; }
    long order() const { return order_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    bool operator==(const Laurent& o) const {
        return arity_ == o.arity_ && nvars_ == o.nvars_ && order_ == o.order_ && terms_ == o.terms_;
    }

    std::vector<Exp> exponents() const {
        std::vector<Exp> out;
        for (const auto& t : terms_)
            if (out.empty() || out.back() != t.e) out.push_back(t.e);
        return out;
    }
    Tensor coeff(Exp e) const {
        for (int i = 0; i < 3; ++i) e[i] = reduce_mod(e[i], order_);
        std::vector<Tensor::Term> out;
        auto it = std::lower_bound(terms_.begin(), terms_.end(), e,
                                   [](const Term& t, const Exp& x) { return t.e < x; });
        for (; it != terms_.end() && it->e == e; ++it) out.emplace_back(it->k, it->c);
        return Tensor(arity_, std::move(out));
    }
    Tensor coeff(long n) const { return coeff(Exp{n, 0, 0}); }
    /// Coefficients grouped by exponent.
    std::vector<std::pair<Exp, Tensor>> coeffs() const {
        std::vector<std::pair<Exp, Tensor>> out;
        for (std::size_t i = 0; i < terms_.size();) {
            std::size_t j = i;
            std::vector<Tensor::Term> t;
            while (j < terms_.size() && terms_[j].e == terms_[i].e) {
                t.emplace_back(terms_[j].k, terms_[j].c);
                ++j;
            }
            out.emplace_back(terms_[i].e, Tensor(arity_, std::move(t)));
            i = j;
        }
        return out;
    }

    Laurent operator+(const Laurent& o) const {
        compatible(o);
        Laurent r = *this;
        r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
        r.normalize();
        return r;
    }
    Laurent operator-() const {
        Laurent r = *this;
        for (auto& t : r.terms_) t.c = -t.c;
        return r;
    }
    Laurent operator-(const Laurent& o) const { return *this + (-o); }
    Laurent operator*(const Q& s) const {
        if (qzero(s)) return Laurent(arity_, nvars_, order_);
        Laurent r = *this;
        for (auto& t : r.terms_) t.c *= s;
        return r;
    }
    Laurent& operator+=(const Laurent& o) { return *this = *this + o; }
    Laurent& operator-=(const Laurent& o) { return *this = *this - o; }

    /// Applies f to every coefficient tensor; the exponent may be remapped too.
    template <class F>
    Laurent map(int out_arity, int out_nvars, F f) const {
        Laurent r(out_arity, out_nvars, order_);
        for (const auto& [e, t] : coeffs()) {
            auto [ne, nt] = f(e, t);
            for (const auto& [k, c] : nt.terms()) r.terms_.push_back({ne, k, c});
        }
        r.normalize();
        return r;
    }

    std::vector<Term>& raw() { return terms_; }
    void normalize() {
        for (auto& t : terms_)
            for (int i = 0; i < 3; ++i) t.e[i] = reduce_mod(t.e[i], order_);
        KeyLess kl;
        std::sort(terms_.begin(), terms_.end(), [&](const Term& a, const Term& b) {
            if (a.e != b.e) return a.e < b.e;
            return kl(a.k, b.k);
        });
        std::size_t out = 0;
        for (std::size_t i = 0; i < terms_.size();) {
            std::size_t j = i + 1;
            Q sum = terms_[i].c;
            while (j < terms_.size() && terms_[j].e == terms_[i].e && terms_[j].k == terms_[i].k)
                sum += terms_[j++].c;
            if (!qzero(sum)) {
                if (out != i) {
                    terms_[out].e = terms_[i].e;
                    terms_[out].k = std::move(terms_[i].k);
                }
                terms_[out].c = sum;
                ++out;
            }
            i = j;
        }
        terms_.resize(out);
    }

private:
    void compatible(const Laurent& o) const {
        if (o.arity_ != arity_ || o.order_ != order_)
            throw std::invalid_argument("incompatible Laurent tensors");
    }

    int arity_, nvars_;
    long order_;
    std::vector<Term> terms_;
};

inline Laurent operator*(const Q& s, const Laurent& l) { return l * s; }

/// Collects raw terms and normalizes once.
class LaurentAcc {
public:
    LaurentAcc(int arity, int nvars, long order) : arity_(arity), nvars_(nvars), order_(order) {}
    void add(const Exp& e, Key k, Q c) { terms_.emplace_back(e, std::move(k), std::move(c)); }
    void add(const Laurent& l) { terms_.insert(terms_.end(), l.terms().begin(), l.terms().end()); }
    void add(const Laurent& l, const Q& s) {
        for (const auto& t : l.terms()) terms_.emplace_back(t.e, t.k, Q(t.c * s));
    }
    void reserve(std::size_t n) { terms_.reserve(n); }
    Laurent finish() { return Laurent(arity_, nvars_, order_, std::move(terms_)); }

private:
    int arity_, nvars_;
    long order_;
    std::vector<Laurent::Term> terms_;
};

/// Slot-wise S^m on every coefficient.
inline Laurent shift_laurent(const Laurent& l, long m) {
    std::vector<Laurent::Term> out;
    for (const auto& t : l.terms()) {
        auto s = slots_of(t.k, l.arity());
        KeyBuilder b;
        for (int i = 0; i < l.arity(); ++i) b.slot().put_shifted(s[i], m, l.order());
        out.push_back({t.e, b.take(), t.c});
    }
    return Laurent(l.arity(), l.nvars(), l.order(), std::move(out));
}

inline Laurent sigma_laurent(const Laurent& l) {
    return l.map(l.arity(), l.nvars(), [](const Exp& e, const Tensor& t) { return std::pair{e, sigma(t)}; });
}

/**
 * Matrix difference operator with V⊗V coefficients. Entry (i, j) is Σ_n a_n S^n, stored as a
 * one-variable Laurent tensor whose variable is read as the operator S. symbol() returns the
 * same data read as a formal variable z; operator semantics only apply through this class.
 */
class DiffOpMatrix {
public:
    DiffOpMatrix(int size = 1, long order = 0) : size_(size), order_(order) {
        entries_.assign(std::size_t(size * size), Laurent(2, 1, order));
    }
    static DiffOpMatrix from_symbols(int size, long order, std::vector<Laurent> entries) {
        DiffOpMatrix m(size, order);
        if (int(entries.size()) != size * size) throw std::invalid_argument("entry count mismatch");
        for (auto& e : entries)
            if (e.arity() != 2 || e.order() != order) throw std::invalid_argument("bad operator entry");
        m.entries_ = std::move(entries);
        return m;
    }
    static DiffOpMatrix identity(int size, long order = 0) {
        DiffOpMatrix m(size, order);
        for (int i = 0; i < size; ++i) m.at(i, i) = Laurent::monomial(Tensor::unit(2), Exp{0, 0, 0}, 1, order);
        return m;
    }

    int size() const { return size_; }
    long order() const { return order_; }
    const Laurent& at(int i, int j) const { return entries_[std::size_t(i * size_ + j)]; }
    Laurent& at(int i, int j) { return entries_[std::size_t(i * size_ + j)]; }
    const std::vector<Laurent>& symbols() const { return entries_; }
    bool operator==(const DiffOpMatrix&) const = default;

    DiffOpMatrix operator+(const DiffOpMatrix& o) const {
        check(o);
        DiffOpMatrix r = *this;
        for (std::size_t i = 0; i < entries_.size(); ++i) r.entries_[i] += o.entries_[i];
        return r;
    }
    DiffOpMatrix operator-() const {
        DiffOpMatrix r = *this;
        for (auto& e : r.entries_) e = -e;
        return r;
    }
    DiffOpMatrix operator-(const DiffOpMatrix& o) const { return *this + (-o); }
    void check(const DiffOpMatrix& o) const {
        if (o.size_ != size_ || o.order_ != order_) throw std::invalid_argument("operator size mismatch");
    }

private:
    int size_;
    long order_;
    std::vector<Laurent> entries_;
};

/// (a S^m)•(b S^n) = (a • S^m b) S^{m+n} on single entries.
inline Laurent compose_entry(const Laurent& A, const Laurent& B) {
    LaurentAcc acc(2, 1, A.order());
    for (const auto& ta : A.terms()) {
        auto a = slots_of(ta.k, 2);
        for (const auto& tb : B.terms()) {
            auto b = slots_of(tb.k, 2);
            long m = ta.e[0];
            KeyBuilder kb;
            kb.slot().put(a[0]).put_shifted(b[0], m, A.order());
            kb.slot().put_shifted(b[1], m, A.order()).put(a[1]);
            acc.add(Exp{m + tb.e[0], 0, 0}, kb.take(), ta.c * tb.c);
        }
    }
    return acc.finish();
}

inline DiffOpMatrix compose(const DiffOpMatrix& A, const DiffOpMatrix& B) {
    A.check(B);
    int l = A.size();
    DiffOpMatrix r(l, A.order());
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
            Laurent s(2, 1, A.order());
            for (int k = 0; k < l; ++k) s += compose_entry(A.at(i, k), B.at(k, j));
            r.at(i, j) = s;
        }
    return r;
}

/// (a_n S^n)* = S^{-n}(a_n^σ) S^{-n}.
inline Laurent adjoint_entry(const Laurent& A) {
    std::vector<Laurent::Term> out;
    for (const auto& t : A.terms()) {
        auto s = slots_of(t.k, 2);
        long n = t.e[0];
        KeyBuilder kb;
        kb.slot().put_shifted(s[1], -n, A.order()).slot().put_shifted(s[0], -n, A.order());
        out.push_back({Exp{-n, 0, 0}, kb.take(), t.c});
    }
    return Laurent(2, 1, A.order(), std::move(out));
}

inline DiffOpMatrix adjoint(const DiffOpMatrix& A) {
    int l = A.size();
    DiffOpMatrix r(l, A.order());
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) r.at(i, j) = adjoint_entry(A.at(j, i));
    return r;
}

/// (HF)_i = Σ_{j,n} H'_{ij;n} S^n(F_j) H''_{ij;n}.
inline std::vector<Poly> apply_to_vector(const DiffOpMatrix& H, const std::vector<Poly>& F) {
    int l = H.size();
    if (int(F.size()) != l) throw std::invalid_argument("vector length mismatch");
    std::vector<Poly> out(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i) {
        std::vector<Poly::Term> acc;
        for (int j = 0; j < l; ++j)
            for (const auto& t : H.at(i, j).terms()) {
                auto s = slots_of(t.k, 2);
                for (const auto& [w, c] : F[std::size_t(j)].terms()) {
                    Word r(s[0].begin(), s[0].end());
                    for (Letter x : w) r.push_back(shift_letter(x, t.e[0], H.order()));
                    r.insert(r.end(), s[1].begin(), s[1].end());
                    acc.emplace_back(std::move(r), t.c * c);
                }
            }
        out[std::size_t(i)] = Poly(std::move(acc));
    }
    return out;
}

/**
 * Deferred shift substitution: every x^n in P (x is variable xvar) becomes target^n, and S^n(b)
 * is inserted into the coefficient with the given mode and slot index.
 */
inline Laurent subst_shift(const Laurent& P, int xvar, int target, const Poly& b, int slot, Insert mode) {
    if (xvar < 0 || xvar >= P.nvars() || target < 0 || target >= 3 || target == xvar)
        throw std::invalid_argument("invalid substitution variables");
    bool grows = mode == Insert::TensorLeft || mode == Insert::TensorRight;
    int out_arity = grows ? P.arity() + 1 : P.arity();
    LaurentAcc acc(out_arity, P.nvars() - 1 > target ? P.nvars() - 1 : target + 1, P.order());
    for (const auto& [e, t] : P.coeffs()) {
        long n = e[std::size_t(xvar)];
        Exp ne = e;
        ne[std::size_t(xvar)] = 0;
        ne[std::size_t(target)] += n;
        Tensor ins = insert(t, slot, shift(b, n, P.order()), mode);
        for (const auto& [k, c] : ins.terms()) acc.add(ne, k, c);
    }
    return acc.finish();
}

}  // namespace dmpva
