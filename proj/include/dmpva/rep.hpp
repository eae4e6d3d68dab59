#pragma once

// Representation algebras V_N: matrix entries of generators, the induced commutative
// multiplicative λ-bracket, and its axiom checks.

#include <map>

#include "bracket.hpp"

namespace dmpva {

/// Commutative generator u_{var,shift,ab}, indices a, b zero-based.
using CGen = std::uint64_t;

inline CGen make_cgen(int var, long shift, int a, int b) {
    auto biased = std::uint64_t(std::uint32_t(std::int32_t(shift)) ^ 0x80000000u);
    return (std::uint64_t(var + 1) << 48) | (biased << 16) | (std::uint64_t(a) << 8) | std::uint64_t(b);
}
inline int cvar(CGen g) { return int(g >> 48) - 1; }
inline long cshift(CGen g) { return long(std::int32_t(std::uint32_t((g >> 16) & 0xffffffffu) ^ 0x80000000u)); }
inline int crow(CGen g) { return int((g >> 8) & 0xff); }
inline int ccol(CGen g) { return int(g & 0xff); }
inline CGen shift_cgen(CGen g, long m, long order) {
    return make_cgen(cvar(g), reduce_mod(cshift(g) + m, order), crow(g), ccol(g));
}

/// Sorted multiset of generators.
using Mono = boost::container::small_vector<CGen, 8>;

struct MonoLess {
    bool operator()(const Mono& a, const Mono& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
};

class CommPoly {
public:
    using Term = std::pair<Mono, Q>;

    CommPoly() = default;
    explicit CommPoly(std::vector<Term> t) : terms_(std::move(t)) {
        for (auto& [m, c] : terms_) std::sort(m.begin(), m.end());
        normalize_terms(terms_, MonoLess{});
    }
    static CommPoly constant(const Q& c) { return CommPoly({{Mono{}, c}}); }
    static CommPoly gen(CGen g) { return CommPoly({{Mono{g}, Q(1)}}); }

    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool operator==(const CommPoly&) const = default;

    CommPoly operator+(const CommPoly& o) const {
        std::vector<Term> t = terms_;
        t.insert(t.end(), o.terms_.begin(), o.terms_.end());
        return CommPoly(std::move(t));
    }
    CommPoly operator-() const {
        CommPoly r = *this;
        for (auto& [m, c] : r.terms_) c = -c;
        return r;
    }
    CommPoly operator-(const CommPoly& o) const { return *this + (-o); }
    CommPoly operator*(const Q& s) const {
        if (qzero(s)) return {};
        CommPoly r = *this;
        for (auto& [m, c] : r.terms_) c *= s;
        return r;
    }
    CommPoly operator*(const CommPoly& o) const {
        std::vector<Term> t;
        t.reserve(terms_.size() * o.terms_.size());
        for (const auto& [a, ca] : terms_)
            for (const auto& [b, cb] : o.terms_) {
                Mono m = a;
                m.insert(m.end(), b.begin(), b.end());
                t.emplace_back(std::move(m), ca * cb);
            }
        return CommPoly(std::move(t));
    }
    CommPoly& operator+=(const CommPoly& o) { return *this = *this + o; }
    CommPoly& operator-=(const CommPoly& o) { return *this = *this - o; }

private:
    std::vector<Term> terms_;
};

inline CommPoly shift(const CommPoly& p, long m, long order = 0) {
    std::vector<CommPoly::Term> t;
    for (const auto& [mono, c] : p.terms()) {
        Mono r = mono;
        for (auto& g : r) g = shift_cgen(g, m, order);
        t.emplace_back(std::move(r), c);
    }
    return CommPoly(std::move(t));
}

/// ∂p/∂g.
inline CommPoly cpartial(const CommPoly& p, CGen g) {
    std::vector<CommPoly::Term> t;
    for (const auto& [mono, c] : p.terms()) {
        auto it = std::find(mono.begin(), mono.end(), g);
        if (it == mono.end()) continue;
        long mult = std::count(mono.begin(), mono.end(), g);
        Mono r = mono;
        r.erase(r.begin() + (it - mono.begin()));
        t.emplace_back(std::move(r), c * Q(mult));
    }
    return CommPoly(std::move(t));
}

inline std::set<CGen> csupport(const CommPoly& p) {
    std::set<CGen> s;
    for (const auto& [m, c] : p.terms()) s.insert(m.begin(), m.end());
    return s;
}

/// Laurent polynomial in up to two variables with CommPoly coefficients.
using CommLaurent = std::map<Exp, CommPoly>;

inline void cl_add(CommLaurent& L, const Exp& e, const CommPoly& p) {
    if (p.is_zero()) return;
    auto it = L.find(e);
    if (it == L.end()) {
        L.emplace(e, p);
        return;
    }
    it->second += p;
    if (it->second.is_zero()) L.erase(it);
}

inline CommLaurent cl_reduce(CommLaurent L, long order) {
    if (order == 0) return L;
    CommLaurent r;
    for (auto& [e, p] : L) {
        Exp ne = e;
        for (auto& x : ne) x = reduce_mod(x, order);
        cl_add(r, ne, p);
    }
    return r;
}

/// N×N matrix of CommPoly, row-major.
struct CommMatrix {
    int N = 1;
    std::vector<CommPoly> a;
    const CommPoly& operator()(int i, int j) const { return a[std::size_t(i * N + j)]; }
    CommPoly& operator()(int i, int j) { return a[std::size_t(i * N + j)]; }
    bool operator==(const CommMatrix&) const = default;
};

namespace detail {

/// Entry (i, j) of X(w) for a span of letters: sum over index paths.
inline void word_entry(Span w, int N, int i, int j, Mono& cur, const Q& c, std::vector<CommPoly::Term>& out) {
    if (w.empty()) {
        if (i == j) out.emplace_back(cur, c);
        return;
    }
    Letter l = w[0];
    if (w.size() == 1) {
        cur.push_back(make_cgen(var_of(l), shift_of(l), i, j));
        out.emplace_back(cur, c);
        cur.pop_back();
        return;
    }
    for (int k = 0; k < N; ++k) {
        cur.push_back(make_cgen(var_of(l), shift_of(l), i, k));
        word_entry(w.subspan(1), N, k, j, cur, c, out);
        cur.pop_back();
    }
}

}  // namespace detail

inline CommPoly rep_entry(Span w, int N, int i, int j, const Q& c = 1) {
    std::vector<CommPoly::Term> out;
    Mono cur;
    detail::word_entry(w, N, i, j, cur, c, out);
    return CommPoly(std::move(out));
}

/// X(f) with (ab)_{ij} = Σ_k a_{ik} b_{kj}.
inline CommMatrix rep_matrix(const Poly& f, int N) {
    if (N < 1 || N > 255) throw std::invalid_argument("N must lie in 1..255");
    CommMatrix M{N, std::vector<CommPoly>(std::size_t(N * N))};
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            std::vector<CommPoly::Term> out;
            for (const auto& [w, c] : f.terms()) {
                Mono cur;
                detail::word_entry(as_span(w), N, i, j, cur, c, out);
            }
            M(i, j) = CommPoly(std::move(out));
        }
    return M;
}

/// Σ over terms of Π_s X(slot s)_{idx[s]}.
inline CommPoly rep_tensor(const Tensor& t, int N, const std::vector<std::pair<int, int>>& idx) {
    CommPoly total;
    std::vector<CommPoly::Term> acc;
    for (const auto& [k, c] : t.terms()) {
        auto s = slots_of(k, t.arity());
        CommPoly prod = CommPoly::constant(c);
        for (int i = 0; i < t.arity(); ++i) {
            prod = prod * rep_entry(s[std::size_t(i)], N, idx[std::size_t(i)].first, idx[std::size_t(i)].second);
            if (prod.is_zero()) break;
        }
        acc.insert(acc.end(), prod.terms().begin(), prod.terms().end());
    }
    return CommPoly(std::move(acc));
}

/// Induced bracket on V_N, stored on generator pairs at shift 0.
class CommBracketSpec {
public:
    CommBracketSpec(int nvars, int N, long order) : l_(nvars), N_(N), order_(order) {
        G_.assign(std::size_t(gens() * gens()), CommLaurent{});
    }
    int nvars() const { return l_; }
    int N() const { return N_; }
    long order() const { return order_; }
    int gens() const { return l_ * N_ * N_; }
    /// Generator with flat index g = (var·N + a)·N + b at shift 0.
    CGen gen_of(int g) const { return make_cgen(g / (N_ * N_), 0, g / N_ % N_, g % N_); }
    int index_of(CGen g) const { return (cvar(g) * N_ + crow(g)) * N_ + ccol(g); }
    const CommLaurent& at(int g1, int g2) const { return G_[std::size_t(g1 * gens() + g2)]; }
    CommLaurent& at(int g1, int g2) { return G_[std::size_t(g1 * gens() + g2)]; }
    bool operator==(const CommBracketSpec&) const = default;

private:
    int l_, N_;
    long order_;
    std::vector<CommLaurent> G_;
};

/// {u_{i,ab} λ u_{j,cd}} = Σ_n λ^n Σ X(x)_{cb} X(y)_{ad} over the terms x⊗y of {{u_i λ u_j}}_n.
inline CommBracketSpec induce_bracket(const BracketSpec& s, int N) {
    if (N < 1 || N > 255) throw std::invalid_argument("N must lie in 1..255");
    CommBracketSpec c(s.size(), N, s.order());
    for (int g1 = 0; g1 < c.gens(); ++g1)
        for (int g2 = 0; g2 < c.gens(); ++g2) {
            CGen x = c.gen_of(g1), y = c.gen_of(g2);
            int a = crow(x), b = ccol(x), cc = crow(y), d = ccol(y);
            CommLaurent L;
            for (const auto& [e, t] : s.gen(cvar(x), cvar(y)).coeffs())
                cl_add(L, e, rep_tensor(t, N, {{cc, b}, {a, d}}));
            c.at(g1, g2) = std::move(L);
        }
    return c;
}

/// {x λ y} for arbitrary shifted generators: λ^{n−m} S^n G(λ).
inline CommLaurent cgen_bracket(const CommBracketSpec& c, CGen x, CGen y) {
    long m = cshift(x), n = cshift(y);
    CommLaurent out;
    const CommLaurent& G = c.at(c.index_of(make_cgen(cvar(x), 0, crow(x), ccol(x))),
                                c.index_of(make_cgen(cvar(y), 0, crow(y), ccol(y))));
    for (const auto& [e, p] : G) cl_add(out, Exp{e[0] + n - m, 0, 0}, shift(p, n, c.order()));
    return cl_reduce(std::move(out), c.order());
}

/// Commutative master formula {f λ g} = Σ_x Σ_k λ^k P^x_k S^k(∂f/∂x), P^x = Σ_y ∂g/∂y {x λ y}.
inline CommLaurent ceval(const CommBracketSpec& c, const CommPoly& f, const CommPoly& g) {
    CommLaurent out;
    auto sg = csupport(g);
    for (CGen x : csupport(f)) {
        CommPoly df = cpartial(f, x);
        CommLaurent P;
        for (CGen y : sg) {
            CommPoly dg = cpartial(g, y);
            for (const auto& [e, p] : cgen_bracket(c, x, y)) cl_add(P, e, dg * p);
        }
        for (const auto& [e, p] : P) cl_add(out, e, p * shift(df, e[0], c.order()));
    }
    return cl_reduce(std::move(out), c.order());
}

/// {a λ {b μ c}} − {b μ {a λ c}} − {{a λ b}_{λμ} c}.
inline CommLaurent ctriple(const CommBracketSpec& s, const CommPoly& a, const CommPoly& b, const CommPoly& c) {
    CommLaurent out;
    for (const auto& [q, C] : ceval(s, b, c))
        for (const auto& [p, R] : ceval(s, a, C)) cl_add(out, Exp{p[0], q[0], 0}, R);
    for (const auto& [p, C] : ceval(s, a, c))
        for (const auto& [q, R] : ceval(s, b, C)) cl_add(out, Exp{p[0], q[0], 0}, -R);
    for (const auto& [p, B] : ceval(s, a, b))
        for (const auto& [r, R] : ceval(s, B, c)) cl_add(out, Exp{p[0] + r[0], r[0], 0}, -R);
    return cl_reduce(std::move(out), s.order());
}

struct CommCheckResult {
    bool skew = true;
    bool jacobi = true;
    std::vector<std::pair<int, int>> skew_failures;
    std::vector<std::array<int, 3>> jacobi_failures;
    bool pass() const { return skew && jacobi; }
};

/// Skewsymmetry {a λ b} = −{b (λS)^{-1} a} on generator pairs, Jacobi on generator triples.
inline CommCheckResult check_commutative_mpva(const CommBracketSpec& c) {
    CommCheckResult r;
    int G = c.gens();
    for (int a = 0; a < G; ++a)
        for (int b = 0; b < G; ++b) {
            CommLaurent partner;
            for (const auto& [e, p] : c.at(b, a)) cl_add(partner, Exp{-e[0], 0, 0}, -shift(p, -e[0], c.order()));
            if (cl_reduce(std::move(partner), c.order()) != c.at(a, b)) {
                r.skew = false;
                r.skew_failures.emplace_back(a, b);
            }
        }
    std::size_t n = std::size_t(G) * std::size_t(G) * std::size_t(G);
    auto zero = parallel_map<char>(n, [&](std::size_t idx) -> char {
        int i = int(idx / std::size_t(G * G)), j = int(idx / std::size_t(G) % std::size_t(G)), k = int(idx % std::size_t(G));
        return ctriple(c, CommPoly::gen(c.gen_of(i)), CommPoly::gen(c.gen_of(j)), CommPoly::gen(c.gen_of(k))).empty();
    });
    for (std::size_t idx = 0; idx < n; ++idx)
        if (!zero[idx]) {
            r.jacobi = false;
            r.jacobi_failures.push_back({int(idx / std::size_t(G * G)), int(idx / std::size_t(G) % std::size_t(G)), int(idx % std::size_t(G))});
        }
    return r;
}

/// Σ_i X(f)_ii modulo uniform shift: each monomial shifted to its least representative.
inline CommPoly trace_functional(const Poly& f, int N, long order = 0) {
    CommMatrix M = rep_matrix(f, N);
    std::vector<CommPoly::Term> acc;
    for (int i = 0; i < N; ++i)
        for (const auto& [m, c] : M(i, i).terms()) {
            Mono best;
            bool have = false;
            MonoLess less;
            std::vector<long> shifts;
            if (order == 0) {
                long lo = 0;
                for (std::size_t t = 0; t < m.size(); ++t) lo = t == 0 ? cshift(m[t]) : std::min(lo, cshift(m[t]));
                shifts.push_back(-lo);
            } else {
                for (long s = 0; s < order; ++s) shifts.push_back(s);
            }
            for (long s : shifts) {
                Mono cand = m;
                for (auto& g : cand) g = shift_cgen(g, s, order);
                std::sort(cand.begin(), cand.end());
                if (!have || less(cand, best)) best = cand, have = true;
            }
            acc.emplace_back(std::move(best), c);
        }
    return CommPoly(std::move(acc));
}

/// Lattice data represented on V_N: {S^n u_{i,ab}, u_{j,cd}} for every stored (i, j, n).
inline std::map<std::tuple<int, int, long>, CommPoly> represent_lattice(const LatticeDPSpec& l, int N) {
    std::map<std::tuple<int, int, long>, CommPoly> out;
    CommBracketSpec shape(l.sig.size(), N, l.sig.order);
    for (const auto& [key, t] : l.data) {
        auto [i, j, n] = key;
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                for (int c = 0; c < N; ++c)
                    for (int d = 0; d < N; ++d) {
                        CommPoly p = rep_tensor(t, N, {{c, b}, {a, d}});
                        if (p.is_zero()) continue;
                        int g1 = shape.index_of(make_cgen(i, 0, a, b)), g2 = shape.index_of(make_cgen(j, 0, c, d));
                        out[{g1, g2, n}] = p;
                    }
    }
    return out;
}

/// λ^n coefficients of the induced generator brackets, in the same shape as represent_lattice.
inline std::map<std::tuple<int, int, long>, CommPoly> comm_residues(const CommBracketSpec& c) {
    std::map<std::tuple<int, int, long>, CommPoly> out;
    for (int g1 = 0; g1 < c.gens(); ++g1)
        for (int g2 = 0; g2 < c.gens(); ++g2)
            for (const auto& [e, p] : c.at(g1, g2)) out[{g1, g2, e[0]}] = p;
    return out;
}

/// V⊗3-valued Laurent tensor read through indices ((i1,j1),(i2,j2),(i3,j3)).
inline CommLaurent rep_laurent3(const Laurent& L, int N, const std::vector<std::pair<int, int>>& idx) {
    CommLaurent out;
    for (const auto& [e, t] : L.coeffs()) cl_add(out, e, rep_tensor(t, N, idx));
    return out;
}

inline std::string cgen_str(CGen g, const Signature& sig) {
    std::string s = sig.names[std::size_t(cvar(g))];
    s += "_" + std::to_string(crow(g) + 1) + std::to_string(ccol(g) + 1);
    if (cshift(g) != 0) s += "[" + std::to_string(cshift(g)) + "]";
    return s;
}

}  // namespace dmpva
