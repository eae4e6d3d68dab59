#pragma once

// Double multiplicative λ-brackets: Master Formula, axiom checks, lattice correspondence,
// and the rank one and rank two classification conditions.

#include <optional>
#include <tuple>

#include "diffop.hpp"
#include "parallel.hpp"

namespace dmpva {

/**
 * Generator data of a λ-bracket. gen(a, b) = {{u_a λ u_b}}; the operator matrix H has
 * H_ij = gen(j, i).
 */
class BracketSpec {
public:
    BracketSpec() = default;
    explicit BracketSpec(Signature sig) : sig_(std::move(sig)) {
        G_.assign(std::size_t(sig_.size() * sig_.size()), Laurent(2, 1, sig_.order));
    }
    static BracketSpec from_H(Signature sig, const DiffOpMatrix& H) {
        BracketSpec s(std::move(sig));
        if (H.size() != s.size() || H.order() != s.order()) throw std::invalid_argument("H does not match signature");
        for (int i = 0; i < s.size(); ++i)
            for (int j = 0; j < s.size(); ++j) s.set(j, i, H.at(i, j));
        return s;
    }

    const Signature& signature() const { return sig_; }
    int size() const { return sig_.size(); }
    long order() const { return sig_.order; }
    const Laurent& gen(int a, int b) const { return G_[std::size_t(a * size() + b)]; }
    void set(int a, int b, const Laurent& l) {
        if (l.arity() != 2 || l.order() != order()) throw std::invalid_argument("generator bracket must be V⊗V valued");
        G_[std::size_t(a * size() + b)] = Laurent(2, 1, order(), l.terms());
    }
    DiffOpMatrix H() const {
        DiffOpMatrix m(size(), order());
        for (int i = 0; i < size(); ++i)
            for (int j = 0; j < size(); ++j) m.at(i, j) = gen(j, i);
        return m;
    }
    bool operator==(const BracketSpec&) const = default;

private:
    Signature sig_;
    std::vector<Laurent> G_;
};

namespace detail {

/// {{u_i λ g}} through the left Leibniz rule and sesquilinearity.
inline void left_gen_into(const BracketSpec& s, int i, const Poly& g, LaurentAcc& acc) {
    long e = s.order();
    for (const auto& [w, c] : g.terms())
        for (std::size_t t = 0; t < w.size(); ++t) {
            int j = var_of(w[t]);
            long n = shift_of(w[t]);
            Span pre(w.data(), t), post(w.data() + t + 1, w.size() - t - 1);
            for (const auto& h : s.gen(i, j).terms()) {
                auto xy = slots_of(h.k, 2);
                KeyBuilder kb;
                kb.slot().put(pre).put_shifted(xy[0], n, e);
                kb.slot().put_shifted(xy[1], n, e).put(post);
                acc.add(Exp{n + h.e[0], 0, 0}, kb.take(), c * h.c);
            }
        }
}

}  // namespace detail

/// {{f λ g}} by the Master Formula.
inline Laurent eval_bracket(const BracketSpec& s, const Poly& f, const Poly& g) {
    long e = s.order();
    int l = s.size();
    std::vector<std::optional<Laurent>> left(static_cast<std::size_t>(l));
    LaurentAcc acc(2, 1, e);
    for (const auto& [w, c] : f.terms())
        for (std::size_t t = 0; t < w.size(); ++t) {
            int i = var_of(w[t]);
            long m = shift_of(w[t]);
            if (i < 0 || i >= l) throw std::invalid_argument("variable outside signature");
            auto& Qi = left[std::size_t(i)];
            if (!Qi) {
                LaurentAcc a(2, 1, e);
                detail::left_gen_into(s, i, g, a);
                Qi = a.finish();
            }
            Span w1(w.data(), t), w2(w.data() + t + 1, w.size() - t - 1);
            for (const auto& p : Qi->terms()) {
                long k = reduce_mod(p.e[0] - m, e);
                auto pp = slots_of(p.k, 2);
                KeyBuilder kb;
                kb.slot().put(pp[0]).put_shifted(w2, k, e);
                kb.slot().put_shifted(w1, k, e).put(pp[1]);
                acc.add(Exp{k, 0, 0}, kb.take(), c * p.c);
            }
        }
    return acc.finish();
}

namespace detail {

/// Memoized {{x λ word}} or {{word λ x}} for a fixed polynomial x.
class WordBracketCache {
public:
    WordBracketCache(const BracketSpec& s, const Poly& fixed, bool fixed_first)
        : s_(s), fixed_(fixed), first_(fixed_first) {}
    const Laurent& get(Span word) {
        Word w(word.begin(), word.end());
        auto it = cache_.find(w);
        if (it != cache_.end()) return it->second;
        Poly p = Poly::word(w);
        Laurent v = first_ ? eval_bracket(s_, fixed_, p) : eval_bracket(s_, p, fixed_);
        return cache_.emplace(std::move(w), std::move(v)).first->second;
    }

private:
    const BracketSpec& s_;
    const Poly& fixed_;
    bool first_;
    std::map<Word, Laurent, WordLess> cache_;
};

}  // namespace detail

/// {{a λ X}}_L for X = Σ μ^q x⊗y: Σ λ^p μ^q {{a λ x}}⊗y. X is given in variable slot xv.
inline Laurent bracket_left_on(const BracketSpec& s, const Poly& a, const Laurent& X, int avar, int xvar) {
    detail::WordBracketCache cache(s, a, true);
    LaurentAcc acc(3, 2, s.order());
    for (const auto& t : X.terms()) {
        auto xy = slots_of(t.k, 2);
        const Laurent& R = cache.get(xy[0]);
        for (const auto& r : R.terms()) {
            auto rr = slots_of(r.k, 2);
            Exp ex{0, 0, 0};
            ex[std::size_t(xvar)] = t.e[0];
            ex[std::size_t(avar)] += r.e[0];
            KeyBuilder kb;
            kb.slot().put(rr[0]).slot().put(rr[1]).slot().put(xy[1]);
            acc.add(ex, kb.take(), t.c * r.c);
        }
    }
    return acc.finish();
}

/// {{a λ X}}_R for X = Σ μ^q x⊗y: Σ x⊗{{a λ y}}.
inline Laurent bracket_right_on(const BracketSpec& s, const Poly& a, const Laurent& X, int avar, int xvar) {
    detail::WordBracketCache cache(s, a, true);
    LaurentAcc acc(3, 2, s.order());
    for (const auto& t : X.terms()) {
        auto xy = slots_of(t.k, 2);
        const Laurent& R = cache.get(xy[1]);
        for (const auto& r : R.terms()) {
            auto rr = slots_of(r.k, 2);
            Exp ex{0, 0, 0};
            ex[std::size_t(xvar)] = t.e[0];
            ex[std::size_t(avar)] += r.e[0];
            KeyBuilder kb;
            kb.slot().put(xy[0]).slot().put(rr[0]).slot().put(rr[1]);
            acc.add(ex, kb.take(), t.c * r.c);
        }
    }
    return acc.finish();
}

/**
 * {{A_{λμ} c}}_L for A = Σ λ^p μ^q x⊗y (two variables):
 * Σ λ^p μ^q (λμ)^m R'_m ⊗ S^m(y) ⊗ R''_m where {{x ν c}} = Σ ν^m R_m.
 */
inline Laurent bracket_first_on(const BracketSpec& s, const Laurent& A, const Poly& c) {
    detail::WordBracketCache cache(s, c, false);
    long e = s.order();
    LaurentAcc acc(3, 2, e);
    for (const auto& t : A.terms()) {
        auto xy = slots_of(t.k, 2);
        const Laurent& R = cache.get(xy[0]);
        for (const auto& r : R.terms()) {
            long m = r.e[0];
            auto rr = slots_of(r.k, 2);
            KeyBuilder kb;
            kb.slot().put(rr[0]).slot().put_shifted(xy[1], m, e).slot().put(rr[1]);
            acc.add(Exp{t.e[0] + m, t.e[1] + m, 0}, kb.take(), t.c * r.c);
        }
    }
    return acc.finish();
}

/// Embeds a one-variable Laurent into two variables, its variable becoming slot v.
inline Laurent lift_var(const Laurent& L, int v) {
    std::vector<Laurent::Term> out;
    for (const auto& t : L.terms()) {
        Exp e{0, 0, 0};
        e[std::size_t(v)] = t.e[0];
        out.push_back({e, t.k, t.c});
    }
    return Laurent(L.arity(), 2, L.order(), std::move(out));
}

/// {{a λ b μ c}} = {{a λ {{b μ c}}}}_L − {{b μ {{a λ c}}}}_R − {{{{a λ b}}_{λμ} c}}_L.
inline Laurent triple_bracket(const BracketSpec& s, const Poly& a, const Poly& b, const Poly& c) {
    Laurent t1 = bracket_left_on(s, a, eval_bracket(s, b, c), 0, 1);
    Laurent t2 = bracket_right_on(s, b, eval_bracket(s, a, c), 1, 0);
    Laurent t3 = bracket_first_on(s, lift_var(eval_bracket(s, a, b), 0), c);
    LaurentAcc acc(3, 2, s.order());
    acc.add(t1);
    acc.add(t2, -1);
    acc.add(t3, -1);
    return acc.finish();
}

/// The bracket that skewsymmetry forces from gen(b, a): coefficient n is −σ S^n of coefficient −n.
inline Laurent skew_partner(const Laurent& Gba) {
    std::vector<Laurent::Term> out;
    for (const auto& t : Gba.terms()) {
        long n = -t.e[0];
        auto xy = slots_of(t.k, 2);
        KeyBuilder kb;
        kb.slot().put_shifted(xy[1], n, Gba.order()).slot().put_shifted(xy[0], n, Gba.order());
        out.push_back({Exp{n, 0, 0}, kb.take(), -t.c});
    }
    return Laurent(2, 1, Gba.order(), std::move(out));
}

struct SkewResult {
    bool pass = true;
    /// First failing (a, b) with the difference gen(a,b) − skew_partner(gen(b,a)).
    std::optional<std::tuple<int, int, Laurent>> witness;
};

inline SkewResult check_skew(const BracketSpec& s) {
    SkewResult r;
    for (int a = 0; a < s.size(); ++a)
        for (int b = 0; b < s.size(); ++b) {
            Laurent d = s.gen(a, b) - skew_partner(s.gen(b, a));
            if (!d.is_zero()) {
                r.pass = false;
                r.witness = std::tuple{a, b, d};
                return r;
            }
        }
    return r;
}

/// Fills gen(b, a) from gen(a, b) for a < b, so that the result is skew when each gen(a, a) is.
inline BracketSpec complete_skew(BracketSpec s) {
    for (int a = 0; a < s.size(); ++a)
        for (int b = a + 1; b < s.size(); ++b) s.set(b, a, skew_partner(s.gen(a, b)));
    return s;
}

struct JacobiFailure {
    int i, j, k;
    Laurent defect;
};

struct JacobiResult {
    bool pass = true;
    std::vector<JacobiFailure> failures;
};

/// Triple bracket on all generator triples at shift 0. Requires a skew spec.
inline JacobiResult check_jacobi(const BracketSpec& s) {
    if (!check_skew(s).pass) throw std::invalid_argument("check_jacobi requires a skewsymmetric bracket");
    int l = s.size();
    std::size_t n = std::size_t(l * l * l);
    auto defects = parallel_map<Laurent>(n, [&](std::size_t idx) {
        int i = int(idx) / (l * l), j = int(idx) / l % l, k = int(idx) % l;
        return triple_bracket(s, Poly::gen(i), Poly::gen(j), Poly::gen(k));
    });
    JacobiResult r;
    for (std::size_t idx = 0; idx < n; ++idx)
        if (!defects[idx].is_zero()) {
            r.pass = false;
            r.failures.push_back({int(idx) / (l * l), int(idx) / l % l, int(idx) % l, defects[idx]});
        }
    return r;
}

/// Fast yes/no Jacobi test stopping at the first nonzero defect; single threaded.
inline bool jacobi_holds(const BracketSpec& s) {
    int l = s.size();
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
            for (int k = 0; k < l; ++k)
                if (!triple_bracket(s, Poly::gen(i), Poly::gen(j), Poly::gen(k)).is_zero()) return false;
    return true;
}

// ---------------------------------------------------------------------------------------------
// Lattice double Poisson data

/// {{S^n u_i, u_j}} for finitely many (i, j, n).
struct LatticeDPSpec {
    Signature sig;
    std::map<std::tuple<int, int, long>, Tensor> data;
    bool operator==(const LatticeDPSpec&) const = default;
};

inline LatticeDPSpec residue_to_lattice(const BracketSpec& s) {
    LatticeDPSpec l{s.signature(), {}};
    for (int i = 0; i < s.size(); ++i)
        for (int j = 0; j < s.size(); ++j)
            for (const auto& [e, t] : s.gen(i, j).coeffs()) l.data.emplace(std::tuple{i, j, e[0]}, t);
    return l;
}

inline BracketSpec lattice_to_lambda(const LatticeDPSpec& l) {
    BracketSpec s(l.sig);
    std::vector<LaurentAcc> accs(std::size_t(s.size() * s.size()), LaurentAcc(2, 1, s.order()));
    for (const auto& [key, t] : l.data) {
        auto [i, j, n] = key;
        if (i < 0 || j < 0 || i >= s.size() || j >= s.size()) throw std::invalid_argument("lattice index out of range");
        if (l.sig.finite() && (n < 0 || n >= l.sig.order))
            throw std::invalid_argument("lattice shift must be reduced modulo the order");
        if (t.arity() != 2) throw std::invalid_argument("lattice values must be in V⊗V");
        for (const auto& [k, c] : t.terms()) accs[std::size_t(i * s.size() + j)].add(Exp{n, 0, 0}, k, c);
    }
    for (int i = 0; i < s.size(); ++i)
        for (int j = 0; j < s.size(); ++j) s.set(i, j, accs[std::size_t(i * s.size() + j)].finish());
    return s;
}

// ---------------------------------------------------------------------------------------------
// Rank one: {{u λ u}} = f λ^N − (λS)^{−N} f^σ

inline BracketSpec r1_spec(const Tensor& f, long N) {
    BracketSpec s(Signature({"u"}));
    Laurent fl = Laurent::monomial(f, Exp{N, 0, 0});
    s.set(0, 0, fl + skew_partner(fl));
    return s;
}

/// True iff f = c·(g•S^N g) for g = (αu+β)⊗(αu+β) and some rational c (f = 0 included).
inline bool check_class_r1(const Tensor& f, long N) {
    if (f.arity() != 2) throw std::invalid_argument("f must lie in V⊗V");
    Letter u0 = make_letter(0, 0), uN = make_letter(0, N);
    // First slot basis: u u_N, u, u_N, 1. Second slot basis: u_N u, u_N, u, 1.
    auto idx_first = [&](Span w) -> int {
        if (w.size() == 2 && w[0] == u0 && w[1] == uN) return 0;
        if (w.size() == 1 && w[0] == u0) return N == 0 ? -1 : 1;
        if (w.size() == 1 && w[0] == uN) return 2;
        if (w.empty()) return 3;
        return -1;
    };
    auto idx_second = [&](Span w) -> int {
        if (w.size() == 2 && w[0] == uN && w[1] == u0) return 0;
        if (w.size() == 1 && w[0] == uN) return 1;
        if (w.size() == 1 && w[0] == u0) return N == 0 ? -1 : 2;
        if (w.empty()) return 3;
        return -1;
    };
    if (N == 0) throw std::invalid_argument("N must be nonzero");
    Q M[4][4];
    for (const auto& [k, c] : f.terms()) {
        auto s = slots_of(k, 2);
        int x = idx_first(s[0]), y = idx_second(s[1]);
        if (x < 0 || y < 0) return false;
        M[x][y] = c;
    }
    int row = -1;
    for (int x = 0; x < 4 && row < 0; ++x)
        for (int y = 0; y < 4; ++y)
            if (!qzero(M[x][y])) {
                row = x;
                break;
            }
    if (row < 0) return true;
    Q w[4];
    Q scale;
    if (!qzero(M[row][0])) {
        for (int y = 0; y < 4; ++y) w[y] = M[row][y] / M[row][0];
        if (w[1] != w[2] || w[3] != w[1] * w[1]) return false;
        scale = M[0][0];
    } else {
        if (!qzero(M[row][1]) || !qzero(M[row][2])) return false;
        w[0] = 0, w[1] = 0, w[2] = 0, w[3] = 1;
        scale = M[3][3];
    }
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
            if (M[x][y] != scale * w[x] * w[y]) return false;
    return true;
}

// ---------------------------------------------------------------------------------------------
// Rank two: {{u λ u}} = {{v λ v}} = 0, {{u λ v}} = Σ_k g_k λ^k with
// g_k = Σ K^k_{abcd} v^a u_k^b ⊗ u_k^c v^d.

/// K^k_{abcd} stored at index 8a + 4b + 2c + d.
using R2Coeffs = std::map<long, std::array<Q, 16>>;

inline int r2_index(int a, int b, int c, int d) { return 8 * a + 4 * b + 2 * c + d; }

/// Signature (u, v) with u = variable 0, v = variable 1.
inline BracketSpec r2_spec(const R2Coeffs& K) {
    BracketSpec s(Signature({"u", "v"}));
    LaurentAcc acc(2, 1, 0);
    Letter v = make_letter(1, 0);
    for (const auto& [k, arr] : K) {
        Letter uk = make_letter(0, k);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                    for (int d = 0; d < 2; ++d) {
                        const Q& coef = arr[std::size_t(r2_index(a, b, c, d))];
                        if (qzero(coef)) continue;
                        KeyBuilder kb;
                        kb.slot();
                        if (a) kb.put(v);
                        if (b) kb.put(uk);
                        kb.slot();
                        if (c) kb.put(uk);
                        if (d) kb.put(v);
                        acc.add(Exp{k, 0, 0}, kb.take(), coef);
                    }
    }
    s.set(0, 1, acc.finish());
    return complete_skew(s);
}

/// Reads K back from a spec of the rank two shape; nullopt if {{u λ v}} has other monomials
/// or the diagonal brackets are nonzero.
inline std::optional<R2Coeffs> r2_coeffs(const BracketSpec& s) {
    if (s.size() != 2 || s.order() != 0) return std::nullopt;
    if (!s.gen(0, 0).is_zero() || !s.gen(1, 1).is_zero()) return std::nullopt;
    R2Coeffs K;
    Letter v = make_letter(1, 0);
    for (const auto& t : s.gen(0, 1).terms()) {
        long k = t.e[0];
        Letter uk = make_letter(0, k);
        auto sl = slots_of(t.k, 2);
        int a = 0, b = 0, c = 0, d = 0;
        std::size_t p = 0;
        if (p < sl[0].size() && sl[0][p] == v) a = 1, ++p;
        if (p < sl[0].size() && sl[0][p] == uk) b = 1, ++p;
        if (p != sl[0].size()) return std::nullopt;
        p = 0;
        if (p < sl[1].size() && sl[1][p] == uk) c = 1, ++p;
        if (p < sl[1].size() && sl[1][p] == v) d = 1, ++p;
        if (p != sl[1].size()) return std::nullopt;
        K[k][std::size_t(r2_index(a, b, c, d))] = t.c;
    }
    return K;
}

struct R2Result {
    bool pass = true;
    /// Sorted, deduplicated names of violated conditions with the offending k (and l).
    std::vector<std::string> violated;
};

inline R2Result check_class_r2(const R2Coeffs& K) {
    std::set<std::string> bad;
    auto at = [](const std::array<Q, 16>& A, int a, int b, int c, int d) -> const Q& {
        return A[std::size_t(r2_index(a, b, c, d))];
    };
    for (const auto& [k, A] : K) {
        for (const auto& [l, B] : K) {
            if (k == l) continue;
            std::string tag = "(k=" + std::to_string(k) + ",l=" + std::to_string(l) + ")";
            for (int x = 0; x < 64; ++x) {
                int b = x & 1, c = x >> 1 & 1, d = x >> 2 & 1, a2 = x >> 3 & 1, b2 = x >> 4 & 1, c2 = x >> 5 & 1;
                if (at(A, 1, b, c, d) * at(B, a2, b2, c2, 0) != at(A, 0, b, c, d) * at(B, a2, b2, c2, 1))
                    bad.insert("kl1" + tag);
            }
            for (int x = 0; x < 64; ++x) {
                int a = x & 1, b = x >> 1 & 1, d = x >> 2 & 1, a2 = x >> 3 & 1, c2 = x >> 4 & 1, d2 = x >> 5 & 1;
                if (at(A, a, b, 1, d) * at(B, a2, 0, c2, d2) != at(A, a, b, 0, d) * at(B, a2, 1, c2, d2))
                    bad.insert("kl2" + tag);
            }
        }
        std::string tag = "(k=" + std::to_string(k) + ")";
        for (int x = 0; x < 16; ++x) {
            int a = x & 1, b = x >> 1 & 1, c = x >> 2 & 1, d = x >> 3 & 1;
            for (int e = 0; e < 2; ++e) {
                if (at(A, a, b, 1, e) * at(A, e, 0, c, d) != at(A, a, b, 0, e) * at(A, e, 1, c, d)) bad.insert("d1" + tag);
                if (at(A, a, b, e, 0) * at(A, 1, e, c, d) != at(A, a, b, e, 1) * at(A, 0, e, c, d)) bad.insert("c1" + tag);
            }
            if (at(A, a, b, 1, 0) * at(A, 1, 0, c, d) != at(A, a, b, 0, 1) * at(A, 0, 1, c, d)) bad.insert("d2" + tag);
            if (at(A, a, b, 0, 0) * at(A, 1, 1, c, d) != at(A, a, b, 1, 1) * at(A, 0, 0, c, d)) bad.insert("c2" + tag);
        }
    }
    return {bad.empty(), std::vector<std::string>(bad.begin(), bad.end())};
}

}  // namespace dmpva
