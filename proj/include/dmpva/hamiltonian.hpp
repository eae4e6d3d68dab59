#pragma once

// Local functionals, variational derivatives, Hamiltonian flows and the variational complex.

#include "bracket.hpp"

namespace dmpva {

/// Canonical representative of a class in V / ([V,V] + (S-1)V).
struct LocalFunctional {
    Poly rep;
    bool operator==(const LocalFunctional&) const = default;
    bool is_zero() const { return rep.is_zero(); }
};

/// Least word among all rotations and uniform shifts of w.
inline Word necklace(const Word& w, long order) {
    if (w.empty()) return w;
    Word best;
    bool have = false;
    WordLess less;
    std::size_t n = w.size();
    for (std::size_t r = 0; r < n; ++r) {
        Word rot;
        for (std::size_t t = 0; t < n; ++t) rot.push_back(w[(r + t) % n]);
        std::vector<long> shifts;
        if (order == 0) {
            long lo = shift_of(rot[0]);
            for (Letter l : rot) lo = std::min(lo, shift_of(l));
            shifts.push_back(-lo);
        } else {
            for (long m = 0; m < order; ++m) shifts.push_back(m);
        }
        for (long m : shifts) {
            Word cand = shift_word(rot, m, order);
            if (!have || less(cand, best)) best = cand, have = true;
        }
    }
    return best;
}

inline LocalFunctional canonicalize(const Poly& f, long order = 0) {
    std::vector<Poly::Term> t;
    for (const auto& [w, c] : f.terms()) t.emplace_back(necklace(w, order), c);
    return {Poly(std::move(t))};
}

/// δf/δu_i = Σ_n S^{-n} ∂f/∂u_{i,n}.
inline Tensor variational_derivative(const Poly& f, int var, long order = 0) {
    std::vector<Tensor::Term> out;
    for (const auto& [w, c] : f.terms())
        for (std::size_t t = 0; t < w.size(); ++t) {
            if (var_of(w[t]) != var) continue;
            long n = shift_of(w[t]);
            KeyBuilder b;
            b.slot().put_shifted(Span(w.data(), t), -n, order);
            b.slot().put_shifted(Span(w.data() + t + 1, w.size() - t - 1), -n, order);
            out.emplace_back(b.take(), c);
        }
    return Tensor(2, std::move(out));
}

/// The 0-form differential: (mult (δf/δu_i)^σ)_i.
inline std::vector<Poly> variational_gradient(const Poly& f, int nvars, long order = 0) {
    std::vector<Poly> F;
    for (int i = 0; i < nvars; ++i) F.push_back(mult(sigma(variational_derivative(f, i, order))));
    return F;
}

using EvolutionEquation = std::vector<Poly>;

/// du_i/dt = mult Σ_j H_ij(S) • (δh/δu_j)^σ.
inline EvolutionEquation hamiltonian_flow(const BracketSpec& s, const Poly& h) {
    int l = s.size();
    long e = s.order();
    EvolutionEquation P;
    std::vector<Tensor> grad;
    for (int j = 0; j < l; ++j) grad.push_back(sigma(variational_derivative(h, j, e)));
    for (int i = 0; i < l; ++i) {
        std::vector<Poly::Term> acc;
        for (int j = 0; j < l; ++j)
            for (const auto& hn : s.gen(j, i).terms()) {
                auto a = slots_of(hn.k, 2);
                long n = hn.e[0];
                for (const auto& [k, c] : grad[std::size_t(j)].terms()) {
                    auto b = slots_of(k, 2);
                    // (a'⊗a'')•S^n(b'⊗b'') = a'S^n b' ⊗ S^n b'' a'', then multiply out.
                    Word w(a[0].begin(), a[0].end());
                    for (Letter x : b[0]) w.push_back(shift_letter(x, n, e));
                    for (Letter x : b[1]) w.push_back(shift_letter(x, n, e));
                    w.insert(w.end(), a[1].begin(), a[1].end());
                    acc.emplace_back(std::move(w), hn.c * c);
                }
            }
        P.push_back(Poly(std::move(acc)));
    }
    return P;
}

/// Sum of all coefficients of a Laurent tensor after concatenating factors (every variable set to 1).
inline Poly mult_at_one(const Laurent& L) {
    std::vector<Poly::Term> acc;
    for (const auto& t : L.terms()) {
        Word w;
        for (Letter l : t.k)
            if (l != kSep) w.push_back(l);
        acc.emplace_back(std::move(w), t.c);
    }
    return Poly(std::move(acc));
}

/// The same flow read off the bracket: du_i/dt = mult {{h λ u_i}}|_{λ=1}.
inline EvolutionEquation hamiltonian_flow_via_bracket(const BracketSpec& s, const Poly& h) {
    EvolutionEquation P;
    for (int i = 0; i < s.size(); ++i) P.push_back(mult_at_one(eval_bracket(s, h, Poly::gen(i))));
    return P;
}

/// X_P(f): each letter u_{i,n} replaced by S^n P_i.
inline Poly apply_evolutionary(const EvolutionEquation& P, const Poly& f, long order = 0) {
    std::vector<Poly::Term> acc;
    for (const auto& [w, c] : f.terms())
        for (std::size_t t = 0; t < w.size(); ++t) {
            int i = var_of(w[t]);
            if (i < 0 || i >= int(P.size())) throw std::invalid_argument("characteristic missing for variable");
            long n = shift_of(w[t]);
            for (const auto& [p, cp] : P[std::size_t(i)].terms()) {
                Word r(w.begin(), w.begin() + long(t));
                for (Letter x : p) r.push_back(shift_letter(x, n, order));
                r.insert(r.end(), w.begin() + long(t) + 1, w.end());
                acc.emplace_back(std::move(r), c * cp);
            }
        }
    return Poly(std::move(acc));
}

/// [P, Q]_i = X_P(Q_i) − X_Q(P_i).
inline EvolutionEquation vf_commutator(const EvolutionEquation& P, const EvolutionEquation& Qv, long order = 0) {
    if (P.size() != Qv.size()) throw std::invalid_argument("characteristic length mismatch");
    EvolutionEquation R;
    for (std::size_t i = 0; i < P.size(); ++i)
        R.push_back(apply_evolutionary(P, Qv[i], order) - apply_evolutionary(Qv, P[i], order));
    return R;
}

/// {∫f, ∫g} = ∫ Σ_{ij} mult(δg/δu_j)^σ · mult(H_ji(S) ∗1 mult(δf/δu_i)^σ).
inline LocalFunctional functional_bracket(const BracketSpec& s, const Poly& f, const Poly& g) {
    int l = s.size();
    long e = s.order();
    auto F = variational_gradient(f, l, e);
    auto G = variational_gradient(g, l, e);
    Poly total;
    for (int i = 0; i < l; ++i) {
        for (int j = 0; j < l; ++j) {
            // H_ji = gen(i, j); H(S) ∗1 F = Σ_n H'_n S^n(F) H''_n.
            std::vector<Poly::Term> acc;
            for (const auto& hn : s.gen(i, j).terms()) {
                auto a = slots_of(hn.k, 2);
                for (const auto& [w, c] : F[std::size_t(i)].terms()) {
                    Word r(a[0].begin(), a[0].end());
                    for (Letter x : w) r.push_back(shift_letter(x, hn.e[0], e));
                    r.insert(r.end(), a[1].begin(), a[1].end());
                    acc.emplace_back(std::move(r), hn.c * c);
                }
            }
            total += G[std::size_t(j)] * Poly(std::move(acc));
        }
    }
    return canonicalize(total, e);
}

/// ∫ mult {{f λ g}}|_{λ=1}; agrees with functional_bracket.
inline LocalFunctional functional_bracket_via_lambda(const BracketSpec& s, const Poly& f, const Poly& g) {
    return canonicalize(mult_at_one(eval_bracket(s, f, g)), s.order());
}

/// Full concatenation of V⊗3 coefficients, variables kept: {a λ b μ c}.
inline Laurent mult_laurent(const Laurent& L) {
    std::vector<Laurent::Term> out;
    for (const auto& t : L.terms()) {
        Key k;
        for (Letter l : t.k)
            if (l != kSep) k.push_back(l);
        out.push_back({t.e, std::move(k), t.c});
    }
    return Laurent(1, L.nvars(), L.order(), std::move(out));
}

/// D_{f,h}(u_i) = ({f λ h μ u_i} − {h μ f λ u_i})|_{λ=μ=1} for every generator.
inline std::vector<Poly> weak_jacobi_defect(const BracketSpec& s, const Poly& f, const Poly& h) {
    if (!check_skew(s).pass) throw std::invalid_argument("weak_jacobi_defect requires a skewsymmetric bracket");
    std::size_t l = std::size_t(s.size());
    return parallel_map<Poly>(l, [&](std::size_t i) {
        Poly c = Poly::gen(int(i));
        return mult_at_one(triple_bracket(s, f, h, c)) - mult_at_one(triple_bracket(s, h, f, c));
    });
}

// ---------------------------------------------------------------------------------------------
// Variational complex for k <= 2.

/**
 * A k-form. k = 0: a functional representative f. k = 1: F_i. k = 2: A_ij(λ) in V⊗V[λ^{±1}].
 * k = 3: A_ijk(λ, μ) in V⊗3[λ^{±1}, μ^{±1}]. Arrays are flattened row-major.
 */
struct KFormArray {
    int k = 0;
    int l = 1;
    long order = 0;
    Poly f;
    std::vector<Poly> F;
    std::vector<Laurent> A;
    bool operator==(const KFormArray&) const = default;
};

/// Σ^k skewadjointness; k ≤ 1 always holds.
inline bool satisfies_skewadjointness(const KFormArray& w) {
    if (w.k <= 1) return true;
    int l = w.l;
    if (w.k == 2) {
        for (int i = 0; i < l; ++i)
            for (int j = 0; j < l; ++j)
                if (!(w.A[std::size_t(i * l + j)] == skew_partner(w.A[std::size_t(j * l + i)]))) return false;
        return true;
    }
    // A_ijk coefficient (s, t) = σ S^s (A_jki coefficient (t − s, −s)).
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
            for (int k = 0; k < l; ++k) {
                const Laurent& src = w.A[std::size_t((j * l + k) * l + i)];
                std::vector<Laurent::Term> out;
                for (const auto& [e, t] : src.coeffs()) {
                    long p = e[0], q = e[1];
                    long s = -q, tt = p - q;
                    Tensor v = sigma(shift_tensor(t, s, w.order));
                    for (const auto& [key, c] : v.terms()) out.push_back({Exp{s, tt, 0}, key, c});
                }
                Laurent expect(3, 2, w.order, std::move(out));
                if (!(w.A[std::size_t((i * l + j) * l + k)] == expect)) return false;
            }
    return true;
}

inline KFormArray zero_form(const Poly& f, int l, long order = 0) { return {0, l, order, f, {}, {}}; }
inline KFormArray one_form(std::vector<Poly> F, long order = 0) {
    int l = int(F.size());
    return {1, l, order, {}, std::move(F), {}};
}

namespace detail {

inline KFormArray delta_1(const KFormArray& w) {
    int l = w.l;
    long e = w.order;
    KFormArray out{2, l, e, {}, {}, {}};
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
            LaurentAcc acc(2, 1, e);
            Q half(1, 2);
            for (auto [var, n] : support(w.F[std::size_t(j)]))
                if (var == i) {
                    Tensor d = partial(w.F[std::size_t(j)], i, n);
                    for (const auto& [k, c] : d.terms()) acc.add(Exp{n, 0, 0}, k, c * half);
                }
            for (auto [var, n] : support(w.F[std::size_t(i)]))
                if (var == j) {
                    Tensor t = shift_tensor(sigma(partial(w.F[std::size_t(i)], j, n)), -n, e);
                    for (const auto& [k, c] : t.terms()) acc.add(Exp{-n, 0, 0}, k, -(c * half));
                }
            out.A.push_back(acc.finish());
        }
    return out;
}

inline std::set<std::pair<int, long>> laurent_support(const Laurent& L) {
    std::set<std::pair<int, long>> s;
    for (const auto& t : L.terms())
        for (Letter x : t.k)
            if (x != kSep) s.emplace(var_of(x), shift_of(x));
    return s;
}

inline KFormArray delta_2(const KFormArray& w) {
    int l = w.l;
    long e = w.order;
    auto A = [&](int i, int j) -> const Laurent& { return w.A[std::size_t(i * l + j)]; };
    KFormArray out{3, l, e, {}, {}, {}};
    Q two_thirds(2, 3);
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
            for (int k = 0; k < l; ++k) {
                LaurentAcc acc(3, 2, e);
                // (∂_{i,n})_L A_jk(μ) λ^n
                for (auto [var, n] : laurent_support(A(j, k))) {
                    if (var != i) continue;
                    for (const auto& [ex, t] : A(j, k).coeffs()) {
                        Tensor d = partial_left(t, i, n);
                        for (const auto& [key, c] : d.terms()) acc.add(Exp{n, ex[0], 0}, key, c * two_thirds);
                    }
                }
                // −(∂_{j,n})_R A_ik(λ) μ^n
                for (auto [var, n] : laurent_support(A(i, k))) {
                    if (var != j) continue;
                    for (const auto& [ex, t] : A(i, k).coeffs()) {
                        Tensor d = partial_right(t, j, n);
                        for (const auto& [key, c] : d.terms()) acc.add(Exp{ex[0], n, 0}, key, -(c * two_thirds));
                    }
                }
                // λ^{-n} μ^{-n} S^{-n}((∂_{k,n})_L A_ij(λ))^{σ²}
                for (auto [var, n] : laurent_support(A(i, j))) {
                    if (var != k) continue;
                    for (const auto& [ex, t] : A(i, j).coeffs()) {
                        Tensor v = shift_tensor(sigma(sigma(partial_left(t, k, n))), -n, e);
                        for (const auto& [key, c] : v.terms()) acc.add(Exp{ex[0] - n, -n, 0}, key, c * two_thirds);
                    }
                }
                out.A.push_back(acc.finish());
            }
    return out;
}

}  // namespace detail

/// The variational differential on k-forms, k ≤ 2.
inline KFormArray de_rham_delta(const KFormArray& w) {
    if (w.k == 0) return one_form(variational_gradient(w.f, w.l, w.order), w.order);
    if (w.k == 1) {
        if (int(w.F.size()) != w.l) throw std::invalid_argument("malformed 1-form");
        return detail::delta_1(w);
    }
    if (w.k == 2) {
        if (int(w.A.size()) != w.l * w.l) throw std::invalid_argument("malformed 2-form");
        for (const auto& a : w.A)
            if (a.arity() != 2) throw std::invalid_argument("2-form entries must be V⊗V valued");
        if (!satisfies_skewadjointness(w)) throw std::invalid_argument("2-form violates skewadjointness");
        return detail::delta_2(w);
    }
    throw std::invalid_argument("de_rham_delta implemented for k <= 2");
}

inline bool is_zero_form(const KFormArray& w) {
    switch (w.k) {
        case 0: return canonicalize(w.f, w.order).is_zero();
        case 1:
            for (const auto& p : w.F)
                if (!p.is_zero()) return false;
            return true;
        default:
            for (const auto& a : w.A)
                if (!a.is_zero()) return false;
            return true;
    }
}

/// D_F(λ)_ij = Σ_n ∂F_i/∂u_{j,n} λ^n, as an operator matrix.
inline DiffOpMatrix frechet_derivative(const std::vector<Poly>& F, long order = 0) {
    int l = int(F.size());
    DiffOpMatrix D(l, order);
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) {
            LaurentAcc acc(2, 1, order);
            for (auto [var, n] : support(F[std::size_t(i)]))
                if (var == j) {
                    Tensor d = partial(F[std::size_t(i)], j, n);
                    for (const auto& [k, c] : d.terms()) acc.add(Exp{n, 0, 0}, k, c);
                }
            D.at(i, j) = acc.finish();
        }
    return D;
}

/// F is closed iff its Frechet derivative is selfadjoint.
inline bool is_closed(const std::vector<Poly>& F, long order = 0) {
    DiffOpMatrix D = frechet_derivative(F, order);
    return adjoint(D) == D;
}

}  // namespace dmpva
