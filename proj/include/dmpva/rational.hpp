#pragma once

// Rational functions, ι± expansions on explicit windows, pseudodifference operators of rational
// type, the NIB operator and its functional equations, and truncated nonlocal bracket checks.

#include <climits>
#include <functional>
#include <optional>

#include "bracket.hpp"

namespace dmpva {

/// Dense univariate polynomial, index = degree, no trailing zeros.
using UPoly = std::vector<Q>;

namespace upoly {

inline void trim(UPoly& p) {
    while (!p.empty() && qzero(p.back())) p.pop_back();
}
inline long deg(const UPoly& p) { return long(p.size()) - 1; }
inline UPoly add(const UPoly& a, const UPoly& b) {
    UPoly r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    trim(r);
    return r;
}
inline UPoly scale(const UPoly& a, const Q& s) {
    UPoly r = a;
    for (auto& c : r) c *= s;
    trim(r);
    return r;
}
inline UPoly mul(const UPoly& a, const UPoly& b) {
    if (a.empty() || b.empty()) return {};
    UPoly r(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    trim(r);
    return r;
}
/// Multiply by z^k, k ≥ 0.
inline UPoly shift_up(const UPoly& a, long k) {
    if (a.empty()) return {};
    UPoly r(std::size_t(k), Q(0));
    r.insert(r.end(), a.begin(), a.end());
    return r;
}
inline std::pair<UPoly, UPoly> divmod(UPoly a, const UPoly& b) {
    if (b.empty()) throw std::domain_error("polynomial division by zero");
    UPoly q;
    if (a.size() >= b.size()) q.assign(a.size() - b.size() + 1, Q(0));
    while (!a.empty() && a.size() >= b.size()) {
        std::size_t s = a.size() - b.size();
        Q c = a.back() / b.back();
        q[s] = c;
        for (std::size_t i = 0; i < b.size(); ++i) a[s + i] -= c * b[i];
        trim(a);
    }
    trim(q);
    return {q, a};
}
/// Monic gcd.
inline UPoly gcd(UPoly a, UPoly b) {
    while (!b.empty()) {
        UPoly r = divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) a = scale(a, Q(1) / a.back());
    return a;
}
/// Substitute z → z^k.
inline UPoly subs_power(const UPoly& a, long k) {
    if (a.empty()) return {};
    UPoly r(std::size_t(deg(a) * k + 1), Q(0));
    for (std::size_t i = 0; i < a.size(); ++i) r[i * std::size_t(k)] = a[i];
    return r;
}

}  // namespace upoly

/// z^val · num / den with num(0) ≠ 0, den(0) ≠ 0, den monic and gcd(num, den) = 1.
class RationalFn {
public:
    RationalFn() : den_{Q(1)} {}
    RationalFn(UPoly num, UPoly den, long val = 0) : val_(val), num_(std::move(num)), den_(std::move(den)) { normalize(); }
    RationalFn(const Q& c) : RationalFn(UPoly{c}, UPoly{Q(1)}) {}
    /// Σ c z^p over Σ c z^p; powers may be negative.
    static RationalFn from_terms(const std::vector<std::pair<Q, long>>& num, const std::vector<std::pair<Q, long>>& den) {
        auto build = [](const std::vector<std::pair<Q, long>>& t, long& lo) {
            lo = 0;
            bool first = true;
            for (const auto& [c, p] : t)
                if (!qzero(c)) lo = first ? p : std::min(lo, p), first = false;
            UPoly r;
            for (const auto& [c, p] : t) {
                if (qzero(c)) continue;
                std::size_t i = std::size_t(p - lo);
                if (r.size() <= i) r.resize(i + 1, Q(0));
                r[i] += c;
            }
            upoly::trim(r);
            return r;
        };
        long ln = 0, ld = 0;
        UPoly n = build(num, ln), d = build(den, ld);
        if (d.empty()) throw std::domain_error("zero denominator");
        return RationalFn(n, d, ln - ld);
    }
    static RationalFn monomial(const Q& c, long p) { return RationalFn(UPoly{c}, UPoly{Q(1)}, p); }

    bool is_zero() const { return num_.empty(); }
    long val() const { return val_; }
    const UPoly& num() const { return num_; }
    const UPoly& den() const { return den_; }
    bool operator==(const RationalFn&) const = default;

    friend RationalFn operator*(const RationalFn& a, const RationalFn& b) {
        return RationalFn(upoly::mul(a.num_, b.num_), upoly::mul(a.den_, b.den_), a.val_ + b.val_);
    }
    friend RationalFn operator+(const RationalFn& a, const RationalFn& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        long v = std::min(a.val_, b.val_);
        UPoly an = upoly::shift_up(upoly::mul(a.num_, b.den_), a.val_ - v);
        UPoly bn = upoly::shift_up(upoly::mul(b.num_, a.den_), b.val_ - v);
        return RationalFn(upoly::add(an, bn), upoly::mul(a.den_, b.den_), v);
    }
    RationalFn operator-() const {
        RationalFn r = *this;
        for (auto& c : r.num_) c = -c;
        return r;
    }
    friend RationalFn operator-(const RationalFn& a, const RationalFn& b) { return a + (-b); }
    friend RationalFn operator/(const RationalFn& a, const RationalFn& b) {
        if (b.is_zero()) throw std::domain_error("division by the zero rational function");
        return RationalFn(upoly::mul(a.num_, b.den_), upoly::mul(a.den_, b.num_), a.val_ - b.val_);
    }

    /// r(1/z).
    RationalFn inv_arg() const {
        if (is_zero()) return *this;
        UPoly n(num_.rbegin(), num_.rend()), d(den_.rbegin(), den_.rend());
        return RationalFn(n, d, -val_ - upoly::deg(num_) + upoly::deg(den_));
    }
    /// r(z^k), k ≥ 1.
    RationalFn subs_power(long k) const {
        if (k < 1) throw std::invalid_argument("power substitution needs k >= 1");
        return RationalFn(upoly::subs_power(num_, k), upoly::subs_power(den_, k), val_ * k);
    }

    std::string str() const {
        auto poly = [](const UPoly& p, long off) {
            std::string s;
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (qzero(p[i])) continue;
                Q c = p[i];
                bool neg = c.sign() < 0;
                if (!s.empty()) s += neg ? " - " : " + ";
                else if (neg) s += "-";
                if (neg) c = -c;
                long e = long(i) + off;
                if (e == 0) s += c.str();
                else {
                    if (c != Q(1)) s += c.str() + "*";
                    s += e == 1 ? "z" : "z^" + std::to_string(e);
                }
            }
            return s.empty() ? std::string("0") : s;
        };
        if (is_zero()) return "0";
        std::string n = "(" + poly(num_, val_) + ")";
        if (den_.size() == 1) return n;
        return n + "/(" + poly(den_, 0) + ")";
    }

private:
    void normalize() {
        upoly::trim(num_);
        upoly::trim(den_);
        if (den_.empty()) throw std::domain_error("zero denominator");
        if (num_.empty()) {
            val_ = 0;
            den_ = {Q(1)};
            return;
        }
        std::size_t zn = 0, zd = 0;
        while (qzero(num_[zn])) ++zn;
        while (qzero(den_[zd])) ++zd;
        num_.erase(num_.begin(), num_.begin() + long(zn));
        den_.erase(den_.begin(), den_.begin() + long(zd));
        val_ += long(zn) - long(zd);
        UPoly g = upoly::gcd(num_, den_);
        if (g.size() > 1) {
            num_ = upoly::divmod(num_, g).first;
            den_ = upoly::divmod(den_, g).first;
        }
        Q lead = den_.back();
        num_ = upoly::scale(num_, Q(1) / lead);
        den_ = upoly::scale(den_, Q(1) / lead);
    }

    long val_ = 0;
    UPoly num_, den_;
};

// ---------------------------------------------------------------------------------------------
// Truncated one-sided series

constexpr long kInf = LONG_MAX / 4;

inline long sat_add(long a, long b) {
    if (a >= kInf || b >= kInf) return kInf;
    return a + b;
}

/**
 * One-sided truncated series. dir = +1: a Laurent series at 0, zero below val, exact for every
 * exponent e ≤ lim. dir = −1 mirrors this: zero above val, exact for e ≥ lim.
 */
struct Series {
    int dir = 1;
    long val = 0;
    long lim = kInf;
    std::map<long, Q> c;

    bool exact(long e) const { return dir * e <= (lim >= kInf ? kInf : dir * lim); }
    Q coeff(long e) const {
        if (!exact(e)) throw std::out_of_range("coefficient outside the exact window");
        auto it = c.find(e);
        return it == c.end() ? Q(0) : it->second;
    }
};

/// Signed coordinate helpers: e' = dir·e makes every series a + series.
inline long sgn_lim(const Series& s) { return s.lim >= kInf ? kInf : s.dir * s.lim; }

/// ι+ (dir = +1) or ι− (dir = −1) expansion, exact up to lim in the direction of expansion.
inline Series iota_expand(const RationalFn& r, int dir, long lim) {
    if (dir != 1 && dir != -1) throw std::invalid_argument("direction must be + or -");
    if (dir == -1) {
        Series s = iota_expand(r.inv_arg(), 1, -lim);
        Series m{-1, -s.val, lim, {}};
        for (const auto& [e, c] : s.c) m.c.emplace(-e, c);
        return m;
    }
    Series s{1, r.val(), lim, {}};
    if (r.is_zero()) {
        s.val = 0;
        return s;
    }
    const UPoly& n = r.num();
    const UPoly& d = r.den();
    long count = lim - r.val() + 1;
    std::vector<Q> out;
    for (long i = 0; i < count; ++i) {
        Q v = std::size_t(i) < n.size() ? n[std::size_t(i)] : Q(0);
        for (std::size_t k = 1; k < d.size() && long(k) <= i; ++k) v -= d[k] * out[std::size_t(i) - k];
        v = v / d[0];
        out.push_back(v);
        if (!qzero(v)) s.c.emplace(r.val() + i, v);
    }
    return s;
}

inline Series series_mul(const Series& a, const Series& b) {
    if (a.dir != b.dir) throw std::invalid_argument("mixed expansion directions");
    int d = a.dir;
    long va = d * a.val, vb = d * b.val;
    long l = std::min(sat_add(sgn_lim(a), vb), sat_add(sgn_lim(b), va));
    Series r{d, a.val + b.val, l >= kInf ? kInf : d * l, {}};
    for (const auto& [ea, ca] : a.c)
        for (const auto& [eb, cb] : b.c) {
            long e = ea + eb;
            if (d * e > l) continue;
            Q& slot = r.c[e];
            slot += ca * cb;
        }
    std::erase_if(r.c, [](const auto& kv) { return qzero(kv.second); });
    return r;
}

inline Series series_add(const Series& a, const Series& b, const Q& sb = 1) {
    if (a.dir != b.dir) throw std::invalid_argument("mixed expansion directions");
    int d = a.dir;
    long l = std::min(sgn_lim(a), sgn_lim(b));
    long v = std::min(d * a.val, d * b.val);
    Series r{d, d * v, l >= kInf ? kInf : d * l, {}};
    for (const auto& [e, c] : a.c)
        if (d * e <= l) r.c[e] += c;
    for (const auto& [e, c] : b.c)
        if (d * e <= l) r.c[e] += c * sb;
    std::erase_if(r.c, [](const auto& kv) { return qzero(kv.second); });
    return r;
}

/// Restrict to exponents in [lo, hi]; fails if some of them are not exact.
inline std::vector<std::pair<long, Q>> series_window(const Series& s, long lo, long hi) {
    std::vector<std::pair<long, Q>> out;
    for (long e = lo; e <= hi; ++e) out.emplace_back(e, s.coeff(e));
    return out;
}

// ---------------------------------------------------------------------------------------------
// Two-variable series in (z, w), + direction

/// Zero below (vz, vw); a coefficient (i, j) is exact when i ≤ hz and j ≤ hw.
struct Series2 {
    long vz = 0, vw = 0, hz = kInf, hw = kInf;
    std::map<std::pair<long, long>, Q> c;
};

enum class Arg { Z, W, ZW };

inline Series2 lift(const Series& s, Arg a) {
    if (s.dir != 1) throw std::invalid_argument("two-variable series use the + direction");
    Series2 r;
    switch (a) {
        case Arg::Z: r = {s.val, 0, s.lim, kInf, {}}; break;
        case Arg::W: r = {0, s.val, kInf, s.lim, {}}; break;
        case Arg::ZW: r = {s.val, s.val, s.lim, kInf, {}}; break;
    }
    for (const auto& [e, c] : s.c) {
        if (a == Arg::Z) r.c.emplace(std::pair{e, 0L}, c);
        if (a == Arg::W) r.c.emplace(std::pair{0L, e}, c);
        if (a == Arg::ZW) r.c.emplace(std::pair{e, e}, c);
    }
    return r;
}

inline Series2 s2_add(const Series2& a, const Series2& b, const Q& sb = 1) {
    Series2 r{std::min(a.vz, b.vz), std::min(a.vw, b.vw), std::min(a.hz, b.hz), std::min(a.hw, b.hw), {}};
    for (const auto& [e, c] : a.c) r.c[e] += c;
    for (const auto& [e, c] : b.c) r.c[e] += c * sb;
    std::erase_if(r.c, [](const auto& kv) { return qzero(kv.second); });
    return r;
}

inline Series2 s2_mul(const Series2& a, const Series2& b) {
    Series2 r{a.vz + b.vz, a.vw + b.vw, std::min(sat_add(a.hz, b.vz), sat_add(b.hz, a.vz)),
              std::min(sat_add(a.hw, b.vw), sat_add(b.hw, a.vw)), {}};
    for (const auto& [ea, ca] : a.c)
        for (const auto& [eb, cb] : b.c) {
            long i = ea.first + eb.first, j = ea.second + eb.second;
            if (i > r.hz || j > r.hw) continue;
            r.c[{i, j}] += ca * cb;
        }
    std::erase_if(r.c, [](const auto& kv) { return qzero(kv.second); });
    return r;
}

/// A source of + series exact up to a requested bound.
using SeriesSource = std::function<Series(long lim)>;

inline SeriesSource source_of(const RationalFn& r) {
    return [r](long lim) { return iota_expand(r, 1, lim); };
}
/// A fixed series; requests beyond its own bound are not honoured.
inline SeriesSource source_of(const Series& s) {
    return [s](long) { return s; };
}

struct FunctionalEqReport {
    long lo = -6, hi = 6;
    /// Exact box reached: coefficients (i, j) with i ≤ hz and j ≤ hw were checked.
    long hz = 0, hw = 0;
    bool covered = false;
    Q gamma;
    std::array<bool, 4> ok{true, true, true, true};
    /// First nonzero residual per condition: exponent pair and value.
    std::array<std::optional<std::pair<std::pair<long, long>, Q>>, 4> residual;
    bool pass() const { return covered && ok[0] && ok[1] && ok[2] && ok[3]; }
};

/**
 * The four two-variable identities
 *   (b(z)+b(w)) b(zw) − b(z) b(w) = γ,  same with c,
 *   (b(z)+b(w)) a(zw) + a(z) a(w) = 0,  same with c,
 * with γ read off as the constant term of the first. All functions are ι+ expanded and the
 * expansion bound is raised until the exact box covers [lo, hi]².
 */
inline FunctionalEqReport check_functional_equations(const SeriesSource& a, const SeriesSource& b, const SeriesSource& c,
                                                     long lo, long hi) {
    if (lo > hi) throw std::invalid_argument("empty window");
    FunctionalEqReport rep;
    rep.lo = lo;
    rep.hi = hi;
    long target = std::max(hi, 0L);
    long lim = target;
    std::array<Series2, 4> E;
    for (int round = 0; round < 64; ++round) {
        Series sa = a(lim), sb = b(lim), sc = c(lim);
        auto lhs_bc = [&](const Series& x) {
            return s2_add(s2_mul(s2_add(lift(x, Arg::Z), lift(x, Arg::W)), lift(x, Arg::ZW)),
                          s2_mul(lift(x, Arg::Z), lift(x, Arg::W)), Q(-1));
        };
        auto lhs_a = [&](const Series& x) {
            return s2_add(s2_mul(s2_add(lift(x, Arg::Z), lift(x, Arg::W)), lift(sa, Arg::ZW)),
                          s2_mul(lift(sa, Arg::Z), lift(sa, Arg::W)));
        };
        E = {lhs_bc(sb), lhs_bc(sc), lhs_a(sb), lhs_a(sc)};
        long hz = kInf, hw = kInf;
        for (const auto& e : E) hz = std::min(hz, e.hz), hw = std::min(hw, e.hw);
        rep.hz = hz;
        rep.hw = hw;
        long reach = std::min(hz, hw);
        if (reach >= target) {
            rep.covered = true;
            break;
        }
        long next = lim + (target - reach);
        Series probe = b(next);
        if (probe.lim <= sb.lim && a(next).lim <= sa.lim && c(next).lim <= sc.lim) break;
        lim = next;
    }
    auto it = E[0].c.find({0, 0});
    rep.gamma = it == E[0].c.end() ? Q(0) : it->second;
    for (int k = 0; k < 4; ++k) {
        for (long i = lo; i <= std::min(hi, rep.hz); ++i)
            for (long j = lo; j <= std::min(hi, rep.hw); ++j) {
                auto f = E[std::size_t(k)].c.find({i, j});
                Q v = f == E[std::size_t(k)].c.end() ? Q(0) : f->second;
                if (k < 2 && i == 0 && j == 0) v -= rep.gamma;
                if (!qzero(v) && rep.ok[std::size_t(k)]) {
                    rep.ok[std::size_t(k)] = false;
                    rep.residual[std::size_t(k)] = std::pair{std::pair{i, j}, v};
                }
            }
    }
    return rep;
}

inline FunctionalEqReport check_functional_equations(const RationalFn& a, const RationalFn& b, const RationalFn& c,
                                                     long lo, long hi) {
    return check_functional_equations(source_of(a), source_of(b), source_of(c), lo, hi);
}

// ---------------------------------------------------------------------------------------------
// Pseudodifference operators of rational type

/// f_1 ι r_1(S) • f_2 ι r_2(S) • … • r_n(S) • f_{n+1}.
struct Chain {
    std::vector<Tensor> f;
    std::vector<RationalFn> r;
    bool operator==(const Chain&) const = default;
};

struct RationalPseudoOp {
    std::vector<Chain> chains;
    bool operator==(const RationalPseudoOp&) const = default;
};

inline void check_chain(const Chain& ch) {
    if (ch.f.size() != ch.r.size() + 1) throw std::invalid_argument("chain must alternate tensors and rational functions");
    for (const auto& t : ch.f)
        if (t.arity() != 2) throw std::invalid_argument("chain factors must lie in V⊗V");
}

/// Tensor-valued one-sided truncated series in the symbol variable z.
struct TSeries {
    int dir = 1;
    long val = 0;
    long lim = kInf;
    Laurent L{2, 1, 0};

    bool exact(long e) const { return dir * e <= (lim >= kInf ? kInf : dir * lim); }
};

/// X(z) ↦ Σ_m r_m f•S^m(X_k) z^{m+k}.
inline TSeries apply_factor(const Tensor& f, const Series& r, const TSeries& X) {
    int d = X.dir;
    long l = std::min(sat_add(sgn_lim(r), d * X.val), sat_add(X.lim >= kInf ? kInf : d * X.lim, d * r.val));
    LaurentAcc acc(2, 1, 0);
    auto xs = X.L.coeffs();
    for (const auto& [m, rm] : r.c)
        for (const auto& [e, t] : xs) {
            long n = m + e[0];
            if (d * n > l) continue;
            Tensor v = bullet(f, shift_tensor(t, m)) * rm;
            for (const auto& [k, c] : v.terms()) acc.add(Exp{n, 0, 0}, k, c);
        }
    return {d, r.val + X.val, l >= kInf ? kInf : d * l, acc.finish()};
}

inline TSeries chain_symbol_at(const Chain& ch, int dir, long rlim) {
    check_chain(ch);
    TSeries X{dir, 0, kInf, Laurent::monomial(ch.f.back(), Exp{0, 0, 0})};
    for (std::size_t i = ch.r.size(); i-- > 0;) X = apply_factor(ch.f[i], iota_expand(ch.r[i], dir, rlim), X);
    if (ch.r.empty()) X.val = 0;
    return X;
}

inline TSeries tseries_add(const TSeries& a, const TSeries& b) {
    if (a.dir != b.dir) throw std::invalid_argument("mixed expansion directions");
    int d = a.dir;
    long la = a.lim >= kInf ? kInf : d * a.lim, lb = b.lim >= kInf ? kInf : d * b.lim;
    long l = std::min(la, lb);
    LaurentAcc acc(2, 1, 0);
    for (const auto* s : {&a, &b})
        for (const auto& t : s->L.terms())
            if (d * t.e[0] <= l) acc.add(t.e, t.k, t.c);
    return {d, d * std::min(d * a.val, d * b.val), l >= kInf ? kInf : d * l, acc.finish()};
}

/// Symbol of a rational operator, exact at least up to lim (in the expansion direction).
inline TSeries rat_symbol(const RationalPseudoOp& A, int dir, long lim) {
    TSeries total{dir, 0, kInf, Laurent(2, 1, 0)};
    for (const auto& ch : A.chains) {
        long extra = 0;
        TSeries s;
        for (int round = 0; round < 64; ++round) {
            s = chain_symbol_at(ch, dir, lim + dir * extra);
            long got = s.lim >= kInf ? kInf : dir * s.lim;
            if (got >= dir * lim) break;
            extra += dir * lim - got;
        }
        total = tseries_add(total, s);
    }
    return total;
}

/// The chain product: last factor of A merged with the first factor of B by •.
inline RationalPseudoOp rat_compose_ops(const RationalPseudoOp& A, const RationalPseudoOp& B) {
    RationalPseudoOp out;
    for (const auto& a : A.chains)
        for (const auto& b : B.chains) {
            check_chain(a);
            check_chain(b);
            Chain c;
            c.f.assign(a.f.begin(), a.f.end() - 1);
            c.f.push_back(bullet(a.f.back(), b.f.front()));
            c.f.insert(c.f.end(), b.f.begin() + 1, b.f.end());
            c.r = a.r;
            c.r.insert(c.r.end(), b.r.begin(), b.r.end());
            out.chains.push_back(std::move(c));
        }
    return out;
}

/// Truncated symbol of A•B.
inline TSeries rat_compose(const RationalPseudoOp& A, const RationalPseudoOp& B, int dir, long lim) {
    return rat_symbol(rat_compose_ops(A, B), dir, lim);
}

/// A(zS)•B(z) on truncated symbols.
inline TSeries symbol_compose(const TSeries& A, const TSeries& B) {
    if (A.dir != B.dir) throw std::invalid_argument("mixed expansion directions");
    int d = A.dir;
    long la = A.lim >= kInf ? kInf : d * A.lim, lb = B.lim >= kInf ? kInf : d * B.lim;
    long l = std::min(sat_add(la, d * B.val), sat_add(lb, d * A.val));
    LaurentAcc acc(2, 1, 0);
    auto bs = B.L.coeffs();
    for (const auto& [ea, ta] : A.L.coeffs())
        for (const auto& [eb, tb] : bs) {
            long n = ea[0] + eb[0];
            if (d * n > l) continue;
            Tensor v = bullet(ta, shift_tensor(tb, ea[0]));
            for (const auto& [k, c] : v.terms()) acc.add(Exp{n, 0, 0}, k, c);
        }
    return {d, A.val + B.val, l >= kInf ? kInf : d * l, acc.finish()};
}

/// Chain reversal, σ on every factor, r(z) ↦ r(1/z).
inline RationalPseudoOp rat_adjoint(const RationalPseudoOp& A) {
    RationalPseudoOp out;
    for (const auto& ch : A.chains) {
        check_chain(ch);
        Chain c;
        for (auto it = ch.f.rbegin(); it != ch.f.rend(); ++it) c.f.push_back(sigma(*it));
        for (auto it = ch.r.rbegin(); it != ch.r.rend(); ++it) c.r.push_back(it->inv_arg());
        out.chains.push_back(std::move(c));
    }
    return out;
}

inline RationalPseudoOp rat_scale(RationalPseudoOp A, const Q& s) {
    for (auto& ch : A.chains) ch.f.front() = ch.f.front() * s;
    return A;
}

inline RationalPseudoOp rat_sum(RationalPseudoOp A, const RationalPseudoOp& B) {
    A.chains.insert(A.chains.end(), B.chains.begin(), B.chains.end());
    return A;
}

/// Coefficients of a truncated symbol on [lo, hi]; throws if the window is not exact.
inline Laurent symbol_window(const TSeries& s, long lo, long hi) {
    if (!s.exact(s.dir > 0 ? hi : lo)) throw std::out_of_range("symbol not exact on the requested window");
    std::vector<Laurent::Term> out;
    for (const auto& t : s.L.terms())
        if (t.e[0] >= lo && t.e[0] <= hi) out.push_back(t);
    return Laurent(2, 1, 0, std::move(out));
}

// ---------------------------------------------------------------------------------------------
// Narita–Itoh–Bogoyavlensky operator on R_1

struct NibData {
    RationalFn a, b, c;
    RationalPseudoOp H;
    /// α(2β + α) = 0.
    bool constraint_ok = true;
};

/**
 * H = (1⊗u) a(S) • (1⊗u) + (1⊗u) b(S) • (u⊗1) + (u⊗1) c(S) • (1⊗u) − (u⊗1) a(S^{-1}) • (u⊗1)
 * with a = α z^p / (1 − z^k) and b = c = β (1 + z^k) / (1 − z^k).
 */
inline NibData build_nib(const Q& alpha, const Q& beta, long k, long p) {
    if (k < 1) throw std::invalid_argument("NIB needs k >= 1");
    NibData d;
    RationalFn zk = RationalFn::monomial(1, k);
    RationalFn one(1);
    d.a = RationalFn::monomial(alpha, p) / (one - zk);
    d.b = RationalFn(beta) * (one + zk) / (one - zk);
    d.c = d.b;
    d.constraint_ok = qzero(alpha * (beta * Q(2) + alpha));
    Poly u = Poly::gen(0);
    Tensor one_u = Tensor::pure({Poly::one(), u}), u_one = Tensor::pure({u, Poly::one()});
    d.H.chains = {Chain{{one_u, one_u}, {d.a}}, Chain{{one_u, u_one}, {d.b}}, Chain{{u_one, one_u}, {d.c}},
                  Chain{{-u_one, u_one}, {d.a.inv_arg()}}};
    return d;
}

// ---------------------------------------------------------------------------------------------
// Truncated checks for series-valued generator brackets

/// Coefficient generator n ↦ T_n of a bilateral series Σ T_n λ^n.
using BilateralGen = std::function<Tensor(long)>;

struct TruncEntry {
    std::optional<RationalPseudoOp> rational;
    BilateralGen bilateral;
};

/// gen(a, b) = {{u_a λ u_b}} given by rational operators or coefficient generators.
struct TruncatedSpec {
    Signature sig;
    std::map<std::pair<int, int>, TruncEntry> gen;
    int dir = 1;
};

struct TruncatedReport {
    long W = 0, T = 0, s = 0;
    bool nonlocal_skew = true;
    std::optional<std::tuple<int, int, long>> nonlocal_witness;
    /// Present only when every entry is of rational type.
    std::optional<bool> rational_skew;
    std::optional<std::tuple<int, int, long>> rational_witness;
    bool jacobi = true;
    std::vector<std::tuple<int, int, int, long, long>> jacobi_failures;
};

/// Largest |letter shift| − |n| over the terms, at least 0.
inline long shift_excess(const Laurent& L) {
    long s = 0;
    for (const auto& t : L.terms())
        for (Letter l : t.k)
            if (l != kSep) s = std::max(s, std::abs(shift_of(l)) - std::abs(t.e[0]));
    return s;
}

/// Finite truncation at |n| ≤ T of every generator bracket; exact coefficients beyond T are kept.
inline BracketSpec truncate_spec(const TruncatedSpec& ts, long T) {
    BracketSpec s(ts.sig);
    for (const auto& [ab, e] : ts.gen) {
        auto [a, b] = ab;
        if (a < 0 || b < 0 || a >= ts.sig.size() || b >= ts.sig.size()) throw std::invalid_argument("generator index out of range");
        if (e.rational) {
            TSeries sym = rat_symbol(*e.rational, ts.dir, ts.dir * T);
            std::vector<Laurent::Term> keep;
            for (const auto& t : sym.L.terms())
                if (sym.exact(t.e[0])) keep.push_back(t);
            s.set(a, b, Laurent(2, 1, 0, std::move(keep)));
        } else if (e.bilateral) {
            LaurentAcc acc(2, 1, 0);
            for (long n = -T; n <= T; ++n) {
                Tensor t = e.bilateral(n);
                for (const auto& [k, c] : t.terms()) acc.add(Exp{n, 0, 0}, k, c);
            }
            s.set(a, b, acc.finish());
        }
    }
    return s;
}

namespace detail {

/// Adds d to the variable index of every letter whose variable lies in [lo, hi).
template <class K>
K retag_key(const K& k, int lo, int hi, int d) {
    K out = k;
    for (auto& l : out)
        if (l != kSep && var_of(l) >= lo && var_of(l) < hi) l = make_letter(var_of(l) + d, shift_of(l));
    return out;
}

inline Tensor retag(const Tensor& t, int lo, int hi, int d) {
    std::vector<Tensor::Term> out;
    for (const auto& [k, c] : t.terms()) out.emplace_back(retag_key(k, lo, hi, d), c);
    return Tensor(t.arity(), std::move(out));
}

inline Laurent retag(const Laurent& L, int lo, int hi, int d) {
    std::vector<Laurent::Term> out;
    for (const auto& t : L.terms()) out.push_back({t.e, retag_key(t.k, lo, hi, d), t.c});
    return Laurent(L.arity(), L.nvars(), L.order(), std::move(out));
}

/// Symbol of one chain with a direction per rational factor; every index is cut at |m| ≤ T.
inline Laurent chain_symbol_mixed(const Chain& ch, const std::vector<int>& dirs, long T) {
    check_chain(ch);
    Laurent X = Laurent::monomial(ch.f.back(), Exp{0, 0, 0});
    for (std::size_t i = ch.r.size(); i-- > 0;) {
        Series r = iota_expand(ch.r[i], dirs[i], dirs[i] * T);
        LaurentAcc acc(2, 1, 0);
        auto xs = X.coeffs();
        for (const auto& [m, rm] : r.c) {
            if (std::abs(m) > T) continue;
            for (const auto& [e, t] : xs) {
                Tensor v = bullet(ch.f[i], shift_tensor(t, m)) * rm;
                for (const auto& [k, c] : v.terms()) acc.add(Exp{m + e[0], 0, 0}, k, c);
            }
        }
        X = acc.finish();
    }
    return X;
}

}  // namespace detail

/**
 * Third Jacobi term {{ {{u_i λ u_j}}_{λμ} u_k }}_L for a rational entry (i, j). Differentiating a
 * letter that sits to the right of a rational factor r turns λ^n (λμ)^{-n} into μ^{-n}; that
 * factor is then read as the expansion of r(1/z) in the same direction, which is the opposite
 * expansion of r. Letters are tagged by factor so each factor is handled with its own directions.
 */
inline Laurent rational_third_term(const BracketSpec& spec, const RationalPseudoOp& A, int dir, int k, long T) {
    const Signature& sig = spec.signature();
    int l = sig.size();
    std::vector<std::string> names = sig.names;
    for (int v = 0; v < l; ++v) names.push_back(sig.names[std::size_t(v)] + "'");
    BracketSpec tagged(Signature(names, sig.order));
    for (int v = 0; v < l; ++v)
        for (int w = 0; w < l; ++w) tagged.set(v + l, w, spec.gen(v, w));
    LaurentAcc acc(3, 2, sig.order);
    for (const auto& ch : A.chains)
        for (std::size_t t = 0; t < ch.f.size(); ++t) {
            Chain c = ch;
            c.f[t] = detail::retag(ch.f[t], 0, l, l);
            std::vector<int> dirs(ch.r.size(), dir);
            for (std::size_t i = 0; i < t; ++i) dirs[i] = -dir;
            Laurent Y = detail::chain_symbol_mixed(c, dirs, T);
            Laurent R = bracket_first_on(tagged, lift_var(Y, 0), Poly::gen(k));
            acc.add(detail::retag(R, l, 2 * l, -l));
        }
    return acc.finish();
}

/**
 * Skew (nonlocal and rational readings) and generator Jacobi on the window |n|, |p|, |q| ≤ W.
 * The truncation order T = 4W + s keeps every coefficient in that window exact: a λ^p μ^q
 * coefficient of the triple bracket only involves generator coefficients of index at most
 * 2(|p| + |q|) + s.
 */
inline TruncatedReport check_truncated_bracket(const TruncatedSpec& ts, long W) {
    if (W < 0) throw std::invalid_argument("window must be nonnegative");
    if (ts.sig.finite()) throw std::invalid_argument("truncated checks need an infinite-order shift");
    TruncatedReport rep;
    rep.W = W;
    long s = 0;
    BracketSpec spec;
    for (int round = 0; round < 8; ++round) {
        long T = 4 * W + s;
        spec = truncate_spec(ts, T);
        long ns = 0;
        for (int a = 0; a < spec.size(); ++a)
            for (int b = 0; b < spec.size(); ++b) ns = std::max(ns, shift_excess(spec.gen(a, b)));
        rep.T = T;
        if (ns <= s) break;
        s = ns;
    }
    rep.s = s;
    int l = spec.size();
    for (int a = 0; a < l && rep.nonlocal_skew; ++a)
        for (int b = 0; b < l && rep.nonlocal_skew; ++b) {
            Laurent d = spec.gen(a, b) - skew_partner(spec.gen(b, a));
            for (const auto& t : d.terms())
                if (std::abs(t.e[0]) <= W) {
                    rep.nonlocal_skew = false;
                    rep.nonlocal_witness = std::tuple{a, b, t.e[0]};
                    break;
                }
        }
    bool all_rational = true;
    for (const auto& [ab, e] : ts.gen)
        if (!e.rational && e.bilateral) all_rational = false;
    if (all_rational) {
        bool ok = true;
        for (int a = 0; a < l && ok; ++a)
            for (int b = 0; b < l && ok; ++b) {
                auto ea = ts.gen.find({a, b}), eb = ts.gen.find({b, a});
                RationalPseudoOp A = ea == ts.gen.end() ? RationalPseudoOp{} : *ea->second.rational;
                RationalPseudoOp B = eb == ts.gen.end() ? RationalPseudoOp{} : *eb->second.rational;
                long lo = -W, hi = W;
                Laurent sa = symbol_window(rat_symbol(A, ts.dir, ts.dir * W), lo, hi);
                Laurent sb = symbol_window(rat_symbol(rat_adjoint(B), ts.dir, ts.dir * W), lo, hi);
                Laurent d = sa + sb;
                if (!d.is_zero()) {
                    ok = false;
                    rep.rational_witness = std::tuple{a, b, d.terms().front().e[0]};
                }
            }
        rep.rational_skew = ok;
    }
    std::size_t n = std::size_t(l * l * l);
    auto defects = parallel_map<Laurent>(n, [&](std::size_t idx) {
        int i = int(idx) / (l * l), j = int(idx) / l % l, k = int(idx) % l;
        auto e = ts.gen.find({i, j});
        if (e == ts.gen.end() || !e->second.rational) return triple_bracket(spec, Poly::gen(i), Poly::gen(j), Poly::gen(k));
        Poly a = Poly::gen(i), b = Poly::gen(j), c = Poly::gen(k);
        LaurentAcc acc(3, 2, spec.order());
        acc.add(bracket_left_on(spec, a, eval_bracket(spec, b, c), 0, 1));
        acc.add(bracket_right_on(spec, b, eval_bracket(spec, a, c), 1, 0), -1);
        acc.add(rational_third_term(spec, *e->second.rational, ts.dir, k, rep.T), -1);
        return acc.finish();
    });
    for (std::size_t idx = 0; idx < n; ++idx)
        for (const auto& t : defects[idx].terms()) {
            long p = t.e[0], q = t.e[1];
            if (std::abs(p) > W || std::abs(q) > W) continue;
            rep.jacobi = false;
            rep.jacobi_failures.emplace_back(int(idx) / (l * l), int(idx) / l % l, int(idx) % l, p, q);
            break;
        }
    return rep;
}

}  // namespace dmpva
