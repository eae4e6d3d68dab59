#pragma once

// Shared helpers for the test programs: seeded random elements and short constructors.

#include <fstream>
#include <random>
#include <sstream>

#include "dmpva/io.hpp"

namespace dmpva::testing {

using Rng = std::mt19937_64;

inline long uniform(Rng& g, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(g); }

/// Small nonzero rational with numerator in [-3, 3] and denominator in [1, 3].
inline Q small_q(Rng& g) {
    long n = 0;
    while (n == 0) n = uniform(g, -3, 3);
    return Q(n, uniform(g, 1, 3));
}

inline Word random_word(Rng& g, const Signature& sig, int maxlen, long smax) {
    Word w;
    int len = int(uniform(g, 0, maxlen));
    for (int i = 0; i < len; ++i) {
        int v = int(uniform(g, 0, sig.size() - 1));
        long n = sig.finite() ? uniform(g, 0, sig.order - 1) : uniform(g, -smax, smax);
        w.push_back(make_letter(v, n));
    }
    return w;
}

inline Poly random_poly(Rng& g, const Signature& sig, int maxlen = 3, int maxterms = 3, long smax = 2) {
    std::vector<Poly::Term> t;
    int n = int(uniform(g, 1, maxterms));
    for (int i = 0; i < n; ++i) t.emplace_back(random_word(g, sig, maxlen, smax), small_q(g));
    return Poly(std::move(t));
}

inline Tensor random_tensor(Rng& g, const Signature& sig, int arity, int maxlen = 2, int maxterms = 3, long smax = 2) {
    std::vector<Tensor::Term> t;
    int n = int(uniform(g, 1, maxterms));
    for (int i = 0; i < n; ++i) {
        KeyBuilder kb;
        for (int s = 0; s < arity; ++s) {
            Word w = random_word(g, sig, maxlen, smax);
            kb.slot().put(as_span(w));
        }
        t.emplace_back(kb.take(), small_q(g));
    }
    return Tensor(arity, std::move(t));
}

/// One-variable Laurent tensor with exponents in [-emax, emax].
inline Laurent random_laurent(Rng& g, const Signature& sig, int terms = 2, long emax = 2, int maxlen = 2) {
    LaurentAcc acc(2, 1, sig.order);
    for (int i = 0; i < terms; ++i) {
        long e = sig.finite() ? uniform(g, 0, sig.order - 1) : uniform(g, -emax, emax);
        Tensor t = random_tensor(g, sig, 2, maxlen, 2);
        for (const auto& [k, c] : t.terms()) acc.add(Exp{e, 0, 0}, k, c);
    }
    return acc.finish();
}

/// Random skewsymmetric bracket: a random matrix plus its skew partner.
inline BracketSpec random_skew_spec(Rng& g, const Signature& sig, int terms = 1, long emax = 1, int maxlen = 1) {
    BracketSpec s(sig);
    for (int a = 0; a < sig.size(); ++a)
        for (int b = a; b < sig.size(); ++b) {
            Laurent L = random_laurent(g, sig, terms, emax, maxlen);
            if (a == b) L = L + skew_partner(L);
            s.set(a, b, L);
        }
    return complete_skew(s);
}

struct Ctx {
    Signature sig;
    Poly p(const std::string& e) const { return parse_expr(e, sig); }
    Tensor t(const std::string& a, const std::string& b) const { return Tensor::pure({p(a), p(b)}); }
    Tensor t3(const std::string& a, const std::string& b, const std::string& c) const {
        return Tensor::pure({p(a), p(b), p(c)});
    }
    Laurent lam(const Tensor& x, long n) const { return Laurent::monomial(x, Exp{n, 0, 0}, 1, sig.order); }
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

#ifdef DMPVA_FIXTURES
inline std::string fixture(const std::string& name) { return std::string(DMPVA_FIXTURES) + "/" + name; }
inline SpecDoc load_fixture(const std::string& name) { return parse_spec(read_file(fixture(name))); }
#endif

}  // namespace dmpva::testing
