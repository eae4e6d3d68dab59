// Command-line front end. Every subcommand builds one ordered report and renders it as text or JSON.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dmpva/io.hpp"

using namespace dmpva;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SpecDoc load(const std::string& path) {
    try {
        return parse_spec(read_file(path));
    } catch (const SpecError& e) {
        throw SpecError(path + ": " + e.what());
    }
}

std::pair<long, long> parse_window(const std::string& w) {
    auto c = w.find(':', 1);
    if (c == std::string::npos) throw CLI::ValidationError("--window", "expected LO:HI");
    long lo = std::stol(w.substr(0, c)), hi = std::stol(w.substr(c + 1));
    if (lo > hi) throw CLI::ValidationError("--window", "LO must not exceed HI");
    return {lo, hi};
}

std::string gen_name(const Signature& sig, std::initializer_list<int> idx) {
    std::string s;
    for (int i : idx) s += (s.empty() ? "" : ",") + sig.names[std::size_t(i)];
    return s;
}

/// A polynomial in the single letter z read as Σ c z^p.
std::vector<std::pair<Q, long>> z_terms(const std::string& text) {
    Poly p = parse_expr(text, Signature({"z"}));
    std::vector<std::pair<Q, long>> out;
    for (const auto& [w, c] : p.terms()) {
        for (Letter l : w)
            if (shift_of(l) != 0) throw SpecError("rational functions take plain powers of z");
        out.emplace_back(c, long(w.size()));
    }
    return out;
}

ojson series_json(const std::vector<std::pair<long, Q>>& coeffs) {
    ojson a = ojson::array();
    for (const auto& [e, c] : coeffs) a.push_back(ojson::array({e, c.str()}));
    return a;
}

ojson skew_json(const BracketSpec& s) {
    SkewResult r = check_skew(s);
    ojson o{{"pass", r.pass}};
    if (r.witness) {
        const auto& [a, b, d] = *r.witness;
        o["witness"] = {{"pair", gen_name(s.signature(), {a, b})}, {"difference", laurent_str(d, s.signature())}};
    }
    return o;
}

ojson jacobi_json(const BracketSpec& s) {
    JacobiResult r = check_jacobi(s);
    ojson o{{"pass", r.pass}};
    if (!r.pass) {
        ojson f = ojson::array();
        for (const auto& x : r.failures)
            f.push_back({{"triple", gen_name(s.signature(), {x.i, x.j, x.k})}, {"defect", laurent_str(x.defect, s.signature())}});
        o["failures"] = f;
    }
    return o;
}

ojson flow_json(const EvolutionEquation& P, const Signature& sig) {
    ojson o = ojson::object();
    for (int i = 0; i < sig.size(); ++i) o[sig.names[std::size_t(i)]] = poly_str(P[std::size_t(i)], sig);
    return o;
}

std::vector<Poly> components(const std::string& text, const Signature& sig) {
    std::vector<Poly> F;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ';')) F.push_back(parse_expr(part, sig));
    if (int(F.size()) != sig.size()) throw SpecError("expected one component per variable, separated by ';'");
    return F;
}

const BracketSpec& local_only(const SpecDoc& d) {
    if (d.has_rational) throw SpecError("document has a rational section; use 'rational check'");
    return d.bracket;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact checks for double multiplicative Poisson vertex algebras"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string format = "text";
    int nthreads = 0;
    app.add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--threads", nthreads, "worker threads (0: DMPVA_THREADS or hardware)")->check(CLI::NonNegativeNumber);

    std::string spec_path, left, right, third, ham, density, other, comps, num, den = "1", dir = "+", window;
    bool want_skew = false, want_jacobi = false;
    int n = 1;
    long k = 1, p = 0;
    std::string alpha, beta;

    auto* check = app.add_subcommand("check", "skewsymmetry and Jacobi on generators");
    check->add_flag("--skew", want_skew);
    check->add_flag("--jacobi", want_jacobi);
    check->add_option("spec", spec_path)->required();

    auto* eval = app.add_subcommand("eval", "{{f λ g}} by the Master Formula");
    eval->add_option("--left", left)->required();
    eval->add_option("--right", right)->required();
    eval->add_option("spec", spec_path)->required();

    auto* triple = app.add_subcommand("triple", "Jacobi defect of three elements");
    triple->add_option("--a", left)->required();
    triple->add_option("--b", right)->required();
    triple->add_option("--c", third)->required();
    triple->add_option("spec", spec_path)->required();

    auto* flow = app.add_subcommand("flow", "Hamiltonian evolution equation of ∫h");
    flow->add_option("--hamiltonian", ham)->required();
    flow->add_option("spec", spec_path)->required();

    auto* rep = app.add_subcommand("rep", "induced commutative bracket on N×N matrices");
    rep->add_option("--n", n)->check(CLI::Range(1, 8));
    rep->add_option("spec", spec_path)->required();

    auto* r1 = app.add_subcommand("classify-r1", "rank one classification against the Jacobi check");
    r1->add_option("spec", spec_path)->required();

    auto* r2 = app.add_subcommand("classify-r2", "rank two classification against the Jacobi check");
    r2->add_option("spec", spec_path)->required();

    auto* rat = app.add_subcommand("rational", "rational and non-local layer");
    rat->require_subcommand(1)->fallthrough();
    auto* iota = rat->add_subcommand("iota", "expansion of num/den in z");
    iota->add_option("--num", num)->required();
    iota->add_option("--den", den);
    iota->add_option("--dir", dir)->check(CLI::IsMember({"+", "-"}));
    iota->add_option("--window", window);
    auto* nib = rat->add_subcommand("nib", "one-variable rational structure and its conditions");
    nib->add_option("--alpha", alpha)->required();
    nib->add_option("--beta", beta)->required();
    nib->add_option("--k", k);
    nib->add_option("--p", p);
    nib->add_option("--window", window);
    auto* rcheck = rat->add_subcommand("check", "truncated skew and Jacobi");
    rcheck->add_option("--window", window);
    rcheck->add_option("spec", spec_path)->required();

    auto* fn = app.add_subcommand("functional", "local functionals");
    fn->require_subcommand(1)->fallthrough();
    auto* canon = fn->add_subcommand("canonicalize", "normal form of ∫f");
    canon->add_option("--density", density)->required();
    canon->add_option("spec", spec_path)->required();
    auto* fbr = fn->add_subcommand("bracket", "{∫f, ∫g}");
    fbr->add_option("--f", density)->required();
    fbr->add_option("--g", other)->required();
    fbr->add_option("spec", spec_path)->required();

    auto* vc = app.add_subcommand("varcomplex", "variational complex");
    vc->require_subcommand(1)->fallthrough();
    auto* delta = vc->add_subcommand("delta", "δ of a 0-form (--density) or a 1-form (--components)");
    delta->add_option("--density", density);
    delta->add_option("--components", comps);
    delta->add_option("spec", spec_path)->required();
    auto* frechet = vc->add_subcommand("frechet", "Frechet derivative of a 1-form");
    frechet->add_option("--components", comps)->required();
    frechet->add_option("spec", spec_path)->required();

    CLI11_PARSE(app, argc, argv);
    set_threads(nthreads);

    ojson out;
    bool pass = true;
    bool verdict = check->parsed() || rep->parsed() || r1->parsed() || r2->parsed() || nib->parsed() || rcheck->parsed();
    try {
        if (check->parsed()) {
            SpecDoc d = load(spec_path);
            const BracketSpec& s = local_only(d);
            if (!want_skew && !want_jacobi) want_skew = want_jacobi = true;
            out["command"] = "check";
            ojson sk = skew_json(s);
            bool skew_ok = sk["pass"].get<bool>();
            if (want_skew) out["skew"] = sk, pass = pass && skew_ok;
            if (want_jacobi) {
                if (!skew_ok) out["jacobi"] = {{"pass", false}, {"reason", "requires a skewsymmetric bracket"}}, pass = false;
                else {
                    ojson j = jacobi_json(s);
                    pass = pass && j["pass"].get<bool>();
                    out["jacobi"] = j;
                }
            }
        } else if (eval->parsed()) {
            SpecDoc d = load(spec_path);
            const BracketSpec& s = local_only(d);
            out["command"] = "eval";
            out["bracket"] = laurent_str(eval_bracket(s, parse_expr(left, d.sig()), parse_expr(right, d.sig())), d.sig());
        } else if (triple->parsed()) {
            SpecDoc d = load(spec_path);
            const BracketSpec& s = local_only(d);
            Laurent t = triple_bracket(s, parse_expr(left, d.sig()), parse_expr(right, d.sig()), parse_expr(third, d.sig()));
            out["command"] = "triple";
            out["defect"] = laurent_str(t, d.sig());
            out["zero"] = t.is_zero();
        } else if (flow->parsed()) {
            SpecDoc d = load(spec_path);
            out["command"] = "flow";
            out["flow"] = flow_json(hamiltonian_flow(local_only(d), parse_expr(ham, d.sig())), d.sig());
        } else if (rep->parsed()) {
            SpecDoc d = load(spec_path);
            const BracketSpec& s = local_only(d);
            CommCheckResult r = check_commutative_mpva(induce_bracket(s, n));
            out["command"] = "rep";
            out["n"] = n;
            out["skew"] = {{"pass", r.skew}, {"failures", r.skew_failures.size()}};
            out["jacobi"] = {{"pass", r.jacobi}, {"failures", r.jacobi_failures.size()}};
            pass = r.pass();
        } else if (r1->parsed()) {
            SpecDoc d = load(spec_path);
            const BracketSpec& s = local_only(d);
            if (s.size() != 1) throw SpecError("rank one classification needs one variable");
            const Laurent& g = s.gen(0, 0);
            long top = 0;
            for (const auto& t : g.terms()) top = std::max(top, t.e[0]);
            if (top < 1) throw SpecError("expected a bracket f λ^N − (λS)^{-N} f^σ with N >= 1");
            Tensor f(2, {});
            for (const auto& [e, t] : g.coeffs())
                if (e[0] == top) f = t;
            bool shape = r1_spec(f, top) == s;
            bool cls = check_class_r1(f, top);
            bool jac = jacobi_holds(s);
            out["command"] = "classify-r1";
            out["N"] = top;
            out["f"] = tensor_str(f, d.sig());
            out["shape"] = shape;
            out["class"] = cls;
            out["jacobi"] = jac;
            out["agree"] = cls == jac;
            pass = shape && cls == jac;
        } else if (r2->parsed()) {
            SpecDoc d = load(spec_path);
            const BracketSpec& s = local_only(d);
            auto K = r2_coeffs(s);
            if (!K || r2_spec(*K) != s) throw SpecError("not of the rank two shape {{u λ v}} = Σ K v^a u_k^b ⊗ u_k^c v^d");
            R2Result r = check_class_r2(*K);
            bool jac = jacobi_holds(s);
            out["command"] = "classify-r2";
            out["class"] = r.pass;
            if (!r.pass) out["violated"] = r.violated;
            out["jacobi"] = jac;
            out["agree"] = r.pass == jac;
            pass = r.pass == jac;
        } else if (iota->parsed()) {
            RationalFn r = RationalFn::from_terms(z_terms(num), z_terms(den));
            auto [lo, hi] = window.empty() ? std::pair{-8L, 8L} : parse_window(window);
            int d = dir == "+" ? 1 : -1;
            Series s = iota_expand(r, d, d > 0 ? hi : lo);
            out["command"] = "rational iota";
            out["function"] = r.str();
            out["direction"] = dir;
            out["window"] = ojson::array({lo, hi});
            out["coefficients"] = series_json(series_window(s, lo, hi));
        } else if (nib->parsed()) {
            auto [lo, hi] = window.empty() ? std::pair{-6L, 6L} : parse_window(window);
            NibData d = build_nib(Q(alpha), Q(beta), k, p);
            FunctionalEqReport fe = check_functional_equations(d.a, d.b, d.c, lo, hi);
            out["command"] = "rational nib";
            out["a"] = d.a.str();
            out["b"] = d.b.str();
            out["c"] = d.c.str();
            out["constraint"] = d.constraint_ok;
            ojson eq = ojson::array();
            for (int i = 0; i < 4; ++i) {
                ojson e{{"pass", fe.ok[std::size_t(i)]}};
                if (fe.residual[std::size_t(i)]) {
                    const auto& [ij, v] = *fe.residual[std::size_t(i)];
                    e["residual"] = {{"exponent", ojson::array({ij.first, ij.second})}, {"value", v.str()}};
                }
                eq.push_back(e);
            }
            out["conditions"] = {{"window", ojson::array({lo, hi})}, {"covered", fe.covered}, {"gamma", fe.gamma.str()}, {"identities", eq}};
            pass = fe.pass();
            if (!d.constraint_ok) out["warning"] = "α(2β+α) ≠ 0";
        } else if (rcheck->parsed()) {
            SpecDoc d = load(spec_path);
            auto [lo, hi] = window.empty() ? std::pair{-2L, 2L} : parse_window(window);
            long W = std::max(std::abs(lo), std::abs(hi));
            TruncatedReport r = check_truncated_bracket(truncated_of(d), W);
            out["command"] = "rational check";
            out["window"] = W;
            out["truncation"] = r.T;
            ojson nl{{"pass", r.nonlocal_skew}};
            if (r.nonlocal_witness) {
                const auto& [a, b, e] = *r.nonlocal_witness;
                nl["witness"] = {{"pair", gen_name(d.sig(), {a, b})}, {"exponent", e}};
            }
            out["nonlocal_skew"] = nl;
            if (r.rational_skew) {
                ojson rs{{"pass", *r.rational_skew}};
                if (r.rational_witness) {
                    const auto& [a, b, e] = *r.rational_witness;
                    rs["witness"] = {{"pair", gen_name(d.sig(), {a, b})}, {"exponent", e}};
                }
                out["rational_skew"] = rs;
            }
            ojson jf = ojson::array();
            for (const auto& [i, j, kk, pp, qq] : r.jacobi_failures)
                jf.push_back({{"triple", gen_name(d.sig(), {i, j, kk})}, {"exponent", ojson::array({pp, qq})}});
            out["jacobi"] = {{"pass", r.jacobi}, {"failures", jf}};
            bool skew_ok = r.rational_skew ? *r.rational_skew : r.nonlocal_skew;
            pass = skew_ok && r.jacobi;
        } else if (canon->parsed()) {
            SpecDoc d = load(spec_path);
            out["command"] = "functional canonicalize";
            out["functional"] = poly_str(canonicalize(parse_expr(density, d.sig()), d.sig().order).rep, d.sig());
        } else if (fbr->parsed()) {
            SpecDoc d = load(spec_path);
            const BracketSpec& s = local_only(d);
            LocalFunctional r = functional_bracket(s, parse_expr(density, d.sig()), parse_expr(other, d.sig()));
            out["command"] = "functional bracket";
            out["bracket"] = poly_str(r.rep, d.sig());
        } else if (delta->parsed()) {
            SpecDoc d = load(spec_path);
            const Signature& sig = d.sig();
            out["command"] = "varcomplex delta";
            if (density.empty() == comps.empty()) throw SpecError("give exactly one of --density and --components");
            if (!density.empty()) {
                KFormArray w = de_rham_delta(zero_form(parse_expr(density, sig), sig.size(), sig.order));
                ojson c = ojson::object();
                for (int i = 0; i < sig.size(); ++i) c[sig.names[std::size_t(i)]] = poly_str(w.F[std::size_t(i)], sig);
                out["one_form"] = c;
            } else {
                KFormArray w = de_rham_delta(one_form(components(comps, sig), sig.order));
                ojson c = ojson::object();
                for (int i = 0; i < sig.size(); ++i)
                    for (int j = 0; j < sig.size(); ++j)
                        c[gen_name(sig, {i, j})] = laurent_str(w.A[std::size_t(i * sig.size() + j)], sig);
                out["two_form"] = c;
                out["closed"] = is_zero_form(w);
            }
        } else if (frechet->parsed()) {
            SpecDoc d = load(spec_path);
            const Signature& sig = d.sig();
            auto F = components(comps, sig);
            DiffOpMatrix D = frechet_derivative(F, sig.order);
            ojson c = ojson::object();
            for (int i = 0; i < sig.size(); ++i)
                for (int j = 0; j < sig.size(); ++j) c[gen_name(sig, {i, j})] = laurent_str(D.at(i, j), sig);
            out["command"] = "varcomplex frechet";
            out["derivative"] = c;
            out["self_adjoint"] = adjoint(D) == D;
            out["closed"] = is_closed(F, sig.order);
        }
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (verdict) out["result"] = pass ? "PASS" : "FAIL";
    std::cout << render_report(out, format);
    return pass ? 0 : 1;
}
