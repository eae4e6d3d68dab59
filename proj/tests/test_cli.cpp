#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>

#include "support.hpp"

using namespace dmpva;
using namespace dmpva::testing;

namespace {
const Ctx UV{Signature({"u", "v"})};

const char* kFixtures[] = {"class1.json",     "empty.json",      "free_a.json",      "free_c.json",     "nib.json",
                           "nonloc_a.json",   "nonloc_b.json",   "not_jacobi.json",  "rational_eq1.json",
                           "rational_exa.json", "simple.json",   "thm_case_i.json",  "thm_case_ii.json",
                           "thm_case_iii.json", "thm_case_iv.json", "thm_case_v.json", "two_quad.json"};

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

struct Run {
    int code = -1;
    std::string out;
};

/// Runs the CLI with stderr folded into the captured output.
Run cli(const std::string& args) {
    std::string cmd = std::string(DMPVA_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

/// Every scalar leaf of the JSON report must appear in the text rendering.
void leaves(const ojson& v, std::vector<std::string>& out) {
    if (v.is_object())
        for (const auto& [k, x] : v.items()) out.push_back(k), leaves(x, out);
    else if (v.is_array())
        for (const auto& x : v) leaves(x, out);
    else
        out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
}
}  // namespace

TEST_CASE("expression grammar") {
    CHECK(UV.p("u*v[1] - 2/3*u^2") == Poly({{Word{make_letter(0, 0), make_letter(1, 1)}, Q(1)},
                                             {Word{make_letter(0, 0), make_letter(0, 0)}, Q(-2, 3)}}));
    CHECK(UV.p("(u+v)^2") == UV.p("u*u + u*v + v*u + v*v"));
    CHECK(UV.p("3") == Poly::constant(Q(3)));
    CHECK(UV.p("u[-2]") == Poly::gen(0, -2));
    CHECK(UV.p("u*v - v*u") != UV.p("0"));
    CHECK(error_of([] { UV.p("u*"); }).find("column 3") != std::string::npos);
    CHECK(error_of([] { UV.p("w"); }).find("unknown variable 'w'") != std::string::npos);
    CHECK(error_of([] { UV.p("2/0*u"); }).find("zero denominator") != std::string::npos);
    CHECK(error_of([] { UV.p("u["); }).find("expected a number") != std::string::npos);
    CHECK_THROWS_AS(parse_expr("u +", UV.sig), SpecError);
}

TEST_CASE("spec documents") {
    SpecDoc a = load_fixture("free_a.json");
    Ctx U{Signature({"u"})};
    CHECK(a.bracket.gen(0, 0) == U.lam(U.t("u", "1") - U.t("1", "u"), 0));
    CHECK_FALSE(a.has_rational);
    SpecDoc e = load_fixture("empty.json");
    CHECK(e.bracket == BracketSpec(UV.sig));
    SpecDoc r = load_fixture("rational_eq1.json");
    CHECK(r.has_rational);
    CHECK(r.rational.at({0, 0}).chains.size() == 1);
    CHECK(r.rational.at({0, 0}).chains[0].r[0] ==
          (RationalFn(1) + RationalFn::monomial(1, 1)) / (RationalFn(1) - RationalFn::monomial(1, 1)));
    CHECK(load_fixture("nonloc_a.json").sig().order == 5);
}

TEST_CASE("malformed documents name the offending place") {
    auto err = [](const char* f) { return error_of([&] { load_fixture(std::string("invalid/") + f); }); };
    CHECK(err("bad_tensor.json").find("/bracket/u,u/0/tensor/0") != std::string::npos);
    CHECK(err("bad_shift.json").find("/bracket/u,u/0/tensor/0/1/0/1") != std::string::npos);
    CHECK(err("unknown_key.json").find("/algebra/field") != std::string::npos);
    CHECK(err("syntax.json").find("3:23") != std::string::npos);
    CHECK(error_of([] { parse_spec("{\"algebra\": {\"variables\": [\"u\"], \"order\": \"infinite\"}, \"bracket\": "
                                   "{\"u,w\": []}}"); })
              .find("/bracket/u,w") != std::string::npos);
    CHECK_THROWS_AS(parse_spec("[]"), SpecError);
}

TEST_CASE("serialization round trip") {
    for (const char* f : kFixtures) {
        SpecDoc d = load_fixture(f);
        SpecDoc back = parse_spec(serialize_spec(d).dump());
        CHECK_MESSAGE(back.bracket == d.bracket, f);
        CHECK(back.has_rational == d.has_rational);
        CHECK(back.direction == d.direction);
        CHECK(back.rational == d.rational);
        // Serialization is a fixed point after one pass.
        CHECK(serialize_spec(back).dump() == serialize_spec(d).dump());
    }
    Rng g(1);
    for (int i = 0; i < 20; ++i) {
        SpecDoc d{random_skew_spec(g, UV.sig, 2, 2, 2), 1, {}, false};
        CHECK(parse_spec(serialize_spec(d).dump()).bracket == d.bracket);
    }
}

TEST_CASE("report rendering") {
    ojson r{{"command", "x"}, {"list", ojson::array({1, 2})}, {"nested", {{"a", "b"}, {"rows", ojson::array({ojson::array({1, "2"})})}}}};
    CHECK(render_report(r, "text") == "command: x\nlist: [1,2]\nnested:\n  a: b\n  rows:\n    - [1,\"2\"]\n");
    CHECK(ojson::parse(render_report(r, "json")) == r);
}

TEST_CASE("command line") {
    std::string F = std::string(DMPVA_FIXTURES) + "/";
    Run ok = cli("check --skew --jacobi " + F + "thm_case_v.json");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("result: PASS") != std::string::npos);

    Run bad = cli("check --skew --jacobi " + F + "not_jacobi.json");
    CHECK(bad.code == 1);
    CHECK(bad.out.find("triple: u,u,v") != std::string::npos);

    Run ev = cli("eval --left u --right \"u^2\" " + F + "free_a.json");
    CHECK(ev.code == 0);
    CHECK(ev.out.find("bracket: [-(1 ⊗ u*u) + (u*u ⊗ 1)]") != std::string::npos);

    Run fl = cli("flow --hamiltonian \"1/3*u^3\" " + F + "simple.json");
    CHECK(fl.out.find("v: u*u") != std::string::npos);

    Run tr = cli("triple --a u --b u --c v " + F + "not_jacobi.json");
    CHECK(tr.out.find("zero: false") != std::string::npos);

    CHECK(cli("rep --n 2 " + F + "thm_case_v.json").code == 0);
    CHECK(cli("rep --n 2 " + F + "not_jacobi.json").code == 1);
    CHECK(cli("classify-r1 " + F + "class1.json").code == 0);
    CHECK(cli("classify-r2 " + F + "thm_case_ii.json").code == 0);
    CHECK(cli("classify-r2 " + F + "free_a.json").code == 2);

    Run io = cli("rational iota --num 1 --den \"1-z\" --dir - --window -2:1");
    CHECK(io.out.find("- [-2,\"-1\"]\n  - [-1,\"-1\"]\n  - [0,\"0\"]\n  - [1,\"0\"]") != std::string::npos);
    CHECK(cli("rational nib --alpha -1 --beta 1/2 --k 1 --p 2").code == 0);
    CHECK(cli("rational nib --alpha 0 --beta 1 --k 2 --p 0").code == 0);
    CHECK(cli("rational nib --alpha 1 --beta 1").code == 1);
    Run eq1 = cli("rational check " + F + "rational_eq1.json --format json");
    CHECK(eq1.code == 0);
    ojson j = ojson::parse(eq1.out);
    CHECK(j["rational_skew"]["pass"] == true);
    CHECK(j["nonlocal_skew"]["pass"] == false);

    CHECK(cli("functional bracket --f \"u^2\" --g v " + F + "simple.json").out.find("bracket: 2*u") != std::string::npos);
    CHECK(cli("functional canonicalize --density \"u[1]*u[2]\" " + F + "free_a.json").out.find("functional: u*u[1]") !=
          std::string::npos);
    CHECK(cli("varcomplex delta --density \"u*u[1]\" " + F + "free_a.json").out.find("u: u[-1] + u[1]") != std::string::npos);
    CHECK(cli("varcomplex frechet --components \"u[1]+u[-1]\" " + F + "free_a.json").out.find("closed: true") !=
          std::string::npos);

    Run e = cli("check " + F + "invalid/bad_tensor.json");
    CHECK(e.code == 2);
    CHECK(e.out.find("/bracket/u,u/0/tensor/0") != std::string::npos);
    CHECK(cli("check " + F + "rational_exa.json").code == 2);
    CHECK(cli("nonsense").code != 0);
}

TEST_CASE("text and JSON reports carry the same data") {
    std::string F = std::string(DMPVA_FIXTURES) + "/";
    for (const std::string& args :
         {"check " + F + "not_jacobi.json", std::string("rational nib --alpha 1 --beta 1"), "rational check " + F + "rational_eq1.json",
          "rep --n 2 " + F + "free_c.json", "varcomplex delta --components \"u[1]\" " + F + "free_a.json"}) {
        Run t = cli(args), js = cli(args + " --format json");
        CHECK(t.code == js.code);
        std::vector<std::string> ls;
        leaves(ojson::parse(js.out), ls);
        for (const auto& l : ls) CHECK_MESSAGE(t.out.find(l) != std::string::npos, args, " missing ", l);
    }
}

TEST_CASE("reports do not depend on the thread count") {
    std::string F = std::string(DMPVA_FIXTURES) + "/";
    for (const std::string& args : {"check " + F + "not_jacobi.json", "rep --n 2 " + F + "thm_case_v.json",
                                    "rational check --window -2:2 " + F + "nib.json"}) {
        Run a = cli("--threads 1 " + args), b = cli("--threads 4 " + args);
        CHECK(a.code == b.code);
        CHECK(a.out == b.out);
    }
}
