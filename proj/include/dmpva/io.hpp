#pragma once

// Spec documents, the polynomial expression grammar, and text/JSON rendering.

#include <sstream>

#include <json.hpp>

#include "hamiltonian.hpp"
#include "rational.hpp"
#include "rep.hpp"

namespace dmpva {

using ojson = nlohmann::ordered_json;

/// Error carrying a JSON-pointer style path or a line:column location.
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------------------------
// Rendering

inline std::string letter_str(Letter l, const Signature& sig) {
    int v = var_of(l);
    std::string s = v >= 0 && v < sig.size() ? sig.names[std::size_t(v)] : "x" + std::to_string(v);
    long n = shift_of(l);
    if (n != 0) s += "[" + std::to_string(n) + "]";
    return s;
}

inline std::string word_str(Span w, const Signature& sig) {
    if (w.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += "*";
        s += letter_str(w[i], sig);
    }
    return s;
}

namespace detail {
inline void append_signed(std::string& out, const Q& c, const std::string& body) {
    bool neg = c.sign() < 0;
    Q a = neg ? -c : c;
    if (out.empty()) out += neg ? "-" : "";
    else out += neg ? " - " : " + ";
    if (a == Q(1)) out += body;
    else if (body == "1") out += a.str();
    else out += a.str() + "*" + body;
}
}  // namespace detail

inline std::string poly_str(const Poly& p, const Signature& sig) {
    std::string out;
    for (const auto& [w, c] : p.terms()) detail::append_signed(out, c, word_str(as_span(w), sig));
    return out.empty() ? "0" : out;
}

inline std::string key_str(const Key& k, int arity, const Signature& sig) {
    auto s = slots_of(k, arity);
    std::string r;
    for (int i = 0; i < arity; ++i) {
        if (i) r += " ⊗ ";
        r += word_str(s[std::size_t(i)], sig);
    }
    return r;
}

inline std::string tensor_str(const Tensor& t, const Signature& sig) {
    std::string out;
    for (const auto& [k, c] : t.terms()) {
        std::string body = key_str(k, t.arity(), sig);
        if (t.arity() > 1) body = "(" + body + ")";
        detail::append_signed(out, c, body);
    }
    return out.empty() ? "0" : out;
}

inline std::string monomial_vars(const Exp& e, int nvars, const std::vector<std::string>& names = {"λ", "μ", "x"}) {
    std::string s;
    for (int i = 0; i < nvars; ++i) {
        if (e[std::size_t(i)] == 0) continue;
        if (!s.empty()) s += "*";
        s += names[std::size_t(i)];
        if (e[std::size_t(i)] != 1) s += "^" + std::to_string(e[std::size_t(i)]);
    }
    return s;
}

inline std::string laurent_str(const Laurent& L, const Signature& sig) {
    if (L.is_zero()) return "0";
    std::string out;
    for (const auto& [e, t] : L.coeffs()) {
        if (!out.empty()) out += " + ";
        std::string v = monomial_vars(e, L.nvars());
        out += "[" + tensor_str(t, sig) + "]";
        if (!v.empty()) out += "*" + v;
    }
    return out;
}

inline ojson word_json(Span w, const Signature& sig) {
    ojson a = ojson::array();
    for (Letter l : w) a.push_back(ojson::array({sig.names[std::size_t(var_of(l))], shift_of(l)}));
    return a;
}

inline ojson tensor_json(const Tensor& t, const Signature& sig) {
    ojson a = ojson::array();
    for (const auto& [k, c] : t.terms()) {
        ojson term = ojson::array({c.str()});
        auto s = slots_of(k, t.arity());
        for (int i = 0; i < t.arity(); ++i) term.push_back(word_json(s[std::size_t(i)], sig));
        a.push_back(term);
    }
    return a;
}

inline ojson poly_json(const Poly& p, const Signature& sig) { return tensor_json(Tensor::from_poly(p), sig); }

inline ojson laurent_json(const Laurent& L, const Signature& sig) {
    ojson a = ojson::array();
    for (const auto& [e, t] : L.coeffs()) {
        ojson ex = ojson::array();
        for (int i = 0; i < std::max(1, L.nvars()); ++i) ex.push_back(e[std::size_t(i)]);
        a.push_back({{"exponent", ex}, {"tensor", tensor_json(t, sig)}});
    }
    return a;
}

inline std::string comm_mono_str(const Mono& m, const Signature& sig) {
    if (m.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < m.size();) {
        std::size_t j = i;
        while (j < m.size() && m[j] == m[i]) ++j;
        if (!s.empty()) s += "*";
        s += cgen_str(m[i], sig);
        if (j - i > 1) s += "^" + std::to_string(j - i);
        i = j;
    }
    return s;
}

inline std::string comm_poly_str(const CommPoly& p, const Signature& sig) {
    std::string out;
    for (const auto& [m, c] : p.terms()) detail::append_signed(out, c, comm_mono_str(m, sig));
    return out.empty() ? "0" : out;
}

inline std::string comm_laurent_str(const CommLaurent& L, const Signature& sig, int nvars = 1) {
    if (L.empty()) return "0";
    std::string out;
    for (const auto& [e, p] : L) {
        if (!out.empty()) out += " + ";
        std::string v = monomial_vars(e, nvars);
        out += "[" + comm_poly_str(p, sig) + "]";
        if (!v.empty()) out += "*" + v;
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Expression grammar: ident[n], *, +, -, ^k, p/q, parentheses

class ExprParser {
public:
    ExprParser(std::string text, const Signature& sig) : sig_(sig) {
        // Accept the Unicode minus sign.
        std::string t;
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text.compare(i, 3, "\xE2\x88\x92") == 0) {
                t += '-';
                i += 2;
            } else {
                t += text[i];
            }
        }
        s_ = std::move(t);
    }

    Poly parse() {
        Poly p = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw SpecError("expression error at column " + std::to_string(pos_ + 1) + ": " + msg);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    std::string digits() {
        skip();
        std::size_t b = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (b == pos_) fail("expected a number");
        return s_.substr(b, pos_ - b);
    }
    long integer() {
        skip();
        bool neg = false;
        if (eat('-')) neg = true;
        else eat('+');
        std::string d = digits();
        if (d.size() > 9) fail("integer too large");
        long v = std::stol(d);
        return neg ? -v : v;
    }
    Poly expr() {
        Poly acc = term();
        for (;;) {
            if (eat('+')) acc += term();
            else if (eat('-')) acc -= term();
            else return acc;
        }
    }
    Poly term() {
        bool neg = false;
        for (;;) {
            if (eat('-')) neg = !neg;
            else if (!eat('+')) break;
        }
        Poly acc = factor();
        while (eat('*')) acc = acc * factor();
        return neg ? -acc : acc;
    }
    Poly factor() {
        Poly base = primary();
        if (eat('^')) {
            std::string d = digits();
            if (d.size() > 4) fail("exponent too large");
            int k = std::stoi(d);
            if (k < 1) fail("exponent must be a positive integer");
            base = power(base, k);
        }
        return base;
    }
    Poly primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Poly p = expr();
            if (!eat(')')) fail("expected ')'");
            return p;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string n = digits();
            std::string d = "1";
            std::size_t save = pos_;
            if (eat('/')) {
                skip();
                if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) d = digits();
                else pos_ = save;
            }
            if (std::all_of(d.begin(), d.end(), [](char ch) { return ch == '0'; })) fail("zero denominator");
            return Poly::constant(Q(n + "/" + d));
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t b = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string name = s_.substr(b, pos_ - b);
            int v = sig_.index_of(name);
            if (v < 0) {
                pos_ = b;
                fail("unknown variable '" + name + "'");
            }
            long shift = 0;
            if (eat('[')) {
                shift = integer();
                if (!eat(']')) fail("expected ']'");
            }
            if (sig_.finite() && (shift < 0 || shift >= sig_.order)) fail("shift must lie in [0, order)");
            return Poly::gen(v, shift);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string s_;
    std::size_t pos_ = 0;
    const Signature& sig_;
};

inline Poly parse_expr(const std::string& text, const Signature& sig) { return ExprParser(text, sig).parse(); }

// ---------------------------------------------------------------------------------------------
// Spec documents

struct SpecDoc {
    BracketSpec bracket;
    int direction = 1;
    /// gen(a, b) as rational operators; empty when the document has no "rational" section.
    std::map<std::pair<int, int>, RationalPseudoOp> rational;
    bool has_rational = false;

    const Signature& sig() const { return bracket.signature(); }
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line, col = 1;
        else if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) ++col;
    }
    return std::to_string(line) + ":" + std::to_string(col);
}

inline void only_keys(const ojson& o, std::initializer_list<const char*> keys, const std::string& path) {
    if (!o.is_object()) throw SpecError(path + ": expected an object");
    for (const auto& [k, v] : o.items()) {
        bool ok = false;
        for (const char* a : keys) ok = ok || k == a;
        if (!ok) throw SpecError(path + "/" + k + ": unknown key");
    }
}

inline long as_long(const ojson& v, const std::string& path) {
    if (!v.is_number_integer()) throw SpecError(path + ": expected an integer");
    return v.get<long>();
}

inline Q as_coeff(const ojson& v, const std::string& path) {
    try {
        if (v.is_string()) return Q(v.get<std::string>());
        if (v.is_number_integer()) return Q(v.get<long>());
    } catch (const std::exception& e) {
        throw SpecError(path + ": " + e.what());
    }
    throw SpecError(path + ": coefficient must be a string \"p/q\" or an integer");
}

inline Word parse_word(const ojson& v, const Signature& sig, const std::string& path) {
    if (!v.is_array()) throw SpecError(path + ": a word is a list of [variable, shift] pairs");
    Word w;
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::string p = path + "/" + std::to_string(i);
        const ojson& g = v[i];
        if (!g.is_array() || g.size() != 2 || !g[0].is_string()) throw SpecError(p + ": expected [variable, shift]");
        int var = sig.index_of(g[0].get<std::string>());
        if (var < 0) throw SpecError(p + "/0: unknown variable '" + g[0].get<std::string>() + "'");
        long n = as_long(g[1], p + "/1");
        if (sig.finite() && (n < 0 || n >= sig.order)) throw SpecError(p + "/1: shift must lie in [0, order)");
        w.push_back(make_letter(var, n));
    }
    return w;
}

inline Tensor parse_tensor(const ojson& v, const Signature& sig, const std::string& path, int arity = 2) {
    if (!v.is_array()) throw SpecError(path + ": expected a list of [coefficient, word, word] terms");
    std::vector<Tensor::Term> terms;
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::string p = path + "/" + std::to_string(i);
        const ojson& t = v[i];
        if (!t.is_array() || int(t.size()) != arity + 1)
            throw SpecError(p + ": expected [coefficient" + std::string(arity == 2 ? ", word, word]" : ", words...]"));
        Q c = as_coeff(t[0], p + "/0");
        KeyBuilder kb;
        for (int s = 0; s < arity; ++s) {
            Word w = parse_word(t[std::size_t(s) + 1], sig, p + "/" + std::to_string(s + 1));
            kb.slot().put(as_span(w));
        }
        terms.emplace_back(kb.take(), c);
    }
    return Tensor(arity, std::move(terms));
}

inline std::pair<int, int> parse_pair(const std::string& key, const Signature& sig, const std::string& path) {
    auto comma = key.find(',');
    if (comma == std::string::npos) throw SpecError(path + ": key must be \"a,b\"");
    auto trim = [](std::string s) {
        while (!s.empty() && s.front() == ' ') s.erase(s.begin());
        while (!s.empty() && s.back() == ' ') s.pop_back();
        return s;
    };
    std::string a = trim(key.substr(0, comma)), b = trim(key.substr(comma + 1));
    int ia = sig.index_of(a), ib = sig.index_of(b);
    if (ia < 0) throw SpecError(path + ": unknown variable '" + a + "'");
    if (ib < 0) throw SpecError(path + ": unknown variable '" + b + "'");
    return {ia, ib};
}

inline RationalFn parse_ratfn(const ojson& v, const std::string& path) {
    only_keys(v, {"num", "den"}, path);
    auto terms = [&](const char* key, bool required) {
        std::vector<std::pair<Q, long>> out;
        if (!v.contains(key)) {
            if (required) throw SpecError(path + "/" + key + ": missing");
            out.emplace_back(Q(1), 0);
            return out;
        }
        const ojson& a = v[key];
        std::string p = path + "/" + key;
        if (!a.is_array()) throw SpecError(p + ": expected a list of [coefficient, power]");
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::string pi = p + "/" + std::to_string(i);
            if (!a[i].is_array() || a[i].size() != 2) throw SpecError(pi + ": expected [coefficient, power]");
            out.emplace_back(as_coeff(a[i][0], pi + "/0"), as_long(a[i][1], pi + "/1"));
        }
        return out;
    };
    try {
        return RationalFn::from_terms(terms("num", true), terms("den", false));
    } catch (const SpecError&) {
        throw;
    } catch (const std::exception& e) {
        throw SpecError(path + ": " + e.what());
    }
}

}  // namespace detail

inline SpecDoc parse_spec_json(const ojson& doc) {
    detail::only_keys(doc, {"algebra", "bracket", "rational"}, "");
    if (!doc.contains("algebra")) throw SpecError("/algebra: missing");
    const ojson& alg = doc["algebra"];
    detail::only_keys(alg, {"variables", "order"}, "/algebra");
    if (!alg.contains("variables") || !alg["variables"].is_array())
        throw SpecError("/algebra/variables: expected a list of names");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < alg["variables"].size(); ++i) {
        const ojson& n = alg["variables"][i];
        if (!n.is_string()) throw SpecError("/algebra/variables/" + std::to_string(i) + ": expected a string");
        names.push_back(n.get<std::string>());
    }
    long order = 0;
    if (alg.contains("order")) {
        const ojson& o = alg["order"];
        if (o.is_string() && o.get<std::string>() == "infinite") order = 0;
        else if (o.is_number_integer() && o.get<long>() >= 1) order = o.get<long>();
        else throw SpecError("/algebra/order: expected \"infinite\" or an integer >= 1");
    }
    Signature sig;
    try {
        sig = Signature(names, order);
    } catch (const std::exception& e) {
        throw SpecError(std::string("/algebra: ") + e.what());
    }
    SpecDoc out{BracketSpec(sig), 1, {}, false};
    if (doc.contains("bracket")) {
        const ojson& br = doc["bracket"];
        if (!br.is_object()) throw SpecError("/bracket: expected an object");
        for (const auto& [key, terms] : br.items()) {
            std::string path = "/bracket/" + key;
            auto [a, b] = detail::parse_pair(key, sig, path);
            if (!terms.is_array()) throw SpecError(path + ": expected a list of {lambda, tensor} terms");
            LaurentAcc acc(2, 1, order);
            for (std::size_t i = 0; i < terms.size(); ++i) {
                std::string p = path + "/" + std::to_string(i);
                detail::only_keys(terms[i], {"lambda", "tensor"}, p);
                if (!terms[i].contains("lambda")) throw SpecError(p + "/lambda: missing");
                if (!terms[i].contains("tensor")) throw SpecError(p + "/tensor: missing");
                long n = detail::as_long(terms[i]["lambda"], p + "/lambda");
                if (sig.finite() && (n < 0 || n >= order)) throw SpecError(p + "/lambda: exponent must lie in [0, order)");
                Tensor t = detail::parse_tensor(terms[i]["tensor"], sig, p + "/tensor");
                for (const auto& [k, c] : t.terms()) acc.add(Exp{n, 0, 0}, k, c);
            }
            out.bracket.set(a, b, out.bracket.gen(a, b) + acc.finish());
        }
    }
    if (doc.contains("rational")) {
        const ojson& rat = doc["rational"];
        detail::only_keys(rat, {"direction", "entries"}, "/rational");
        out.has_rational = true;
        if (sig.finite()) throw SpecError("/rational: rational brackets need an infinite-order shift");
        if (rat.contains("direction")) {
            const ojson& d = rat["direction"];
            if (d == "+") out.direction = 1;
            else if (d == "-") out.direction = -1;
            else throw SpecError("/rational/direction: expected \"+\" or \"-\"");
        }
        if (rat.contains("entries")) {
            const ojson& en = rat["entries"];
            if (!en.is_object()) throw SpecError("/rational/entries: expected an object");
            for (const auto& [key, chains] : en.items()) {
                std::string path = "/rational/entries/" + key;
                auto ab = detail::parse_pair(key, sig, path);
                if (!chains.is_array()) throw SpecError(path + ": expected a list of chains");
                RationalPseudoOp op;
                for (std::size_t i = 0; i < chains.size(); ++i) {
                    std::string p = path + "/" + std::to_string(i);
                    const ojson& ch = chains[i];
                    if (!ch.is_array() || ch.size() % 2 == 0)
                        throw SpecError(p + ": a chain alternates tensors and rational functions, odd length");
                    Chain c;
                    for (std::size_t j = 0; j < ch.size(); ++j) {
                        std::string pj = p + "/" + std::to_string(j);
                        if (j % 2 == 0) c.f.push_back(detail::parse_tensor(ch[j], sig, pj));
                        else c.r.push_back(detail::parse_ratfn(ch[j], pj));
                    }
                    op.chains.push_back(std::move(c));
                }
                out.rational[ab] = std::move(op);
            }
        }
    }
    return out;
}

/// Parses document text; syntax errors report line:column.
inline SpecDoc parse_spec(const std::string& text) {
    ojson doc;
    try {
        doc = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SpecError("syntax error at " + detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
    }
    return parse_spec_json(doc);
}

inline ojson ratfn_json(const RationalFn& r) {
    ojson num = ojson::array(), den = ojson::array();
    for (std::size_t i = 0; i < r.num().size(); ++i)
        if (!qzero(r.num()[i])) num.push_back(ojson::array({r.num()[i].str(), long(i) + r.val()}));
    for (std::size_t i = 0; i < r.den().size(); ++i)
        if (!qzero(r.den()[i])) den.push_back(ojson::array({r.den()[i].str(), long(i)}));
    return {{"num", num}, {"den", den}};
}

inline ojson serialize_spec(const SpecDoc& d) {
    const Signature& sig = d.sig();
    ojson doc;
    doc["algebra"]["variables"] = sig.names;
    if (sig.finite()) doc["algebra"]["order"] = sig.order;
    else doc["algebra"]["order"] = "infinite";
    ojson br = ojson::object();
    for (int a = 0; a < sig.size(); ++a)
        for (int b = 0; b < sig.size(); ++b) {
            const Laurent& L = d.bracket.gen(a, b);
            if (L.is_zero()) continue;
            ojson terms = ojson::array();
            for (const auto& [e, t] : L.coeffs()) terms.push_back({{"lambda", e[0]}, {"tensor", tensor_json(t, sig)}});
            br[sig.names[std::size_t(a)] + "," + sig.names[std::size_t(b)]] = terms;
        }
    doc["bracket"] = br;
    if (d.has_rational) {
        ojson en = ojson::object();
        for (const auto& [ab, op] : d.rational) {
            ojson chains = ojson::array();
            for (const auto& ch : op.chains) {
                ojson c = ojson::array();
                for (std::size_t j = 0; j < ch.f.size(); ++j) {
                    c.push_back(tensor_json(ch.f[j], sig));
                    if (j < ch.r.size()) c.push_back(ratfn_json(ch.r[j]));
                }
                chains.push_back(c);
            }
            en[sig.names[std::size_t(ab.first)] + "," + sig.names[std::size_t(ab.second)]] = chains;
        }
        doc["rational"] = {{"direction", d.direction > 0 ? "+" : "-"}, {"entries", en}};
    }
    return doc;
}

inline TruncatedSpec truncated_of(const SpecDoc& d) {
    TruncatedSpec ts{d.sig(), {}, d.direction};
    for (const auto& [ab, op] : d.rational) ts.gen[ab] = TruncEntry{op, {}};
    // Local brackets from the "bracket" section join as finite rational operators.
    for (int a = 0; a < d.sig().size(); ++a)
        for (int b = 0; b < d.sig().size(); ++b) {
            const Laurent& L = d.bracket.gen(a, b);
            if (L.is_zero()) continue;
            auto& slot = ts.gen[{a, b}];
            if (!slot.rational) slot.rational = RationalPseudoOp{};
            RationalPseudoOp& op = *slot.rational;
            for (const auto& [e, t] : L.coeffs())
                op.chains.push_back(Chain{{t, Tensor::unit(2)}, {RationalFn::monomial(1, e[0])}});
        }
    return ts;
}

// ---------------------------------------------------------------------------------------------
// Reports: one ordered JSON value, rendered as text from the same data

namespace detail {
/// Scalars and lists of scalars print on one line.
inline bool flat(const ojson& v) {
    if (v.is_object()) return false;
    if (!v.is_array()) return true;
    for (const auto& x : v)
        if (x.is_object() || x.is_array()) return false;
    return true;
}

inline std::string inline_str(const ojson& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

inline void render_text(const ojson& v, const std::string& indent, std::ostringstream& os) {
    if (v.is_object()) {
        for (const auto& [k, x] : v.items()) {
            if (flat(x)) os << indent << k << ": " << inline_str(x) << "\n";
            else {
                os << indent << k << ":\n";
                render_text(x, indent + "  ", os);
            }
        }
    } else if (v.is_array()) {
        for (const auto& x : v) {
            if (flat(x)) os << indent << "- " << inline_str(x) << "\n";
            else {
                os << indent << "-\n";
                render_text(x, indent + "  ", os);
            }
        }
    } else {
        os << indent << inline_str(v) << "\n";
    }
}
}  // namespace detail

inline std::string render_report(const ojson& report, const std::string& format) {
    if (format == "json") return report.dump(2) + "\n";
    std::ostringstream os;
    detail::render_text(report, "", os);
    return os.str();
}

}  // namespace dmpva
