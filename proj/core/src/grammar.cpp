#include "qcut/grammar.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace qcut {

using nlohmann::ordered_json;

namespace {

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> toks;
    std::istringstream is(s);
    std::string t;
    while (is >> t) toks.push_back(t);
    return toks;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

int count_terminals(const std::vector<std::string>& form,
                    const std::set<std::string>& variables) {
    int c = 0;
    for (const auto& s : form)
        if (!variables.count(s)) ++c;
    return c;
}

}  // namespace

std::string production_to_string(const Production& p) {
    std::string s = p.lhs + " ->";
    for (const auto& t : p.rhs) s += " " + t;
    return s;
}

std::optional<Production> parse_production(const std::string& text) {
    auto toks = tokenize(text);
    if (toks.size() < 2 || toks[1] != "->") return std::nullopt;
    Production p;
    p.lhs = toks[0];
    p.rhs.assign(toks.begin() + 2, toks.end());
    return p;
}

bool CFGrammar::is_variable(const std::string& s) const { return contains(variables, s); }
bool LinearGrammar::is_variable(const std::string& s) const { return contains(variables, s); }

std::optional<LinearGrammar::Split> LinearGrammar::split_rule(int idx) const {
    const Production& p = productions[static_cast<std::size_t>(idx)];
    Split sp;
    bool seen = false;
    for (const auto& sym : p.rhs) {
        if (is_variable(sym)) {
            if (seen) return std::nullopt;  // not linear; guarded by validation
            seen = true;
            sp.var = sym;
        } else {
            (seen ? sp.right : sp.left).push_back(sym);
        }
    }
    if (!seen) return std::nullopt;
    return sp;
}

int RestrictedMatrixGrammar::block_of(const std::string& var) const {
    for (int b = 0; b < static_cast<int>(blocks.size()); ++b)
        if (contains(blocks[b], var)) return b;
    return -1;
}

std::vector<MinLinear::Cycle> MinLinear::cycles() const {
    std::vector<Cycle> cs;
    for (int i = 0; i < static_cast<int>(productions.size()); ++i) {
        const auto& p = productions[static_cast<std::size_t>(i)];
        auto it = std::find(p.rhs.begin(), p.rhs.end(), variable);
        if (it == p.rhs.end()) continue;
        Cycle c;
        c.production_index = i;
        c.left.assign(p.rhs.begin(), it);
        c.right.assign(it + 1, p.rhs.end());
        cs.push_back(std::move(c));
    }
    return cs;
}

std::vector<MinLinear::Exit> MinLinear::exits() const {
    std::vector<Exit> es;
    for (int i = 0; i < static_cast<int>(productions.size()); ++i) {
        const auto& p = productions[static_cast<std::size_t>(i)];
        if (std::find(p.rhs.begin(), p.rhs.end(), variable) != p.rhs.end()) continue;
        es.push_back(Exit{i, p.rhs});
    }
    return es;
}

std::string grammar_kind(const GrammarSpec& g) {
    if (std::holds_alternative<LinearGrammar>(g)) return "linear";
    if (std::holds_alternative<MetalinearGrammar>(g)) return "metalinear";
    if (std::holds_alternative<RestrictedMatrixGrammar>(g)) return "restricted-matrix";
    return "monoidal";
}

std::vector<std::string> grammar_terminals(const GrammarSpec& g) {
    if (const auto* l = std::get_if<LinearGrammar>(&g)) return l->terminals;
    if (const auto* m = std::get_if<MetalinearGrammar>(&g)) {
        std::set<std::string> all;
        for (const auto& fam : m->families)
            for (const auto& lg : fam) all.insert(lg.terminals.begin(), lg.terminals.end());
        return {all.begin(), all.end()};
    }
    if (const auto* r = std::get_if<RestrictedMatrixGrammar>(&g)) return r->terminals;
    return std::get<MonoidalGrammar>(g).terminals();
}

// -- validation ----------------------------------------------------------------

namespace {

void validate_linear_into(const LinearGrammar& g, const std::string& where,
                          std::vector<std::string>& out) {
    if (!contains(g.variables, g.axiom))
        out.push_back(where + "axiom '" + g.axiom + "' is not a declared variable");
    for (const auto& v : g.variables)
        if (contains(g.terminals, v))
            out.push_back(where + "symbol '" + v + "' declared both variable and terminal");
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
        const auto& p = g.productions[i];
        std::string at = where + "production " + std::to_string(i + 1) + ": ";
        if (!contains(g.variables, p.lhs))
            out.push_back(at + "left side '" + p.lhs + "' is not a variable");
        int vars = 0;
        for (const auto& s : p.rhs) {
            if (contains(g.variables, s))
                ++vars;
            else if (!contains(g.terminals, s))
                out.push_back(at + "undeclared symbol '" + s + "'");
        }
        if (vars > 1) out.push_back(at + "more than one variable on the right side");
    }
}

void validate_matrix_into(const RestrictedMatrixGrammar& g, std::vector<std::string>& out) {
    const int k = g.index_k;
    if (k <= 0) {
        out.push_back("index must be positive");
        return;
    }
    if (static_cast<int>(g.blocks.size()) != k) {
        out.push_back("expected " + std::to_string(k) + " variable blocks");
        return;
    }
    std::set<std::string> seen;
    for (const auto& block : g.blocks)
        for (const auto& v : block) {
            if (!seen.insert(v).second) out.push_back("variable '" + v + "' in two blocks");
            if (v == g.axiom) out.push_back("axiom must not belong to a block");
        }
    for (std::size_t mi = 0; mi < g.matrices.size(); ++mi) {
        const auto& m = g.matrices[mi];
        std::string at = "matrix " + std::to_string(mi + 1) + ": ";
        switch (m.kind) {
            case RMMatrix::Kind::Start:
                if (static_cast<int>(m.start_tuple.size()) != k) {
                    out.push_back(at + "start matrix must name one variable per block");
                    break;
                }
                for (int i = 0; i < k; ++i)
                    if (g.block_of(m.start_tuple[static_cast<std::size_t>(i)]) != i)
                        out.push_back(at + "symbol " + std::to_string(i + 1) +
                                      " is not in block " + std::to_string(i + 1));
                break;
            case RMMatrix::Kind::Eps:
                if (static_cast<int>(m.eps_tuple.size()) != k) {
                    out.push_back(at + "erase matrix must name one variable per block");
                    break;
                }
                for (int i = 0; i < k; ++i)
                    if (g.block_of(m.eps_tuple[static_cast<std::size_t>(i)]) != i)
                        out.push_back(at + "symbol " + std::to_string(i + 1) +
                                      " is not in block " + std::to_string(i + 1));
                break;
            case RMMatrix::Kind::Step:
                if (static_cast<int>(m.rules.size()) != k) {
                    out.push_back(at + "step matrix must have one rule per block");
                    break;
                }
                for (int i = 0; i < k; ++i) {
                    const auto& r = m.rules[static_cast<std::size_t>(i)];
                    if (g.block_of(r.lhs) != i)
                        out.push_back(at + "rule " + std::to_string(i + 1) +
                                      ": left variable not in block " + std::to_string(i + 1));
                    if (g.block_of(r.var) != i)
                        out.push_back(at + "rule " + std::to_string(i + 1) +
                                      ": cross-block variable '" + r.var + "'");
                    for (const auto& t : r.left_ctx)
                        if (!contains(g.terminals, t))
                            out.push_back(at + "undeclared terminal '" + t + "'");
                    for (const auto& t : r.right_ctx)
                        if (!contains(g.terminals, t))
                            out.push_back(at + "undeclared terminal '" + t + "'");
                }
                break;
        }
    }
}

void validate_minlinear_into(const MinLinear& g, const std::vector<std::string>& alphabet,
                             bool lowest_level, const std::string& where,
                             std::vector<std::string>& out) {
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
        const auto& p = g.productions[i];
        std::string at = where + "production " + std::to_string(i + 1) + ": ";
        if (p.lhs != g.variable)
            out.push_back(at + "left side must be the single variable '" + g.variable + "'");
        int occ = 0;
        for (const auto& s : p.rhs) {
            if (s == g.variable)
                ++occ;
            else if (!contains(alphabet, s))
                out.push_back(at + "undeclared symbol '" + s + "'");
        }
        if (occ > 1) out.push_back(at + "minimal linear rule with two variables");
        if (lowest_level && occ == 0 && !p.rhs.empty())
            out.push_back(at + "terminal production must be erasing");
    }
}

}  // namespace

std::vector<std::string> validate_grammar(const GrammarSpec& g) {
    std::vector<std::string> out;
    if (const auto* l = std::get_if<LinearGrammar>(&g)) {
        validate_linear_into(*l, "", out);
    } else if (const auto* m = std::get_if<MetalinearGrammar>(&g)) {
        if (m->families.empty()) out.push_back("metalinear grammar with no families");
        for (std::size_t f = 0; f < m->families.size(); ++f) {
            if (m->families[f].empty())
                out.push_back("family " + std::to_string(f + 1) + " is empty");
            for (std::size_t i = 0; i < m->families[f].size(); ++i)
                validate_linear_into(m->families[f][i],
                                     "family " + std::to_string(f + 1) + " grammar " +
                                         std::to_string(i + 1) + ": ",
                                     out);
        }
    } else if (const auto* r = std::get_if<RestrictedMatrixGrammar>(&g)) {
        validate_matrix_into(*r, out);
    } else {
        const auto& mono = std::get<MonoidalGrammar>(g);
        const int k = mono.depth();
        if (static_cast<int>(mono.alphabets.size()) != k) {
            out.push_back("monoidal grammar must declare one alphabet per level");
            return out;
        }
        validate_minlinear_into(mono.top, mono.alphabets[0], k == 1, "level 1: ", out);
        for (int lvl = 2; lvl <= k; ++lvl) {
            const auto& fam = mono.families[static_cast<std::size_t>(lvl - 2)];
            for (const auto& letter : mono.alphabets[static_cast<std::size_t>(lvl - 2)]) {
                if (!fam.count(letter)) {
                    out.push_back("level " + std::to_string(lvl) + ": no grammar for letter '" +
                                  letter + "'");
                    continue;
                }
                validate_minlinear_into(fam.at(letter),
                                        mono.alphabets[static_cast<std::size_t>(lvl - 1)],
                                        lvl == k,
                                        "level " + std::to_string(lvl) + " letter '" + letter +
                                            "': ",
                                        out);
            }
        }
    }
    return out;
}

// -- JSON ----------------------------------------------------------------------

namespace {

bool parse_string_array(const ordered_json& j, std::vector<std::string>& out, std::string& err) {
    if (!j.is_array()) {
        err = "expected an array of strings";
        return false;
    }
    for (const auto& e : j) {
        if (!e.is_string()) {
            err = "expected an array of strings";
            return false;
        }
        out.push_back(e.get<std::string>());
    }
    return true;
}

bool parse_productions(const ordered_json& j, std::vector<Production>& out,
                       std::vector<std::string>& diags, const std::string& where) {
    if (!j.is_array()) {
        diags.push_back(where + "'productions' must be an array of strings");
        return false;
    }
    for (const auto& e : j) {
        if (!e.is_string()) {
            diags.push_back(where + "'productions' must be an array of strings");
            return false;
        }
        auto p = parse_production(e.get<std::string>());
        if (!p) {
            diags.push_back(where + "malformed production '" + e.get<std::string>() + "'");
            return false;
        }
        out.push_back(std::move(*p));
    }
    return true;
}

bool parse_linear(const ordered_json& j, LinearGrammar& g, std::vector<std::string>& diags,
                  const std::string& where) {
    std::string err;
    if (!j.contains("variables") || !parse_string_array(j["variables"], g.variables, err)) {
        diags.push_back(where + "'variables': " + (err.empty() ? "missing" : err));
        return false;
    }
    if (!j.contains("terminals") || !parse_string_array(j["terminals"], g.terminals, err)) {
        diags.push_back(where + "'terminals': " + (err.empty() ? "missing" : err));
        return false;
    }
    if (!j.contains("axiom") || !j["axiom"].is_string()) {
        diags.push_back(where + "missing string field 'axiom'");
        return false;
    }
    g.axiom = j["axiom"].get<std::string>();
    if (!j.contains("productions") || !parse_productions(j["productions"], g.productions, diags, where))
        return false;
    return true;
}

bool parse_minlinear(const ordered_json& j, MinLinear& g, std::vector<std::string>& diags,
                     const std::string& where) {
    if (!j.contains("variable") || !j["variable"].is_string()) {
        diags.push_back(where + "missing string field 'variable'");
        return false;
    }
    g.variable = j["variable"].get<std::string>();
    if (j.contains("irreducible")) {
        if (!j["irreducible"].is_boolean()) {
            diags.push_back(where + "'irreducible' must be a boolean");
            return false;
        }
        g.irreducible_asserted = j["irreducible"].get<bool>();
    }
    if (!j.contains("productions") || !parse_productions(j["productions"], g.productions, diags, where))
        return false;
    return true;
}

ordered_json linear_to_json_obj(const LinearGrammar& g) {
    ordered_json j;
    j["variables"] = g.variables;
    j["terminals"] = g.terminals;
    j["axiom"] = g.axiom;
    ordered_json prods = ordered_json::array();
    for (const auto& p : g.productions) prods.push_back(production_to_string(p));
    j["productions"] = prods;
    return j;
}

ordered_json minlinear_to_json_obj(const MinLinear& g, bool lowest) {
    ordered_json j;
    j["variable"] = g.variable;
    if (lowest) j["irreducible"] = g.irreducible_asserted;
    ordered_json prods = ordered_json::array();
    for (const auto& p : g.productions) prods.push_back(production_to_string(p));
    j["productions"] = prods;
    return j;
}

}  // namespace

GrammarParse parse_grammar(const std::string& json_text) {
    GrammarParse res;
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        res.diagnostics.push_back(std::string("JSON parse error: ") + e.what());
        return res;
    }
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        res.diagnostics.push_back("missing string field 'kind'");
        return res;
    }
    const std::string kind = j["kind"].get<std::string>();

    if (kind == "linear") {
        LinearGrammar g;
        if (!parse_linear(j, g, res.diagnostics, "")) return res;
        res.grammar = GrammarSpec(std::move(g));
    } else if (kind == "metalinear") {
        MetalinearGrammar g;
        if (!j.contains("families") || !j["families"].is_array()) {
            res.diagnostics.push_back("missing array field 'families'");
            return res;
        }
        for (std::size_t f = 0; f < j["families"].size(); ++f) {
            const auto& fam = j["families"][f];
            if (!fam.is_array()) {
                res.diagnostics.push_back("family " + std::to_string(f + 1) + " must be an array");
                return res;
            }
            std::vector<LinearGrammar> comps;
            for (std::size_t i = 0; i < fam.size(); ++i) {
                LinearGrammar lg;
                if (!parse_linear(fam[i], lg, res.diagnostics,
                                  "family " + std::to_string(f + 1) + " grammar " +
                                      std::to_string(i + 1) + ": "))
                    return res;
                comps.push_back(std::move(lg));
            }
            g.families.push_back(std::move(comps));
        }
        res.grammar = GrammarSpec(std::move(g));
    } else if (kind == "restricted-matrix") {
        RestrictedMatrixGrammar g;
        std::string err;
        if (!j.contains("index") || !j["index"].is_number_integer()) {
            res.diagnostics.push_back("missing integer field 'index'");
            return res;
        }
        g.index_k = j["index"].get<int>();
        if (!j.contains("blocks") || !j["blocks"].is_array()) {
            res.diagnostics.push_back("missing array field 'blocks'");
            return res;
        }
        for (const auto& b : j["blocks"]) {
            std::vector<std::string> block;
            if (!parse_string_array(b, block, err)) {
                res.diagnostics.push_back("'blocks': " + err);
                return res;
            }
            g.blocks.push_back(std::move(block));
        }
        if (!j.contains("terminals") || !parse_string_array(j["terminals"], g.terminals, err)) {
            res.diagnostics.push_back("'terminals': " + (err.empty() ? "missing" : err));
            return res;
        }
        g.axiom = j.value("axiom", std::string("S"));
        if (!j.contains("matrices") || !j["matrices"].is_array()) {
            res.diagnostics.push_back("missing array field 'matrices'");
            return res;
        }
        for (std::size_t mi = 0; mi < j["matrices"].size(); ++mi) {
            const auto& arr = j["matrices"][mi];
            std::string at = "matrix " + std::to_string(mi + 1) + ": ";
            std::vector<Production> prods;
            if (!parse_productions(arr, prods, res.diagnostics, at)) return res;
            if (prods.empty()) {
                res.diagnostics.push_back(at + "empty matrix");
                return res;
            }
            RMMatrix m;
            if (prods.size() == 1 && prods[0].lhs == g.axiom) {
                m.kind = RMMatrix::Kind::Start;
                m.start_tuple = prods[0].rhs;
            } else if (std::all_of(prods.begin(), prods.end(),
                                   [](const Production& p) { return p.rhs.empty(); })) {
                m.kind = RMMatrix::Kind::Eps;
                for (const auto& p : prods) m.eps_tuple.push_back(p.lhs);
            } else {
                m.kind = RMMatrix::Kind::Step;
                for (const auto& p : prods) {
                    RMRule r;
                    r.lhs = p.lhs;
                    bool seen = false;
                    for (const auto& sym : p.rhs) {
                        if (g.block_of(sym) >= 0) {
                            if (seen) {
                                res.diagnostics.push_back(at + "two variables in one rule");
                                return res;
                            }
                            seen = true;
                            r.var = sym;
                        } else {
                            (seen ? r.right_ctx : r.left_ctx).push_back(sym);
                        }
                    }
                    if (!seen) {
                        res.diagnostics.push_back(
                            at + "step rule without a variable (mixed matrix shapes?)");
                        return res;
                    }
                    m.rules.push_back(std::move(r));
                }
            }
            g.matrices.push_back(std::move(m));
        }
        res.grammar = GrammarSpec(std::move(g));
    } else if (kind == "monoidal") {
        MonoidalGrammar g;
        if (!j.contains("levels") || !j["levels"].is_array() || j["levels"].empty()) {
            res.diagnostics.push_back("missing nonempty array field 'levels'");
            return res;
        }
        const int k = static_cast<int>(j["levels"].size());
        if (j.contains("depth") && j["depth"].is_number_integer() && j["depth"].get<int>() != k) {
            res.diagnostics.push_back("'depth' does not match the number of levels");
            return res;
        }
        std::string err;
        for (int lvl = 1; lvl <= k; ++lvl) {
            const auto& jl = j["levels"][static_cast<std::size_t>(lvl - 1)];
            std::string at = "level " + std::to_string(lvl) + ": ";
            std::vector<std::string> alpha;
            if (!jl.contains("alphabet") || !parse_string_array(jl["alphabet"], alpha, err)) {
                res.diagnostics.push_back(at + "'alphabet': " + (err.empty() ? "missing" : err));
                return res;
            }
            g.alphabets.push_back(std::move(alpha));
            if (lvl == 1) {
                if (!jl.contains("grammar")) {
                    res.diagnostics.push_back(at + "missing 'grammar'");
                    return res;
                }
                if (!parse_minlinear(jl["grammar"], g.top, res.diagnostics, at)) return res;
            } else {
                if (!jl.contains("grammars") || !jl["grammars"].is_object()) {
                    res.diagnostics.push_back(at + "missing object field 'grammars'");
                    return res;
                }
                std::map<std::string, MinLinear> fam;
                for (const auto& [letter, jg] : jl["grammars"].items()) {
                    MinLinear ml;
                    if (!parse_minlinear(jg, ml, res.diagnostics, at + "'" + letter + "': "))
                        return res;
                    fam.emplace(letter, std::move(ml));
                }
                g.families.push_back(std::move(fam));
            }
        }
        res.grammar = GrammarSpec(std::move(g));
    } else if (kind == "bounded-semilinear") {
        std::string err;
        std::vector<std::string> word_texts;
        if (!j.contains("words") || !parse_string_array(j["words"], word_texts, err)) {
            res.diagnostics.push_back("'words': " + (err.empty() ? "missing" : err));
            return res;
        }
        std::vector<Word> words;
        for (const auto& t : word_texts) {
            Word w;
            if (t.find(' ') != std::string::npos) {
                std::istringstream is(t);
                std::string tok;
                while (is >> tok) w.push_back(tok);
            } else {
                for (char c : t) w.push_back(std::string(1, c));
            }
            words.push_back(std::move(w));
        }
        auto parse_vec = [&](const ordered_json& arr, std::vector<long>& out) {
            if (!arr.is_array()) return false;
            for (const auto& e : arr) {
                if (!e.is_number_integer() || e.get<long long>() < 0) return false;
                out.push_back(static_cast<long>(e.get<long long>()));
            }
            return true;
        };
        std::vector<long> offset;
        if (!j.contains("offset") || !parse_vec(j["offset"], offset) ||
            offset.size() != words.size()) {
            res.diagnostics.push_back("'offset' must be an array of naturals, one per word");
            return res;
        }
        std::vector<std::vector<long>> periods;
        if (j.contains("periods")) {
            if (!j["periods"].is_array()) {
                res.diagnostics.push_back("'periods' must be an array of arrays");
                return res;
            }
            for (const auto& pe : j["periods"]) {
                std::vector<long> v;
                if (!parse_vec(pe, v) || v.size() != words.size()) {
                    res.diagnostics.push_back("each period must list one natural per word");
                    return res;
                }
                periods.push_back(std::move(v));
            }
        }
        if (words.empty()) {
            res.diagnostics.push_back("'words' must be nonempty");
            return res;
        }
        res.grammar = GrammarSpec(semilinear_to_restricted(words, offset, periods));
    } else {
        res.diagnostics.push_back("unknown grammar kind '" + kind + "'");
        return res;
    }

    auto viol = validate_grammar(*res.grammar);
    if (!viol.empty()) {
        res.diagnostics = viol;
        return res;
    }
    res.ok = true;
    return res;
}

GrammarParse parse_grammar_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        GrammarParse res;
        res.diagnostics.push_back("cannot open file: " + path);
        return res;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_grammar(buf.str());
}

std::string grammar_to_json(const GrammarSpec& g) {
    ordered_json j;
    if (const auto* l = std::get_if<LinearGrammar>(&g)) {
        j = linear_to_json_obj(*l);
        j["kind"] = "linear";
        // reorder: kind first
        ordered_json out;
        out["kind"] = "linear";
        for (auto& [k, v] : j.items())
            if (k != "kind") out[k] = v;
        return out.dump(2) + "\n";
    }
    if (const auto* m = std::get_if<MetalinearGrammar>(&g)) {
        j["kind"] = "metalinear";
        ordered_json fams = ordered_json::array();
        for (const auto& fam : m->families) {
            ordered_json fj = ordered_json::array();
            for (const auto& lg : fam) fj.push_back(linear_to_json_obj(lg));
            fams.push_back(fj);
        }
        j["families"] = fams;
        return j.dump(2) + "\n";
    }
    if (const auto* r = std::get_if<RestrictedMatrixGrammar>(&g)) {
        j["kind"] = "restricted-matrix";
        j["index"] = r->index_k;
        j["blocks"] = r->blocks;
        j["terminals"] = r->terminals;
        j["axiom"] = r->axiom;
        ordered_json ms = ordered_json::array();
        for (const auto& m : r->matrices) {
            ordered_json arr = ordered_json::array();
            switch (m.kind) {
                case RMMatrix::Kind::Start: {
                    Production p{r->axiom, m.start_tuple};
                    arr.push_back(production_to_string(p));
                    break;
                }
                case RMMatrix::Kind::Eps:
                    for (const auto& v : m.eps_tuple)
                        arr.push_back(production_to_string(Production{v, {}}));
                    break;
                case RMMatrix::Kind::Step:
                    for (const auto& rule : m.rules) {
                        Production p;
                        p.lhs = rule.lhs;
                        p.rhs = rule.left_ctx;
                        p.rhs.push_back(rule.var);
                        p.rhs.insert(p.rhs.end(), rule.right_ctx.begin(), rule.right_ctx.end());
                        arr.push_back(production_to_string(p));
                    }
                    break;
            }
            ms.push_back(arr);
        }
        j["matrices"] = ms;
        return j.dump(2) + "\n";
    }
    const auto& mono = std::get<MonoidalGrammar>(g);
    j["kind"] = "monoidal";
    j["depth"] = mono.depth();
    ordered_json levels = ordered_json::array();
    for (int lvl = 1; lvl <= mono.depth(); ++lvl) {
        ordered_json jl;
        jl["alphabet"] = mono.alphabets[static_cast<std::size_t>(lvl - 1)];
        if (lvl == 1) {
            jl["grammar"] = minlinear_to_json_obj(mono.top, mono.depth() == 1);
        } else {
            ordered_json fam = ordered_json::object();
            for (const auto& [letter, ml] :
                 mono.families[static_cast<std::size_t>(lvl - 2)])
                fam[letter] = minlinear_to_json_obj(ml, lvl == mono.depth());
            jl["grammars"] = fam;
        }
        levels.push_back(jl);
    }
    j["levels"] = levels;
    return j.dump(2) + "\n";
}

// -- enumeration -----------------------------------------------------------------

LinearEnumResult enumerate_linear(const LinearGrammar& g, const EnumLimits& limits) {
    LinearEnumResult res;
    // Forms: (u, A, v) with u, v terminal. BFS over rule applications.
    struct Form {
        Word left;
        std::string var;
        Word right;
        std::vector<int> deriv;
    };
    std::set<std::tuple<Word, std::string, Word>> seen;
    std::deque<Form> queue;
    queue.push_back(Form{{}, g.axiom, {}, {}});
    seen.insert({Word{}, g.axiom, Word{}});
    long nodes = 0;
    while (!queue.empty()) {
        Form f = std::move(queue.front());
        queue.pop_front();
        if (++nodes > limits.node_cap) {
            res.error = "enumeration budget exceeded (node cap " +
                        std::to_string(limits.node_cap) + ")";
            return res;
        }
        for (int pi = 0; pi < static_cast<int>(g.productions.size()); ++pi) {
            const auto& p = g.productions[static_cast<std::size_t>(pi)];
            if (p.lhs != f.var) continue;
            auto split = g.split_rule(pi);
            if (!split) {
                // terminal rule: u . w . v
                Word w = f.left;
                w.insert(w.end(), p.rhs.begin(), p.rhs.end());
                w.insert(w.end(), f.right.begin(), f.right.end());
                if (static_cast<int>(w.size()) <= limits.max_len) {
                    auto deriv = f.deriv;
                    deriv.push_back(pi);
                    res.derivations.emplace(std::move(w), std::move(deriv));
                }
                continue;
            }
            Form nf;
            nf.left = f.left;
            nf.left.insert(nf.left.end(), split->left.begin(), split->left.end());
            nf.var = split->var;
            nf.right = split->right;
            nf.right.insert(nf.right.end(), f.right.begin(), f.right.end());
            if (static_cast<int>(nf.left.size() + nf.right.size()) > limits.max_len) continue;
            if (!seen.insert({nf.left, nf.var, nf.right}).second) continue;
            nf.deriv = f.deriv;
            nf.deriv.push_back(pi);
            queue.push_back(std::move(nf));
        }
    }
    res.ok = true;
    return res;
}

CfgEnumResult enumerate_cfg(const CFGrammar& g, const EnumLimits& limits) {
    CfgEnumResult res;
    const std::set<std::string> vars(g.variables.begin(), g.variables.end());
    int var_bound = limits.var_bound;
    if (var_bound <= 0) var_bound = 2 + static_cast<int>(g.variables.size());

    struct Form {
        std::vector<std::string> symbols;
        CfgDerivation deriv;
    };
    std::set<std::vector<std::string>> seen;
    std::deque<Form> queue;
    queue.push_back(Form{{g.axiom}, {}});
    seen.insert({{g.axiom}});
    long nodes = 0;
    while (!queue.empty()) {
        Form f = std::move(queue.front());
        queue.pop_front();
        if (++nodes > limits.node_cap) {
            res.error = "enumeration budget exceeded (node cap " +
                        std::to_string(limits.node_cap) + ")";
            return res;
        }
        // Collect variable positions; a form with none is a word.
        std::vector<int> var_pos;
        for (int i = 0; i < static_cast<int>(f.symbols.size()); ++i)
            if (vars.count(f.symbols[static_cast<std::size_t>(i)])) var_pos.push_back(i);
        if (var_pos.empty()) {
            if (static_cast<int>(f.symbols.size()) <= limits.max_len)
                res.derivations.emplace(f.symbols, f.deriv);
            continue;
        }
        for (int vp = 0; vp < static_cast<int>(var_pos.size()); ++vp) {
            const int pos = var_pos[static_cast<std::size_t>(vp)];
            const std::string& v = f.symbols[static_cast<std::size_t>(pos)];
            for (int pi = 0; pi < static_cast<int>(g.productions.size()); ++pi) {
                const auto& p = g.productions[static_cast<std::size_t>(pi)];
                if (p.lhs != v) continue;
                std::vector<std::string> ns;
                ns.reserve(f.symbols.size() + p.rhs.size());
                ns.insert(ns.end(), f.symbols.begin(), f.symbols.begin() + pos);
                ns.insert(ns.end(), p.rhs.begin(), p.rhs.end());
                ns.insert(ns.end(), f.symbols.begin() + pos + 1, f.symbols.end());
                int terms = count_terminals(ns, vars);
                int nvars = static_cast<int>(ns.size()) - terms;
                if (terms > limits.max_len || nvars > var_bound) continue;
                if (!seen.insert(ns).second) continue;
                Form nf;
                nf.symbols = std::move(ns);
                nf.deriv = f.deriv;
                // steps record (variable ordinal, production); the tree
                // replay walks variables only
                nf.deriv.push_back((vp << 16) | pi);
                queue.push_back(std::move(nf));
            }
        }
    }
    res.ok = true;
    return res;
}

DerivTree derivation_tree(const CFGrammar& g, const CfgDerivation& d) {
    // Replay the position-annotated steps, building the tree in place.
    struct Node {
        DerivTree t;
        bool is_var = false;
        std::string sym;
    };
    std::vector<std::size_t> form;  // indices into nodes, current sentential form
    std::vector<Node> nodes;
    const std::set<std::string> vars(g.variables.begin(), g.variables.end());
    nodes.push_back(Node{{}, true, g.axiom});
    form.push_back(0);
    std::vector<std::vector<std::size_t>> children_of(1);

    for (int step : d) {
        int pos = step >> 16;
        int pi = step & 0xffff;
        const auto& p = g.productions[static_cast<std::size_t>(pi)];
        std::size_t node_idx = form[static_cast<std::size_t>(pos)];
        nodes[node_idx].t.production_index = pi;
        std::vector<std::size_t> new_syms;
        for (const auto& sym : p.rhs) {
            nodes.push_back(Node{{}, vars.count(sym) != 0, sym});
            children_of.emplace_back();
            new_syms.push_back(nodes.size() - 1);
            if (vars.count(sym)) children_of[node_idx].push_back(nodes.size() - 1);
        }
        // splice variable children positions into the form
        std::vector<std::size_t> nf;
        nf.insert(nf.end(), form.begin(), form.begin() + pos);
        for (std::size_t s : new_syms)
            if (nodes[s].is_var) nf.push_back(s);
        nf.insert(nf.end(), form.begin() + pos + 1, form.end());
        form = std::move(nf);
    }

    // Assemble trees bottom-up via recursion on recorded children.
    std::function<DerivTree(std::size_t)> build = [&](std::size_t idx) {
        DerivTree t;
        t.production_index = nodes[idx].t.production_index;
        for (std::size_t c : children_of[idx]) t.children.push_back(build(c));
        return t;
    };
    return build(0);
}

MatrixEnumResult enumerate_matrix(const RestrictedMatrixGrammar& g, const EnumLimits& limits) {
    MatrixEnumResult res;
    const int k = g.index_k;
    struct Slot {
        Word left;
        std::string var;
        Word right;
        auto operator<=>(const Slot&) const = default;
    };
    struct Form {
        std::vector<Slot> slots;
        std::vector<int> deriv;
    };
    auto total_len = [](const std::vector<Slot>& s) {
        std::size_t n = 0;
        for (const auto& sl : s) n += sl.left.size() + sl.right.size();
        return static_cast<int>(n);
    };
    std::set<std::vector<Slot>> seen;
    std::deque<Form> queue;
    long nodes = 0;

    // start matrices seed the tuple forms
    for (int mi = 0; mi < static_cast<int>(g.matrices.size()); ++mi) {
        const auto& m = g.matrices[static_cast<std::size_t>(mi)];
        if (m.kind != RMMatrix::Kind::Start) continue;
        Form f;
        for (int i = 0; i < k; ++i)
            f.slots.push_back(Slot{{}, m.start_tuple[static_cast<std::size_t>(i)], {}});
        f.deriv = {mi};
        if (seen.insert(f.slots).second) queue.push_back(std::move(f));
    }

    while (!queue.empty()) {
        Form f = std::move(queue.front());
        queue.pop_front();
        if (++nodes > limits.node_cap) {
            res.error = "enumeration budget exceeded (node cap " +
                        std::to_string(limits.node_cap) + ")";
            return res;
        }
        for (int mi = 0; mi < static_cast<int>(g.matrices.size()); ++mi) {
            const auto& m = g.matrices[static_cast<std::size_t>(mi)];
            if (m.kind == RMMatrix::Kind::Eps) {
                bool applies = true;
                for (int i = 0; i < k; ++i)
                    if (f.slots[static_cast<std::size_t>(i)].var !=
                        m.eps_tuple[static_cast<std::size_t>(i)]) {
                        applies = false;
                        break;
                    }
                if (!applies) continue;
                Word w;
                for (const auto& sl : f.slots) {
                    w.insert(w.end(), sl.left.begin(), sl.left.end());
                    w.insert(w.end(), sl.right.begin(), sl.right.end());
                }
                if (static_cast<int>(w.size()) <= limits.max_len) {
                    auto deriv = f.deriv;
                    deriv.push_back(mi);
                    res.derivations.emplace(std::move(w), std::move(deriv));
                }
            } else if (m.kind == RMMatrix::Kind::Step) {
                bool applies = true;
                for (int i = 0; i < k; ++i)
                    if (f.slots[static_cast<std::size_t>(i)].var !=
                        m.rules[static_cast<std::size_t>(i)].lhs) {
                        applies = false;
                        break;
                    }
                if (!applies) continue;
                Form nf;
                nf.slots = f.slots;
                for (int i = 0; i < k; ++i) {
                    const auto& r = m.rules[static_cast<std::size_t>(i)];
                    auto& sl = nf.slots[static_cast<std::size_t>(i)];
                    sl.left.insert(sl.left.end(), r.left_ctx.begin(), r.left_ctx.end());
                    sl.var = r.var;
                    sl.right.insert(sl.right.begin(), r.right_ctx.begin(), r.right_ctx.end());
                }
                if (total_len(nf.slots) > limits.max_len) continue;
                if (!seen.insert(nf.slots).second) continue;
                nf.deriv = f.deriv;
                nf.deriv.push_back(mi);
                queue.push_back(std::move(nf));
            }
        }
    }
    res.ok = true;
    return res;
}

namespace {

EnumResult enumerate_metalinear(const MetalinearGrammar& g, const EnumLimits& limits) {
    EnumResult res;
    for (const auto& fam : g.families) {
        // product of the family members, total length bounded
        std::set<Word> partial = {Word{}};
        for (const auto& lg : fam) {
            auto sub = enumerate_linear(lg, limits);
            if (!sub.ok) {
                res.error = sub.error;
                return res;
            }
            std::set<Word> next;
            for (const auto& pre : partial)
                for (const auto& [w, _] : sub.derivations) {
                    if (static_cast<int>(pre.size() + w.size()) > limits.max_len) continue;
                    Word cat = pre;
                    cat.insert(cat.end(), w.begin(), w.end());
                    next.insert(std::move(cat));
                }
            partial = std::move(next);
        }
        res.words.insert(partial.begin(), partial.end());
    }
    res.ok = true;
    return res;
}

}  // namespace

EnumResult enumerate_words(const GrammarSpec& g, const EnumLimits& limits) {
    EnumResult res;
    if (const auto* l = std::get_if<LinearGrammar>(&g)) {
        auto sub = enumerate_linear(*l, limits);
        if (!sub.ok) {
            res.error = sub.error;
            return res;
        }
        for (const auto& [w, _] : sub.derivations) res.words.insert(w);
        res.ok = true;
        return res;
    }
    if (const auto* m = std::get_if<MetalinearGrammar>(&g)) return enumerate_metalinear(*m, limits);
    if (const auto* r = std::get_if<RestrictedMatrixGrammar>(&g)) {
        auto sub = enumerate_matrix(*r, limits);
        if (!sub.ok) {
            res.error = sub.error;
            return res;
        }
        for (const auto& [w, _] : sub.derivations) res.words.insert(w);
        res.ok = true;
        return res;
    }
    const auto& mono = std::get<MonoidalGrammar>(g);
    CFGrammar cfg = compose_monoidal(mono);
    EnumLimits lim = limits;
    if (lim.var_bound <= 0) {
        // generous: one slot per pending component per level plus the spines
        int bound = 1;
        auto rhs_len = [](const MinLinear& ml) {
            std::size_t mx = 0;
            for (const auto& p : ml.productions) mx = std::max(mx, p.rhs.size());
            return static_cast<int>(mx);
        };
        bound += rhs_len(mono.top);
        for (const auto& fam : mono.families) {
            int mx = 0;
            for (const auto& [_, ml] : fam) mx = std::max(mx, rhs_len(ml));
            bound += mx;
        }
        lim.var_bound = bound + mono.depth();
    }
    auto sub = enumerate_cfg(cfg, lim);
    if (!sub.ok) {
        res.error = sub.error;
        return res;
    }
    for (const auto& [w, _] : sub.derivations) res.words.insert(w);
    res.ok = true;
    return res;
}

// -- composition ------------------------------------------------------------------

std::string composed_variable_name(const std::string& letter, int level) {
    return "S[" + letter + "." + std::to_string(level) + "]";
}

CFGrammar compose(const MinLinear& g1, const std::vector<std::string>& sigma1,
                  const std::map<std::string, CFGrammar>& family) {
    CFGrammar h;
    h.axiom = g1.variable;
    h.variables.push_back(g1.variable);
    std::map<std::string, std::string> axiom_of;  // letter -> renamed component axiom
    std::set<std::string> terminals;
    int counter = 0;
    for (const auto& x : sigma1) {
        auto it = family.find(x);
        if (it == family.end()) throw std::invalid_argument("no component grammar for '" + x + "'");
        const CFGrammar& gx = it->second;
        ++counter;
        // rename the component's variables apart
        std::map<std::string, std::string> rn;
        for (const auto& v : gx.variables) {
            std::string nv = v + "[" + x + "." + std::to_string(counter) + "]";
            rn[v] = nv;
            h.variables.push_back(nv);
        }
        axiom_of[x] = rn.at(gx.axiom);
        for (const auto& p : gx.productions) {
            Production np;
            np.lhs = rn.at(p.lhs);
            for (const auto& sym : p.rhs)
                np.rhs.push_back(rn.count(sym) ? rn.at(sym) : sym);
            h.productions.push_back(std::move(np));
        }
        terminals.insert(gx.terminals.begin(), gx.terminals.end());
    }
    // copies of the top rules, letters replaced by component axioms
    std::vector<Production> top_rules;
    for (const auto& p : g1.productions) {
        Production np;
        np.lhs = p.lhs;
        for (const auto& sym : p.rhs)
            np.rhs.push_back(sym == g1.variable ? sym : axiom_of.at(sym));
        top_rules.push_back(std::move(np));
    }
    h.productions.insert(h.productions.begin(), top_rules.begin(), top_rules.end());
    h.terminals.assign(terminals.begin(), terminals.end());
    return h;
}

CFGrammar compose_monoidal(const MonoidalGrammar& g) {
    const int k = g.depth();
    // bottom-up: CFG per letter of each alphabet, then the top composition
    std::map<std::string, CFGrammar> below;  // for letters of alphabets[level-1]
    for (int lvl = k; lvl >= 2; --lvl) {
        const auto& fam = g.families[static_cast<std::size_t>(lvl - 2)];
        const auto& alpha_here = g.alphabets[static_cast<std::size_t>(lvl - 1)];
        std::map<std::string, CFGrammar> cur;
        for (const auto& [letter, ml] : fam) {
            CFGrammar cg;
            std::string var = composed_variable_name(letter, lvl);
            if (lvl == k) {
                cg.axiom = var;
                cg.variables = {var};
                cg.terminals = alpha_here;
                for (const auto& p : ml.productions) {
                    Production np;
                    np.lhs = var;
                    for (const auto& sym : p.rhs)
                        np.rhs.push_back(sym == ml.variable ? var : sym);
                    cg.productions.push_back(std::move(np));
                }
            } else {
                MinLinear renamed = ml;
                renamed.variable = var;
                for (auto& p : renamed.productions) {
                    p.lhs = var;
                    for (auto& sym : p.rhs)
                        if (sym == ml.variable) sym = var;
                }
                cg = compose(renamed, alpha_here, below);
            }
            cur.emplace(letter, std::move(cg));
        }
        below = std::move(cur);
    }
    if (k == 1) {
        CFGrammar cg;
        cg.axiom = g.top.variable;
        cg.variables = {g.top.variable};
        cg.terminals = g.alphabets[0];
        cg.productions = g.top.productions;
        return cg;
    }
    return compose(g.top, g.alphabets[0], below);
}

// -- bounded semilinear ---------------------------------------------------------

RestrictedMatrixGrammar semilinear_to_restricted(const std::vector<Word>& words,
                                                 const std::vector<long>& offset,
                                                 const std::vector<std::vector<long>>& periods) {
    if (words.empty()) throw std::invalid_argument("bounded semilinear encoding needs k >= 1");
    const int k = static_cast<int>(words.size());
    RestrictedMatrixGrammar g;
    g.index_k = k;
    g.axiom = "S";
    std::set<std::string> terms;
    for (const auto& w : words) terms.insert(w.begin(), w.end());
    g.terminals.assign(terms.begin(), terms.end());
    for (int i = 1; i <= k; ++i)
        g.blocks.push_back({"X" + std::to_string(i), "X" + std::to_string(i) + "'"});

    auto raw = [&](int i) { return "X" + std::to_string(i + 1); };
    auto primed = [&](int i) { return "X" + std::to_string(i + 1) + "'"; };
    auto repeat = [](const Word& w, long times) {
        Word out;
        for (long t = 0; t < times; ++t) out.insert(out.end(), w.begin(), w.end());
        return out;
    };

    RMMatrix start;
    start.kind = RMMatrix::Kind::Start;
    for (int i = 0; i < k; ++i) start.start_tuple.push_back(raw(i));
    g.matrices.push_back(start);

    // the offset is consumed exactly once on the way to the primed variables
    RMMatrix off;
    off.kind = RMMatrix::Kind::Step;
    for (int i = 0; i < k; ++i)
        off.rules.push_back(RMRule{raw(i), repeat(words[static_cast<std::size_t>(i)],
                                                  offset[static_cast<std::size_t>(i)]),
                                   primed(i), {}});
    g.matrices.push_back(off);

    for (const auto& period : periods) {
        RMMatrix step;
        step.kind = RMMatrix::Kind::Step;
        for (int i = 0; i < k; ++i)
            step.rules.push_back(RMRule{primed(i),
                                        repeat(words[static_cast<std::size_t>(i)],
                                               period[static_cast<std::size_t>(i)]),
                                        primed(i), {}});
        g.matrices.push_back(step);
    }

    RMMatrix eps;
    eps.kind = RMMatrix::Kind::Eps;
    for (int i = 0; i < k; ++i) eps.eps_tuple.push_back(primed(i));
    g.matrices.push_back(eps);
    return g;
}

}  // namespace qcut
