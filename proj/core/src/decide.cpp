#include "qcut/decide.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qcut {

using nlohmann::ordered_json;

std::string default_smt_command() {
    const char* env = std::getenv("QCUT_SMT_CMD");
    return env ? std::string(env) : std::string();
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Empty: return "EMPTY";
        case Verdict::Nonempty: return "NONEMPTY";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

BruteResult brute_force(const GrammarSpec& g, const QuantumAutomaton& q, int max_len,
                        long node_cap) {
    BruteResult res;
    // iterative deepening: short witnesses are the common case and avoid
    // enumerating star languages out to the full bound
    std::vector<int> bounds;
    for (int b = 0; b < max_len; b = b == 0 ? 2 : b * 2) bounds.push_back(std::min(b, max_len));
    bounds.push_back(max_len);
    for (int bound : bounds) {
        EnumLimits limits;
        limits.max_len = bound;
        limits.node_cap = node_cap;
        EnumResult words = enumerate_words(g, limits);
        if (!words.ok) {
            res.error = words.error;
            return res;
        }
        std::vector<Word> order(words.words.begin(), words.words.end());
        std::stable_sort(order.begin(), order.end(), [](const Word& a, const Word& b) {
            if (a.size() != b.size()) return a.size() < b.size();
            return a < b;
        });
        for (const auto& w : order) {
            Rat p = accept_prob(q, w);
            if (p > q.lambda) {
                res.witness = w;
                res.prob = p;
                res.exhausted = true;
                return res;
            }
        }
    }
    res.exhausted = true;
    return res;
}

namespace {

struct SymbolicOutcome {
    std::optional<Verdict> verdict;
    bool certified = false;
    SolverOutcome solver = SolverOutcome::NotRun;
    std::vector<std::string> notes;
};

// exact re-check of a solver model against the query
bool model_satisfies(const DecisionQuery& query, const std::map<std::string, Rat>& model) {
    const auto& s = query.closure;
    std::vector<std::string> names;
    for (const auto& b : s->free_blocks)
        for (int i = 1; i <= b.dim; ++i)
            for (int j = 1; j <= b.dim; ++j)
                names.push_back(b.name + "_" + std::to_string(i) + "_" + std::to_string(j));
    for (const auto& b : s->bound_blocks)
        for (int i = 1; i <= b.dim; ++i)
            for (int j = 1; j <= b.dim; ++j)
                names.push_back(b.name + "_" + std::to_string(i) + "_" + std::to_string(j));
    std::vector<Rat> point;
    point.reserve(names.size());
    for (const auto& nm : names) {
        auto it = model.find(nm);
        if (it == model.end()) return false;
        point.push_back(it->second);
    }
    std::vector<char> truth;
    truth.reserve(s->atoms.size());
    for (const auto& a : s->atoms) {
        Rat v = a.p.eval(point);
        truth.push_back(a.eq ? v == 0 : v > 0);
    }
    std::function<bool(const SAFormula&)> eval = [&](const SAFormula& f) {
        switch (f.kind) {
            case SAFormula::Kind::Atom:
                return truth[static_cast<std::size_t>(f.atom)] != 0;
            case SAFormula::Kind::And:
                for (const auto& k : f.kids)
                    if (!eval(k)) return false;
                return true;
            case SAFormula::Kind::Or:
                for (const auto& k : f.kids)
                    if (eval(k)) return true;
                return false;
        }
        return false;
    };
    if (!eval(s->body)) return false;
    return query.acceptance.eval(point) > query.lambda;
}

SymbolicOutcome run_symbolic(const QuantumAutomaton& q, const GrammarSpec& g,
                             const RunConfig& cfg) {
    SymbolicOutcome out;
    Budget budget;
    budget.max_reductions = cfg.groebner_reductions;
    budget.max_degree = cfg.groebner_degree;
    ClosureReport closure;
    try {
        closure = closure_of_grammar(g, q, cfg, budget);
    } catch (const ResourceError& e) {
        out.notes.push_back(std::string("symbolic branch: ") + e.what());
        return out;
    }
    if (!closure.certified) out.notes.push_back("closure not certified");

    if (closure.formula->is_false()) {
        // empty language: the intersection is empty outright
        out.verdict = Verdict::Empty;
        out.certified = true;
        out.notes.push_back("grammar generates the empty language");
        return out;
    }

    DecisionQuery query = build_decision_query(closure.formula, q);

    // exact ground decision over completely tracked member sets
    if (closure.formula->finite_members && closure.formula->finite_exact) {
        bool any_above = false;
        for (const auto& tup : *closure.formula->finite_members) {
            QVector r = vec_mat_mul(q.start, tup[0]);
            r = vec_mat_mul(r, q.projection);
            if (r.norm_sq() > q.lambda) {
                any_above = true;
                break;
            }
        }
        out.notes.push_back("ground decision over the finite member set");
        if (any_above) {
            out.verdict = Verdict::Nonempty;
            out.certified = closure.certified;
        } else {
            out.verdict = Verdict::Empty;
            out.certified = closure.certified;
        }
        if (!closure.certified) out.verdict.reset();  // stay inconclusive
        return out;
    }

    std::string command = cfg.smt_command.empty() ? default_smt_command() : cfg.smt_command;
    if (command.empty()) {
        out.notes.push_back("no external solver configured");
        return out;
    }
    std::string text = emit_smtlib(query);
    SolverResult sr = run_solver(text, command, cfg.timeout_seconds);
    out.solver = sr.outcome;
    switch (sr.outcome) {
        case SolverOutcome::Unsat:
            if (closure.certified) {
                out.verdict = Verdict::Empty;
                out.certified = true;
            } else {
                out.notes.push_back("unsat on an uncertified closure: inconclusive");
            }
            break;
        case SolverOutcome::Sat: {
            if (!closure.certified) {
                out.notes.push_back("sat on an uncertified closure: inconclusive");
                break;
            }
            auto model = parse_model_rationals(sr.output);
            if (model && model_satisfies(query, *model)) {
                out.verdict = Verdict::Nonempty;
                out.certified = true;
                out.notes.push_back("solver model re-checked exactly");
            } else {
                out.notes.push_back("solver model did not re-check exactly: inconclusive");
            }
            break;
        }
        default:
            break;
    }
    return out;
}

}  // namespace

DecisionReport decide(const QuantumAutomaton& q, const GrammarSpec& g, const RunConfig& cfg) {
    {
        auto viol = validate(q);
        if (!viol.empty()) throw std::invalid_argument("invalid automaton: " + viol.front());
        auto gviol = validate_grammar(g);
        if (!gviol.empty()) throw std::invalid_argument("invalid grammar: " + gviol.front());
        for (const auto& t : grammar_terminals(g))
            if (!q.has_letter(t))
                throw std::invalid_argument("grammar terminal '" + t +
                                            "' is not in the automaton alphabet");
    }
    DecisionReport report;

    // ground short-circuits; acceptance values always lie in [0, 1]
    if (q.lambda >= 1) {
        report.verdict = Verdict::Empty;
        report.certified = true;
        report.cross_check = "symbolic-only";
        report.notes.push_back("threshold at or above 1: no acceptance value exceeds it");
        return report;
    }
    if (q.projection.is_zero() && q.lambda >= 0) {
        report.verdict = Verdict::Empty;
        report.certified = true;
        report.cross_check = "symbolic-only";
        report.notes.push_back("zero projection: every acceptance value is 0");
        return report;
    }

    const bool want_brute = cfg.mode != DecideMode::Symbolic;
    const bool want_symbolic = cfg.mode != DecideMode::Brute;

    std::optional<BruteResult> brute;
    SymbolicOutcome symbolic;
    if (want_brute && want_symbolic) {
        auto fb = std::async(std::launch::async,
                             [&] { return brute_force(g, q, cfg.brute_len, cfg.enum_node_cap); });
        auto fs = std::async(std::launch::async, [&] { return run_symbolic(q, g, cfg); });
        brute = fb.get();
        symbolic = fs.get();
    } else if (want_brute) {
        brute = brute_force(g, q, cfg.brute_len, cfg.enum_node_cap);
    } else {
        symbolic = run_symbolic(q, g, cfg);
    }

    report.solver_outcome = symbolic.solver;
    for (const auto& n : symbolic.notes) report.notes.push_back(n);
    if (brute && !brute->error.empty()) report.notes.push_back("brute branch: " + brute->error);

    const bool brute_found = brute && brute->witness.has_value();
    const bool symbolic_concl = symbolic.verdict.has_value();

    if (brute_found && symbolic_concl && *symbolic.verdict == Verdict::Empty &&
        symbolic.certified) {
        report.verdict = Verdict::Nonempty;
        report.witness_word = brute->witness;
        report.witness_prob = brute->prob;
        report.certified = true;
        report.conflict = true;
        report.cross_check = "conflict";
        report.notes.push_back("certified symbolic EMPTY contradicted by an exact witness");
        return report;
    }

    if (brute_found) {
        report.verdict = Verdict::Nonempty;
        report.witness_word = brute->witness;
        report.witness_prob = brute->prob;
        report.certified = true;
        if (symbolic_concl && *symbolic.verdict == Verdict::Nonempty)
            report.cross_check = "agree";
        else
            report.cross_check = "brute-only";
        return report;
    }

    if (symbolic_concl) {
        report.verdict = *symbolic.verdict;
        report.certified = symbolic.certified;
        report.cross_check = "symbolic-only";
        return report;
    }

    report.verdict = Verdict::Inconclusive;
    report.certified = false;
    report.cross_check = "agree";
    return report;
}

int report_exit_code(const DecisionReport& r) {
    if (r.conflict) return 4;
    switch (r.verdict) {
        case Verdict::Empty: return 0;
        case Verdict::Nonempty: return 1;
        case Verdict::Inconclusive: return 2;
    }
    return 3;
}

std::string decision_report_json(const DecisionReport& r) {
    ordered_json j;
    j["verdict"] = verdict_name(r.verdict);
    if (r.witness_word) {
        ordered_json w;
        w["word"] = word_to_string(*r.witness_word);
        w["probability"] = rat_to_string(*r.witness_prob);
        j["witness"] = w;
    } else {
        j["witness"] = nullptr;
    }
    j["solver_outcome"] = solver_outcome_name(r.solver_outcome);
    j["certified"] = r.certified;
    j["cross_check"] = r.cross_check;
    j["notes"] = r.notes;
    return j.dump(2) + "\n";
}

}  // namespace qcut
