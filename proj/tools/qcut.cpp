// qcut: decides emptiness of the intersection of a measure-once quantum
// automaton's strict cut-point language with a structured grammar's language.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcut/decide.hpp"

using namespace qcut;

namespace {

int load_inputs(const std::string& qfa_path, const std::string& grammar_path,
                QuantumAutomaton& q, GrammarSpec& g) {
    auto lq = load_qfa_file(qfa_path);
    if (!lq.ok) {
        std::cerr << "error: automaton file " << qfa_path << ":\n";
        for (const auto& d : lq.diagnostics) std::cerr << "  " << d << "\n";
        return 3;
    }
    q = std::move(lq.qfa);
    auto lg = parse_grammar_file(grammar_path);
    if (!lg.ok) {
        std::cerr << "error: grammar file " << grammar_path << ":\n";
        for (const auto& d : lg.diagnostics) std::cerr << "  " << d << "\n";
        return 3;
    }
    g = std::move(*lg.grammar);
    return 0;
}

bool write_or_print(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return true;
    }
    std::ofstream out(path);
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return false;
    }
    out << text;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cut-point intersection analysis for rational quantum automata"};
    app.require_subcommand(1);

    // validate --------------------------------------------------------------
    std::string v_qfa, v_grammar;
    auto* cmd_validate = app.add_subcommand("validate", "check input files");
    cmd_validate->add_option("--qfa", v_qfa, "automaton file");
    cmd_validate->add_option("--grammar", v_grammar, "grammar file");

    // accept-prob -----------------------------------------------------------
    std::string ap_qfa, ap_word;
    auto* cmd_accept = app.add_subcommand("accept-prob", "exact acceptance value of a word");
    cmd_accept->add_option("--qfa", ap_qfa, "automaton file")->required();
    cmd_accept->add_option("--word", ap_word, "input word (symbols juxtaposed or space-separated)")
        ->required();

    // enumerate ---------------------------------------------------------------
    std::string en_grammar;
    int en_maxlen = 6;
    bool en_json = false;
    long en_nodes = 500000;
    auto* cmd_enum = app.add_subcommand("enumerate", "words of the language up to a length");
    cmd_enum->add_option("--grammar", en_grammar, "grammar file")->required();
    cmd_enum->add_option("--max-len", en_maxlen, "length bound");
    cmd_enum->add_option("--node-cap", en_nodes, "derivation budget");
    cmd_enum->add_flag("--json", en_json, "JSON output");

    // closure -----------------------------------------------------------------
    std::string cl_qfa, cl_grammar, cl_json;
    bool cl_timings = false;
    RunConfig cl_cfg;
    auto* cmd_closure = app.add_subcommand("closure", "closure of the grammar's matrix image");
    cmd_closure->add_option("--qfa", cl_qfa, "automaton file")->required();
    cmd_closure->add_option("--grammar", cl_grammar, "grammar file")->required();
    cmd_closure->add_option("--max-degree", cl_cfg.degree_cap, "invariant degree cap");
    cmd_closure->add_option("--chain-cap", cl_cfg.chain_cap, "product chain cap (0 = auto)");
    cmd_closure->add_option("--json", cl_json, "write the report to a file (default stdout)");
    cmd_closure->add_flag("--timings", cl_timings, "include timings in the report");

    // decide ------------------------------------------------------------------
    std::string de_qfa, de_grammar, de_json, de_mode = "both";
    RunConfig de_cfg;
    de_cfg.smt_command = default_smt_command();
    auto* cmd_decide = app.add_subcommand("decide", "decide L(G) intersect strict cut-point language");
    cmd_decide->add_option("--qfa", de_qfa, "automaton file")->required();
    cmd_decide->add_option("--grammar", de_grammar, "grammar file")->required();
    cmd_decide->add_option("--mode", de_mode, "symbolic | brute | both")
        ->check(CLI::IsMember({"symbolic", "brute", "both"}));
    cmd_decide->add_option("--max-degree", de_cfg.degree_cap, "invariant degree cap");
    cmd_decide->add_option("--max-len", de_cfg.brute_len, "brute-force length bound");
    cmd_decide->add_option("--chain-cap", de_cfg.chain_cap, "product chain cap (0 = auto)");
    cmd_decide->add_option("--smt-cmd", de_cfg.smt_command, "external solver command");
    cmd_decide->add_option("--timeout", de_cfg.timeout_seconds, "solver timeout (seconds)");
    cmd_decide->add_option("--json", de_json, "write the report to a file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_validate) {
            if (v_qfa.empty() && v_grammar.empty()) {
                std::cerr << "error: nothing to validate (use --qfa and/or --grammar)\n";
                return 3;
            }
            bool ok = true;
            if (!v_qfa.empty()) {
                auto r = load_qfa_file(v_qfa);
                if (r.ok) {
                    std::cout << v_qfa << ": ok\n";
                } else {
                    ok = false;
                    std::cout << v_qfa << ": invalid\n";
                    for (const auto& d : r.diagnostics) std::cout << "  " << d << "\n";
                }
            }
            if (!v_grammar.empty()) {
                auto r = parse_grammar_file(v_grammar);
                if (r.ok) {
                    std::cout << v_grammar << ": ok (" << grammar_kind(*r.grammar) << ")\n";
                } else {
                    ok = false;
                    std::cout << v_grammar << ": invalid\n";
                    for (const auto& d : r.diagnostics) std::cout << "  " << d << "\n";
                }
            }
            return ok ? 0 : 3;
        }

        if (*cmd_accept) {
            auto lq = load_qfa_file(ap_qfa);
            if (!lq.ok) {
                for (const auto& d : lq.diagnostics) std::cerr << "error: " << d << "\n";
                return 3;
            }
            Word w = parse_word(lq.qfa, ap_word);
            std::cout << rat_to_string(accept_prob(lq.qfa, w)) << "\n";
            return 0;
        }

        if (*cmd_enum) {
            auto lg = parse_grammar_file(en_grammar);
            if (!lg.ok) {
                for (const auto& d : lg.diagnostics) std::cerr << "error: " << d << "\n";
                return 3;
            }
            EnumLimits limits;
            limits.max_len = en_maxlen;
            limits.node_cap = en_nodes;
            auto res = enumerate_words(*lg.grammar, limits);
            if (!res.ok) {
                std::cerr << "error: " << res.error << "\n";
                return 3;
            }
            std::vector<Word> order(res.words.begin(), res.words.end());
            std::stable_sort(order.begin(), order.end(), [](const Word& a, const Word& b) {
                if (a.size() != b.size()) return a.size() < b.size();
                return a < b;
            });
            if (en_json) {
                std::string out = "[";
                for (std::size_t i = 0; i < order.size(); ++i)
                    out += (i ? "," : "") + nlohmann::json(word_to_string(order[i])).dump();
                std::cout << out << "]\n";
            } else {
                for (const auto& w : order) std::cout << word_to_string(w) << "\n";
            }
            return 0;
        }

        if (*cmd_closure) {
            QuantumAutomaton q;
            GrammarSpec g;
            if (int rc = load_inputs(cl_qfa, cl_grammar, q, g)) return rc;
            Budget budget;
            budget.max_reductions = cl_cfg.groebner_reductions;
            budget.max_degree = cl_cfg.groebner_degree;
            ClosureReport report = closure_of_grammar(g, q, cl_cfg, budget);
            if (!write_or_print(cl_json, closure_report_json(report, cl_timings))) return 3;
            return report.certified ? 0 : 2;
        }

        if (*cmd_decide) {
            QuantumAutomaton q;
            GrammarSpec g;
            if (int rc = load_inputs(de_qfa, de_grammar, q, g)) return rc;
            if (de_mode == "symbolic")
                de_cfg.mode = DecideMode::Symbolic;
            else if (de_mode == "brute")
                de_cfg.mode = DecideMode::Brute;
            else
                de_cfg.mode = DecideMode::Both;
            DecisionReport report = decide(q, g, de_cfg);
            std::string json = decision_report_json(report);
            if (!de_json.empty()) {
                if (!write_or_print(de_json, json)) return 3;
                std::cerr << verdict_name(report.verdict) << "\n";
            } else {
                std::cout << json;
            }
            return report_exit_code(report);
        }
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
