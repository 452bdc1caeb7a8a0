#ifndef QCUT_DECIDE_HPP
#define QCUT_DECIDE_HPP

#include <optional>
#include <string>
#include <vector>

#include "qcut/pipeline.hpp"
#include "qcut/smt.hpp"

namespace qcut {

enum class Verdict { Empty, Nonempty, Inconclusive };

std::string verdict_name(Verdict v);

struct DecisionReport {
    Verdict verdict = Verdict::Inconclusive;
    std::optional<Word> witness_word;
    std::optional<Rat> witness_prob;
    SolverOutcome solver_outcome = SolverOutcome::NotRun;
    bool certified = false;
    std::string cross_check = "agree";  // agree | brute-only | symbolic-only | conflict
    bool conflict = false;
    std::vector<std::string> notes;
};

/// First word (shortlex) within the length bound whose acceptance value
/// exceeds lambda strictly, with its exact value.
struct BruteResult {
    std::optional<Word> witness;
    std::optional<Rat> prob;
    bool exhausted = false;  // the bound was fully searched
    std::string error;
};

BruteResult brute_force(const GrammarSpec& g, const QuantumAutomaton& q, int max_len,
                        long node_cap);

/// Full decision: symbolic closure + external solver and/or bounded search,
/// reconciled. Throws std::invalid_argument on malformed inputs.
DecisionReport decide(const QuantumAutomaton& q, const GrammarSpec& g, const RunConfig& cfg);

int report_exit_code(const DecisionReport& r);
std::string decision_report_json(const DecisionReport& r);

}  // namespace qcut

#endif
