#ifndef QCUT_SMT_HPP
#define QCUT_SMT_HPP

#include <map>
#include <optional>
#include <string>

#include "qcut/qfa.hpp"
#include "qcut/semialg.hpp"

namespace qcut {

/// The (negated) decision condition: a point of the closure with acceptance
/// value strictly above the threshold. Satisfiable iff the intersection is
/// nonempty, provided the closure is certified.
struct DecisionQuery {
    SemiAlg closure;  // single free block of dimension n
    Poly acceptance;  // ||s X P||^2 expanded over the closure's variables
    Rat lambda;
    int dim = 0;
};

DecisionQuery build_decision_query(const SemiAlg& closure, const QuantumAutomaton& q);

/// Deterministic SMT-LIB 2 text: one Real constant per matrix-entry
/// variable, the closure body, and acceptance > lambda.
std::string emit_smtlib(const DecisionQuery& query);

enum class SolverOutcome { Sat, Unsat, Unknown, Timeout, NotRun };

std::string solver_outcome_name(SolverOutcome o);

struct SolverResult {
    SolverOutcome outcome = SolverOutcome::NotRun;
    std::string output;  // full stdout (model text after "sat")
};

/// Runs `command <file>` through /bin/sh with the query written to a
/// temporary file. First token of stdout decides the outcome; anything
/// unrecognized is Unknown; a command that cannot be spawned is NotRun.
SolverResult run_solver(const std::string& smt_text, const std::string& command,
                        int timeout_seconds);

/// Rational values from a (get-model) answer; nullopt when any value fails
/// exact rational parsing.
std::optional<std::map<std::string, Rat>> parse_model_rationals(const std::string& output);

}  // namespace qcut

#endif
