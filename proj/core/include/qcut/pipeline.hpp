#ifndef QCUT_PIPELINE_HPP
#define QCUT_PIPELINE_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qcut/config.hpp"
#include "qcut/semialg.hpp"

namespace qcut {

struct ProvenanceNode {
    std::string step;
    std::string detail;
    bool certified = true;
    std::vector<ProvenanceNode> children;
};

// -- construction plans (kept for witness assembly and tests) -----------------

/// Per-variable node of the linear closure recursion.
struct LinPlan {
    std::string axiom;
    std::vector<std::string> active;  // variable set of this level
    SemiAlg pairs;                    // (phi(u), phi(v)) over the cycle closure
    SemiAlg set;                      // Cl(phi(L_axiom)) as a formula
    struct Part {
        int rule_index = -1;  // exit production in the grammar
        SemiAlg part_set;     // one sandwich disjunct
        bool terminal = true;
        Word w;        // terminal exit body
        Word w1, w2;   // contexts of a variable exit
        std::shared_ptr<const LinPlan> child;
    };
    std::vector<Part> parts;
};

/// Plan of the restricted-matrix closure: the tuple automaton, one closure
/// per tuple state, and one sandwich chain per repetition-free sequence.
struct MatrixPlan {
    int k = 0;
    std::vector<std::vector<std::string>> states;  // tuple per state id
    std::vector<int> start_states;                 // from start matrices (deduplicated)
    std::vector<int> eps_states;
    struct StateClosure {
        SemiAlg chain_leaf;  // phi-hat(C_q) as a tuple variety
        bool certified = true;
    };
    std::map<int, StateClosure> state_closures;
    struct Edge {
        int matrix_index;
        int src, dst;
        std::vector<QMatrix> tuple;  // phi-hat of the step contexts
    };
    std::vector<Edge> edges;
    struct SeqPart {
        std::vector<int> seq;  // state ids, repetition-free
        SemiAlg chain;         // the sandwich fold over 2k-block tuples
        std::vector<SemiAlg> leaves;  // C, E, C, ..., C in fold order
    };
    std::vector<SeqPart> parts;
    SemiAlg tuple_union;
};

struct MetaPlan {
    struct Family {
        std::vector<std::shared_ptr<const LinPlan>> components;
        SemiAlg set;  // product fold of the component sets
    };
    std::vector<Family> families;
};

struct ClosureReport {
    SemiAlg formula;  // single free block of the automaton dimension
    bool certified = false;
    ProvenanceNode provenance;
    std::vector<std::pair<std::string, double>> timings;  // (stage, seconds)

    std::shared_ptr<const LinPlan> lin_plan;
    std::shared_ptr<const MatrixPlan> matrix_plan;
    std::shared_ptr<const MetaPlan> meta_plan;
};

// -- closure builders ----------------------------------------------------------

ClosureReport closure_linear(const LinearGrammar& g, const QuantumAutomaton& q,
                             const RunConfig& cfg, Budget& budget);
ClosureReport closure_metalinear(const MetalinearGrammar& g, const QuantumAutomaton& q,
                                 const RunConfig& cfg, Budget& budget);
ClosureReport closure_matrix(const RestrictedMatrixGrammar& g, const QuantumAutomaton& q,
                             const RunConfig& cfg, Budget& budget);
ClosureReport closure_monoidal(const MonoidalGrammar& g, const QuantumAutomaton& q,
                               const RunConfig& cfg, Budget& budget);

ClosureReport closure_of_grammar(const GrammarSpec& g, const QuantumAutomaton& q,
                                 const RunConfig& cfg, Budget& budget);

/// Bound-block assignment demonstrating phi(w) in the closure formula, built
/// from a derivation of w. nullopt when w is not derivable within the limits.
std::optional<WitnessMap> soundness_witness(const ClosureReport& report, const GrammarSpec& g,
                                            const QuantumAutomaton& q, const Word& w,
                                            const EnumLimits& limits);

std::string closure_report_json(const ClosureReport& report, bool include_timings);

}  // namespace qcut

#endif
