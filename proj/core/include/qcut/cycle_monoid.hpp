#ifndef QCUT_CYCLE_MONOID_HPP
#define QCUT_CYCLE_MONOID_HPP

#include <string>
#include <vector>

#include "qcut/grammar.hpp"
#include "qcut/qfa.hpp"

namespace qcut {

/// Finite automaton whose transitions carry orthogonal matrices. The
/// root-to-root path labels form the monoid of interest.
struct GroupAutomaton {
    int label_dim = 0;
    std::vector<std::string> states;
    int root = 0;
    struct Edge {
        int src = 0;
        int dst = 0;
        QMatrix label;
        std::vector<Word> contexts;  // the grammar contexts behind the label
    };
    std::vector<Edge> edges;

    std::string dump() const;  // line-oriented debug form
};

/// Finite generating set for the group generated by a cycle monoid.
struct GeneratorSet {
    int dim = 0;
    std::vector<QMatrix> generators;  // orthogonal, deduplicated

    /// Each generator g satisfies g = label(loop_a) * label(loop_b)^T for two
    /// root loops recorded as edge index sequences.
    struct Witness {
        std::vector<int> loop_a;
        std::vector<int> loop_b;
    };
    std::vector<Witness> witnesses;

    bool trimming_applied = false;
    int states_removed = 0;
};

/// Automaton for the cycle monoid M_A of a variable of a linear grammar:
/// states are the variables of `active`, one edge per rule B -> u C v with
/// label phi(u) (+) phi(v)^T, root A.
GroupAutomaton cycle_automaton_linear(const LinearGrammar& g, const QuantumAutomaton& q,
                                      const std::string& var,
                                      const std::vector<std::string>& active);

GroupAutomaton cycle_automaton_linear(const LinearGrammar& g, const QuantumAutomaton& q,
                                      const std::string& var);

/// Automaton for the cycle monoid M_q of a restricted matrix grammar:
/// states are the k-tuples of block variables, one edge per step matrix,
/// labels phi(u_1) (+) phi(v_1)^T (+) ... (+) phi(u_k) (+) phi(v_k)^T.
GroupAutomaton cycle_automaton_matrix(const RestrictedMatrixGrammar& g,
                                      const QuantumAutomaton& q,
                                      const std::vector<std::string>& root_state);

/// Generators of the group generated by the root-loop labels: trims the
/// automaton to states on root loops, takes a breadth-first spanning tree,
/// and returns t(src) * label * t(dst)^T per remaining edge.
GeneratorSet group_generators(const GroupAutomaton& aut);

QMatrix path_label(const GroupAutomaton& aut, const std::vector<int>& edge_indices);

}  // namespace qcut

#endif
