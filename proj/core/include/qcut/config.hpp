#ifndef QCUT_CONFIG_HPP
#define QCUT_CONFIG_HPP

#include <string>

namespace qcut {

enum class DecideMode { Symbolic, Brute, Both };

struct RunConfig {
    DecideMode mode = DecideMode::Both;
    int degree_cap = 4;       // invariant-polynomial degree bound
    int chain_cap = 0;        // 0: dimension bound (total matrix size)^2
    int brute_len = 16;       // word length bound of the brute-force branch
    long enum_node_cap = 500000;
    long groebner_reductions = 5000000;
    int groebner_degree = 64;
    int state_cap = 64;       // tuple states explored in the matrix pipeline
    std::string smt_command;  // external solver; empty = not configured
    int timeout_seconds = 60;
};

/// Default solver command, from QCUT_SMT_CMD when set.
std::string default_smt_command();

}  // namespace qcut

#endif
