#ifndef QCUT_TEST_ORACLES_HPP
#define QCUT_TEST_ORACLES_HPP

// Independent reference implementations used as test oracles. These stay
// deliberately naive and share no algorithmic code with the library paths
// they check.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qcut/grammar.hpp"
#include "qcut/groebner.hpp"
#include "qcut/qfa.hpp"

namespace qcut::oracles {

// word helper: one symbol per character
Word W(const std::string& s);

QMatrix rot35();     // [[3/5,4/5],[-4/5,3/5]]
QMatrix swap2();     // [[0,1],[1,0]]
QMatrix cyc3();      // 3-cycle permutation
QMatrix swap12_3();  // transposition in O(3)

// derivation-tree enumeration of a CFG, bounded by tree depth
std::set<Word> naive_cfg_words(const CFGrammar& g, int max_len, int max_depth);

// linear grammars as CFGs
std::set<Word> naive_linear_words(const LinearGrammar& g, int max_len, int max_depth);

// saturating application of matrices to sentential tuples
std::set<Word> naive_matrix_words(const RestrictedMatrixGrammar& g, int max_len);

// monoid generated by matrices, nullopt past the cap
std::optional<std::vector<QMatrix>> naive_group(const std::vector<QMatrix>& gens, std::size_t cap);

// interpolated vanishing ideal of a finite point set (degree-raised until
// the reduced basis stabilizes); self-contained linear algebra
PolyIdeal interpolated_vanishing_ideal(const std::vector<std::vector<Rat>>& points, int nvars,
                                       int degree_cap, Budget& budget);

// convenience: the vanishing ideal of a finite set of n x n matrices
PolyIdeal matrix_set_ideal(const std::vector<QMatrix>& set, Budget& budget);

std::string fixture(const std::string& rel);

}  // namespace qcut::oracles

#endif
