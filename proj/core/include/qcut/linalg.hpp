#ifndef QCUT_LINALG_HPP
#define QCUT_LINALG_HPP

#include <vector>

#include "qcut/rational.hpp"

namespace qcut {

using RatMatrix = std::vector<std::vector<Rat>>;  // row-major, possibly ragged-checked

/// Basis of the right nullspace of a (rows x cols) rational matrix,
/// via Gauss-Jordan elimination. Deterministic pivot choice.
std::vector<std::vector<Rat>> nullspace(const RatMatrix& m, int cols);

/// Reduced row echelon form in place; returns pivot column per row rank.
std::vector<int> rref(RatMatrix& m, int cols);

}  // namespace qcut

#endif
