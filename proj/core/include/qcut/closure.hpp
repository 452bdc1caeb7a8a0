#ifndef QCUT_CLOSURE_HPP
#define QCUT_CLOSURE_HPP

#include <optional>
#include <vector>

#include "qcut/cycle_monoid.hpp"
#include "qcut/groebner.hpp"

namespace qcut {

/// Block-diagonal matrix space: the variables are the entries of the
/// diagonal blocks, concatenated block by block.
struct BlockShape {
    std::vector<int> dims;

    static BlockShape single(int n) { return BlockShape{{n}}; }

    int blocks() const { return static_cast<int>(dims.size()); }
    int total_dim() const;
    int var_count() const;
    int block_offset(int b) const;      // first variable index of block b
    int matrix_offset(int b) const;     // first row/col of block b in the big matrix
    int var(int b, int i, int j) const;

    /// Entries of the big identity in block coordinates.
    std::vector<Rat> identity_point() const;
    /// Block entries of a block-diagonal matrix, concatenated.
    std::vector<Rat> point_of(const QMatrix& m) const;
    std::vector<Rat> point_of_blocks(const std::vector<QMatrix>& blocks) const;

    std::vector<std::string> var_names(const std::string& tag = "x") const;

    bool operator==(const BlockShape&) const = default;
};

/// Result of the invariant-polynomial closure of a finitely generated group
/// of orthogonal matrices: the vanishing ideal of Cl(<E>), computed degree
/// by degree from the linear conditions p(I) = 0, p(eX) = p(X).
struct GroupClosureResult {
    BlockShape shape;     // common block structure of the generators
    PolyIdeal reduced;    // over the shape's block variables
    PolyIdeal ideal;      // over the full dim^2 variables (off-block entries pinned to 0)
    bool certified = false;   // ideal stabilized between consecutive degrees
    int degree_reached = 0;
    std::optional<std::vector<QMatrix>> finite_group;  // when <E> is finite (enumerable)
};

GroupClosureResult group_closure(const GeneratorSet& e, int degree_cap, Budget& budget,
                                 std::optional<BlockShape> forced_shape = std::nullopt);

/// Monoid generated by orthogonal matrices, enumerated breadth-first.
/// nullopt when more than `cap` elements appear. (A finite monoid of
/// orthogonal matrices is the generated group.)
std::optional<std::vector<QMatrix>> enumerate_group(const std::vector<QMatrix>& gens,
                                                    std::size_t cap);

/// Vanishing ideal of the Zariski closure of psi(V(src)): the elimination
/// ideal < src, y_j - psi_j(x) > inter Q[y], via a block elimination order.
PolyIdeal image_closure(const PolyIdeal& src, const std::vector<Poly>& psi, int dst_vars,
                        Budget& budget);

/// Ascending variety chain H_1 <= H_2 <= ... with H_{i+1} = Cl(H_i * H_1)
/// (blockwise matrix product). Stops at ideal stabilization or the cap.
struct VarietyChain {
    std::vector<PolyIdeal> ideals;
    bool stabilized = false;
    int steps_used = 0;
};

VarietyChain product_chain(const PolyIdeal& h1, const BlockShape& shape, int cap, Budget& budget);

/// Blockwise multiplication map: target var (b,i,j) = sum_t A_(b,i,t) B_(b,t,j)
/// over a source space holding the A-copy then the B-copy of the shape.
std::vector<Poly> block_multiplication_map(const BlockShape& shape);

/// Homogeneous degree-d monomials of the shape's variable space, grouped by
/// block multidegree. Deterministic order.
std::vector<Monomial> homogeneous_monomials(int nvars, int degree);

}  // namespace qcut

#endif
