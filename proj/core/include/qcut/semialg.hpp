#ifndef QCUT_SEMIALG_HPP
#define QCUT_SEMIALG_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qcut/closure.hpp"

namespace qcut {

struct SABlock {
    std::string name;
    int dim = 0;
    bool operator==(const SABlock&) const = default;
};

/// Atom p = 0 or p > 0 over the owning set's variable layout.
struct SAAtom {
    Poly p;
    bool eq = true;
    bool operator==(const SAAtom&) const = default;
};

/// Negation-free boolean structure over atom indices.
struct SAFormula {
    enum class Kind { Atom, And, Or };
    Kind kind = Kind::And;
    int atom = -1;
    std::vector<SAFormula> kids;

    static SAFormula atom_ref(int i) { return SAFormula{Kind::Atom, i, {}}; }
    static SAFormula all_of(std::vector<SAFormula> kids) {
        return SAFormula{Kind::And, -1, std::move(kids)};
    }
    static SAFormula any_of(std::vector<SAFormula> kids) {
        return SAFormula{Kind::Or, -1, std::move(kids)};
    }
};

enum class SAKind {
    Variety,        // conjunction of p = 0 from an ideal; no bound blocks
    Point,          // singleton
    Union,
    Product,
    Sandwich,
    DSum,
    BlocksProduct,
    Rename,
    TupleMul,       // per-block product of two tuple sets
    TupleTranspose  // transposes selected free blocks
};

class SemiAlgSet;
using SemiAlg = std::shared_ptr<const SemiAlgSet>;

/// Prenex-existential formula over polynomial sign conditions, describing a
/// set of matrices (or of tuples of matrices, one per free block). Variable
/// layout: free blocks then bound blocks, row-major entries per block.
class SemiAlgSet {
public:
    std::vector<SABlock> free_blocks;
    std::vector<SABlock> bound_blocks;
    std::vector<SAAtom> atoms;
    SAFormula body;

    SAKind kind = SAKind::Variety;
    std::vector<SemiAlg> children;
    // one rename map per child: child block name (free or bound) -> name here
    std::vector<std::map<std::string, std::string>> child_renames;
    std::optional<IndexPerm> perm;        // Rename nodes
    std::vector<char> transposed_blocks;  // TupleTranspose nodes

    // Known member tuples (aligned with free_blocks); exact when the member
    // set is finite and completely listed.
    std::optional<std::vector<std::vector<QMatrix>>> finite_members;
    bool finite_exact = false;

    int var_count() const;
    int block_var_base(int block_index) const;  // into the layout, frees first
    int find_block(const std::string& name) const;

    bool is_false() const {  // empty union
        return body.kind == SAFormula::Kind::Or && body.kids.empty();
    }
};

struct NameGen {
    int counter = 0;
    std::string fresh(const std::string& prefix = "b") { return prefix + std::to_string(counter++); }
};

// -- constructors -------------------------------------------------------------

/// Algebraic set as a semialgebraic one: conjunction of p = 0.
SemiAlg sa_from_variety(const PolyIdeal& ideal, int n, NameGen& names);

/// Variety over a block shape, one free block per shape block; block b is
/// read transposed when transposed[b] is set.
SemiAlg sa_from_variety_blocks(const PolyIdeal& reduced, const BlockShape& shape,
                               const std::vector<char>& transposed, NameGen& names);

SemiAlg sa_point(const QMatrix& m, NameGen& names);
SemiAlg sa_point_tuple(const std::vector<QMatrix>& blocks, NameGen& names);

/// The empty set over one n-block (an empty disjunction).
SemiAlg sa_empty(int n, NameGen& names);

// -- calculus -----------------------------------------------------------------

SemiAlg sa_union(const SemiAlg& a, const SemiAlg& b, NameGen& names);
SemiAlg sa_union_all(std::vector<SemiAlg> parts, int n, NameGen& names);

/// { Y Z : Y in a, Z in b } for single-block sets.
SemiAlg sa_product(const SemiAlg& a, const SemiAlg& b, NameGen& names);

/// { X Y Z : (X, Z) in pairs, Y in b }.
SemiAlg sa_sandwich(const SemiAlg& pairs, const SemiAlg& b, NameGen& names);

/// Single big block, diagonal sub-blocks constrained by the parts,
/// off-block entries zero.
SemiAlg sa_dsum(const std::vector<SemiAlg>& parts, NameGen& names);

/// { X_1 ... X_k : X_1 (+) ... (+) X_k in a } for a over one big block
/// composed of k equal square blocks.
SemiAlg sa_blocks_product(const SemiAlg& a, const std::vector<int>& dims, NameGen& names);

/// Same extraction for a tuple set (k free blocks).
SemiAlg sa_tuple_blocks_product(const SemiAlg& a, NameGen& names);

/// Entry renaming pi applied to a single-block set.
SemiAlg sa_rename(const IndexPerm& pi, const SemiAlg& a, NameGen& names);

/// Per-block product of two tuple sets with identical free signatures.
SemiAlg sa_tuple_mul(const SemiAlg& a, const SemiAlg& b, NameGen& names);

/// Transposes the flagged free blocks of a tuple set.
SemiAlg sa_tuple_transpose(const SemiAlg& a, const std::vector<char>& flags, NameGen& names);

// -- queries ------------------------------------------------------------------

enum class Tri { True, False, Unknown };

using WitnessMap = std::map<std::string, QMatrix>;

/// Membership of a tuple. With witnesses: exact evaluation of the body at
/// (value, witnesses), missing bound blocks defaulting to the identity.
/// Without: structural evaluation, exact on variety/point/union/dsum/rename
/// shapes and on nodes with exactly tracked finite members.
Tri sa_probe(const SemiAlg& s, const std::vector<QMatrix>& value,
             const WitnessMap* witnesses = nullptr);

Tri sa_probe(const SemiAlg& s, const QMatrix& value, const WitnessMap* witnesses = nullptr);

/// Exact finite member list for single-block sets, when tracked.
std::optional<std::vector<QMatrix>> sa_exact_members(const SemiAlg& s);

/// Blocks renamed canonically in layout order; for structural comparison.
bool sa_structurally_equal(const SemiAlg& a, const SemiAlg& b);

std::string sa_pretty(const SemiAlg& s);

}  // namespace qcut

#endif
