#include "qcut/semialg.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace qcut {

namespace {

constexpr std::size_t kFiniteCap = 4096;

SAFormula shift_formula(const SAFormula& f, int delta) {
    SAFormula out;
    out.kind = f.kind;
    if (f.kind == SAFormula::Kind::Atom) {
        out.atom = f.atom + delta;
        return out;
    }
    out.kids.reserve(f.kids.size());
    for (const auto& k : f.kids) out.kids.push_back(shift_formula(k, delta));
    return out;
}

bool formula_equal(const SAFormula& a, const SAFormula& b) {
    if (a.kind != b.kind || a.atom != b.atom || a.kids.size() != b.kids.size()) return false;
    for (std::size_t i = 0; i < a.kids.size(); ++i)
        if (!formula_equal(a.kids[i], b.kids[i])) return false;
    return true;
}

/// Incremental assembly of a set: blocks, atoms, embedded children.
struct Assembler {
    std::shared_ptr<SemiAlgSet> out = std::make_shared<SemiAlgSet>();
    std::map<std::string, int> var_base;
    int total_vars = 0;

    int add_block(const SABlock& b, bool free) {
        if (var_base.count(b.name))
            throw std::invalid_argument("duplicate block name '" + b.name + "'");
        var_base[b.name] = total_vars;
        total_vars += b.dim * b.dim;
        (free ? out->free_blocks : out->bound_blocks).push_back(b);
        return var_base[b.name];
    }

    int var_of(const std::string& block, int dim, int i, int j) const {
        return var_base.at(block) + i * dim + j;
    }

    /// Copies a child's atoms into this layout. free_targets[i] names the
    /// block (already added) receiving the child's i-th free block; empty
    /// string means "make a fresh bound block". transpose_free[i] reads the
    /// child free block transposed; offset_free[i] shifts it into a bigger
    /// target block ((i,j) -> (off+i, off+j) of a block with dim
    /// target_dim[i]).
    struct EmbedSpec {
        std::vector<std::string> free_targets;
        std::vector<char> transpose_free;
        std::vector<int> free_offset;
        std::vector<int> free_target_dim;
    };

    SAFormula embed(const SemiAlg& child, NameGen& names, EmbedSpec spec) {
        std::map<std::string, std::string> rename;
        const auto& cf = child->free_blocks;
        if (spec.free_targets.empty()) spec.free_targets.assign(cf.size(), std::string());
        if (spec.transpose_free.empty()) spec.transpose_free.assign(cf.size(), 0);
        if (spec.free_offset.empty()) spec.free_offset.assign(cf.size(), 0);
        if (spec.free_target_dim.empty()) {
            spec.free_target_dim.resize(cf.size());
            for (std::size_t i = 0; i < cf.size(); ++i) spec.free_target_dim[i] = cf[i].dim;
        }
        // map child vars to parent vars
        std::vector<int> var_map;
        auto map_block = [&](const SABlock& cb, const std::string& target, bool transpose, int off,
                             int tdim) {
            for (int i = 0; i < cb.dim; ++i)
                for (int j = 0; j < cb.dim; ++j) {
                    int pi = transpose ? j : i;
                    int pj = transpose ? i : j;
                    var_map.push_back(var_of(target, tdim, off + pi, off + pj));
                }
        };
        for (std::size_t i = 0; i < cf.size(); ++i) {
            std::string target = spec.free_targets[i];
            if (target.empty()) {
                target = names.fresh();
                add_block(SABlock{target, cf[i].dim}, false);
            }
            rename[cf[i].name] = target;
            map_block(cf[i], target, spec.transpose_free[i] != 0, spec.free_offset[i],
                      spec.free_target_dim[i]);
        }
        for (const auto& cb : child->bound_blocks) {
            std::string target = names.fresh();
            add_block(SABlock{target, cb.dim}, false);
            rename[cb.name] = target;
            map_block(cb, target, false, 0, cb.dim);
        }
        const int delta = static_cast<int>(out->atoms.size());
        for (const auto& a : child->atoms)
            out->atoms.push_back(SAAtom{a.p.remap(total_vars, var_map), a.eq});
        // accepted atoms were remapped into a smaller layout snapshot; widen below
        out->children.push_back(child);
        out->child_renames.push_back(std::move(rename));
        return shift_formula(child->body, delta);
    }

    /// Re-widens every atom to the final variable count (identity mapping).
    void finalize_atoms() {
        std::vector<int> idmap(static_cast<std::size_t>(total_vars));
        for (int i = 0; i < total_vars; ++i) idmap[static_cast<std::size_t>(i)] = i;
        for (auto& a : out->atoms)
            if (a.p.nvars() != total_vars) {
                std::vector<int> m(static_cast<std::size_t>(a.p.nvars()));
                for (int i = 0; i < a.p.nvars(); ++i) m[static_cast<std::size_t>(i)] = i;
                a.p = a.p.remap(total_vars, m);
            }
    }
};

Poly entry_equation_var(int nvars, int v) { return Poly::variable(nvars, v); }

std::optional<std::vector<std::vector<QMatrix>>> combine_finite(
    const std::optional<std::vector<std::vector<QMatrix>>>& a,
    const std::optional<std::vector<std::vector<QMatrix>>>& b,
    const std::function<std::vector<QMatrix>(const std::vector<QMatrix>&,
                                             const std::vector<QMatrix>&)>& f) {
    if (!a || !b) return std::nullopt;
    std::vector<std::vector<QMatrix>> out;
    for (const auto& x : *a)
        for (const auto& y : *b) {
            if (out.size() >= kFiniteCap) return std::nullopt;
            out.push_back(f(x, y));
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

int SemiAlgSet::var_count() const {
    int t = 0;
    for (const auto& b : free_blocks) t += b.dim * b.dim;
    for (const auto& b : bound_blocks) t += b.dim * b.dim;
    return t;
}

int SemiAlgSet::block_var_base(int idx) const {
    int t = 0;
    int i = 0;
    for (const auto& b : free_blocks) {
        if (i == idx) return t;
        t += b.dim * b.dim;
        ++i;
    }
    for (const auto& b : bound_blocks) {
        if (i == idx) return t;
        t += b.dim * b.dim;
        ++i;
    }
    throw std::out_of_range("block index");
}

int SemiAlgSet::find_block(const std::string& name) const {
    int i = 0;
    for (const auto& b : free_blocks) {
        if (b.name == name) return i;
        ++i;
    }
    for (const auto& b : bound_blocks) {
        if (b.name == name) return i;
        ++i;
    }
    return -1;
}

SemiAlg sa_from_variety(const PolyIdeal& ideal, int n, NameGen& names) {
    auto s = std::make_shared<SemiAlgSet>();
    s->kind = SAKind::Variety;
    s->free_blocks.push_back(SABlock{names.fresh("X"), n});
    const int nv = n * n;
    if (ideal.nvars() != nv) throw std::invalid_argument("variety ideal does not match dimension");
    std::vector<SAFormula> kids;
    for (const auto& g : ideal.generators()) {
        s->atoms.push_back(SAAtom{g, true});
        kids.push_back(SAFormula::atom_ref(static_cast<int>(s->atoms.size()) - 1));
    }
    s->body = SAFormula::all_of(std::move(kids));
    return s;
}

SemiAlg sa_from_variety_blocks(const PolyIdeal& reduced, const BlockShape& shape,
                               const std::vector<char>& transposed, NameGen& names) {
    if (reduced.nvars() != shape.var_count())
        throw std::invalid_argument("reduced ideal does not match the shape");
    auto s = std::make_shared<SemiAlgSet>();
    s->kind = SAKind::Variety;
    int total = 0;
    std::vector<int> bases;
    for (int b = 0; b < shape.blocks(); ++b) {
        s->free_blocks.push_back(SABlock{names.fresh("X"), shape.dims[static_cast<std::size_t>(b)]});
        bases.push_back(total);
        total += shape.dims[static_cast<std::size_t>(b)] * shape.dims[static_cast<std::size_t>(b)];
    }
    std::vector<int> var_map(static_cast<std::size_t>(shape.var_count()));
    for (int b = 0; b < shape.blocks(); ++b) {
        int d = shape.dims[static_cast<std::size_t>(b)];
        bool tr = b < static_cast<int>(transposed.size()) && transposed[static_cast<std::size_t>(b)];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                var_map[static_cast<std::size_t>(shape.var(b, i, j))] =
                    bases[static_cast<std::size_t>(b)] + (tr ? j * d + i : i * d + j);
    }
    std::vector<SAFormula> kids;
    for (const auto& g : reduced.generators()) {
        s->atoms.push_back(SAAtom{g.remap(total, var_map), true});
        kids.push_back(SAFormula::atom_ref(static_cast<int>(s->atoms.size()) - 1));
    }
    s->body = SAFormula::all_of(std::move(kids));
    return s;
}

SemiAlg sa_point(const QMatrix& m, NameGen& names) { return sa_point_tuple({m}, names); }

SemiAlg sa_point_tuple(const std::vector<QMatrix>& blocks, NameGen& names) {
    auto s = std::make_shared<SemiAlgSet>();
    s->kind = SAKind::Point;
    int total = 0;
    for (const auto& b : blocks) {
        s->free_blocks.push_back(SABlock{names.fresh("X"), b.dim()});
        total += b.dim() * b.dim();
    }
    std::vector<SAFormula> kids;
    int base = 0;
    for (const auto& b : blocks) {
        for (int i = 0; i < b.dim(); ++i)
            for (int j = 0; j < b.dim(); ++j) {
                Poly p = Poly::variable(total, base + i * b.dim() + j) -
                         Poly::constant(total, b.at(i, j));
                s->atoms.push_back(SAAtom{p, true});
                kids.push_back(SAFormula::atom_ref(static_cast<int>(s->atoms.size()) - 1));
            }
        base += b.dim() * b.dim();
    }
    s->body = SAFormula::all_of(std::move(kids));
    s->finite_members = std::vector<std::vector<QMatrix>>{blocks};
    s->finite_exact = true;
    return s;
}

SemiAlg sa_empty(int n, NameGen& names) {
    auto s = std::make_shared<SemiAlgSet>();
    s->kind = SAKind::Union;
    s->free_blocks.push_back(SABlock{names.fresh("X"), n});
    s->body = SAFormula::any_of({});
    s->finite_members = std::vector<std::vector<QMatrix>>{};
    s->finite_exact = true;
    return s;
}

SemiAlg sa_union_all(std::vector<SemiAlg> parts, int n, NameGen& names) {
    if (parts.empty()) return sa_empty(n, names);
    Assembler as;
    as.out->kind = SAKind::Union;
    const auto& sig = parts[0]->free_blocks;
    std::vector<std::string> targets;
    for (const auto& fb : sig) {
        std::string nm = names.fresh("X");
        as.add_block(SABlock{nm, fb.dim}, true);
        targets.push_back(nm);
    }
    std::vector<SAFormula> kids;
    std::optional<std::vector<std::vector<QMatrix>>> finite(std::vector<std::vector<QMatrix>>{});
    bool exact = true;
    for (const auto& p : parts) {
        if (p->free_blocks.size() != sig.size())
            throw std::invalid_argument("union of sets with different free signatures");
        for (std::size_t i = 0; i < sig.size(); ++i)
            if (p->free_blocks[i].dim != sig[i].dim)
                throw std::invalid_argument("union of sets with different dimensions");
        Assembler::EmbedSpec spec;
        spec.free_targets = targets;
        kids.push_back(as.embed(p, names, spec));
        if (finite && p->finite_members) {
            for (const auto& t : *p->finite_members) {
                if (finite->size() >= kFiniteCap) {
                    finite.reset();
                    break;
                }
                finite->push_back(t);
            }
            exact = exact && p->finite_exact;
        } else {
            finite.reset();
        }
    }
    as.finalize_atoms();
    as.out->body = SAFormula::any_of(std::move(kids));
    if (finite) {
        std::sort(finite->begin(), finite->end());
        finite->erase(std::unique(finite->begin(), finite->end()), finite->end());
        as.out->finite_members = std::move(finite);
        as.out->finite_exact = exact;
    }
    return as.out;
}

SemiAlg sa_union(const SemiAlg& a, const SemiAlg& b, NameGen& names) {
    return sa_union_all({a, b}, a->free_blocks.at(0).dim, names);
}

namespace {

// free = prefix product of the named bound blocks (all dim n)
void add_product_equations(Assembler& as, const std::string& free_name, int n,
                           const std::vector<std::string>& factors,
                           std::vector<SAFormula>& kids) {
    const int nv = as.total_vars;
    // symbolic product of the factor blocks
    std::vector<std::vector<Poly>> prod(static_cast<std::size_t>(n),
                                        std::vector<Poly>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                Poly::constant(nv, Rat(i == j ? 1 : 0));
    for (const auto& f : factors) {
        std::vector<std::vector<Poly>> next(static_cast<std::size_t>(n),
                                            std::vector<Poly>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Poly acc = Poly::zero(nv);
                for (int t = 0; t < n; ++t)
                    acc = acc + prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] *
                                    entry_equation_var(nv, as.var_of(f, n, t, j));
                next[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
            }
        prod = std::move(next);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Poly p = entry_equation_var(nv, as.var_of(free_name, n, i, j)) -
                     prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            as.out->atoms.push_back(SAAtom{p, true});
            kids.push_back(SAFormula::atom_ref(static_cast<int>(as.out->atoms.size()) - 1));
        }
}

}  // namespace

SemiAlg sa_product(const SemiAlg& a, const SemiAlg& b, NameGen& names) {
    if (a->free_blocks.size() != 1 || b->free_blocks.size() != 1 ||
        a->free_blocks[0].dim != b->free_blocks[0].dim)
        throw std::invalid_argument("product needs two single-block sets of equal dimension");
    const int n = a->free_blocks[0].dim;
    Assembler as;
    as.out->kind = SAKind::Product;
    std::string fx = names.fresh("X");
    as.add_block(SABlock{fx, n}, true);
    std::vector<SAFormula> kids;
    kids.push_back(as.embed(a, names, {}));
    kids.push_back(as.embed(b, names, {}));
    as.finalize_atoms();
    std::string ya = as.out->child_renames[0].at(a->free_blocks[0].name);
    std::string zb = as.out->child_renames[1].at(b->free_blocks[0].name);
    add_product_equations(as, fx, n, {ya, zb}, kids);
    as.out->body = SAFormula::all_of(std::move(kids));
    as.out->finite_members = combine_finite(
        a->finite_members, b->finite_members,
        [](const std::vector<QMatrix>& x, const std::vector<QMatrix>& y) {
            return std::vector<QMatrix>{mat_mul(x[0], y[0])};
        });
    as.out->finite_exact = as.out->finite_members && a->finite_exact && b->finite_exact;
    return as.out;
}

SemiAlg sa_sandwich(const SemiAlg& pairs, const SemiAlg& b, NameGen& names) {
    if (pairs->free_blocks.size() != 2 || b->free_blocks.size() != 1)
        throw std::invalid_argument("sandwich needs a pair set and a single-block set");
    const int n = b->free_blocks[0].dim;
    if (pairs->free_blocks[0].dim != n || pairs->free_blocks[1].dim != n)
        throw std::invalid_argument("sandwich dimension mismatch");
    Assembler as;
    as.out->kind = SAKind::Sandwich;
    std::string fx = names.fresh("X");
    as.add_block(SABlock{fx, n}, true);
    std::vector<SAFormula> kids;
    kids.push_back(as.embed(pairs, names, {}));
    kids.push_back(as.embed(b, names, {}));
    as.finalize_atoms();
    std::string xa = as.out->child_renames[0].at(pairs->free_blocks[0].name);
    std::string za = as.out->child_renames[0].at(pairs->free_blocks[1].name);
    std::string yb = as.out->child_renames[1].at(b->free_blocks[0].name);
    add_product_equations(as, fx, n, {xa, yb, za}, kids);
    as.out->body = SAFormula::all_of(std::move(kids));
    as.out->finite_members = combine_finite(
        pairs->finite_members, b->finite_members,
        [](const std::vector<QMatrix>& xz, const std::vector<QMatrix>& y) {
            return std::vector<QMatrix>{mat_mul(mat_mul(xz[0], y[0]), xz[1])};
        });
    as.out->finite_exact = as.out->finite_members && pairs->finite_exact && b->finite_exact;
    return as.out;
}

SemiAlg sa_dsum(const std::vector<SemiAlg>& parts, NameGen& names) {
    if (parts.empty()) throw std::invalid_argument("dsum of an empty list");
    int total_dim = 0;
    for (const auto& p : parts) {
        if (p->free_blocks.size() != 1) throw std::invalid_argument("dsum parts must be single-block");
        total_dim += p->free_blocks[0].dim;
    }
    Assembler as;
    as.out->kind = SAKind::DSum;
    std::string big = names.fresh("X");
    as.add_block(SABlock{big, total_dim}, true);
    std::vector<SAFormula> kids;
    int off = 0;
    for (const auto& p : parts) {
        Assembler::EmbedSpec spec;
        spec.free_targets = {big};
        spec.transpose_free = {0};
        spec.free_offset = {off};
        spec.free_target_dim = {total_dim};
        kids.push_back(as.embed(p, names, spec));
        off += p->free_blocks[0].dim;
    }
    as.finalize_atoms();
    // off-block entries vanish
    off = 0;
    std::vector<std::pair<int, int>> spans;
    for (const auto& p : parts) {
        spans.emplace_back(off, p->free_blocks[0].dim);
        off += p->free_blocks[0].dim;
    }
    for (int i = 0; i < total_dim; ++i)
        for (int j = 0; j < total_dim; ++j) {
            bool inside = false;
            for (const auto& [o, d] : spans)
                if (i >= o && i < o + d && j >= o && j < o + d) {
                    inside = true;
                    break;
                }
            if (inside) continue;
            as.out->atoms.push_back(
                SAAtom{entry_equation_var(as.total_vars, as.var_of(big, total_dim, i, j)), true});
            kids.push_back(SAFormula::atom_ref(static_cast<int>(as.out->atoms.size()) - 1));
        }
    as.out->body = SAFormula::all_of(std::move(kids));
    // assembled finite members
    std::optional<std::vector<std::vector<QMatrix>>> finite(std::vector<std::vector<QMatrix>>{
        std::vector<QMatrix>{}});
    bool exact = true;
    for (const auto& p : parts) {
        finite = combine_finite(finite, p->finite_members,
                                [](const std::vector<QMatrix>& acc, const std::vector<QMatrix>& m) {
                                    auto copy = acc;
                                    copy.push_back(m[0]);
                                    return copy;
                                });
        exact = exact && p->finite_exact;
        if (!finite) break;
    }
    if (finite) {
        std::vector<std::vector<QMatrix>> assembled;
        for (const auto& tup : *finite)
            assembled.push_back({direct_sum(std::span<const QMatrix>(tup))});
        as.out->finite_members = std::move(assembled);
        as.out->finite_exact = exact;
    }
    return as.out;
}

SemiAlg sa_blocks_product(const SemiAlg& a, const std::vector<int>& dims, NameGen& names) {
    if (a->free_blocks.size() != 1) throw std::invalid_argument("blocks_product needs one big block");
    int total = 0;
    for (int d : dims) {
        if (d != dims[0]) throw std::invalid_argument("blocks_product blocks must have equal size");
        total += d;
    }
    if (total != a->free_blocks[0].dim) throw std::invalid_argument("block sizes do not sum to the dimension");
    const int n = dims[0];
    Assembler as;
    as.out->kind = SAKind::BlocksProduct;
    std::string fx = names.fresh("X");
    as.add_block(SABlock{fx, n}, true);
    std::vector<SAFormula> kids;
    kids.push_back(as.embed(a, names, {}));
    as.finalize_atoms();
    const std::string big = as.out->child_renames[0].at(a->free_blocks[0].name);
    // free = product of the diagonal blocks of `big`
    const int nv = as.total_vars;
    std::vector<std::vector<Poly>> prod(static_cast<std::size_t>(n),
                                        std::vector<Poly>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                Poly::constant(nv, Rat(i == j ? 1 : 0));
    int off = 0;
    for (std::size_t bi = 0; bi < dims.size(); ++bi) {
        std::vector<std::vector<Poly>> next(static_cast<std::size_t>(n),
                                            std::vector<Poly>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Poly acc = Poly::zero(nv);
                for (int t = 0; t < n; ++t)
                    acc = acc + prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] *
                                    entry_equation_var(nv, as.var_of(big, total, off + t, off + j));
                next[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
            }
        prod = std::move(next);
        off += n;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Poly p = entry_equation_var(nv, as.var_of(fx, n, i, j)) -
                     prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            as.out->atoms.push_back(SAAtom{p, true});
            kids.push_back(SAFormula::atom_ref(static_cast<int>(as.out->atoms.size()) - 1));
        }
    as.out->body = SAFormula::all_of(std::move(kids));
    if (a->finite_members) {
        std::vector<std::vector<QMatrix>> members;
        for (const auto& tup : *a->finite_members) {
            QMatrix acc = QMatrix::identity(n);
            int o = 0;
            for (int d : dims) {
                acc = mat_mul(acc, diagonal_block(tup[0], o, d));
                o += d;
            }
            members.push_back({acc});
        }
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        as.out->finite_members = std::move(members);
        as.out->finite_exact = a->finite_exact;
    }
    return as.out;
}

SemiAlg sa_tuple_blocks_product(const SemiAlg& a, NameGen& names) {
    const int k = static_cast<int>(a->free_blocks.size());
    if (k == 0) throw std::invalid_argument("tuple blocks_product of an empty tuple");
    const int n = a->free_blocks[0].dim;
    Assembler as;
    as.out->kind = SAKind::BlocksProduct;
    std::string fx = names.fresh("X");
    as.add_block(SABlock{fx, n}, true);
    std::vector<SAFormula> kids;
    kids.push_back(as.embed(a, names, {}));
    as.finalize_atoms();
    std::vector<std::string> factors;
    for (const auto& fb : a->free_blocks)
        factors.push_back(as.out->child_renames[0].at(fb.name));
    add_product_equations(as, fx, n, factors, kids);
    as.out->body = SAFormula::all_of(std::move(kids));
    if (a->finite_members) {
        std::vector<std::vector<QMatrix>> members;
        for (const auto& tup : *a->finite_members) {
            QMatrix acc = QMatrix::identity(n);
            for (const auto& m : tup) acc = mat_mul(acc, m);
            members.push_back({acc});
        }
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        as.out->finite_members = std::move(members);
        as.out->finite_exact = a->finite_exact;
    }
    return as.out;
}

SemiAlg sa_rename(const IndexPerm& pi, const SemiAlg& a, NameGen& names) {
    if (a->free_blocks.size() != 1 || a->free_blocks[0].dim != pi.dim())
        throw std::invalid_argument("rename permutation does not match the set");
    const int n = pi.dim();
    Assembler as;
    as.out->kind = SAKind::Rename;
    std::string fx = names.fresh("X");
    as.add_block(SABlock{fx, n}, true);
    // the child's variable (r,c) becomes the parent free variable pi^{-1}(r,c)
    IndexPerm inv = pi.inverse();
    SAFormula child_body;
    {
        Assembler::EmbedSpec spec;
        spec.free_targets = {fx};
        // embedded with the identity free map first, permuted below
        child_body = as.embed(a, names, spec);
    }
    as.finalize_atoms();
    // re-do the free-variable remapping with the permutation applied
    {
        std::vector<int> var_map(static_cast<std::size_t>(as.total_vars));
        for (int i = 0; i < as.total_vars; ++i) var_map[static_cast<std::size_t>(i)] = i;
        // identity except within the free block: (r,c) -> inv(r,c)
        std::vector<int> free_map(static_cast<std::size_t>(n) * n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                auto [ii, jj] = inv.apply(r, c);
                free_map[static_cast<std::size_t>(r) * n + c] = ii * n + jj;
            }
        int base = as.var_base.at(fx);
        for (int v = 0; v < n * n; ++v)
            var_map[static_cast<std::size_t>(base + v)] =
                base + free_map[static_cast<std::size_t>(v)];
        for (auto& atom : as.out->atoms) atom.p = atom.p.remap(as.total_vars, var_map);
    }
    as.out->body = child_body;
    as.out->perm = pi;
    if (a->finite_members) {
        std::vector<std::vector<QMatrix>> members;
        for (const auto& tup : *a->finite_members) members.push_back({entry_rename(pi, tup[0])});
        std::sort(members.begin(), members.end());
        as.out->finite_members = std::move(members);
        as.out->finite_exact = a->finite_exact;
    }
    return as.out;
}

SemiAlg sa_tuple_mul(const SemiAlg& a, const SemiAlg& b, NameGen& names) {
    const std::size_t k = a->free_blocks.size();
    if (b->free_blocks.size() != k) throw std::invalid_argument("tuple product arity mismatch");
    Assembler as;
    as.out->kind = SAKind::TupleMul;
    std::vector<std::string> frees;
    for (std::size_t i = 0; i < k; ++i) {
        if (a->free_blocks[i].dim != b->free_blocks[i].dim)
            throw std::invalid_argument("tuple product dimension mismatch");
        std::string nm = names.fresh("X");
        as.add_block(SABlock{nm, a->free_blocks[i].dim}, true);
        frees.push_back(nm);
    }
    std::vector<SAFormula> kids;
    kids.push_back(as.embed(a, names, {}));
    kids.push_back(as.embed(b, names, {}));
    as.finalize_atoms();
    for (std::size_t i = 0; i < k; ++i) {
        const int n = a->free_blocks[i].dim;
        std::string ya = as.out->child_renames[0].at(a->free_blocks[i].name);
        std::string zb = as.out->child_renames[1].at(b->free_blocks[i].name);
        add_product_equations(as, frees[i], n, {ya, zb}, kids);
    }
    as.out->body = SAFormula::all_of(std::move(kids));
    as.out->finite_members = combine_finite(
        a->finite_members, b->finite_members,
        [&](const std::vector<QMatrix>& x, const std::vector<QMatrix>& y) {
            std::vector<QMatrix> out;
            for (std::size_t i = 0; i < x.size(); ++i) out.push_back(mat_mul(x[i], y[i]));
            return out;
        });
    as.out->finite_exact = as.out->finite_members && a->finite_exact && b->finite_exact;
    return as.out;
}

SemiAlg sa_tuple_transpose(const SemiAlg& a, const std::vector<char>& flags, NameGen& names) {
    Assembler as;
    as.out->kind = SAKind::TupleTranspose;
    std::vector<std::string> frees;
    for (const auto& fb : a->free_blocks) {
        std::string nm = names.fresh("X");
        as.add_block(SABlock{nm, fb.dim}, true);
        frees.push_back(nm);
    }
    Assembler::EmbedSpec spec;
    spec.free_targets = frees;
    spec.transpose_free.assign(a->free_blocks.size(), 0);
    for (std::size_t i = 0; i < a->free_blocks.size() && i < flags.size(); ++i)
        spec.transpose_free[i] = flags[i];
    SAFormula body = as.embed(a, names, spec);
    as.finalize_atoms();
    as.out->body = body;
    as.out->transposed_blocks = flags;
    if (a->finite_members) {
        std::vector<std::vector<QMatrix>> members;
        for (const auto& tup : *a->finite_members) {
            std::vector<QMatrix> out = tup;
            for (std::size_t i = 0; i < out.size() && i < flags.size(); ++i)
                if (flags[i]) out[i] = out[i].transpose();
            members.push_back(std::move(out));
        }
        std::sort(members.begin(), members.end());
        as.out->finite_members = std::move(members);
        as.out->finite_exact = a->finite_exact;
    }
    return as.out;
}

// -- probing ------------------------------------------------------------------

namespace {

bool eval_formula(const SAFormula& f, const std::vector<char>& truth) {
    switch (f.kind) {
        case SAFormula::Kind::Atom:
            return truth[static_cast<std::size_t>(f.atom)] != 0;
        case SAFormula::Kind::And:
            for (const auto& k : f.kids)
                if (!eval_formula(k, truth)) return false;
            return true;
        case SAFormula::Kind::Or:
            for (const auto& k : f.kids)
                if (eval_formula(k, truth)) return true;
            return false;
    }
    return false;
}

Tri tri_of(bool b) { return b ? Tri::True : Tri::False; }

}  // namespace

Tri sa_probe(const SemiAlg& s, const std::vector<QMatrix>& value, const WitnessMap* witnesses) {
    if (value.size() != s->free_blocks.size()) throw std::invalid_argument("probe arity mismatch");
    for (std::size_t i = 0; i < value.size(); ++i)
        if (value[i].dim() != s->free_blocks[i].dim)
            throw std::invalid_argument("probe dimension mismatch");

    if (witnesses) {
        std::vector<Rat> point(static_cast<std::size_t>(s->var_count()), Rat(0));
        int base = 0;
        for (std::size_t i = 0; i < s->free_blocks.size(); ++i) {
            const auto& m = value[i];
            for (int r = 0; r < m.dim(); ++r)
                for (int c = 0; c < m.dim(); ++c)
                    point[static_cast<std::size_t>(base + r * m.dim() + c)] = m.at(r, c);
            base += m.dim() * m.dim();
        }
        for (const auto& b : s->bound_blocks) {
            auto it = witnesses->find(b.name);
            QMatrix m = it != witnesses->end() ? it->second : QMatrix::identity(b.dim);
            if (m.dim() != b.dim) throw std::invalid_argument("witness dimension mismatch");
            for (int r = 0; r < b.dim; ++r)
                for (int c = 0; c < b.dim; ++c)
                    point[static_cast<std::size_t>(base + r * b.dim + c)] = m.at(r, c);
            base += b.dim * b.dim;
        }
        std::vector<char> truth;
        truth.reserve(s->atoms.size());
        for (const auto& a : s->atoms) {
            Rat v = a.p.eval(point);
            truth.push_back(a.eq ? v == 0 : v > 0);
        }
        return tri_of(eval_formula(s->body, truth));
    }

    // structural evaluation
    if (s->finite_members && s->finite_exact)
        return tri_of(std::find(s->finite_members->begin(), s->finite_members->end(), value) !=
                      s->finite_members->end());

    switch (s->kind) {
        case SAKind::Variety:
        case SAKind::Point: {
            // no bound blocks: evaluate directly
            WitnessMap none;
            return sa_probe(s, value, &none);
        }
        case SAKind::Union: {
            bool unknown = false;
            for (const auto& c : s->children) {
                Tri t = sa_probe(c, value, nullptr);
                if (t == Tri::True) return Tri::True;
                if (t == Tri::Unknown) unknown = true;
            }
            return unknown ? Tri::Unknown : Tri::False;
        }
        case SAKind::DSum: {
            const QMatrix& big = value[0];
            int off = 0;
            std::vector<Tri> parts;
            for (const auto& c : s->children) {
                int d = c->free_blocks[0].dim;
                parts.push_back(sa_probe(c, {diagonal_block(big, off, d)}, nullptr));
                off += d;
            }
            for (int i = 0; i < big.dim(); ++i)
                for (int j = 0; j < big.dim(); ++j) {
                    int o = 0;
                    bool inside = false;
                    for (const auto& c : s->children) {
                        int d = c->free_blocks[0].dim;
                        if (i >= o && i < o + d && j >= o && j < o + d) inside = true;
                        o += d;
                    }
                    if (!inside && big.at(i, j) != 0) return Tri::False;
                }
            bool unknown = false;
            for (Tri t : parts) {
                if (t == Tri::False) return Tri::False;
                if (t == Tri::Unknown) unknown = true;
            }
            return unknown ? Tri::Unknown : Tri::True;
        }
        case SAKind::Rename:
            return sa_probe(s->children[0], {entry_rename(s->perm->inverse(), value[0])}, nullptr);
        case SAKind::TupleTranspose: {
            std::vector<QMatrix> inner = value;
            for (std::size_t i = 0; i < inner.size() && i < s->transposed_blocks.size(); ++i)
                if (s->transposed_blocks[i]) inner[i] = inner[i].transpose();
            return sa_probe(s->children[0], inner, nullptr);
        }
        case SAKind::Product: {
            // search the left operand's known members
            const auto& a = s->children[0];
            const auto& b = s->children[1];
            if (a->finite_members) {
                for (const auto& tup : *a->finite_members) {
                    const QMatrix& pa = tup[0];
                    if (!is_orthogonal(pa)) continue;
                    if (sa_probe(a, {pa}, nullptr) != Tri::True) continue;
                    if (sa_probe(b, {mat_mul(pa.transpose(), value[0])}, nullptr) == Tri::True)
                        return Tri::True;
                }
            }
            return Tri::Unknown;
        }
        default:
            return Tri::Unknown;
    }
}

Tri sa_probe(const SemiAlg& s, const QMatrix& value, const WitnessMap* witnesses) {
    return sa_probe(s, std::vector<QMatrix>{value}, witnesses);
}

std::optional<std::vector<QMatrix>> sa_exact_members(const SemiAlg& s) {
    if (!s->finite_members || !s->finite_exact || s->free_blocks.size() != 1) return std::nullopt;
    std::vector<QMatrix> out;
    for (const auto& tup : *s->finite_members) out.push_back(tup[0]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

void collect_canonical(const SemiAlgSet& s, std::map<std::string, std::string>& rename) {
    for (const auto& b : s.free_blocks)
        rename.emplace(b.name, "c" + std::to_string(rename.size()));
    for (const auto& b : s.bound_blocks)
        rename.emplace(b.name, "c" + std::to_string(rename.size()));
}

}  // namespace

bool sa_structurally_equal(const SemiAlg& a, const SemiAlg& b) {
    // blocks are positional, so only dims and atom polynomials must agree
    if (a->free_blocks.size() != b->free_blocks.size() ||
        a->bound_blocks.size() != b->bound_blocks.size() || a->atoms.size() != b->atoms.size())
        return false;
    for (std::size_t i = 0; i < a->free_blocks.size(); ++i)
        if (a->free_blocks[i].dim != b->free_blocks[i].dim) return false;
    for (std::size_t i = 0; i < a->bound_blocks.size(); ++i)
        if (a->bound_blocks[i].dim != b->bound_blocks[i].dim) return false;
    for (std::size_t i = 0; i < a->atoms.size(); ++i)
        if (!(a->atoms[i].eq == b->atoms[i].eq && a->atoms[i].p == b->atoms[i].p)) return false;
    return formula_equal(a->body, b->body);
}

std::string sa_pretty(const SemiAlg& s) {
    std::ostringstream os;
    std::vector<std::string> names;
    for (const auto& b : s->free_blocks)
        for (int i = 1; i <= b.dim; ++i)
            for (int j = 1; j <= b.dim; ++j)
                names.push_back(b.name + "_" + std::to_string(i) + "_" + std::to_string(j));
    for (const auto& b : s->bound_blocks)
        for (int i = 1; i <= b.dim; ++i)
            for (int j = 1; j <= b.dim; ++j)
                names.push_back(b.name + "_" + std::to_string(i) + "_" + std::to_string(j));
    os << "free:";
    for (const auto& b : s->free_blocks) os << " " << b.name << "(" << b.dim << ")";
    os << "\nexists:";
    for (const auto& b : s->bound_blocks) os << " " << b.name << "(" << b.dim << ")";
    os << "\n";
    std::function<void(const SAFormula&, int)> rec = [&](const SAFormula& f, int depth) {
        std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
        switch (f.kind) {
            case SAFormula::Kind::Atom: {
                const auto& a = s->atoms[static_cast<std::size_t>(f.atom)];
                os << pad << a.p.to_string(names) << (a.eq ? " = 0" : " > 0") << "\n";
                break;
            }
            case SAFormula::Kind::And:
                os << pad << "and\n";
                for (const auto& k : f.kids) rec(k, depth + 1);
                break;
            case SAFormula::Kind::Or:
                os << pad << (f.kids.empty() ? "or (empty: false)\n" : "or\n");
                for (const auto& k : f.kids) rec(k, depth + 1);
                break;
        }
    };
    rec(s->body, 0);
    return os.str();
}

}  // namespace qcut
