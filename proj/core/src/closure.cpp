#include "qcut/closure.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "qcut/linalg.hpp"

namespace qcut {

int BlockShape::total_dim() const {
    int t = 0;
    for (int d : dims) t += d;
    return t;
}

int BlockShape::var_count() const {
    int t = 0;
    for (int d : dims) t += d * d;
    return t;
}

int BlockShape::block_offset(int b) const {
    int t = 0;
    for (int i = 0; i < b; ++i) t += dims[static_cast<std::size_t>(i)] * dims[static_cast<std::size_t>(i)];
    return t;
}

int BlockShape::matrix_offset(int b) const {
    int t = 0;
    for (int i = 0; i < b; ++i) t += dims[static_cast<std::size_t>(i)];
    return t;
}

int BlockShape::var(int b, int i, int j) const {
    return block_offset(b) + i * dims[static_cast<std::size_t>(b)] + j;
}

std::vector<Rat> BlockShape::identity_point() const {
    std::vector<Rat> p(static_cast<std::size_t>(var_count()), Rat(0));
    for (int b = 0; b < blocks(); ++b)
        for (int i = 0; i < dims[static_cast<std::size_t>(b)]; ++i)
            p[static_cast<std::size_t>(var(b, i, i))] = 1;
    return p;
}

std::vector<Rat> BlockShape::point_of(const QMatrix& m) const {
    std::vector<Rat> p(static_cast<std::size_t>(var_count()), Rat(0));
    for (int b = 0; b < blocks(); ++b) {
        int off = matrix_offset(b);
        for (int i = 0; i < dims[static_cast<std::size_t>(b)]; ++i)
            for (int j = 0; j < dims[static_cast<std::size_t>(b)]; ++j)
                p[static_cast<std::size_t>(var(b, i, j))] = m.at(off + i, off + j);
    }
    return p;
}

std::vector<Rat> BlockShape::point_of_blocks(const std::vector<QMatrix>& blocks_in) const {
    std::vector<Rat> p(static_cast<std::size_t>(var_count()), Rat(0));
    for (int b = 0; b < blocks(); ++b)
        for (int i = 0; i < dims[static_cast<std::size_t>(b)]; ++i)
            for (int j = 0; j < dims[static_cast<std::size_t>(b)]; ++j)
                p[static_cast<std::size_t>(var(b, i, j))] =
                    blocks_in[static_cast<std::size_t>(b)].at(i, j);
    return p;
}

std::vector<std::string> BlockShape::var_names(const std::string& tag) const {
    std::vector<std::string> names;
    for (int b = 0; b < blocks(); ++b) {
        std::string t = blocks() == 1 ? tag : tag + std::to_string(b + 1);
        for (int i = 1; i <= dims[static_cast<std::size_t>(b)]; ++i)
            for (int j = 1; j <= dims[static_cast<std::size_t>(b)]; ++j)
                names.push_back(t + "_" + std::to_string(i) + "_" + std::to_string(j));
    }
    return names;
}

namespace {

// entries whose numerator or denominator outgrow this are treated as evidence
// of an infinite monoid (powers of irrational-angle rotations blow up fast)
constexpr std::size_t kEntryBitCap = 128;

bool entries_small(const QMatrix& m) {
    for (const auto& e : m.entries()) {
        if (mpz_sizeinbase(e.get_num().get_mpz_t(), 2) > kEntryBitCap) return false;
        if (mpz_sizeinbase(e.get_den().get_mpz_t(), 2) > kEntryBitCap) return false;
    }
    return true;
}

}  // namespace

std::optional<std::vector<QMatrix>> enumerate_group(const std::vector<QMatrix>& gens,
                                                    std::size_t cap) {
    if (gens.empty()) return std::vector<QMatrix>{};
    const int n = gens[0].dim();
    std::set<QMatrix> seen;
    std::deque<QMatrix> queue;
    QMatrix id = QMatrix::identity(n);
    seen.insert(id);
    queue.push_back(id);
    while (!queue.empty()) {
        QMatrix cur = std::move(queue.front());
        queue.pop_front();
        for (const auto& g : gens) {
            QMatrix next = mat_mul(cur, g);
            if (!entries_small(next)) return std::nullopt;
            if (seen.count(next)) continue;
            if (seen.size() >= cap) return std::nullopt;
            seen.insert(next);
            queue.push_back(next);
        }
    }
    return std::vector<QMatrix>(seen.begin(), seen.end());
}

namespace {

// finest common block partition (into index intervals) of the generators
BlockShape detect_shape(int m, const std::vector<QMatrix>& gens) {
    std::vector<char> cut_ok(static_cast<std::size_t>(m), 1);  // cut after row c-1
    for (const auto& g : gens)
        for (int c = 1; c < m; ++c) {
            if (!cut_ok[static_cast<std::size_t>(c)]) continue;
            bool ok = true;
            for (int i = 0; i < c && ok; ++i)
                for (int j = c; j < m && ok; ++j)
                    if (g.at(i, j) != 0 || g.at(j, i) != 0) ok = false;
            if (!ok) cut_ok[static_cast<std::size_t>(c)] = 0;
        }
    BlockShape shape;
    int prev = 0;
    for (int c = 1; c < m; ++c)
        if (cut_ok[static_cast<std::size_t>(c)]) {
            shape.dims.push_back(c - prev);
            prev = c;
        }
    shape.dims.push_back(m - prev);
    return shape;
}

bool is_signed_permutation(const QMatrix& m) {
    for (int i = 0; i < m.dim(); ++i) {
        int nonzero = 0;
        for (int j = 0; j < m.dim(); ++j) {
            const Rat& x = m.at(i, j);
            if (x == 0) continue;
            if (x != 1 && x != -1) return false;
            ++nonzero;
        }
        if (nonzero != 1) return false;
    }
    return true;
}

void homo_monomials_rec(int nvars, int from, int degree, Monomial& cur,
                        std::vector<Monomial>& out) {
    if (degree == 0) {
        out.push_back(cur);
        return;
    }
    if (from == nvars) return;
    for (std::uint32_t e = static_cast<std::uint32_t>(degree);; --e) {
        cur.exps[static_cast<std::size_t>(from)] = e;
        cur.degree += e;
        homo_monomials_rec(nvars, from + 1, degree - static_cast<int>(e), cur, out);
        cur.degree -= e;
        cur.exps[static_cast<std::size_t>(from)] = 0;
        if (e == 0) break;
    }
}

}  // namespace

std::vector<Monomial> homogeneous_monomials(int nvars, int degree) {
    std::vector<Monomial> out;
    Monomial cur = Monomial::one(nvars);
    homo_monomials_rec(nvars, 0, degree, cur, out);
    return out;
}

namespace {

// left-multiplication images of the block variables: var (b,i,j) of e*X is
// sum_t e_b(i,t) x_(b,t,j)
std::vector<Poly> left_mult_images(const BlockShape& shape, const QMatrix& e) {
    const int nv = shape.var_count();
    std::vector<Poly> images;
    images.reserve(static_cast<std::size_t>(nv));
    for (int b = 0; b < shape.blocks(); ++b) {
        int off = shape.matrix_offset(b);
        int d = shape.dims[static_cast<std::size_t>(b)];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                std::vector<Term> terms;
                for (int t = 0; t < d; ++t) {
                    const Rat& c = e.at(off + i, off + t);
                    if (c == 0) continue;
                    terms.push_back(Term{Monomial::var(nv, shape.var(b, t, j)), c});
                }
                images.push_back(Poly::from_terms(nv, std::move(terms)));
            }
    }
    return images;
}

// invariant vectors of the component under all signed-permutation actions:
// orbit union-find with a relative sign
std::vector<std::vector<Rat>> signed_orbit_invariants(
    const std::vector<Monomial>& monos, const std::map<std::vector<std::uint32_t>, int>& index,
    const BlockShape& shape, const std::vector<QMatrix>& gens) {
    const int n = static_cast<int>(monos.size());
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::vector<int> sign(static_cast<std::size_t>(n), 1);  // sign relative to parent
    std::vector<char> dead_root(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;

    std::function<std::pair<int, int>(int)> find = [&](int x) -> std::pair<int, int> {
        if (parent[static_cast<std::size_t>(x)] == x) return {x, 1};
        auto [r, s] = find(parent[static_cast<std::size_t>(x)]);
        parent[static_cast<std::size_t>(x)] = r;
        sign[static_cast<std::size_t>(x)] *= s;
        return {r, sign[static_cast<std::size_t>(x)]};
    };
    auto unite = [&](int a, int b, int rel) {
        auto [ra, sa] = find(a);
        auto [rb, sb] = find(b);
        if (ra == rb) {
            if (sa * rel != sb) dead_root[static_cast<std::size_t>(ra)] = 1;
            return;
        }
        parent[static_cast<std::size_t>(rb)] = ra;
        sign[static_cast<std::size_t>(rb)] = sa * rel * sb;
        if (dead_root[static_cast<std::size_t>(rb)]) dead_root[static_cast<std::size_t>(ra)] = 1;
    };

    const int nv = shape.var_count();
    for (const auto& e : gens) {
        // per-variable signed map
        std::vector<int> var_to(static_cast<std::size_t>(nv));
        std::vector<int> var_sign(static_cast<std::size_t>(nv));
        for (int b = 0; b < shape.blocks(); ++b) {
            int off = shape.matrix_offset(b);
            int d = shape.dims[static_cast<std::size_t>(b)];
            for (int i = 0; i < d; ++i) {
                int t_found = -1;
                int s = 1;
                for (int t = 0; t < d; ++t) {
                    const Rat& c = e.at(off + i, off + t);
                    if (c == 0) continue;
                    t_found = t;
                    s = c == 1 ? 1 : -1;
                }
                for (int j = 0; j < d; ++j) {
                    var_to[static_cast<std::size_t>(shape.var(b, i, j))] = shape.var(b, t_found, j);
                    var_sign[static_cast<std::size_t>(shape.var(b, i, j))] = s;
                }
            }
        }
        for (int mi = 0; mi < n; ++mi) {
            const Monomial& mu = monos[static_cast<std::size_t>(mi)];
            Monomial img = Monomial::one(nv);
            int s = 1;
            for (int v = 0; v < nv; ++v) {
                std::uint32_t ex = mu.exps[static_cast<std::size_t>(v)];
                if (!ex) continue;
                img.exps[static_cast<std::size_t>(var_to[static_cast<std::size_t>(v)])] += ex;
                img.degree += ex;
                if (var_sign[static_cast<std::size_t>(v)] < 0 && (ex & 1u)) s = -s;
            }
            int ni = index.at(img.exps);
            // invariance: coeff(img) = s * coeff(mu)
            unite(mi, ni, s);
        }
    }

    std::map<int, std::vector<std::pair<int, int>>> orbits;  // root -> (member, sign)
    for (int i = 0; i < n; ++i) {
        auto [r, s] = find(i);
        orbits[r].emplace_back(i, s);
    }
    std::vector<std::vector<Rat>> basis;
    for (const auto& [root, members] : orbits) {
        if (dead_root[static_cast<std::size_t>(root)]) continue;
        std::vector<Rat> v(static_cast<std::size_t>(n), Rat(0));
        for (const auto& [m, s] : members) v[static_cast<std::size_t>(m)] = s;
        basis.push_back(std::move(v));
    }
    return basis;
}

// dense path: intersect the fixed spaces of the substitution actions
std::vector<std::vector<Rat>> dense_invariants(const std::vector<Monomial>& monos,
                                               const std::map<std::vector<std::uint32_t>, int>& index,
                                               const BlockShape& shape,
                                               const std::vector<QMatrix>& gens, Budget& budget) {
    const int n = static_cast<int>(monos.size());
    const int nv = shape.var_count();
    // current basis of the candidate space, as dense columns
    std::vector<std::vector<Rat>> basis;
    bool basis_is_identity = true;

    for (const auto& e : gens) {
        std::vector<Poly> images = left_mult_images(shape, e);
        // sparse columns of (T_e - I)
        std::vector<std::vector<std::pair<int, Rat>>> tcol(static_cast<std::size_t>(n));
        for (int mi = 0; mi < n; ++mi) {
            budget.check();
            Poly mono_poly = Poly::from_terms(nv, {Term{monos[static_cast<std::size_t>(mi)], Rat(1)}});
            Poly img = mono_poly.substitute(images);
            auto& col = tcol[static_cast<std::size_t>(mi)];
            for (const auto& t : img.terms())
                col.emplace_back(index.at(t.mono.exps), t.coeff);
            col.emplace_back(mi, Rat(-1));  // subtract the identity
        }
        const int width = basis_is_identity ? n : static_cast<int>(basis.size());
        if (width == 0) return {};
        RatMatrix m(static_cast<std::size_t>(n), std::vector<Rat>(static_cast<std::size_t>(width), Rat(0)));
        if (basis_is_identity) {
            for (int c = 0; c < n; ++c)
                for (const auto& [r, v] : tcol[static_cast<std::size_t>(c)])
                    m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] += v;
        } else {
            for (int c = 0; c < width; ++c)
                for (int k = 0; k < n; ++k) {
                    const Rat& bk = basis[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
                    if (bk == 0) continue;
                    for (const auto& [r, v] : tcol[static_cast<std::size_t>(k)])
                        m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] += v * bk;
                }
        }
        auto null_cols = nullspace(m, width);
        std::vector<std::vector<Rat>> next;
        for (const auto& coeffs : null_cols) {
            std::vector<Rat> v(static_cast<std::size_t>(n), Rat(0));
            for (int c = 0; c < width; ++c) {
                const Rat& w = coeffs[static_cast<std::size_t>(c)];
                if (w == 0) continue;
                if (basis_is_identity)
                    v[static_cast<std::size_t>(c)] += w;
                else
                    for (int k = 0; k < n; ++k)
                        v[static_cast<std::size_t>(k)] += w * basis[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
            }
            next.push_back(std::move(v));
        }
        basis = std::move(next);
        basis_is_identity = false;
        if (basis.empty()) return {};
    }
    if (basis_is_identity) {
        // no generators: every polynomial is invariant
        basis.assign(static_cast<std::size_t>(n), std::vector<Rat>(static_cast<std::size_t>(n), Rat(0)));
        for (int i = 0; i < n; ++i) basis[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    }
    return basis;
}

// monomials of the component grouped by block multidegree; blocks with
// allowed[b] == 0 are forced to degree zero
std::vector<std::vector<Monomial>> graded_components(const BlockShape& shape, int degree,
                                                     const std::vector<char>& allowed) {
    const int nb = shape.blocks();
    const int nv = shape.var_count();
    std::vector<std::vector<Monomial>> out;
    std::vector<int> multi(static_cast<std::size_t>(nb), 0);
    std::function<void(int, int)> rec = [&](int b, int remaining) {
        if (b == nb - 1) {
            if (remaining > 0 && !allowed[static_cast<std::size_t>(b)]) return;
            multi[static_cast<std::size_t>(b)] = remaining;
            // monomials with block b of degree multi[b], product over blocks
            std::vector<Monomial> comp{Monomial::one(nv)};
            for (int bb = 0; bb < nb; ++bb) {
                int d = shape.dims[static_cast<std::size_t>(bb)];
                int nbv = d * d;
                auto block_monos = homogeneous_monomials(nbv, multi[static_cast<std::size_t>(bb)]);
                std::vector<Monomial> next;
                next.reserve(comp.size() * block_monos.size());
                for (const auto& base : comp)
                    for (const auto& bm : block_monos) {
                        Monomial m = base;
                        for (int v = 0; v < nbv; ++v) {
                            std::uint32_t ex = bm.exps[static_cast<std::size_t>(v)];
                            if (!ex) continue;
                            m.exps[static_cast<std::size_t>(shape.block_offset(bb) + v)] += ex;
                            m.degree += ex;
                        }
                        next.push_back(std::move(m));
                    }
                comp = std::move(next);
            }
            if (!comp.empty()) out.push_back(std::move(comp));
            return;
        }
        const int dmax = allowed[static_cast<std::size_t>(b)] ? remaining : 0;
        for (int d = 0; d <= dmax; ++d) {
            multi[static_cast<std::size_t>(b)] = d;
            rec(b + 1, remaining - d);
        }
    };
    rec(0, degree);
    return out;
}

}  // namespace

GroupClosureResult group_closure(const GeneratorSet& e, int degree_cap, Budget& budget,
                                 std::optional<BlockShape> forced_shape) {
    GroupClosureResult res;
    const int m = e.dim;
    for (const auto& g : e.generators)
        if (!is_orthogonal(g)) throw std::invalid_argument("group_closure needs orthogonal generators");

    res.shape = forced_shape ? *forced_shape : detect_shape(m, e.generators);
    if (res.shape.total_dim() != m) throw std::invalid_argument("shape does not match generator size");
    const BlockShape& shape = res.shape;
    const int nv = shape.var_count();
    const std::vector<Rat> id_point = shape.identity_point();

    bool all_signed = std::all_of(e.generators.begin(), e.generators.end(), is_signed_permutation);

    // Blocks on which every generator is the identity get pinned by the
    // degree-1 invariants; invariants of a tensor action with a trivial
    // factor split off that factor, so from degree 2 on only components
    // supported on the acting blocks can contribute anything new.
    std::vector<char> acting(static_cast<std::size_t>(shape.blocks()), 0);
    std::vector<char> all_blocks(static_cast<std::size_t>(shape.blocks()), 1);
    for (int b = 0; b < shape.blocks(); ++b) {
        int off = shape.matrix_offset(b);
        int dd = shape.dims[static_cast<std::size_t>(b)];
        for (const auto& g : e.generators)
            if (diagonal_block(g, off, dd) != QMatrix::identity(dd))
                acting[static_cast<std::size_t>(b)] = 1;
    }

    // Invariants are accumulated degree by degree; a candidate already in the
    // ideal is dropped, so "nothing new at this degree" is exactly the
    // stabilization J_d = J_{d-1}. One empty degree is not enough: a group
    // containing -I has no odd-degree invariants at all, so certification
    // requires two consecutive degrees without new invariants.
    std::vector<Poly> kept;
    PolyIdeal current(nv);
    bool prev_added = true;
    for (int d = 1; d <= degree_cap; ++d) {
        res.degree_reached = d;
        bool added = false;
        for (const auto& comp : graded_components(shape, d, d == 1 ? all_blocks : acting)) {
            std::map<std::vector<std::uint32_t>, int> index;
            for (int i = 0; i < static_cast<int>(comp.size()); ++i)
                index.emplace(comp[static_cast<std::size_t>(i)].exps, i);
            std::vector<std::vector<Rat>> inv =
                all_signed && !e.generators.empty()
                    ? signed_orbit_invariants(comp, index, shape, e.generators)
                    : dense_invariants(comp, index, shape, e.generators, budget);
            for (const auto& v : inv) {
                std::vector<Term> terms;
                for (int i = 0; i < static_cast<int>(comp.size()); ++i)
                    if (v[static_cast<std::size_t>(i)] != 0)
                        terms.push_back(Term{comp[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i)]});
                Poly g = Poly::from_terms(nv, std::move(terms));
                Rat at_id = g.eval(id_point);
                Poly affine = g - Poly::constant(nv, at_id);
                if (affine.is_zero()) continue;
                if (!kept.empty() && current.contains(affine, budget)) continue;
                kept.push_back(std::move(affine));
                current = PolyIdeal(nv, kept);
                current.basis(budget);
                added = true;
            }
        }
        if (d >= 2 && !added && !prev_added) {
            res.certified = true;
            break;
        }
        prev_added = added;
    }
    res.reduced = PolyIdeal(nv, kept);

    // consistency certificate: each basis element stays in the ideal under
    // every generator translation; probe points lie on the variety
    if (res.certified) {
        for (const auto& gmat : e.generators) {
            std::vector<Poly> images = left_mult_images(shape, gmat);
            for (const auto& p : res.reduced.basis(budget)) {
                if (!res.reduced.contains(p.substitute(images), budget)) {
                    res.certified = false;
                    break;
                }
            }
            if (!res.certified) break;
        }
    }
    {
        std::vector<std::vector<Rat>> probes{id_point};
        for (const auto& g : e.generators) probes.push_back(shape.point_of(g));
        for (const auto& a : e.generators)
            for (const auto& b : e.generators) probes.push_back(shape.point_of(mat_mul(a, b)));
        for (const auto& pt : probes) {
            if (!contains_point(res.reduced, pt)) res.certified = false;
            res.reduced.add_sample(pt);
        }
    }

    // lift to the full matrix-entry variable space
    {
        const int full_vars = m * m;
        std::vector<int> var_map(static_cast<std::size_t>(nv));
        for (int b = 0; b < shape.blocks(); ++b) {
            int off = shape.matrix_offset(b);
            int dd = shape.dims[static_cast<std::size_t>(b)];
            for (int i = 0; i < dd; ++i)
                for (int j = 0; j < dd; ++j)
                    var_map[static_cast<std::size_t>(shape.var(b, i, j))] = (off + i) * m + (off + j);
        }
        std::vector<Poly> full_gens;
        std::vector<char> in_block(static_cast<std::size_t>(full_vars), 0);
        for (int v : var_map) in_block[static_cast<std::size_t>(v)] = 1;
        for (int v = 0; v < full_vars; ++v)
            if (!in_block[static_cast<std::size_t>(v)])
                full_gens.push_back(Poly::variable(full_vars, v));
        for (const auto& g : res.reduced.generators())
            full_gens.push_back(g.remap(full_vars, var_map));
        res.ideal = PolyIdeal(full_vars, std::move(full_gens));
        res.ideal.add_sample(QMatrix::identity(m).entries());
        for (const auto& g : e.generators) res.ideal.add_sample(g.entries());
    }

    res.finite_group = e.generators.empty()
                           ? std::optional<std::vector<QMatrix>>{{QMatrix::identity(m)}}
                           : enumerate_group(e.generators, 10000);
    return res;
}

PolyIdeal image_closure(const PolyIdeal& src, const std::vector<Poly>& psi, int dst_vars,
                        Budget& budget) {
    const int ns = src.nvars();
    const int total = ns + dst_vars;
    MonomialOrder elim = MonomialOrder::block_elim(ns);

    std::vector<int> src_map(static_cast<std::size_t>(ns));
    for (int i = 0; i < ns; ++i) src_map[static_cast<std::size_t>(i)] = i;

    std::vector<Poly> gens;
    for (const auto& g : src.generators()) gens.push_back(g.remap(total, src_map, elim));
    for (int j = 0; j < dst_vars; ++j) {
        Poly y = Poly::variable(total, ns + j, elim);
        gens.push_back(y - psi[static_cast<std::size_t>(j)].remap(total, src_map, elim));
    }
    std::vector<Poly> gb = groebner_basis(std::move(gens), elim, budget);

    std::vector<int> dst_map(static_cast<std::size_t>(total), -1);
    for (int j = 0; j < dst_vars; ++j) dst_map[static_cast<std::size_t>(ns + j)] = j;
    std::vector<Poly> out;
    for (const auto& p : gb) {
        bool pure = true;
        for (const auto& t : p.terms()) {
            for (int v = 0; v < ns && pure; ++v)
                if (t.mono.exps[static_cast<std::size_t>(v)]) pure = false;
            if (!pure) break;
        }
        if (pure) out.push_back(p.remap(dst_vars, dst_map));
    }
    PolyIdeal result(dst_vars, std::move(out));
    // push samples through the map
    for (const auto& s : src.samples()) {
        std::vector<Rat> img;
        img.reserve(static_cast<std::size_t>(dst_vars));
        for (const auto& p : psi) img.push_back(p.eval(s));
        result.add_sample(std::move(img));
    }
    return result;
}

std::vector<Poly> block_multiplication_map(const BlockShape& shape) {
    const int nv = shape.var_count();
    const int total = 2 * nv;
    std::vector<Poly> psi;
    psi.reserve(static_cast<std::size_t>(nv));
    for (int b = 0; b < shape.blocks(); ++b) {
        int d = shape.dims[static_cast<std::size_t>(b)];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                std::vector<Term> terms;
                for (int t = 0; t < d; ++t) {
                    Monomial mono = Monomial::one(total);
                    mono.exps[static_cast<std::size_t>(shape.var(b, i, t))] += 1;
                    mono.exps[static_cast<std::size_t>(nv + shape.var(b, t, j))] += 1;
                    mono.degree = 2;
                    terms.push_back(Term{std::move(mono), Rat(1)});
                }
                psi.push_back(Poly::from_terms(total, std::move(terms)));
            }
    }
    return psi;
}

VarietyChain product_chain(const PolyIdeal& h1, const BlockShape& shape, int cap, Budget& budget) {
    if (h1.nvars() != shape.var_count())
        throw std::invalid_argument("product_chain: ideal does not match the shape");
    // With I in H1 the chain ascends and stabilization is a fixpoint. Without
    // it the recurrence H_{i+1} = Cl(H_i H_1) can cycle instead; recurrence
    // determinism makes any repeat a sound stopping point, so the identity
    // membership is not enforced here.
    VarietyChain chain;
    chain.ideals.push_back(h1);
    if (chain.ideals.back().samples().empty())
        chain.ideals.back().add_sample(shape.identity_point());

    const int nv = shape.var_count();
    std::vector<Poly> mult = block_multiplication_map(shape);
    std::vector<int> a_map(static_cast<std::size_t>(nv)), b_map(static_cast<std::size_t>(nv));
    for (int i = 0; i < nv; ++i) {
        a_map[static_cast<std::size_t>(i)] = i;
        b_map[static_cast<std::size_t>(i)] = nv + i;
    }

    for (int step = 1; step <= cap; ++step) {
        chain.steps_used = step;
        const PolyIdeal& cur = chain.ideals.back();
        std::vector<Poly> combined;
        for (const auto& g : cur.generators()) combined.push_back(g.remap(2 * nv, a_map));
        for (const auto& g : h1.generators()) combined.push_back(g.remap(2 * nv, b_map));
        PolyIdeal product_src(2 * nv, std::move(combined));
        // product samples (bounded)
        for (const auto& sa : cur.samples())
            for (const auto& sb : h1.samples()) {
                if (product_src.samples().size() >= 32) break;
                std::vector<Rat> both = sa;
                both.insert(both.end(), sb.begin(), sb.end());
                product_src.add_sample(std::move(both));
            }
        PolyIdeal next = image_closure(product_src, mult, nv, budget);
        bool repeat = false;
        for (const auto& prev : chain.ideals)
            if (ideal_equal(next, prev, budget)) {
                repeat = true;
                break;
            }
        if (repeat) {
            chain.stabilized = true;
            break;
        }
        chain.ideals.push_back(std::move(next));
    }
    return chain;
}

}  // namespace qcut
