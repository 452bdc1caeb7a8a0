#include "qcut/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qcut/cycle_monoid.hpp"

namespace qcut {

using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

QMatrix phi_of(const QuantumAutomaton& q, const Word& w) { return phi_of_word(q, w); }

std::map<std::string, std::string> compose_renames(
    const std::map<std::string, std::string>& outer,
    const std::map<std::string, std::string>& inner) {
    std::map<std::string, std::string> out;
    for (const auto& [child_name, parent_name] : inner) {
        auto it = outer.find(parent_name);
        out[child_name] = it == outer.end() ? parent_name : it->second;
    }
    return out;
}

std::string final_name(const std::map<std::string, std::string>& to_final,
                       const std::string& name) {
    auto it = to_final.find(name);
    return it == to_final.end() ? name : it->second;
}

SemiAlg sa_set_finite(const SemiAlg& s, std::vector<std::vector<QMatrix>> members, bool exact) {
    auto copy = std::make_shared<SemiAlgSet>(*s);
    copy->finite_members = std::move(members);
    copy->finite_exact = exact;
    return copy;
}

// pairs (phi(u), phi(v)) for a cycle closure over the 2-block shape [n, n]
SemiAlg cycle_pairs_set(const GroupClosureResult& gc, NameGen& names) {
    std::vector<char> transposed{0, 1};
    SemiAlg pairs = sa_from_variety_blocks(gc.reduced, gc.shape, transposed, names);
    if (gc.finite_group) {
        const int n = gc.shape.dims[0];
        std::vector<std::vector<QMatrix>> members;
        for (const auto& m : *gc.finite_group)
            members.push_back({diagonal_block(m, 0, n), diagonal_block(m, n, n).transpose()});
        std::sort(members.begin(), members.end());
        pairs = sa_set_finite(pairs, std::move(members), true);
    }
    return pairs;
}

}  // namespace

// -- linear -------------------------------------------------------------------

namespace {

struct LinBuilder {
    const LinearGrammar& g;
    const QuantumAutomaton& q;
    const RunConfig& cfg;
    Budget& budget;
    NameGen& names;
    bool certified = true;
    int node_count = 0;
    std::map<std::pair<std::string, std::vector<std::string>>, std::shared_ptr<GroupClosureResult>>
        cycle_cache;

    std::shared_ptr<const LinPlan> build(const std::string& axiom,
                                         std::vector<std::string> active, ProvenanceNode& prov) {
        if (++node_count > 512) throw ResourceError("linear closure recursion too large");
        auto plan = std::make_shared<LinPlan>();
        plan->axiom = axiom;
        std::sort(active.begin(), active.end());
        plan->active = active;

        auto key = std::make_pair(axiom, active);
        std::shared_ptr<GroupClosureResult> gc;
        if (auto it = cycle_cache.find(key); it != cycle_cache.end()) {
            gc = it->second;
        } else {
            GroupAutomaton aut = cycle_automaton_linear(g, q, axiom, active);
            GeneratorSet gens = group_generators(aut);
            gc = std::make_shared<GroupClosureResult>(group_closure(
                gens, cfg.degree_cap, budget, BlockShape{{q.dim, q.dim}}));
            cycle_cache.emplace(key, gc);
        }
        certified = certified && gc->certified;
        ProvenanceNode node{"cycle-closure",
                            "variable " + axiom + ", degree " +
                                std::to_string(gc->degree_reached) +
                                (gc->finite_group
                                     ? ", finite group of order " +
                                           std::to_string(gc->finite_group->size())
                                     : std::string()),
                            gc->certified,
                            {}};
        plan->pairs = cycle_pairs_set(*gc, names);

        std::vector<SemiAlg> part_sets;
        for (int pi = 0; pi < static_cast<int>(g.productions.size()); ++pi) {
            const auto& p = g.productions[static_cast<std::size_t>(pi)];
            if (p.lhs != axiom) continue;
            auto split = g.split_rule(pi);
            LinPlan::Part part;
            part.rule_index = pi;
            SemiAlg inner;
            if (!split) {
                part.terminal = true;
                part.w = p.rhs;
                inner = sa_point(phi_of(q, p.rhs), names);
            } else {
                if (split->var == axiom) continue;  // cycle rule, not an exit
                if (std::find(active.begin(), active.end(), split->var) == active.end()) continue;
                std::vector<std::string> sub;
                for (const auto& v : active)
                    if (v != axiom) sub.push_back(v);
                ProvenanceNode child_prov{"recurse", "variable " + split->var, true, {}};
                auto child = build(split->var, sub, child_prov);
                node.children.push_back(std::move(child_prov));
                if (child->set->is_false()) continue;  // empty sublanguage
                part.terminal = false;
                part.w1 = split->left;
                part.w2 = split->right;
                part.child = child;
                inner = sa_product(sa_product(sa_point(phi_of(q, split->left), names),
                                              child->set, names),
                                   sa_point(phi_of(q, split->right), names), names);
            }
            part.part_set = sa_sandwich(plan->pairs, inner, names);
            part_sets.push_back(part.part_set);
            plan->parts.push_back(std::move(part));
        }
        plan->set = sa_union_all(part_sets, q.dim, names);
        node.detail += ", " + std::to_string(plan->parts.size()) + " exit rule(s)";
        prov.children.push_back(std::move(node));
        return plan;
    }
};

// splits a derivation chain at the last visit of `axiom`
struct ChainSplit {
    Word u, v;               // accumulated cycle contexts
    int exit_rule = -1;
    std::vector<int> rest;   // chain after the exit rule
};

std::optional<ChainSplit> split_chain(const LinearGrammar& g, const std::string& axiom,
                                      const std::vector<int>& deriv) {
    std::vector<std::string> var_at{axiom};
    std::string cur = axiom;
    for (std::size_t t = 0; t < deriv.size(); ++t) {
        auto split = g.split_rule(deriv[t]);
        cur = split ? split->var : std::string();
        var_at.push_back(cur);
    }
    int last = -1;
    for (int t = 0; t < static_cast<int>(deriv.size()); ++t)
        if (var_at[static_cast<std::size_t>(t)] == axiom) last = t;
    if (last < 0) return std::nullopt;
    ChainSplit out;
    for (int t = 0; t < last; ++t) {
        auto split = g.split_rule(deriv[static_cast<std::size_t>(t)]);
        if (!split) return std::nullopt;
        out.u.insert(out.u.end(), split->left.begin(), split->left.end());
        out.v.insert(out.v.begin(), split->right.begin(), split->right.end());
    }
    out.exit_rule = deriv[static_cast<std::size_t>(last)];
    out.rest.assign(deriv.begin() + last + 1, deriv.end());
    return out;
}

bool lin_witness_rec(const LinPlan& plan, const LinearGrammar& g, const QuantumAutomaton& q,
                     const std::map<std::string, std::string>& to_final,
                     const std::vector<int>& deriv, WitnessMap& out) {
    auto split = split_chain(g, plan.axiom, deriv);
    if (!split) return false;
    int part_idx = -1;
    for (int i = 0; i < static_cast<int>(plan.parts.size()); ++i)
        if (plan.parts[static_cast<std::size_t>(i)].rule_index == split->exit_rule) part_idx = i;
    if (part_idx < 0) return false;
    const auto& part = plan.parts[static_cast<std::size_t>(part_idx)];

    // into the union, then into the chosen sandwich disjunct
    auto to_part = compose_renames(to_final, plan.set->child_renames[static_cast<std::size_t>(part_idx)]);
    const SemiAlg& sandwich = part.part_set;
    auto pairs_map = compose_renames(to_part, sandwich->child_renames[0]);
    auto inner_map = compose_renames(to_part, sandwich->child_renames[1]);

    const auto& pairs = sandwich->children[0];
    out[final_name(pairs_map, pairs->free_blocks[0].name)] = phi_of(q, split->u);
    out[final_name(pairs_map, pairs->free_blocks[1].name)] = phi_of(q, split->v);

    const auto& inner = sandwich->children[1];
    if (part.terminal) {
        out[final_name(inner_map, inner->free_blocks[0].name)] = phi_of(q, part.w);
        return true;
    }
    // inner = product(product(point(w1), child.set), point(w2))
    std::vector<int> rest = split->rest;
    // value derived by the child
    Word child_word;
    {
        // replay the rest of the chain to get the terminal yield of the child
        std::string cur;
        {
            auto s = g.split_rule(split->exit_rule);
            if (!s) return false;
            cur = s->var;
        }
        Word left, right;
        for (std::size_t t = 0; t < rest.size(); ++t) {
            const auto& p = g.productions[static_cast<std::size_t>(rest[t])];
            auto s = g.split_rule(rest[t]);
            if (s) {
                left.insert(left.end(), s->left.begin(), s->left.end());
                right.insert(right.begin(), s->right.begin(), s->right.end());
                cur = s->var;
            } else {
                left.insert(left.end(), p.rhs.begin(), p.rhs.end());
            }
        }
        child_word = left;
        child_word.insert(child_word.end(), right.begin(), right.end());
    }
    QMatrix m_child = phi_of(q, child_word);
    QMatrix m_w1 = phi_of(q, part.w1);
    QMatrix m_w2 = phi_of(q, part.w2);

    out[final_name(inner_map, inner->free_blocks[0].name)] =
        mat_mul(mat_mul(m_w1, m_child), m_w2);
    // inner (P2) children: [P1, point(w2)]
    auto p1_map = compose_renames(inner_map, inner->child_renames[0]);
    auto w2_map = compose_renames(inner_map, inner->child_renames[1]);
    const auto& p1 = inner->children[0];
    const auto& w2pt = inner->children[1];
    out[final_name(p1_map, p1->free_blocks[0].name)] = mat_mul(m_w1, m_child);
    out[final_name(w2_map, w2pt->free_blocks[0].name)] = m_w2;
    // P1 children: [point(w1), child.set]
    auto w1_map = compose_renames(p1_map, p1->child_renames[0]);
    auto child_map = compose_renames(p1_map, p1->child_renames[1]);
    const auto& w1pt = p1->children[0];
    out[final_name(w1_map, w1pt->free_blocks[0].name)] = m_w1;
    out[final_name(child_map, part.child->set->free_blocks[0].name)] = m_child;
    return lin_witness_rec(*part.child, g, q, child_map, rest, out);
}

}  // namespace

ClosureReport closure_linear(const LinearGrammar& g, const QuantumAutomaton& q,
                             const RunConfig& cfg, Budget& budget) {
    auto t0 = Clock::now();
    ClosureReport report;
    report.provenance = ProvenanceNode{"closure", "linear grammar", true, {}};
    NameGen names;
    LinBuilder builder{g, q, cfg, budget, names};
    auto plan = builder.build(g.axiom, g.variables, report.provenance);
    report.formula = plan->set;
    report.certified = builder.certified;
    report.provenance.certified = report.certified;
    report.lin_plan = plan;
    report.timings.emplace_back("closure", seconds_since(t0));
    return report;
}

// -- metalinear ------------------------------------------------------------------

ClosureReport closure_metalinear(const MetalinearGrammar& g, const QuantumAutomaton& q,
                                 const RunConfig& cfg, Budget& budget) {
    auto t0 = Clock::now();
    ClosureReport report;
    report.provenance = ProvenanceNode{"closure", "metalinear grammar", true, {}};
    NameGen names;
    auto meta = std::make_shared<MetaPlan>();
    bool certified = true;
    std::vector<SemiAlg> family_sets;
    for (const auto& fam : g.families) {
        ProvenanceNode fam_node{"family", std::to_string(fam.size()) + " component(s)", true, {}};
        MetaPlan::Family family;
        SemiAlg acc;
        for (const auto& lg : fam) {
            LinBuilder builder{lg, q, cfg, budget, names};
            auto plan = builder.build(lg.axiom, lg.variables, fam_node);
            certified = certified && builder.certified;
            family.components.push_back(plan);
            acc = acc ? sa_product(acc, plan->set, names) : plan->set;
        }
        family.set = acc;
        meta->families.push_back(std::move(family));
        family_sets.push_back(acc);
        report.provenance.children.push_back(std::move(fam_node));
    }
    report.formula =
        family_sets.size() == 1 ? family_sets[0] : sa_union_all(family_sets, q.dim, names);
    report.certified = certified;
    report.provenance.certified = certified;
    report.meta_plan = meta;
    report.timings.emplace_back("closure", seconds_since(t0));
    return report;
}

// -- restricted matrix -------------------------------------------------------------

namespace {

std::vector<char> even_flags(int k) {
    std::vector<char> flags(static_cast<std::size_t>(2 * k), 0);
    for (int i = 1; i < 2 * k; i += 2) flags[static_cast<std::size_t>(i)] = 1;
    return flags;
}

// the extended sandwich on 2k-block tuples: u-blocks multiply left-to-right,
// v-blocks right-to-left
SemiAlg tuple_sandwich(const SemiAlg& a, const SemiAlg& b, int k, NameGen& names) {
    auto flags = even_flags(k);
    SemiAlg ta = sa_tuple_transpose(a, flags, names);
    SemiAlg tb = sa_tuple_transpose(b, flags, names);
    SemiAlg mul = sa_tuple_mul(ta, tb, names);
    return sa_tuple_transpose(mul, flags, names);
}

std::vector<QMatrix> tuple_sandwich_value(const std::vector<QMatrix>& a,
                                          const std::vector<QMatrix>& b) {
    std::vector<QMatrix> out;
    for (std::size_t i = 0; i < a.size(); ++i)
        out.push_back(i % 2 == 0 ? mat_mul(a[i], b[i]) : mat_mul(b[i], a[i]));
    return out;
}

std::vector<QMatrix> identity_tuple(int k, int n) {
    return std::vector<QMatrix>(static_cast<std::size_t>(2 * k), QMatrix::identity(n));
}

struct MatDecomp {
    std::vector<int> skeleton;                       // state ids
    std::vector<std::vector<int>> loops;             // step positions per skeleton state
    std::vector<int> edges;                          // step positions between them
};

}  // namespace

ClosureReport closure_matrix(const RestrictedMatrixGrammar& g, const QuantumAutomaton& q,
                             const RunConfig& cfg, Budget& budget) {
    auto t0 = Clock::now();
    ClosureReport report;
    report.provenance = ProvenanceNode{"closure", "restricted matrix grammar", true, {}};
    NameGen names;
    const int k = g.index_k;
    const int n = q.dim;

    auto plan = std::make_shared<MatrixPlan>();
    plan->k = k;

    std::map<std::vector<std::string>, int> state_index;
    auto intern = [&](const std::vector<std::string>& t) {
        auto it = state_index.find(t);
        if (it != state_index.end()) return it->second;
        int id = static_cast<int>(plan->states.size());
        plan->states.push_back(t);
        state_index.emplace(t, id);
        return id;
    };

    // forward closure from the start tuples
    std::set<int> start_set, eps_set;
    for (const auto& m : g.matrices)
        if (m.kind == RMMatrix::Kind::Start) start_set.insert(intern(m.start_tuple));
    std::deque<int> queue(start_set.begin(), start_set.end());
    std::set<int> reached(start_set.begin(), start_set.end());
    std::vector<std::tuple<int, int, int>> raw_edges;  // (matrix, src, dst)
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        if (static_cast<int>(plan->states.size()) > cfg.state_cap)
            throw ResourceError("matrix pipeline state budget exceeded");
        for (int mi = 0; mi < static_cast<int>(g.matrices.size()); ++mi) {
            const auto& m = g.matrices[static_cast<std::size_t>(mi)];
            if (m.kind != RMMatrix::Kind::Step) continue;
            bool applies = true;
            for (int i = 0; i < k; ++i)
                if (m.rules[static_cast<std::size_t>(i)].lhs !=
                    plan->states[static_cast<std::size_t>(cur)][static_cast<std::size_t>(i)]) {
                    applies = false;
                    break;
                }
            if (!applies) continue;
            std::vector<std::string> next;
            for (int i = 0; i < k; ++i) next.push_back(m.rules[static_cast<std::size_t>(i)].var);
            int dst = intern(next);
            raw_edges.emplace_back(mi, cur, dst);
            if (reached.insert(dst).second) queue.push_back(dst);
        }
    }
    for (const auto& m : g.matrices)
        if (m.kind == RMMatrix::Kind::Eps) {
            auto it = state_index.find(m.eps_tuple);
            if (it != state_index.end()) eps_set.insert(it->second);
        }

    // co-reachability to an erase tuple
    std::set<int> coreach(eps_set.begin(), eps_set.end());
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [mi, src, dst] : raw_edges)
            if (coreach.count(dst) && !coreach.count(src)) {
                coreach.insert(src);
                changed = true;
            }
    }
    std::set<int> keep;
    for (int s : reached)
        if (coreach.count(s)) keep.insert(s);

    plan->start_states.assign(start_set.begin(), start_set.end());
    std::erase_if(plan->start_states, [&](int s) { return !keep.count(s); });
    plan->eps_states.assign(eps_set.begin(), eps_set.end());
    std::erase_if(plan->eps_states, [&](int s) { return !keep.count(s); });

    for (const auto& [mi, src, dst] : raw_edges) {
        if (!keep.count(src) || !keep.count(dst)) continue;
        MatrixPlan::Edge e;
        e.matrix_index = mi;
        e.src = src;
        e.dst = dst;
        const auto& m = g.matrices[static_cast<std::size_t>(mi)];
        for (int i = 0; i < k; ++i) {
            e.tuple.push_back(phi_of(q, m.rules[static_cast<std::size_t>(i)].left_ctx));
            e.tuple.push_back(phi_of(q, m.rules[static_cast<std::size_t>(i)].right_ctx));
        }
        plan->edges.push_back(std::move(e));
    }

    if (plan->start_states.empty() || plan->eps_states.empty()) {
        report.formula = sa_empty(n, names);
        report.certified = true;
        report.provenance.detail += " (empty language)";
        report.timings.emplace_back("closure", seconds_since(t0));
        report.matrix_plan = plan;
        return report;
    }

    // cycle closure per surviving state
    std::vector<int> block_dims(static_cast<std::size_t>(2 * k), n);
    BlockShape shape{block_dims};
    bool certified = true;
    for (int s : keep) {
        GroupAutomaton aut = cycle_automaton_matrix(g, q, plan->states[static_cast<std::size_t>(s)]);
        GeneratorSet gens = group_generators(aut);
        GroupClosureResult gc = group_closure(gens, cfg.degree_cap, budget, shape);
        certified = certified && gc.certified;
        MatrixPlan::StateClosure sc;
        std::vector<char> transposed = even_flags(k);
        SemiAlg leaf = sa_from_variety_blocks(gc.reduced, shape, transposed, names);
        if (gc.finite_group) {
            std::vector<std::vector<QMatrix>> members;
            for (const auto& m : *gc.finite_group) {
                std::vector<QMatrix> tup;
                for (int b = 0; b < 2 * k; ++b) {
                    QMatrix block = diagonal_block(m, b * n, n);
                    tup.push_back(b % 2 == 1 ? block.transpose() : block);
                }
                members.push_back(std::move(tup));
            }
            std::sort(members.begin(), members.end());
            leaf = sa_set_finite(leaf, std::move(members), true);
        }
        sc.chain_leaf = leaf;
        sc.certified = gc.certified;
        plan->state_closures.emplace(s, std::move(sc));
        report.provenance.children.push_back(ProvenanceNode{
            "cycle-closure", "state " + std::to_string(s) + " (" +
                                 std::to_string(gens.generators.size()) + " generator(s))",
            gc.certified,
            {}});
    }

    // repetition-free sequences between start and erase tuples
    std::vector<std::vector<int>> sequences;
    {
        std::vector<int> starts = plan->start_states;
        std::sort(starts.begin(), starts.end());
        std::set<int> eps_lookup(plan->eps_states.begin(), plan->eps_states.end());
        std::vector<int> path;
        std::set<int> on_path;
        std::function<void(int)> dfs = [&](int cur) {
            path.push_back(cur);
            on_path.insert(cur);
            if (eps_lookup.count(cur)) sequences.push_back(path);
            std::set<int> nexts;
            for (const auto& e : plan->edges)
                if (e.src == cur && !on_path.count(e.dst) && keep.count(e.dst)) nexts.insert(e.dst);
            for (int nx : nexts) dfs(nx);
            on_path.erase(cur);
            path.pop_back();
        };
        for (int s : starts) dfs(s);
    }

    std::vector<SemiAlg> chains;
    for (const auto& seq : sequences) {
        MatrixPlan::SeqPart part;
        part.seq = seq;
        SemiAlg acc = plan->state_closures.at(seq[0]).chain_leaf;
        part.leaves.push_back(acc);
        for (std::size_t i = 1; i < seq.size(); ++i) {
            // E set between seq[i-1] and seq[i]
            std::vector<SemiAlg> points;
            for (const auto& e : plan->edges)
                if (e.src == seq[i - 1] && e.dst == seq[i])
                    points.push_back(sa_point_tuple(e.tuple, names));
            SemiAlg esets = sa_union_all(points, n, names);
            part.leaves.push_back(esets);
            acc = tuple_sandwich(acc, esets, k, names);
            const SemiAlg& leaf = plan->state_closures.at(seq[i]).chain_leaf;
            part.leaves.push_back(leaf);
            acc = tuple_sandwich(acc, leaf, k, names);
        }
        part.chain = acc;
        chains.push_back(acc);
        plan->parts.push_back(std::move(part));
    }
    plan->tuple_union = sa_union_all(chains, n, names);
    report.formula = sa_tuple_blocks_product(plan->tuple_union, names);
    report.certified = certified;
    report.provenance.certified = certified;
    report.provenance.detail += ": " + std::to_string(plan->states.size()) + " state(s), " +
                                std::to_string(sequences.size()) + " sequence(s)";
    report.matrix_plan = plan;
    report.timings.emplace_back("closure", seconds_since(t0));
    return report;
}

// -- matrix witness --------------------------------------------------------------

namespace {

std::optional<MatDecomp> decompose_path(const std::vector<int>& states_at) {
    MatDecomp out;
    int t0 = 0;
    const int t_end = static_cast<int>(states_at.size()) - 1;
    while (true) {
        int q0 = states_at[static_cast<std::size_t>(t0)];
        int last = t0;
        for (int t = t0; t <= t_end; ++t)
            if (states_at[static_cast<std::size_t>(t)] == q0) last = t;
        out.skeleton.push_back(q0);
        std::vector<int> loop;
        for (int t = t0; t < last; ++t) loop.push_back(t);  // step positions
        out.loops.push_back(std::move(loop));
        if (last == t_end) break;
        out.edges.push_back(last);  // the step leaving q0 for good
        t0 = last + 1;
    }
    return out;
}

// recursive assignment along a left-deep tuple-sandwich fold
void assign_tuple_chain(const SemiAlg& node, const std::map<std::string, std::string>& to_final,
                        const std::vector<std::vector<QMatrix>>& leaf_values, std::size_t lo,
                        std::size_t hi, int k, WitnessMap& out) {
    if (lo == hi) return;  // leaves carry no bound blocks
    // node = T( M( T(left), T(right) ) )
    const SemiAlg& t_outer = node;
    auto mul_map = compose_renames(to_final, t_outer->child_renames[0]);
    const SemiAlg& mul = t_outer->children[0];
    auto tl_map = compose_renames(mul_map, mul->child_renames[0]);
    auto tr_map = compose_renames(mul_map, mul->child_renames[1]);
    const SemiAlg& tl = mul->children[0];
    const SemiAlg& tr = mul->children[1];

    std::vector<QMatrix> left_value = leaf_values[lo];
    for (std::size_t i = lo + 1; i < hi; ++i)
        left_value = tuple_sandwich_value(left_value, leaf_values[i]);
    const std::vector<QMatrix>& right_value = leaf_values[hi];

    auto assign_transposed = [&](const SemiAlg& t_node,
                                 const std::map<std::string, std::string>& m,
                                 const std::vector<QMatrix>& value) {
        for (std::size_t i = 0; i < t_node->free_blocks.size(); ++i) {
            QMatrix v = value[i];
            if (i % 2 == 1) v = v.transpose();  // the transposed coordinates
            out[final_name(m, t_node->free_blocks[i].name)] = v;
        }
    };
    assign_transposed(tl, tl_map, left_value);
    assign_transposed(tr, tr_map, right_value);

    auto left_map = compose_renames(tl_map, tl->child_renames[0]);
    // inner (untransposed) free blocks of the left accumulator
    const SemiAlg& left_node = tl->children[0];
    for (std::size_t i = 0; i < left_node->free_blocks.size(); ++i)
        out[final_name(left_map, left_node->free_blocks[i].name)] = left_value[i];
    assign_tuple_chain(left_node, left_map, leaf_values, lo, hi - 1, k, out);

    auto right_map = compose_renames(tr_map, tr->child_renames[0]);
    const SemiAlg& right_node = tr->children[0];
    for (std::size_t i = 0; i < right_node->free_blocks.size(); ++i)
        out[final_name(right_map, right_node->free_blocks[i].name)] = right_value[i];
}

bool matrix_witness(const MatrixPlan& plan, const ClosureReport& report,
                    const RestrictedMatrixGrammar& g, const QuantumAutomaton& q,
                    const std::vector<int>& deriv, WitnessMap& out) {
    if (deriv.size() < 2) return false;
    const int k = plan.k;
    const int n = q.dim;
    // replay the derivation into a state path
    const auto& start_m = g.matrices[static_cast<std::size_t>(deriv.front())];
    if (start_m.kind != RMMatrix::Kind::Start) return false;
    std::vector<int> states_at;
    std::vector<int> step_matrix;  // matrix index per step position
    {
        std::vector<std::string> cur = start_m.start_tuple;
        auto find_state = [&](const std::vector<std::string>& t) {
            for (int i = 0; i < static_cast<int>(plan.states.size()); ++i)
                if (plan.states[static_cast<std::size_t>(i)] == t) return i;
            return -1;
        };
        int sid = find_state(cur);
        if (sid < 0) return false;
        states_at.push_back(sid);
        for (std::size_t t = 1; t + 1 < deriv.size(); ++t) {
            const auto& m = g.matrices[static_cast<std::size_t>(deriv[t])];
            if (m.kind != RMMatrix::Kind::Step) return false;
            step_matrix.push_back(deriv[t]);
            std::vector<std::string> next;
            for (int i = 0; i < k; ++i) next.push_back(m.rules[static_cast<std::size_t>(i)].var);
            cur = next;
            sid = find_state(cur);
            if (sid < 0) return false;
            states_at.push_back(sid);
        }
    }
    auto decomp = decompose_path(states_at);
    if (!decomp) return false;

    // locate the matching sequence part
    int part_idx = -1;
    for (int i = 0; i < static_cast<int>(plan.parts.size()); ++i)
        if (plan.parts[static_cast<std::size_t>(i)].seq == decomp->skeleton) part_idx = i;
    if (part_idx < 0) return false;
    const auto& part = plan.parts[static_cast<std::size_t>(part_idx)];

    // leaf values: alternating loop, edge, loop, ...
    auto step_value = [&](int pos) {
        const auto& m = g.matrices[static_cast<std::size_t>(step_matrix[static_cast<std::size_t>(pos)])];
        std::vector<QMatrix> tup;
        for (int i = 0; i < k; ++i) {
            tup.push_back(phi_of(q, m.rules[static_cast<std::size_t>(i)].left_ctx));
            tup.push_back(phi_of(q, m.rules[static_cast<std::size_t>(i)].right_ctx));
        }
        return tup;
    };
    std::vector<std::vector<QMatrix>> leaf_values;
    for (std::size_t si = 0; si < decomp->skeleton.size(); ++si) {
        std::vector<QMatrix> loop_val = identity_tuple(k, n);
        for (int pos : decomp->loops[si]) loop_val = tuple_sandwich_value(loop_val, step_value(pos));
        if (si > 0) leaf_values.push_back(step_value(decomp->edges[si - 1]));
        leaf_values.push_back(std::move(loop_val));
    }
    if (leaf_values.size() != part.leaves.size()) return false;

    // total tuple value
    std::vector<QMatrix> total = leaf_values[0];
    for (std::size_t i = 1; i < leaf_values.size(); ++i)
        total = tuple_sandwich_value(total, leaf_values[i]);

    // the blocks-product node binds the tuple union's free blocks
    const SemiAlg& bp = report.formula;
    auto union_map = compose_renames({}, bp->child_renames[0]);
    const SemiAlg& tuple_union = bp->children[0];
    for (std::size_t i = 0; i < tuple_union->free_blocks.size(); ++i)
        out[final_name(union_map, tuple_union->free_blocks[i].name)] = total[i];

    auto chain_map = compose_renames(union_map,
                                     tuple_union->child_renames[static_cast<std::size_t>(part_idx)]);
    const SemiAlg& chain = tuple_union->children[static_cast<std::size_t>(part_idx)];
    for (std::size_t i = 0; i < chain->free_blocks.size(); ++i)
        out[final_name(chain_map, chain->free_blocks[i].name)] = total[i];
    assign_tuple_chain(chain, chain_map, leaf_values, 0, leaf_values.size() - 1, k, out);
    return true;
}

}  // namespace

// -- monoidal -------------------------------------------------------------------

namespace {

struct Slot {
    int base = 0;
    int dim = 0;
    bool transposed = false;
};

// symbolic entries of the product of the slot blocks, over nv source variables
std::vector<std::vector<Poly>> sym_product(int nv, const std::vector<Slot>& slots, int n) {
    std::vector<std::vector<Poly>> acc(static_cast<std::size_t>(n),
                                       std::vector<Poly>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                Poly::constant(nv, Rat(i == j ? 1 : 0));
    for (const auto& s : slots) {
        std::vector<std::vector<Poly>> next(static_cast<std::size_t>(n),
                                            std::vector<Poly>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Poly sum = Poly::zero(nv);
                for (int t = 0; t < n; ++t) {
                    int var = s.base + (s.transposed ? j * n + t : t * n + j);
                    sum = sum + acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] *
                                    Poly::variable(nv, var);
                }
                next[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = sum;
            }
        acc = std::move(next);
    }
    return acc;
}

PolyIdeal identity_point_ideal(int n) {
    std::vector<Poly> gens;
    const int nv = n * n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            gens.push_back(Poly::variable(nv, i * n + j) -
                           Poly::constant(nv, Rat(i == j ? 1 : 0)));
    PolyIdeal ideal(nv, std::move(gens));
    QMatrix id = QMatrix::identity(n);
    ideal.add_sample(id.entries());
    return ideal;
}

// concatenates ideals into one source space; returns the slot bases
PolyIdeal concat_ideals(const std::vector<const PolyIdeal*>& parts, std::vector<int>& bases) {
    int total = 0;
    for (const auto* p : parts) {
        bases.push_back(total);
        total += p->nvars();
    }
    std::vector<Poly> gens;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        std::vector<int> map(static_cast<std::size_t>(parts[i]->nvars()));
        for (int v = 0; v < parts[i]->nvars(); ++v)
            map[static_cast<std::size_t>(v)] = bases[i] + v;
        for (const auto& g : parts[i]->generators()) gens.push_back(g.remap(total, map));
    }
    PolyIdeal out(total, std::move(gens));
    // combined samples (first sample of each part, when present)
    bool all = std::all_of(parts.begin(), parts.end(),
                           [](const PolyIdeal* p) { return !p->samples().empty(); });
    if (all) {
        std::vector<Rat> s;
        for (const auto* p : parts) {
            s.insert(s.end(), p->samples()[0].begin(), p->samples()[0].end());
        }
        out.add_sample(std::move(s));
    }
    return out;
}

struct MonoLevelResult {
    std::vector<PolyIdeal> pieces;  // union of varieties over n^2 vars, each containing I
    bool certified = true;
};

}  // namespace

ClosureReport closure_monoidal(const MonoidalGrammar& g, const QuantumAutomaton& q,
                               const RunConfig& cfg, Budget& budget) {
    auto t0 = Clock::now();
    ClosureReport report;
    report.provenance = ProvenanceNode{
        "closure", "monoidal grammar of index " + std::to_string(g.depth()), true, {}};
    NameGen names;
    const int n = q.dim;
    const int nv = n * n;
    const BlockShape pair_shape{{n, n}};
    const int chain_cap = cfg.chain_cap > 0 ? cfg.chain_cap : (2 * n) * (2 * n);

    // closure of one minimal linear grammar given the closures one level down;
    // `below` empty means the grammar's working alphabet maps straight through phi
    auto close_minlinear = [&](const MinLinear& ml, const std::vector<std::string>& alphabet,
                               const std::map<std::string, MonoLevelResult>* below,
                               ProvenanceNode& prov) -> MonoLevelResult {
        MonoLevelResult out;
        std::vector<PolyIdeal> cycle_pieces;  // over the [n,n] pair shape
        bool cycles_certified = true;

        if (!below) {
            // lowest level: the cycle monoid is finitely generated directly
            GeneratorSet gens;
            gens.dim = 2 * n;
            for (const auto& c : ml.cycles()) {
                QMatrix lab = direct_sum({phi_of(q, c.left), phi_of(q, c.right).transpose()});
                if (std::find(gens.generators.begin(), gens.generators.end(), lab) ==
                    gens.generators.end())
                    gens.generators.push_back(lab);
            }
            GroupClosureResult gc = group_closure(gens, cfg.degree_cap, budget, pair_shape);
            cycles_certified = gc.certified;
            cycle_pieces.push_back(gc.reduced);
            prov.children.push_back(ProvenanceNode{
                "cycle-closure",
                "variable " + ml.variable + ", degree " + std::to_string(gc.degree_reached),
                gc.certified,
                {}});
        } else {
            // mirrored cycle generators over the level alphabet, then the
            // star of the product of their closures via the ascending chain
            std::vector<PolyIdeal> zeta_pieces;
            for (const auto& c : ml.cycles()) {
                Word alpha = c.left;
                Word beta_mirror(c.right.rbegin(), c.right.rend());
                std::size_t len = std::max(alpha.size(), beta_mirror.size());
                // one combination per choice of sub-piece for each letter;
                // an empty option list at a letter position means that
                // letter's sub-language is empty, killing the whole cycle
                std::vector<std::vector<const PolyIdeal*>> options;
                bool dead = false;
                for (std::size_t i = 0; i < len; ++i) {
                    std::vector<const PolyIdeal*> side;
                    if (i < alpha.size()) {
                        for (const auto& piece : below->at(alpha[i]).pieces) side.push_back(&piece);
                        if (side.empty()) dead = true;
                    }
                    options.push_back(side);
                }
                for (std::size_t i = 0; i < len; ++i) {
                    std::vector<const PolyIdeal*> side;
                    if (i < beta_mirror.size()) {
                        for (const auto& piece : below->at(beta_mirror[i]).pieces)
                            side.push_back(&piece);
                        if (side.empty()) dead = true;
                    }
                    options.push_back(side);
                }
                if (dead) continue;
                PolyIdeal id_ideal = identity_point_ideal(n);
                std::vector<std::size_t> choice(options.size(), 0);
                bool done = false;
                while (!done) {
                    std::vector<const PolyIdeal*> slots_src;
                    for (std::size_t i = 0; i < options.size(); ++i)
                        slots_src.push_back(options[i].empty() ? &id_ideal
                                                               : options[i][choice[i]]);
                    std::vector<int> bases;
                    PolyIdeal src = concat_ideals(slots_src, bases);
                    // target: 2-block pair space; block 2 is a product of transposes
                    std::vector<Slot> u_slots, v_slots;
                    for (std::size_t i = 0; i < len; ++i)
                        u_slots.push_back(Slot{bases[i], n, false});
                    for (std::size_t i = 0; i < len; ++i)
                        v_slots.push_back(Slot{bases[len + i], n, true});
                    auto u_prod = sym_product(src.nvars(), u_slots, n);
                    auto v_prod = sym_product(src.nvars(), v_slots, n);
                    std::vector<Poly> psi;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            psi.push_back(u_prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            psi.push_back(v_prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
                    zeta_pieces.push_back(image_closure(src, psi, 2 * nv, budget));
                    // advance the choice vector
                    done = true;
                    for (std::size_t i = 0; i < options.size(); ++i) {
                        if (options[i].empty()) continue;
                        if (++choice[i] < options[i].size()) {
                            done = false;
                            break;
                        }
                        choice[i] = 0;
                    }
                }
            }
            if (zeta_pieces.empty()) {
                // no cycles: the cycle monoid is {I (+) I}
                cycle_pieces.push_back(identity_point_ideal(2 * n));
                // re-shape to the pair space variables
                std::vector<Poly> gens2;
                const int pv = pair_shape.var_count();
                for (int b = 0; b < 2; ++b)
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            gens2.push_back(Poly::variable(pv, pair_shape.var(b, i, j)) -
                                            Poly::constant(pv, Rat(i == j ? 1 : 0)));
                cycle_pieces.back() = PolyIdeal(pv, std::move(gens2));
                cycle_pieces.back().add_sample(pair_shape.identity_point());
            } else {
                // H1 = Cl(product of all pieces), then the ascending chain
                PolyIdeal h1(0);
                if (zeta_pieces.size() == 1) {
                    h1 = zeta_pieces[0];
                } else {
                    std::vector<const PolyIdeal*> parts;
                    for (const auto& p : zeta_pieces) parts.push_back(&p);
                    std::vector<int> bases;
                    PolyIdeal src = concat_ideals(parts, bases);
                    std::vector<Slot> u_slots, v_slots;
                    for (std::size_t i = 0; i < zeta_pieces.size(); ++i) {
                        u_slots.push_back(Slot{bases[i] + 0, n, false});
                        v_slots.push_back(Slot{bases[i] + nv, n, false});
                    }
                    auto u_prod = sym_product(src.nvars(), u_slots, n);
                    auto v_prod = sym_product(src.nvars(), v_slots, n);
                    std::vector<Poly> psi;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            psi.push_back(u_prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            psi.push_back(v_prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
                    h1 = image_closure(src, psi, 2 * nv, budget);
                }
                if (h1.samples().empty()) h1.add_sample(pair_shape.identity_point());
                VarietyChain chain = product_chain(h1, pair_shape, chain_cap, budget);
                cycles_certified = cycles_certified && chain.stabilized;
                for (auto& ideal : chain.ideals) cycle_pieces.push_back(std::move(ideal));
                prov.children.push_back(ProvenanceNode{
                    "product-chain",
                    "variable " + ml.variable + ", " + std::to_string(chain.steps_used) +
                        " step(s)" + (chain.stabilized ? ", stabilized" : ", cap reached"),
                    chain.stabilized,
                    {}});
            }
        }
        out.certified = cycles_certified;

        // assemble Cl(phi(L)) pieces: X . Z_1...Z_m . W^T per exit and chain piece
        for (const auto& ex : ml.exits()) {
            bool exit_dead = false;
            std::vector<std::vector<const PolyIdeal*>> exit_options;
            for (const auto& letter : ex.body) {
                std::vector<const PolyIdeal*> side;
                if (below) {
                    for (const auto& piece : below->at(letter).pieces) side.push_back(&piece);
                    if (side.empty()) exit_dead = true;
                }
                exit_options.push_back(side);
            }
            if (exit_dead) continue;
            for (const auto& cyc : cycle_pieces) {
                const auto& options = exit_options;
                std::vector<std::size_t> choice(options.size(), 0);
                bool done = false;
                while (!done) {
                    std::vector<const PolyIdeal*> parts{&cyc};
                    std::vector<PolyIdeal> own;  // keeps letter points alive
                    own.reserve(ex.body.size());
                    for (std::size_t i = 0; i < options.size(); ++i) {
                        if (below) {
                            parts.push_back(options[i][choice[i]]);
                        } else {
                            // lowest level: letters map straight through phi
                            const QMatrix m = q.letter(ex.body[i]);
                            std::vector<Poly> gens;
                            for (int r = 0; r < n; ++r)
                                for (int c = 0; c < n; ++c)
                                    gens.push_back(Poly::variable(nv, r * n + c) -
                                                   Poly::constant(nv, m.at(r, c)));
                            own.emplace_back(nv, std::move(gens));
                            own.back().add_sample(m.entries());
                            parts.push_back(&own.back());
                        }
                    }
                    std::vector<int> bases;
                    PolyIdeal src = concat_ideals(parts, bases);
                    std::vector<Slot> slots;
                    slots.push_back(Slot{bases[0] + 0, n, false});  // X
                    for (std::size_t i = 0; i < options.size(); ++i)
                        slots.push_back(Slot{bases[i + 1], n, false});
                    slots.push_back(Slot{bases[0] + nv, n, true});  // W^T
                    auto prod = sym_product(src.nvars(), slots, n);
                    std::vector<Poly> psi;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            psi.push_back(prod[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
                    out.pieces.push_back(image_closure(src, psi, nv, budget));
                    done = true;
                    for (std::size_t i = 0; i < options.size(); ++i) {
                        if (options[i].empty()) continue;
                        if (++choice[i] < options[i].size()) {
                            done = false;
                            break;
                        }
                        choice[i] = 0;
                    }
                }
            }
        }
        return out;
    };

    // bottom-up over the levels
    const int depth = g.depth();
    std::map<std::string, MonoLevelResult> below;
    bool certified = true;
    for (int lvl = depth; lvl >= 2; --lvl) {
        const auto& fam = g.families[static_cast<std::size_t>(lvl - 2)];
        const auto& alphabet = g.alphabets[static_cast<std::size_t>(lvl - 1)];
        std::map<std::string, MonoLevelResult> cur;
        ProvenanceNode level_node{"level", "level " + std::to_string(lvl), true, {}};
        for (const auto& [letter, ml] : fam) {
            ProvenanceNode letter_node{"letter", letter, true, {}};
            MonoLevelResult r = close_minlinear(ml, alphabet,
                                                lvl == depth ? nullptr : &below, letter_node);
            if (lvl == depth && !ml.irreducible_asserted)
                letter_node.detail += " (no irreducibility assertion)";
            certified = certified && r.certified;
            letter_node.certified = r.certified;
            level_node.children.push_back(std::move(letter_node));
            cur.emplace(letter, std::move(r));
        }
        report.provenance.children.push_back(std::move(level_node));
        below = std::move(cur);
    }
    ProvenanceNode top_node{"level", "level 1", true, {}};
    MonoLevelResult top = close_minlinear(g.top, g.alphabets[0],
                                          depth == 1 ? nullptr : &below, top_node);
    certified = certified && top.certified;
    top_node.certified = top.certified;
    report.provenance.children.push_back(std::move(top_node));

    std::vector<SemiAlg> parts;
    for (const auto& piece : top.pieces) parts.push_back(sa_from_variety(piece, n, names));
    report.formula = sa_union_all(parts, n, names);
    report.certified = certified;
    report.provenance.certified = certified;
    report.timings.emplace_back("closure", seconds_since(t0));
    return report;
}

// -- dispatch -------------------------------------------------------------------

ClosureReport closure_of_grammar(const GrammarSpec& g, const QuantumAutomaton& q,
                                 const RunConfig& cfg, Budget& budget) {
    if (const auto* l = std::get_if<LinearGrammar>(&g)) return closure_linear(*l, q, cfg, budget);
    if (const auto* m = std::get_if<MetalinearGrammar>(&g))
        return closure_metalinear(*m, q, cfg, budget);
    if (const auto* r = std::get_if<RestrictedMatrixGrammar>(&g))
        return closure_matrix(*r, q, cfg, budget);
    return closure_monoidal(std::get<MonoidalGrammar>(g), q, cfg, budget);
}

// -- witnesses ------------------------------------------------------------------

std::optional<WitnessMap> soundness_witness(const ClosureReport& report, const GrammarSpec& g,
                                            const QuantumAutomaton& q, const Word& w,
                                            const EnumLimits& limits_in) {
    EnumLimits limits = limits_in;
    limits.max_len = std::max<int>(limits.max_len, static_cast<int>(w.size()));
    WitnessMap out;
    if (const auto* l = std::get_if<LinearGrammar>(&g)) {
        if (!report.lin_plan) return std::nullopt;
        auto en = enumerate_linear(*l, limits);
        if (!en.ok) return std::nullopt;
        auto it = en.derivations.find(w);
        if (it == en.derivations.end()) return std::nullopt;
        if (!lin_witness_rec(*report.lin_plan, *l, q, {}, it->second, out)) return std::nullopt;
        return out;
    }
    if (const auto* r = std::get_if<RestrictedMatrixGrammar>(&g)) {
        if (!report.matrix_plan) return std::nullopt;
        auto en = enumerate_matrix(*r, limits);
        if (!en.ok) return std::nullopt;
        auto it = en.derivations.find(w);
        if (it == en.derivations.end()) return std::nullopt;
        if (!matrix_witness(*report.matrix_plan, report, *r, q, it->second, out))
            return std::nullopt;
        return out;
    }
    if (const auto* m = std::get_if<MetalinearGrammar>(&g)) {
        if (!report.meta_plan) return std::nullopt;
        // find a family and a split of w into component words
        for (std::size_t fi = 0; fi < m->families.size(); ++fi) {
            const auto& fam = m->families[fi];
            const auto& fplan = report.meta_plan->families[fi];
            std::vector<std::map<Word, std::vector<int>>> sub;
            bool ok = true;
            for (const auto& lg : fam) {
                auto en = enumerate_linear(lg, limits);
                if (!en.ok) {
                    ok = false;
                    break;
                }
                sub.push_back(en.derivations);
            }
            if (!ok) continue;
            // search a split by depth-first choice of prefixes
            std::vector<Word> parts(fam.size());
            std::function<bool(std::size_t, std::size_t)> dfs = [&](std::size_t ci,
                                                                    std::size_t pos) {
                if (ci == fam.size()) return pos == w.size();
                for (std::size_t len = 0; pos + len <= w.size(); ++len) {
                    Word cand(w.begin() + static_cast<long>(pos),
                              w.begin() + static_cast<long>(pos + len));
                    if (!sub[ci].count(cand)) continue;
                    parts[ci] = cand;
                    if (dfs(ci + 1, pos + len)) return true;
                }
                return false;
            };
            if (!dfs(0, 0)) continue;
            // assign along the product fold, then recurse into the components
            // fold shape: ((c1 x c2) x c3) ...
            std::map<std::string, std::string> to_final;
            if (m->families.size() > 1)
                to_final = compose_renames({}, report.formula->child_renames[fi]);
            SemiAlg node = fplan.set;
            // values of fold prefixes
            std::vector<QMatrix> prefix(fam.size());
            QMatrix acc = QMatrix::identity(q.dim);
            for (std::size_t i = 0; i < fam.size(); ++i) {
                acc = mat_mul(acc, phi_of(q, parts[i]));
                prefix[i] = acc;
            }
            std::function<bool(const SemiAlg&, const std::map<std::string, std::string>&,
                               std::size_t)>
                walk = [&](const SemiAlg& cur, const std::map<std::string, std::string>& map,
                           std::size_t upto) -> bool {
                if (upto == 0) {
                    // cur is the first component's set
                    out[final_name(map, cur->free_blocks[0].name)] = prefix[0];
                    auto en_it = sub[0].find(parts[0]);
                    if (en_it == sub[0].end()) return false;
                    return lin_witness_rec(*fplan.components[0], fam[0], q, map, en_it->second,
                                           out);
                }
                // cur = product(left, comp[upto])
                auto left_map = compose_renames(map, cur->child_renames[0]);
                auto right_map = compose_renames(map, cur->child_renames[1]);
                out[final_name(left_map, cur->children[0]->free_blocks[0].name)] =
                    prefix[upto - 1];
                out[final_name(right_map, cur->children[1]->free_blocks[0].name)] =
                    phi_of(q, parts[upto]);
                auto en_it = sub[upto].find(parts[upto]);
                if (en_it == sub[upto].end()) return false;
                if (!lin_witness_rec(*fplan.components[upto], fam[upto], q, right_map,
                                     en_it->second, out))
                    return false;
                return walk(cur->children[0], left_map, upto - 1);
            };
            if (walk(node, to_final, fam.size() - 1)) return out;
        }
        return std::nullopt;
    }
    // monoidal closures carry no bound blocks; the empty witness map suffices
    return out;
}

// -- report JSON ------------------------------------------------------------------

namespace {

ordered_json provenance_json(const ProvenanceNode& p) {
    ordered_json j;
    j["step"] = p.step;
    j["detail"] = p.detail;
    j["certified"] = p.certified;
    ordered_json kids = ordered_json::array();
    for (const auto& c : p.children) kids.push_back(provenance_json(c));
    j["children"] = kids;
    return j;
}

ordered_json formula_body_json(const SAFormula& f, const std::vector<std::string>& atom_strs) {
    ordered_json j;
    switch (f.kind) {
        case SAFormula::Kind::Atom:
            j["atom"] = atom_strs[static_cast<std::size_t>(f.atom)];
            break;
        case SAFormula::Kind::And: {
            ordered_json kids = ordered_json::array();
            for (const auto& k : f.kids) kids.push_back(formula_body_json(k, atom_strs));
            j["and"] = kids;
            break;
        }
        case SAFormula::Kind::Or: {
            ordered_json kids = ordered_json::array();
            for (const auto& k : f.kids) kids.push_back(formula_body_json(k, atom_strs));
            j["or"] = kids;
            break;
        }
    }
    return j;
}

}  // namespace

std::string closure_report_json(const ClosureReport& report, bool include_timings) {
    ordered_json j;
    j["certified"] = report.certified;
    const auto& f = report.formula;
    ordered_json jf;
    ordered_json frees = ordered_json::array();
    std::vector<std::string> names;
    for (const auto& b : f->free_blocks) {
        ordered_json bj;
        bj["name"] = b.name;
        bj["dim"] = b.dim;
        frees.push_back(bj);
        for (int i = 1; i <= b.dim; ++i)
            for (int jj = 1; jj <= b.dim; ++jj)
                names.push_back(b.name + "_" + std::to_string(i) + "_" + std::to_string(jj));
    }
    ordered_json bounds = ordered_json::array();
    for (const auto& b : f->bound_blocks) {
        ordered_json bj;
        bj["name"] = b.name;
        bj["dim"] = b.dim;
        bounds.push_back(bj);
        for (int i = 1; i <= b.dim; ++i)
            for (int jj = 1; jj <= b.dim; ++jj)
                names.push_back(b.name + "_" + std::to_string(i) + "_" + std::to_string(jj));
    }
    jf["free"] = frees;
    jf["exists"] = bounds;
    std::vector<std::string> atom_strs;
    ordered_json atoms = ordered_json::array();
    for (const auto& a : f->atoms) {
        std::string s = a.p.to_string(names) + (a.eq ? " = 0" : " > 0");
        atom_strs.push_back(s);
        atoms.push_back(s);
    }
    jf["atoms"] = atoms;
    jf["body"] = formula_body_json(f->body, atom_strs);
    j["formula"] = jf;
    j["provenance"] = provenance_json(report.provenance);
    if (include_timings) {
        ordered_json t = ordered_json::object();
        for (const auto& [stage, secs] : report.timings) t[stage] = secs;
        j["timings"] = t;
    }
    return j.dump(2) + "\n";
}

}  // namespace qcut
