#include "qcut/cycle_monoid.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace qcut {

namespace {

QMatrix phi_word(const QuantumAutomaton& q, const Word& w) {
    QMatrix m = QMatrix::identity(q.dim);
    for (const auto& a : w) m = mat_mul(m, q.letter(a));
    return m;
}

std::string tuple_name(const std::vector<std::string>& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + t[i];
    return s + ")";
}

}  // namespace

std::string GroupAutomaton::dump() const {
    std::ostringstream os;
    os << "root " << states[static_cast<std::size_t>(root)] << "\n";
    for (std::size_t e = 0; e < edges.size(); ++e)
        os << states[static_cast<std::size_t>(edges[e].src)] << "  --[m" << e << "]-->  "
           << states[static_cast<std::size_t>(edges[e].dst)] << "\n";
    for (std::size_t e = 0; e < edges.size(); ++e)
        os << "m" << e << " = " << edges[e].label.to_string() << "\n";
    return os.str();
}

GroupAutomaton cycle_automaton_linear(const LinearGrammar& g, const QuantumAutomaton& q,
                                      const std::string& var,
                                      const std::vector<std::string>& active) {
    GroupAutomaton aut;
    aut.label_dim = 2 * q.dim;
    aut.states = active;
    auto idx = [&](const std::string& v) {
        return static_cast<int>(std::find(aut.states.begin(), aut.states.end(), v) -
                                aut.states.begin());
    };
    aut.root = idx(var);
    for (int pi = 0; pi < static_cast<int>(g.productions.size()); ++pi) {
        auto split = g.split_rule(pi);
        if (!split) continue;
        const auto& p = g.productions[static_cast<std::size_t>(pi)];
        if (idx(p.lhs) >= static_cast<int>(aut.states.size())) continue;
        if (idx(split->var) >= static_cast<int>(aut.states.size())) continue;
        GroupAutomaton::Edge e;
        e.src = idx(p.lhs);
        e.dst = idx(split->var);
        e.label = direct_sum({phi_word(q, split->left), phi_word(q, split->right).transpose()});
        e.contexts = {split->left, split->right};
        aut.edges.push_back(std::move(e));
    }
    return aut;
}

GroupAutomaton cycle_automaton_linear(const LinearGrammar& g, const QuantumAutomaton& q,
                                      const std::string& var) {
    return cycle_automaton_linear(g, q, var, g.variables);
}

GroupAutomaton cycle_automaton_matrix(const RestrictedMatrixGrammar& g,
                                      const QuantumAutomaton& q,
                                      const std::vector<std::string>& root_state) {
    GroupAutomaton aut;
    const int k = g.index_k;
    aut.label_dim = 2 * q.dim * k;

    std::vector<std::vector<std::string>> tuples;
    std::map<std::vector<std::string>, int> index;
    auto intern = [&](const std::vector<std::string>& t) {
        auto it = index.find(t);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(tuples.size());
        tuples.push_back(t);
        index.emplace(t, id);
        aut.states.push_back(tuple_name(t));
        return id;
    };

    aut.root = intern(root_state);
    std::deque<int> queue{aut.root};
    std::set<int> seen{aut.root};
    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (const auto& m : g.matrices) {
            if (m.kind != RMMatrix::Kind::Step) continue;
            bool applies = true;
            for (int i = 0; i < k; ++i)
                if (m.rules[static_cast<std::size_t>(i)].lhs !=
                    tuples[static_cast<std::size_t>(cur)][static_cast<std::size_t>(i)]) {
                    applies = false;
                    break;
                }
            if (!applies) continue;
            std::vector<std::string> next;
            std::vector<QMatrix> blocks;
            std::vector<Word> ctx;
            for (int i = 0; i < k; ++i) {
                const auto& r = m.rules[static_cast<std::size_t>(i)];
                next.push_back(r.var);
                blocks.push_back(phi_word(q, r.left_ctx));
                blocks.push_back(phi_word(q, r.right_ctx).transpose());
                ctx.push_back(r.left_ctx);
                ctx.push_back(r.right_ctx);
            }
            int dst = intern(next);
            GroupAutomaton::Edge e;
            e.src = cur;
            e.dst = dst;
            e.label = direct_sum(std::span<const QMatrix>(blocks));
            e.contexts = std::move(ctx);
            aut.edges.push_back(std::move(e));
            if (seen.insert(dst).second) queue.push_back(dst);
        }
    }
    return aut;
}

QMatrix path_label(const GroupAutomaton& aut, const std::vector<int>& edge_indices) {
    QMatrix m = QMatrix::identity(aut.label_dim);
    for (int e : edge_indices) m = mat_mul(m, aut.edges[static_cast<std::size_t>(e)].label);
    return m;
}

GeneratorSet group_generators(const GroupAutomaton& aut) {
    GeneratorSet out;
    out.dim = aut.label_dim;

    const int n_states = static_cast<int>(aut.states.size());
    std::vector<std::vector<int>> fwd(static_cast<std::size_t>(n_states));
    std::vector<std::vector<int>> bwd(static_cast<std::size_t>(n_states));
    for (int e = 0; e < static_cast<int>(aut.edges.size()); ++e) {
        fwd[static_cast<std::size_t>(aut.edges[static_cast<std::size_t>(e)].src)].push_back(e);
        bwd[static_cast<std::size_t>(aut.edges[static_cast<std::size_t>(e)].dst)].push_back(e);
    }
    auto reach = [&](const std::vector<std::vector<int>>& adj, bool forward) {
        std::set<int> vis{aut.root};
        std::deque<int> q{aut.root};
        while (!q.empty()) {
            int s = q.front();
            q.pop_front();
            for (int e : adj[static_cast<std::size_t>(s)]) {
                int t = forward ? aut.edges[static_cast<std::size_t>(e)].dst
                                : aut.edges[static_cast<std::size_t>(e)].src;
                if (vis.insert(t).second) q.push_back(t);
            }
        }
        return vis;
    };
    std::set<int> fromr = reach(fwd, true);
    std::set<int> tor = reach(bwd, false);
    std::set<int> keep;
    std::set_intersection(fromr.begin(), fromr.end(), tor.begin(), tor.end(),
                          std::inserter(keep, keep.begin()));
    out.trimming_applied = static_cast<int>(keep.size()) != n_states;
    out.states_removed = n_states - static_cast<int>(keep.size());

    // surviving edges in original order
    std::vector<int> live_edges;
    for (int e = 0; e < static_cast<int>(aut.edges.size()); ++e)
        if (keep.count(aut.edges[static_cast<std::size_t>(e)].src) &&
            keep.count(aut.edges[static_cast<std::size_t>(e)].dst))
            live_edges.push_back(e);

    // breadth-first spanning tree; edges ordered (src, dst, insertion)
    std::vector<int> order = live_edges;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& ea = aut.edges[static_cast<std::size_t>(a)];
        const auto& eb = aut.edges[static_cast<std::size_t>(b)];
        if (ea.src != eb.src) return ea.src < eb.src;
        if (ea.dst != eb.dst) return ea.dst < eb.dst;
        return a < b;
    });

    std::map<int, QMatrix> tree_label;            // state -> t(state)
    std::map<int, std::vector<int>> tree_path;    // state -> edges root..state
    std::set<int> tree_edges;
    tree_label.emplace(aut.root, QMatrix::identity(aut.label_dim));
    tree_path.emplace(aut.root, std::vector<int>{});
    std::deque<int> frontier{aut.root};
    while (!frontier.empty()) {
        int s = frontier.front();
        frontier.pop_front();
        for (int e : order) {
            const auto& edge = aut.edges[static_cast<std::size_t>(e)];
            if (edge.src != s || tree_label.count(edge.dst)) continue;
            tree_label.emplace(edge.dst, mat_mul(tree_label.at(s), edge.label));
            auto path = tree_path.at(s);
            path.push_back(e);
            tree_path.emplace(edge.dst, std::move(path));
            tree_edges.insert(e);
            frontier.push_back(edge.dst);
        }
    }

    // co-paths state -> root for the witnesses (backward breadth-first)
    std::map<int, std::vector<int>> co_path;
    co_path.emplace(aut.root, std::vector<int>{});
    std::deque<int> bfro{aut.root};
    while (!bfro.empty()) {
        int s = bfro.front();
        bfro.pop_front();
        for (int e : order) {
            const auto& edge = aut.edges[static_cast<std::size_t>(e)];
            if (edge.dst != s || co_path.count(edge.src)) continue;
            std::vector<int> path{e};
            const auto& rest = co_path.at(s);
            path.insert(path.end(), rest.begin(), rest.end());
            co_path.emplace(edge.src, std::move(path));
            bfro.push_back(edge.src);
        }
    }

    std::set<QMatrix> dedup;
    for (int e : live_edges) {
        if (tree_edges.count(e)) continue;  // tree edges yield the identity
        const auto& edge = aut.edges[static_cast<std::size_t>(e)];
        QMatrix gen = mat_mul(mat_mul(tree_label.at(edge.src), edge.label),
                              tree_label.at(edge.dst).transpose());
        if (gen.is_identity()) continue;
        if (!dedup.insert(gen).second) continue;
        GeneratorSet::Witness w;
        w.loop_a = tree_path.at(edge.src);
        w.loop_a.push_back(e);
        const auto& back = co_path.at(edge.dst);
        w.loop_a.insert(w.loop_a.end(), back.begin(), back.end());
        w.loop_b = tree_path.at(edge.dst);
        w.loop_b.insert(w.loop_b.end(), back.begin(), back.end());
        out.generators.push_back(std::move(gen));
        out.witnesses.push_back(std::move(w));
    }
    return out;
}

}  // namespace qcut
