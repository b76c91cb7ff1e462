#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fasthgt/errors.hpp"
#include "fasthgt/rooted_tree.hpp"

namespace fasthgt {

// Unrooted binary topology on n >= 3 leaves: internal nodes have degree 3,
// leaves degree 1, 2n-3 edges. Edge lengths are additive distances
// (-ln closeness); `weight` optionally carries the mutation probability.
struct WeightedTopology {
    struct Edge {
        int a = -1;
        int b = -1;
        double length = 0.0;
        std::optional<double> weight;
    };

    std::vector<Edge> edges;
    std::vector<std::vector<int>> adj;  // node -> incident edge ids
    std::vector<int> node_leaf;         // node -> leaf index, or -1
    std::vector<std::string> leaf_names;
    std::vector<int> leaf_node;  // leaf index -> node id

    int node_count() const { return static_cast<int>(node_leaf.size()); }
    int leaf_count() const { return static_cast<int>(leaf_names.size()); }
    bool is_leaf(int v) const { return node_leaf[static_cast<std::size_t>(v)] >= 0; }

    int add_node(int leafIndex = -1, const std::string& name = {}) {
        const int id = node_count();
        node_leaf.push_back(leafIndex);
        adj.emplace_back();
        if (leafIndex >= 0) {
            if (leafIndex >= static_cast<int>(leaf_names.size())) {
                leaf_names.resize(static_cast<std::size_t>(leafIndex) + 1);
                leaf_node.resize(static_cast<std::size_t>(leafIndex) + 1, -1);
            }
            leaf_names[static_cast<std::size_t>(leafIndex)] = name;
            leaf_node[static_cast<std::size_t>(leafIndex)] = id;
        }
        return id;
    }

    int add_edge(int a, int b, double length, std::optional<double> weight = std::nullopt) {
        const int id = static_cast<int>(edges.size());
        edges.push_back(Edge{a, b, length, weight});
        adj[static_cast<std::size_t>(a)].push_back(id);
        adj[static_cast<std::size_t>(b)].push_back(id);
        return id;
    }

    int other_end(int edgeId, int v) const {
        const Edge& e = edges[static_cast<std::size_t>(edgeId)];
        return e.a == v ? e.b : e.a;
    }

    void validate(bool checkLengths = true) const {
        const int n = leaf_count();
        if (n < 3) throw ValidationError("unrooted topology needs at least 3 leaves");
        if (node_count() != 2 * n - 2) throw ValidationError("node count must be 2n-2");
        if (static_cast<int>(edges.size()) != 2 * n - 3) throw ValidationError("edge count must be 2n-3");
        for (int v = 0; v < node_count(); ++v) {
            const std::size_t deg = adj[static_cast<std::size_t>(v)].size();
            if (is_leaf(v) ? deg != 1 : deg != 3)
                throw ValidationError("degree must be 1 at leaves and 3 at internal nodes");
        }
        for (const Edge& e : edges) {
            if (checkLengths && !(std::isfinite(e.length) && e.length > 0.0))
                throw ValidationError("edge lengths must be finite and positive");
        }
        for (int i = 0; i < n; ++i) {
            if (leaf_node[static_cast<std::size_t>(i)] < 0 || leaf_names[static_cast<std::size_t>(i)].empty())
                throw ValidationError("missing leaf " + std::to_string(i));
            for (int j = i + 1; j < n; ++j)
                if (leaf_names[static_cast<std::size_t>(i)] == leaf_names[static_cast<std::size_t>(j)])
                    throw ValidationError("duplicate leaf name: " + leaf_names[static_cast<std::size_t>(i)]);
        }
        // Connectivity: |E| = |V| - 1 plus a reachability sweep.
        std::vector<char> seen(static_cast<std::size_t>(node_count()), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int reached = 0;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            ++reached;
            for (int eid : adj[static_cast<std::size_t>(v)]) {
                const int w = other_end(eid, v);
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    stack.push_back(w);
                }
            }
        }
        if (reached != node_count()) throw ValidationError("topology is not connected");
    }

    // Leaf indices reachable from `side` without crossing `edgeId`, sorted.
    std::vector<int> leaves_on_side(int edgeId, int side) const {
        std::vector<int> out;
        std::vector<int> stack{side};
        std::vector<char> seen(static_cast<std::size_t>(node_count()), 0);
        seen[static_cast<std::size_t>(side)] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            if (is_leaf(v)) out.push_back(node_leaf[static_cast<std::size_t>(v)]);
            for (int eid : adj[static_cast<std::size_t>(v)]) {
                if (eid == edgeId) continue;
                const int w = other_end(eid, v);
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    stack.push_back(w);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

// Removes the root by replacing its two incident edges e1, e2 with a single
// edge whose mutation probability is 1-(1-p_e1)(1-p_e2) and whose length is
// the sum of the two edge lengths.
inline WeightedTopology suppress_root(const RootedEvoTree& t) {
    const int n = t.leaf_count();
    if (n < 3) throw ValidationError("root suppression needs at least 3 leaves");
    const double alpha = t.model.alpha();
    WeightedTopology out;
    std::vector<int> map(static_cast<std::size_t>(t.node_count()), -1);
    for (int v = 0; v < t.node_count(); ++v) {
        if (v == t.root) continue;
        map[static_cast<std::size_t>(v)] =
            out.add_node(t.nodes[v].leaf, t.nodes[v].leaf >= 0 ? t.leaf_names[static_cast<std::size_t>(t.nodes[v].leaf)] : std::string{});
    }
    for (int v = 0; v < t.node_count(); ++v) {
        if (v == t.root || t.nodes[v].parent == t.root) continue;
        const double p = t.nodes[v].p;
        out.add_edge(map[static_cast<std::size_t>(v)], map[static_cast<std::size_t>(t.nodes[v].parent)],
                     -std::log(1.0 - alpha * p), p);
    }
    const int c1 = t.nodes[t.root].left, c2 = t.nodes[t.root].right;
    const double p1 = t.nodes[c1].p, p2 = t.nodes[c2].p;
    out.add_edge(map[static_cast<std::size_t>(c1)], map[static_cast<std::size_t>(c2)],
                 -(std::log(1.0 - alpha * p1) + std::log(1.0 - alpha * p2)),
                 1.0 - (1.0 - p1) * (1.0 - p2));
    return out;
}

// Nontrivial leaf bipartitions (internal edges only). Each is canonicalized
// as the sorted side that excludes leaf 0; the result is sorted for
// deterministic comparison.
inline std::vector<std::vector<int>> bipartitions(const WeightedTopology& t) {
    std::vector<std::vector<int>> out;
    for (int eid = 0; eid < static_cast<int>(t.edges.size()); ++eid) {
        const auto& e = t.edges[static_cast<std::size_t>(eid)];
        if (t.is_leaf(e.a) || t.is_leaf(e.b)) continue;
        std::vector<int> side = t.leaves_on_side(eid, e.a);
        if (!side.empty() && side.front() == 0) side = t.leaves_on_side(eid, e.b);
        out.push_back(std::move(side));
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

// Relabels b's leaf indices to match a's by name; both trees must be over
// the same taxon set.
inline std::vector<int> leaf_index_map(const WeightedTopology& a, const WeightedTopology& b) {
    if (a.leaf_count() != b.leaf_count())
        throw ValidationError("trees have different numbers of leaves");
    std::vector<int> map(static_cast<std::size_t>(b.leaf_count()), -1);
    for (int i = 0; i < b.leaf_count(); ++i) {
        const std::string& name = b.leaf_names[static_cast<std::size_t>(i)];
        const auto it = std::find(a.leaf_names.begin(), a.leaf_names.end(), name);
        if (it == a.leaf_names.end()) throw ValidationError("leaf sets differ: no taxon " + name);
        map[static_cast<std::size_t>(i)] = static_cast<int>(it - a.leaf_names.begin());
    }
    return map;
}

inline std::vector<std::vector<int>> mapped_bipartitions(const WeightedTopology& a, const WeightedTopology& b) {
    const std::vector<int> map = leaf_index_map(a, b);
    std::vector<std::vector<int>> sb = bipartitions(b);
    const int n = a.leaf_count();
    for (auto& side : sb) {
        for (int& x : side) x = map[static_cast<std::size_t>(x)];
        std::sort(side.begin(), side.end());
        if (!side.empty() && side.front() == 0) {  // re-canonicalize after relabeling
            std::vector<int> comp;
            comp.reserve(static_cast<std::size_t>(n) - side.size());
            std::size_t k = 0;
            for (int x = 0; x < n; ++x) {
                if (k < side.size() && side[k] == x)
                    ++k;
                else
                    comp.push_back(x);
            }
            side = std::move(comp);
        }
    }
    std::sort(sb.begin(), sb.end());
    return sb;
}

}  // namespace detail

// Robinson-Foulds distance: size of the symmetric difference of the two
// nontrivial bipartition sets. Taxa are matched by name.
inline int rf_distance(const WeightedTopology& a, const WeightedTopology& b) {
    const std::vector<std::vector<int>> sa = bipartitions(a);
    const std::vector<std::vector<int>> sb = detail::mapped_bipartitions(a, b);
    std::vector<std::vector<int>> common;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
    return static_cast<int>(sa.size() + sb.size() - 2 * common.size());
}

inline bool topology_matches(const WeightedTopology& a, const WeightedTopology& b) {
    return rf_distance(a, b) == 0;
}

// Largest |length difference| over edges present in both trees, where an edge
// is identified by its leaf bipartition (taxa matched by name). Pendant edges
// always pair up; internal edges pair up exactly where the topologies agree,
// so on matching topologies this covers every edge.
inline double max_edge_length_error(const WeightedTopology& a, const WeightedTopology& b) {
    const std::vector<int> map = detail::leaf_index_map(a, b);
    auto canonical = [](const WeightedTopology& t, int eid, const std::vector<int>* remap) {
        auto side_of = [&](int v) {
            std::vector<int> side = t.leaves_on_side(eid, v);
            if (remap != nullptr) {
                for (int& x : side) x = (*remap)[static_cast<std::size_t>(x)];
                std::sort(side.begin(), side.end());
            }
            return side;
        };
        std::vector<int> side = side_of(t.edges[static_cast<std::size_t>(eid)].a);
        if (!side.empty() && side.front() == 0) side = side_of(t.edges[static_cast<std::size_t>(eid)].b);
        return side;
    };
    std::map<std::vector<int>, double> lengths;
    for (int eid = 0; eid < static_cast<int>(a.edges.size()); ++eid)
        lengths.emplace(canonical(a, eid, nullptr), a.edges[static_cast<std::size_t>(eid)].length);
    double err = 0.0;
    for (int eid = 0; eid < static_cast<int>(b.edges.size()); ++eid) {
        const auto it = lengths.find(canonical(b, eid, &map));
        if (it != lengths.end())
            err = std::max(err, std::abs(it->second - b.edges[static_cast<std::size_t>(eid)].length));
    }
    return err;
}

// g-depth of a topology: for each internal edge, cut it and measure, from each
// cut endpoint, the smallest number of edges to a leaf inside its component;
// the edge's g-depth is the larger of the two, the tree's the maximum over
// internal edges.  Pendant edges are excluded: the far side of a leaf's own
// edge never bounds a defining-triplet leg, and counting it would make
// unbalanced trees look deeper than balanced ones instead of shallower.  A
// 3-leaf star has no internal edge and gets depth 0 (every leg is one edge).
inline int g_depth(const WeightedTopology& t) {
    auto sideDepth = [&t](int edgeId, int from) {
        std::vector<int> dist(static_cast<std::size_t>(t.node_count()), -1);
        std::vector<int> queue{from};
        dist[static_cast<std::size_t>(from)] = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int v = queue[head];
            if (t.is_leaf(v)) return dist[static_cast<std::size_t>(v)];  // BFS: first leaf is nearest
            for (int eid : t.adj[static_cast<std::size_t>(v)]) {
                if (eid == edgeId) continue;
                const int w = t.other_end(eid, v);
                if (dist[static_cast<std::size_t>(w)] < 0) {
                    dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
                    queue.push_back(w);
                }
            }
        }
        throw ValidationError("component without a leaf");
    };
    int depth = 0;
    for (int eid = 0; eid < static_cast<int>(t.edges.size()); ++eid) {
        const auto& e = t.edges[static_cast<std::size_t>(eid)];
        if (t.is_leaf(e.a) || t.is_leaf(e.b)) continue;
        depth = std::max(depth, std::max(sideDepth(eid, e.a), sideDepth(eid, e.b)));
    }
    return depth;
}

// g-depth of a rooted model tree, measured on its root-suppressed shape.
inline int g_depth(const RootedEvoTree& t) { return g_depth(suppress_root(t)); }

}  // namespace fasthgt
