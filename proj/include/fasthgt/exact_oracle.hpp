#pragma once

#include <cmath>
#include <vector>

#include "fasthgt/distance_matrix.hpp"
#include "fasthgt/rooted_tree.hpp"

namespace fasthgt {

namespace detail {

// Sum of per-edge distances -ln(1 - alpha p) from `from` to every node.
inline std::vector<double> log_distances_from(const RootedEvoTree& t, int from) {
    const double alpha = t.model.alpha();
    std::vector<double> dist(static_cast<std::size_t>(t.node_count()), -1.0);
    std::vector<int> stack{from};
    dist[static_cast<std::size_t>(from)] = 0.0;
    auto visit = [&](int v, int w, double p) {
        if (w >= 0 && dist[static_cast<std::size_t>(w)] < 0.0) {
            dist[static_cast<std::size_t>(w)] =
                dist[static_cast<std::size_t>(v)] - std::log(1.0 - alpha * p);
            stack.push_back(w);
        }
    };
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        const auto& nd = t.nodes[static_cast<std::size_t>(v)];
        visit(v, nd.left, nd.left >= 0 ? t.nodes[static_cast<std::size_t>(nd.left)].p : 0.0);
        visit(v, nd.right, nd.right >= 0 ? t.nodes[static_cast<std::size_t>(nd.right)].p : 0.0);
        visit(v, nd.parent, nd.p);
    }
    return dist;
}

}  // namespace detail

// Model closeness between two tree nodes: the product of 1 - alpha p over
// the connecting path (1 for a node against itself).
inline double exact_closeness_nodes(const RootedEvoTree& t, int nodeA, int nodeB) {
    return std::exp(-detail::log_distances_from(t, nodeA)[static_cast<std::size_t>(nodeB)]);
}

inline double exact_closeness(const RootedEvoTree& t, int leafX, int leafY) {
    return exact_closeness_nodes(t, t.leaf_node[static_cast<std::size_t>(leafX)],
                                 t.leaf_node[static_cast<std::size_t>(leafY)]);
}

// Noise-free pairwise matrix; entries are the exact model closenesses, so
// derived distances are additive along paths.
inline DistanceMatrix exact_distance_matrix(const RootedEvoTree& t) {
    const int n = t.leaf_count();
    std::vector<double> values(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 1.0);
    for (int i = 0; i < n; ++i) {
        const std::vector<double> dist =
            detail::log_distances_from(t, t.leaf_node[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] =
                std::exp(-dist[static_cast<std::size_t>(t.leaf_node[static_cast<std::size_t>(j)])]);
        }
    }
    // Derived symmetrically from the same path sums; enforce exact symmetry.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            values[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] =
                values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
    return DistanceMatrix::from_closeness(t.leaf_names, std::move(values));
}

}  // namespace fasthgt
