#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fasthgt/errors.hpp"
#include "fasthgt/model.hpp"
#include "fasthgt/rng.hpp"
#include "fasthgt/rooted_tree.hpp"

namespace fasthgt {

enum class TreeShape { Uniform, YuleHarding, Caterpillar, Balanced };

inline TreeShape tree_shape_from_string(const std::string& s) {
    if (s == "uniform") return TreeShape::Uniform;
    if (s == "yule" || s == "yule_harding" || s == "yule-harding") return TreeShape::YuleHarding;
    if (s == "caterpillar") return TreeShape::Caterpillar;
    if (s == "balanced") return TreeShape::Balanced;
    throw ValidationError("unknown tree shape '" + s + "'");
}

inline std::string to_string(TreeShape s) {
    switch (s) {
        case TreeShape::Uniform: return "uniform";
        case TreeShape::YuleHarding: return "yule_harding";
        case TreeShape::Caterpillar: return "caterpillar";
        case TreeShape::Balanced: return "balanced";
    }
    return "?";
}

// Draws one mutation probability for an edge; must land inside [f, g].
using EdgeProbSampler = std::function<double(std::mt19937_64&)>;

namespace detail {

inline std::string default_leaf_name(int i) { return "L" + std::to_string(i); }

// Splits the edge above `node` with a fresh internal node and hangs the new
// leaf off it; edge probabilities are assigned later.
inline void split_above(RootedEvoTree& t, int node, int leafIndex) {
    const int parent = t.nodes[static_cast<std::size_t>(node)].parent;
    const int mid = t.add_internal(-1);
    t.nodes[static_cast<std::size_t>(mid)].parent = parent;
    if (parent >= 0) {
        auto& pn = t.nodes[static_cast<std::size_t>(parent)];
        (pn.left == node ? pn.left : pn.right) = mid;
    }
    t.nodes[static_cast<std::size_t>(node)].parent = mid;
    t.nodes[static_cast<std::size_t>(mid)].left = node;
    t.add_leaf(mid, leafIndex, 0.0, default_leaf_name(leafIndex));
    if (parent < 0) t.root = mid;
}

inline RootedEvoTree grow_uniform(int n, std::mt19937_64& rng) {
    RootedEvoTree t;
    t.root = t.add_internal(-1);
    t.add_leaf(t.root, 0, 0.0, default_leaf_name(0));
    t.add_leaf(t.root, 1, 0.0, default_leaf_name(1));
    for (int k = 2; k < n; ++k) {
        // A tree with k leaves offers 2k-2 edges plus the slot above the
        // root; choosing uniformly yields the uniform labeled distribution.
        const std::uint64_t pick = uniform_index(rng, 2 * static_cast<std::uint64_t>(k) - 1);
        if (pick == 2 * static_cast<std::uint64_t>(k) - 2) {
            const int old = t.root;
            const int mid = t.add_internal(-1);
            t.nodes[static_cast<std::size_t>(old)].parent = mid;
            t.nodes[static_cast<std::size_t>(mid)].left = old;
            t.root = mid;
            t.add_leaf(mid, k, 0.0, default_leaf_name(k));
        } else {
            // Non-root nodes in creation order enumerate the edges.
            std::vector<int> below;
            below.reserve(static_cast<std::size_t>(2 * k - 2));
            for (int v = 0; v < t.node_count(); ++v)
                if (v != t.root) below.push_back(v);
            split_above(t, below[static_cast<std::size_t>(pick)], k);
        }
    }
    return t;
}

inline RootedEvoTree grow_yule_harding(int n, std::mt19937_64& rng) {
    RootedEvoTree t;
    t.root = t.add_internal(-1);
    t.add_leaf(t.root, 0, 0.0, default_leaf_name(0));
    t.add_leaf(t.root, 1, 0.0, default_leaf_name(1));
    for (int k = 2; k < n; ++k) {
        std::vector<int> pendant;
        pendant.reserve(static_cast<std::size_t>(k));
        for (int v = 0; v < t.node_count(); ++v)
            if (t.is_leaf(v)) pendant.push_back(v);
        split_above(t, pendant[uniform_index(rng, pendant.size())], k);
    }
    return t;
}

inline RootedEvoTree grow_caterpillar(int n) {
    RootedEvoTree t;
    t.root = t.add_internal(-1);
    int spine = t.root;
    for (int i = 0; i <= n - 3; ++i) {
        t.add_leaf(spine, i, 0.0, default_leaf_name(i));
        spine = t.add_internal(spine);
    }
    t.add_leaf(spine, n - 2, 0.0, default_leaf_name(n - 2));
    t.add_leaf(spine, n - 1, 0.0, default_leaf_name(n - 1));
    return t;
}

inline RootedEvoTree grow_balanced(int n) {
    RootedEvoTree t;
    // Recursive halving over the leaf range [lo, hi).
    std::function<int(int, int, int)> build = [&](int lo, int hi, int parent) {
        if (hi - lo == 1) return t.add_leaf(parent, lo, 0.0, default_leaf_name(lo));
        const int mid = lo + (hi - lo + 1) / 2;
        const int v = t.add_internal(parent);
        build(lo, mid, v);
        build(mid, hi, v);
        return v;
    };
    t.root = build(0, n, -1);
    return t;
}

}  // namespace detail

// Random rooted model tree: shape per `shape`, then one mutation probability
// per edge drawn with `sampler` (uniform on [f, g] by default) in node-id
// order. Deterministic for a given seed.
inline RootedEvoTree gen_tree(int n, TreeShape shape, const EvoModel& model, std::uint64_t seed,
                              const EdgeProbSampler& sampler = {}) {
    if (n < 3) throw ValidationError("tree generation needs n >= 3 leaves");
    model.validate();
    std::mt19937_64 shapeRng = make_rng(seed, /*stream=*/1);
    RootedEvoTree t;
    switch (shape) {
        case TreeShape::Uniform: t = detail::grow_uniform(n, shapeRng); break;
        case TreeShape::YuleHarding: t = detail::grow_yule_harding(n, shapeRng); break;
        case TreeShape::Caterpillar: t = detail::grow_caterpillar(n); break;
        case TreeShape::Balanced: t = detail::grow_balanced(n); break;
    }
    t.model = model;
    std::mt19937_64 probRng = make_rng(seed, /*stream=*/2);
    for (int v = 0; v < t.node_count(); ++v) {
        if (v == t.root) continue;
        const double p = sampler ? sampler(probRng) : uniform_real(probRng, model.f, model.g);
        if (!(p >= model.f && p <= model.g))
            throw ValidationError("edge probability sampler produced a value outside [f, g]");
        t.nodes[static_cast<std::size_t>(v)].p = p;
    }
    t.validate(true);
    return t;
}

}  // namespace fasthgt
