#pragma once

#include <string>
#include <vector>

#include "fasthgt/errors.hpp"
#include "fasthgt/model.hpp"

namespace fasthgt {

// Rooted binary model tree: n leaves, n-1 internal nodes including the root
// (root has exactly two children, every other internal node as well). Every
// non-root node carries the mutation probability of the edge to its parent.
struct RootedEvoTree {
    struct Node {
        int parent = -1;
        int left = -1;
        int right = -1;
        int leaf = -1;   // leaf index in [0, n), or -1 for internal nodes
        double p = 0.0;  // mutation probability on the edge to the parent
    };

    std::vector<Node> nodes;
    int root = -1;
    EvoModel model;
    std::vector<std::string> leaf_names;  // by leaf index
    std::vector<int> leaf_node;           // leaf index -> node id

    int leaf_count() const { return static_cast<int>(leaf_names.size()); }
    int node_count() const { return static_cast<int>(nodes.size()); }
    bool is_leaf(int v) const { return nodes[v].leaf >= 0; }

    int add_internal(int parent, double p = 0.0) {
        const int id = node_count();
        nodes.push_back(Node{parent, -1, -1, -1, p});
        if (parent >= 0) attach_child(parent, id);
        return id;
    }

    int add_leaf(int parent, int leafIndex, double p, const std::string& name) {
        const int id = node_count();
        nodes.push_back(Node{parent, -1, -1, leafIndex, p});
        if (parent >= 0) attach_child(parent, id);
        if (leafIndex >= static_cast<int>(leaf_names.size())) {
            leaf_names.resize(static_cast<std::size_t>(leafIndex) + 1);
            leaf_node.resize(static_cast<std::size_t>(leafIndex) + 1, -1);
        }
        leaf_names[static_cast<std::size_t>(leafIndex)] = name;
        leaf_node[static_cast<std::size_t>(leafIndex)] = id;
        return id;
    }

    // Nodes in parent-before-child order.
    std::vector<int> preorder() const {
        std::vector<int> order;
        order.reserve(nodes.size());
        std::vector<int> stack{root};
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            order.push_back(v);
            if (nodes[v].right >= 0) stack.push_back(nodes[v].right);
            if (nodes[v].left >= 0) stack.push_back(nodes[v].left);
        }
        return order;
    }

    // Structural checks; with checkProbs also enforces f <= p_e <= g.
    void validate(bool checkProbs = true) const {
        const int n = leaf_count();
        if (n < 2) throw ValidationError("rooted tree needs at least 2 leaves");
        if (root < 0 || root >= node_count()) throw ValidationError("missing root");
        if (nodes[root].parent != -1) throw ValidationError("root must not have a parent");
        int leaves = 0, internals = 0;
        for (int v = 0; v < node_count(); ++v) {
            const Node& nd = nodes[v];
            const bool hasL = nd.left >= 0, hasR = nd.right >= 0;
            if (hasL != hasR) throw ValidationError("internal nodes must have exactly 2 children");
            if (nd.leaf >= 0) {
                if (hasL) throw ValidationError("leaf node with children");
                if (nd.leaf >= n || leaf_node[static_cast<std::size_t>(nd.leaf)] != v)
                    throw ValidationError("leaf index mapping broken");
                ++leaves;
            } else {
                if (!hasL) throw ValidationError("internal node without children");
                ++internals;
            }
            if (v != root) {
                const Node& par = nodes[nd.parent];
                if (par.left != v && par.right != v) throw ValidationError("parent link broken");
                if (checkProbs && !(nd.p >= model.f && nd.p <= model.g))
                    throw ValidationError("edge mutation probability outside [f, g]");
            }
        }
        if (leaves != n) throw ValidationError("leaf count mismatch");
        if (internals != n - 1) throw ValidationError("rooted binary tree must have n-1 internal nodes");
        for (int i = 0; i < n; ++i) {
            if (leaf_names[static_cast<std::size_t>(i)].empty())
                throw ValidationError("leaf names must be non-empty");
            for (int j = i + 1; j < n; ++j)
                if (leaf_names[static_cast<std::size_t>(i)] == leaf_names[static_cast<std::size_t>(j)])
                    throw ValidationError("duplicate leaf name: " + leaf_names[static_cast<std::size_t>(i)]);
        }
        if (checkProbs) model.validate();
    }

  private:
    void attach_child(int parent, int child) {
        Node& par = nodes[parent];
        if (par.left < 0)
            par.left = child;
        else if (par.right < 0)
            par.right = child;
        else
            throw ValidationError("node already has two children");
    }
};

}  // namespace fasthgt
