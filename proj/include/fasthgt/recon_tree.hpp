#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fasthgt/errors.hpp"
#include "fasthgt/topology.hpp"

namespace fasthgt {

// Tree under construction: unrooted, grown by splitting one edge per
// iteration. Nodes have degree <= 3; every internal node records the leaf
// triplet that defined it, every leaf's defining set is itself. Edges are
// slots with an `alive` flag so that candidate tuples can reference them by
// stable id; a split retires one slot and adds three.
class ReconTree {
  public:
    struct Node {
        int leaf = -1;                       // leaf id, or -1 for internal
        std::array<int, 3> def{-1, -1, -1};  // defining leaf ids
        std::array<int, 3> edges{-1, -1, -1};
        int degree = 0;
    };

    struct Edge {
        int a = -1;
        int b = -1;
        double length = 0.0;
        bool alive = false;
    };

    explicit ReconTree(int leafCount) : leaf_node_(static_cast<std::size_t>(leafCount), -1) {}

    int leaf_capacity() const { return static_cast<int>(leaf_node_.size()); }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    int alive_edge_count() const { return alive_edges_; }
    int inserted_leaf_count() const { return inserted_leaves_; }
    int edge_slot_count() const { return static_cast<int>(edges_.size()); }

    const Node& node(int v) const { return nodes_[static_cast<std::size_t>(v)]; }
    const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
    bool leaf_in_tree(int leaf) const { return leaf_node_[static_cast<std::size_t>(leaf)] >= 0; }
    int node_of_leaf(int leaf) const { return leaf_node_[static_cast<std::size_t>(leaf)]; }

    int other_end(int edgeId, int v) const {
        const Edge& e = edges_[static_cast<std::size_t>(edgeId)];
        return e.a == v ? e.b : e.a;
    }

    bool def_contains(int v, int leaf) const {
        const auto& d = nodes_[static_cast<std::size_t>(v)].def;
        return d[0] == leaf || d[1] == leaf || d[2] == leaf;
    }

    int def_size(int v) const { return nodes_[static_cast<std::size_t>(v)].leaf >= 0 ? 1 : 3; }

    // Initial shape: star on leaves a, b, c around a fresh center whose
    // defining triplet is (a, b, c). Returns the center node.
    int make_star(int a, int b, int c, double da, double db, double dc) {
        if (node_count() != 0) throw std::logic_error("star must be built on an empty tree");
        const int center = add_internal(a, b, c);
        add_edge(add_leaf(a), center, da);
        add_edge(add_leaf(b), center, db);
        add_edge(add_leaf(c), center, dc);
        return center;
    }

    struct SplitEdges {
        int node = -1;     // new internal node
        int toA = -1;      // new edge (old a endpoint, node)
        int toB = -1;      // new edge (old b endpoint, node)
        int pendant = -1;  // new edge (new leaf, node)
    };

    // Replaces edge (P1, P2) with P1-P and P2-P around a fresh internal node
    // P defined by (leaf, x, y), and attaches the new leaf to P.
    SplitEdges split(int edgeId, int leaf, int x, int y, double toA, double toB, double dLeaf) {
        Edge& old = edges_[static_cast<std::size_t>(edgeId)];
        if (!old.alive) throw std::logic_error("splitting a retired edge");
        const int p1 = old.a, p2 = old.b;
        retire_edge(edgeId);
        SplitEdges out;
        out.node = add_internal(leaf, x, y);
        out.toA = add_edge(p1, out.node, toA);
        out.toB = add_edge(p2, out.node, toB);
        out.pendant = add_edge(add_leaf(leaf), out.node, dLeaf);
        return out;
    }

    // Which side of `edgeId` each inserted leaf lies on (true = the side of
    // endpoint a). One traversal; entries of uninserted leaves are false.
    std::vector<std::uint8_t> leaf_sides(int edgeId) const {
        std::vector<std::uint8_t> onASide(leaf_node_.size(), 0);
        const Edge& e = edges_[static_cast<std::size_t>(edgeId)];
        if (!e.alive) throw std::logic_error("side query on a retired edge");
        std::vector<int> stack{e.a};
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(node_count()), 0);
        seen[static_cast<std::size_t>(e.a)] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            const Node& nd = nodes_[static_cast<std::size_t>(v)];
            if (nd.leaf >= 0) onASide[static_cast<std::size_t>(nd.leaf)] = 1;
            for (int i = 0; i < nd.degree; ++i) {
                const int eid = nd.edges[static_cast<std::size_t>(i)];
                if (eid == edgeId) continue;
                const int w = other_end(eid, v);
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    stack.push_back(w);
                }
            }
        }
        return onASide;
    }

    // Finished-tree view; lengths are copied as-is. Requires every leaf id
    // to be inserted, otherwise the leaf numbering would have holes.
    WeightedTopology to_topology(const std::vector<std::string>& leafNames) const {
        if (inserted_leaves_ != leaf_capacity())
            throw std::logic_error("conversion requires a fully grown tree");
        WeightedTopology out;
        std::vector<int> map(static_cast<std::size_t>(node_count()), -1);
        for (int v = 0; v < node_count(); ++v) {
            const Node& nd = nodes_[static_cast<std::size_t>(v)];
            map[static_cast<std::size_t>(v)] =
                out.add_node(nd.leaf, nd.leaf >= 0 ? leafNames[static_cast<std::size_t>(nd.leaf)] : std::string{});
        }
        for (const Edge& e : edges_) {
            if (!e.alive) continue;
            out.add_edge(map[static_cast<std::size_t>(e.a)], map[static_cast<std::size_t>(e.b)], e.length);
        }
        return out;
    }

  private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<int> leaf_node_;
    int alive_edges_ = 0;
    int inserted_leaves_ = 0;

    int add_leaf(int leaf) {
        if (leaf_node_[static_cast<std::size_t>(leaf)] >= 0)
            throw std::logic_error("leaf already inserted");
        const int id = node_count();
        Node nd;
        nd.leaf = leaf;
        nd.def = {leaf, -1, -1};
        nodes_.push_back(nd);
        leaf_node_[static_cast<std::size_t>(leaf)] = id;
        ++inserted_leaves_;
        return id;
    }

    int add_internal(int a, int b, int c) {
        const int id = node_count();
        Node nd;
        nd.def = {a, b, c};
        nodes_.push_back(nd);
        return id;
    }

    int add_edge(int a, int b, double length) {
        const int id = static_cast<int>(edges_.size());
        edges_.push_back(Edge{a, b, length, true});
        link(a, id);
        link(b, id);
        ++alive_edges_;
        return id;
    }

    void retire_edge(int edgeId) {
        Edge& e = edges_[static_cast<std::size_t>(edgeId)];
        e.alive = false;
        unlink(e.a, edgeId);
        unlink(e.b, edgeId);
        --alive_edges_;
    }

    void link(int v, int edgeId) {
        Node& nd = nodes_[static_cast<std::size_t>(v)];
        if (nd.degree == 3) throw std::logic_error("node degree would exceed 3");
        nd.edges[static_cast<std::size_t>(nd.degree++)] = edgeId;
    }

    void unlink(int v, int edgeId) {
        Node& nd = nodes_[static_cast<std::size_t>(v)];
        for (int i = 0; i < nd.degree; ++i) {
            if (nd.edges[static_cast<std::size_t>(i)] == edgeId) {
                nd.edges[static_cast<std::size_t>(i)] = nd.edges[static_cast<std::size_t>(nd.degree - 1)];
                --nd.degree;
                return;
            }
        }
        throw std::logic_error("edge not present at node");
    }
};

}  // namespace fasthgt
