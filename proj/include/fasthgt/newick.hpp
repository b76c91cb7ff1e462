#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fasthgt/errors.hpp"
#include "fasthgt/rooted_tree.hpp"
#include "fasthgt/topology.hpp"

namespace fasthgt {

// Newick conventions used throughout:
//  - rooted model trees serialize with a bifurcating outer node and edge
//    annotations holding mutation probabilities: [&metric=prob,m=4](...);
//  - unrooted topologies serialize with a trifurcating outer node and edge
//    annotations holding distances: [&metric=dist](...);
//  - without a metric comment, outer arity decides (2 = prob, 3 = dist).
// Leaf indices are assigned by first appearance in the text; taxa are
// matched by name across trees.

using ParsedTree = std::variant<RootedEvoTree, WeightedTopology>;

namespace detail {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct NewickNode {
    std::string name;
    double length = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> children;
};

class NewickParser {
  public:
    explicit NewickParser(std::string_view text) : text_(text) {}

    // Parses one tree; fills the AST and the first bracketed comment's keys.
    int parse() {
        skip_space();
        const int root = parse_subtree();
        skip_space();
        expect(';');
        return root;
    }

    const std::vector<NewickNode>& ast() const { return nodes_; }
    const std::string& metric() const { return metric_; }
    int symbol_count() const { return m_; }

  private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::vector<NewickNode> nodes_;
    std::string metric_;
    int m_ = 0;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_space() {
        for (;;) {
            while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                           text_[pos_] == '\n' || text_[pos_] == '\r'))
                ++pos_;
            if (peek() == '[')
                read_comment();
            else
                break;
        }
    }

    void read_comment() {
        const std::size_t start = ++pos_;
        int depth = 1;
        while (pos_ < text_.size() && depth > 0) {
            if (text_[pos_] == '[') ++depth;
            if (text_[pos_] == ']') --depth;
            ++pos_;
        }
        if (depth != 0) fail("unterminated comment");
        parse_metadata(text_.substr(start, pos_ - 1 - start));
    }

    // Recognizes "&key=value,key=value"; unknown keys are ignored.
    void parse_metadata(std::string_view body) {
        if (body.empty() || body[0] != '&') return;
        body.remove_prefix(1);
        while (!body.empty()) {
            const std::size_t comma = body.find(',');
            const std::string_view item = body.substr(0, comma);
            const std::size_t eq = item.find('=');
            if (eq != std::string_view::npos) {
                const std::string_view key = item.substr(0, eq);
                const std::string_view val = item.substr(eq + 1);
                if (key == "metric" && metric_.empty()) metric_ = std::string(val);
                if (key == "m" && m_ == 0) {
                    int v = 0;
                    std::from_chars(val.data(), val.data() + val.size(), v);
                    m_ = v;
                }
            }
            if (comma == std::string_view::npos) break;
            body.remove_prefix(comma + 1);
        }
    }

    int parse_subtree() {
        skip_space();
        NewickNode node;
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        if (peek() == '(') {
            ++pos_;
            // the recursive call can reallocate nodes_, so take the child id
            // before touching the parent's slot
            const int first = parse_subtree();
            nodes_[static_cast<std::size_t>(id)].children.push_back(first);
            skip_space();
            while (peek() == ',') {
                ++pos_;
                const int next = parse_subtree();
                nodes_[static_cast<std::size_t>(id)].children.push_back(next);
                skip_space();
            }
            expect(')');
            skip_space();
            nodes_[static_cast<std::size_t>(id)].name = parse_label();
        } else {
            nodes_[static_cast<std::size_t>(id)].name = parse_label();
            if (nodes_[static_cast<std::size_t>(id)].name.empty()) fail("expected leaf label");
        }
        skip_space();
        if (peek() == ':') {
            ++pos_;
            skip_space();
            nodes_[static_cast<std::size_t>(id)].length = parse_number();
        }
        return id;
    }

    std::string parse_label() {
        const std::size_t start = pos_;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' || c == '[' ||
                c == ']' || c == ' ' || c == '\t' || c == '\n' || c == '\r')
                break;
            ++pos_;
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    double parse_number() {
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
        if (ec != std::errc{}) fail("expected a number");
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return value;
    }
};

inline int leaf_index_for(std::vector<std::string>& names, const std::string& name, std::size_t pos) {
    if (name.empty()) throw ParseError("leaf without a label", pos);
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) throw ParseError("duplicate leaf name: " + name, pos);
    names.push_back(name);
    return static_cast<int>(names.size()) - 1;
}

}  // namespace detail

inline RootedEvoTree rooted_from_ast(const std::vector<detail::NewickNode>& ast, int root, int m) {
    RootedEvoTree t;
    t.model.m = m;
    std::vector<std::string> seen;
    // Iterative conversion, parents first.
    std::vector<std::pair<int, int>> stack{{root, -1}};  // (ast node, tree parent)
    while (!stack.empty()) {
        const auto [a, parent] = stack.back();
        stack.pop_back();
        const auto& node = ast[static_cast<std::size_t>(a)];
        const double p = parent < 0 ? 0.0 : node.length;
        if (parent >= 0 && !(std::isfinite(p) && p >= 0.0 && p < 1.0))
            throw ValidationError("mutation probability annotation outside [0, 1): " +
                                  detail::format_double(p));
        int id;
        if (node.children.empty()) {
            id = t.add_leaf(parent, detail::leaf_index_for(seen, node.name, 0), p, node.name);
        } else {
            if (node.children.size() != 2)
                throw ValidationError("rooted model trees must be binary");
            id = t.add_internal(parent, p);
        }
        for (auto it = node.children.rbegin(); it != node.children.rend(); ++it)
            stack.push_back({*it, id});
    }
    t.root = 0;
    double lo = 1.0, hi = 0.0;
    for (int v = 0; v < t.node_count(); ++v) {
        if (v == t.root) continue;
        lo = std::min(lo, t.nodes[v].p);
        hi = std::max(hi, t.nodes[v].p);
    }
    t.model.f = lo;
    t.model.g = hi;
    t.validate(true);
    return t;
}

inline WeightedTopology topology_from_ast(const std::vector<detail::NewickNode>& ast, int root) {
    WeightedTopology t;
    std::vector<std::string> seen;
    std::vector<std::pair<int, int>> stack{{root, -1}};  // (ast node, tree parent node)
    while (!stack.empty()) {
        const auto [a, parent] = stack.back();
        stack.pop_back();
        const auto& node = ast[static_cast<std::size_t>(a)];
        int id;
        if (node.children.empty())
            id = t.add_node(detail::leaf_index_for(seen, node.name, 0), node.name);
        else
            id = t.add_node();
        if (parent >= 0) {
            if (!(std::isfinite(node.length) && node.length > 0.0))
                throw ValidationError("edge lengths must be finite and positive");
            t.add_edge(parent, id, node.length);
        }
        for (auto it = node.children.rbegin(); it != node.children.rend(); ++it)
            stack.push_back({*it, id});
    }
    t.validate(true);
    return t;
}

inline ParsedTree parse_newick(std::string_view text) {
    detail::NewickParser parser(text);
    const int root = parser.parse();
    const auto& ast = parser.ast();
    std::string metric = parser.metric();
    if (metric.empty())
        metric = ast[static_cast<std::size_t>(root)].children.size() == 2 ? "prob" : "dist";
    if (metric == "prob")
        return rooted_from_ast(ast, root, parser.symbol_count() > 0 ? parser.symbol_count() : 4);
    if (metric == "dist") return topology_from_ast(ast, root);
    throw ValidationError("unknown metric '" + metric + "' (expected dist or prob)");
}

inline std::string serialize_newick(const RootedEvoTree& t) {
    std::string out = "[&metric=prob,m=" + std::to_string(t.model.m) + "]";
    // Recursive descent with an explicit stack of (node, phase).
    struct Frame {
        int v;
        int phase;
    };
    std::vector<Frame> stack{{t.root, 0}};
    while (!stack.empty()) {
        Frame& f = stack.back();
        const auto& nd = t.nodes[f.v];
        if (nd.leaf >= 0) {
            out += t.leaf_names[static_cast<std::size_t>(nd.leaf)];
            out += ':';
            out += detail::format_double(nd.p);
            stack.pop_back();
            continue;
        }
        if (f.phase == 0) {
            out += '(';
            f.phase = 1;
            stack.push_back({nd.left, 0});
        } else if (f.phase == 1) {
            out += ',';
            f.phase = 2;
            stack.push_back({nd.right, 0});
        } else {
            out += ')';
            if (f.v != t.root) {
                out += ':';
                out += detail::format_double(nd.p);
            }
            stack.pop_back();
        }
    }
    out += ";\n";
    return out;
}

inline std::string serialize_newick(const WeightedTopology& t) {
    t.validate(false);
    // Anchor at the internal node next to leaf 0; its three subtrees give the
    // standard trifurcating representation of an unrooted tree.
    const int leaf0 = t.leaf_node[0];
    const int anchor = t.other_end(t.adj[static_cast<std::size_t>(leaf0)][0], leaf0);
    std::string out = "[&metric=dist]";
    struct Frame {
        int v;
        int fromEdge;
        std::size_t next = 0;
    };
    auto subtreeEdges = [&t](int v, int fromEdge) {
        std::vector<int> out_;
        for (int eid : t.adj[static_cast<std::size_t>(v)])
            if (eid != fromEdge) out_.push_back(eid);
        return out_;
    };
    out += '(';
    std::vector<Frame> stack{{anchor, -1, 0}};
    while (!stack.empty()) {
        Frame& f = stack.back();
        const std::vector<int> kids = subtreeEdges(f.v, f.fromEdge);
        if (t.is_leaf(f.v)) {
            out += t.leaf_names[static_cast<std::size_t>(t.node_leaf[static_cast<std::size_t>(f.v)])];
            out += ':';
            out += detail::format_double(t.edges[static_cast<std::size_t>(f.fromEdge)].length);
            stack.pop_back();
            continue;
        }
        if (f.next == 0 && f.fromEdge >= 0) out += '(';
        if (f.next < kids.size()) {
            if (f.next > 0) out += ',';
            const int eid = kids[f.next++];
            stack.push_back({t.other_end(eid, f.v), eid, 0});
        } else {
            if (f.fromEdge >= 0) {
                out += "):";
                out += detail::format_double(t.edges[static_cast<std::size_t>(f.fromEdge)].length);
            }
            stack.pop_back();
        }
    }
    out += ");\n";  // anchor's own frame emitted no parentheses
    return out;
}

}  // namespace fasthgt
