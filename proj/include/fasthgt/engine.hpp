#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fasthgt/distance_matrix.hpp"
#include "fasthgt/errors.hpp"
#include "fasthgt/recon_tree.hpp"
#include "fasthgt/triplet.hpp"

namespace fasthgt {

// Candidate insertion of leaf `n` into `edge`, discovered from the triplet
// (n, x, y); stores the split position so the insertion needs no recompute.
// An empty slot ranks as closeness 0.
struct SplittingTuple {
    int edge = -1;
    int n = -1;
    int x = -1;
    int y = -1;
    double toA = 0.0;      // distance from the edge's a endpoint to the split point
    double toB = 0.0;      // distance from the edge's b endpoint to the split point
    double pendant = 0.0;  // distance from the split point to the new leaf
    double closeness = 0.0;
    bool empty() const { return edge < 0; }
};

struct SplitResult {
    enum class Kind { TooClose, Outside, Split };
    Kind kind = Kind::TooClose;
    double toA = 0.0;
    double toB = 0.0;
    double pendant = 0.0;
};

struct RunStats {
    std::uint64_t splitEdgeCalls = 0;
    std::uint64_t candidateUpdates = 0;
    int iterations = 0;
    int peakCandidates = 0;
    int peakNodes = 0;
};

struct FastHgtFailure {
    enum class Stage {
        NoPositiveSeedTriplet,  // no usable starting triplet around the anchor leaf
        NoSplittingCandidates,  // every candidate slot empty before the tree was complete
    };
    Stage stage = Stage::NoPositiveSeedTriplet;
    int treeLeaves = 0;  // leaves placed when the run stalled
    int iteration = 0;   // completed insertion iterations
    std::string message;
};

struct FastHgtOptions {
    double deltaMin = 0.0;
    bool checkInvariants = false;
    // Observes every split evaluation: (tree, edge id, triplet, outcome).
    std::function<void(const ReconTree&, int, const Triplet&, const SplitResult&)> splitHook;
};

struct FastHgtResult {
    std::optional<ReconTree> tree;
    std::optional<FastHgtFailure> failure;
    RunStats stats;
    bool ok() const { return tree.has_value(); }
};

// Estimated distance from leaf `x` to node `v` of the tree: 0 when v is the
// leaf itself, otherwise the center leg of v's defining triplet measured
// from x. Requires x to belong to def(v).
inline double est_node_leg(const ReconTree& t, int x, int v, const DistanceMatrix& d) {
    const ReconTree::Node& nd = t.node(v);
    if (!t.def_contains(v, x)) throw std::logic_error("leaf does not define the node");
    if (nd.leaf >= 0) return 0.0;
    int o1 = -1, o2 = -1;
    for (const int l : nd.def)
        if (l != x) (o1 < 0 ? o1 : o2) = l;
    return center_leg(d.distance(x, o1), d.distance(x, o2), d.distance(o1, o2));
}

// Leaf partition induced by cutting `edgeId`; true = side of endpoint a.
inline std::vector<std::uint8_t> edge_side_leaves(const ReconTree& t, int edgeId) {
    return t.leaf_sides(edgeId);
}

namespace detail {

// Everything about an (edge, x, y) combination that does not depend on the
// outside leaf: reference legs to both endpoints, measurement orientation,
// and the x-y distance.
struct PairContext {
    int x = -1;
    int y = -1;
    int x2 = -1;       // reference leaf used at endpoint b (x if x defines b, else y)
    double dxy = 0.0;
    double cxy = 0.0;
    double leg1 = 0.0;  // estimated distance from x to endpoint a
    double leg2 = 0.0;  // estimated distance from x2 to endpoint b
    bool flip1 = false; // x lies across the edge from endpoint a
    bool flip2 = false; // x2 lies across the edge from endpoint b
    double edgeLen = 0.0;
};

inline PairContext make_pair_context(const ReconTree& t, int edgeId, int x, int y,
                                     const DistanceMatrix& d,
                                     const std::vector<std::uint8_t>& onASide) {
    const ReconTree::Edge& e = t.edge(edgeId);
    PairContext ctx;
    ctx.x = x;
    ctx.y = y;
    ctx.x2 = t.def_contains(e.b, x) ? x : y;
    ctx.cxy = d.closeness(x, y);
    ctx.dxy = d.distance(x, y);
    ctx.leg1 = est_node_leg(t, x, e.a, d);
    ctx.leg2 = est_node_leg(t, ctx.x2, e.b, d);
    ctx.flip1 = !onASide[static_cast<std::size_t>(x)];
    ctx.flip2 = onASide[static_cast<std::size_t>(ctx.x2)] != 0;
    ctx.edgeLen = e.length;
    return ctx;
}

// One split evaluation for outside leaf m against a prepared pair context.
// cmx, cmy are the (positive) closenesses of m to x and y.
inline SplitResult eval_split(const PairContext& ctx, double cmx, double cmy, double deltaMin) {
    const double dmx = -std::log(cmx);
    const double dmy = -std::log(cmy);
    const double dxp = (dmx + ctx.dxy - dmy) / 2.0;
    const double dyp = (dmy + ctx.dxy - dmx) / 2.0;
    const double dmp = (dmx + dmy - ctx.dxy) / 2.0;
    double d1 = dxp - ctx.leg1;
    double d2 = (ctx.x2 == ctx.x ? dxp : dyp) - ctx.leg2;
    SplitResult out;
    if (std::abs(d1) < deltaMin || std::abs(d2) < deltaMin) {
        out.kind = SplitResult::Kind::TooClose;
        return out;
    }
    if (ctx.flip1) d1 = -d1;
    if (ctx.flip2) d2 = -d2;
    out.toA = (d1 + ctx.edgeLen - d2) / 2.0;
    out.toB = (d2 + ctx.edgeLen - d1) / 2.0;
    if (out.toA >= ctx.edgeLen || out.toB >= ctx.edgeLen) {
        out.kind = SplitResult::Kind::Outside;
        return out;
    }
    out.kind = SplitResult::Kind::Split;
    out.pendant = dmp;
    return out;
}

}  // namespace detail

// Decides whether the triplet (n, x, y) places its meeting point strictly
// inside `edgeId`. Preconditions (contract, not data errors): n outside the
// tree, x in def(a), y in def(b), all three pairwise closenesses positive,
// and the edge on the x-y path.
inline SplitResult split_edge(const ReconTree& t, int edgeId, const Triplet& nxy,
                              const DistanceMatrix& d, double deltaMin, RunStats* stats = nullptr) {
    const ReconTree::Edge& e = t.edge(edgeId);
    if (!e.alive) throw std::logic_error("split_edge on a retired edge");
    if (t.leaf_in_tree(nxy.x) == false || t.leaf_in_tree(nxy.y) == false)
        throw std::logic_error("split_edge triplet legs must be inserted leaves");
    if (t.leaf_in_tree(nxy.z)) throw std::logic_error("split_edge leaf is already in the tree");
    if (!t.def_contains(e.a, nxy.x) || !t.def_contains(e.b, nxy.y))
        throw std::logic_error("split_edge triplet does not define the edge endpoints");
    const double cmx = d.closeness(nxy.z, nxy.x);
    const double cmy = d.closeness(nxy.z, nxy.y);
    if (!(cmx > 0.0 && cmy > 0.0 && d.closeness(nxy.x, nxy.y) > 0.0))
        throw std::logic_error("split_edge requires a positive triplet");
    const std::vector<std::uint8_t> sides = t.leaf_sides(edgeId);
    if (sides[static_cast<std::size_t>(nxy.x)] == sides[static_cast<std::size_t>(nxy.y)])
        throw std::logic_error("split_edge edge must lie on the x-y path");
    if (stats) ++stats->splitEdgeCalls;
    return detail::eval_split(detail::make_pair_context(t, edgeId, nxy.x, nxy.y, d, sides), cmx,
                              cmy, deltaMin);
}

// Refreshes the candidate array against one edge: every outside leaf is
// tried with every (x, y) drawn from the defining sets of the two endpoints
// (at most 9 combinations), and a successful split replaces a leaf's stored
// tuple only when its triplet closeness is strictly greater.
inline void update_candidates(const ReconTree& t, int edgeId, const DistanceMatrix& d,
                              double deltaMin, std::vector<SplittingTuple>& s,
                              const std::vector<int>& outside, RunStats& stats,
                              int& liveCandidates, const FastHgtOptions& opts) {
    ++stats.candidateUpdates;
    const std::vector<std::uint8_t> sides = t.leaf_sides(edgeId);
    const ReconTree::Edge& e = t.edge(edgeId);

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < t.def_size(e.a); ++i)
        for (int j = 0; j < t.def_size(e.b); ++j) {
            const int x = t.node(e.a).def[static_cast<std::size_t>(i)];
            const int y = t.node(e.b).def[static_cast<std::size_t>(j)];
            if (x == y) continue;
            if (sides[static_cast<std::size_t>(x)] == sides[static_cast<std::size_t>(y)]) continue;
            if (!d.finite(x, y)) continue;
            pairs.emplace_back(x, y);
        }
    std::sort(pairs.begin(), pairs.end());  // ties resolve to the smallest (x, y)

    std::vector<detail::PairContext> contexts;
    contexts.reserve(pairs.size());
    for (const auto& [x, y] : pairs)
        contexts.push_back(detail::make_pair_context(t, edgeId, x, y, d, sides));

    for (const int m : outside) {
        for (const detail::PairContext& ctx : contexts) {
            const double cmx = d.closeness(m, ctx.x);
            const double cmy = d.closeness(m, ctx.y);
            if (!(cmx > 0.0 && cmy > 0.0)) continue;  // triplet must be positive
            ++stats.splitEdgeCalls;
            const SplitResult r = detail::eval_split(ctx, cmx, cmy, deltaMin);
            if (opts.splitHook) opts.splitHook(t, edgeId, Triplet{ctx.x, ctx.y, m}, r);
            if (r.kind != SplitResult::Kind::Split) continue;
            if (opts.checkInvariants && std::abs(r.toA + r.toB - ctx.edgeLen) > 1e-12)
                throw std::logic_error("split positions must add up to the edge length");
            const double ch = triplet_closeness(cmx, cmy, ctx.cxy);
            SplittingTuple& slot = s[static_cast<std::size_t>(m)];
            if (ch > slot.closeness) {
                if (slot.empty()) ++liveCandidates;
                slot = SplittingTuple{edgeId, m, ctx.x, ctx.y, r.toA, r.toB, r.pendant, ch};
                stats.peakCandidates = std::max(stats.peakCandidates, liveCandidates);
            }
        }
    }
}

// Best positive triplet anchored at leaf `a`; ties go to the smallest (b, c).
inline std::optional<Triplet> init_triplet(const DistanceMatrix& d, int a) {
    const int n = d.size();
    Triplet best;
    double bestCloseness = 0.0;
    for (int b = 0; b < n; ++b) {
        if (b == a) continue;
        for (int c = b + 1; c < n; ++c) {
            if (c == a || !is_positive_triplet(d, a, b, c)) continue;
            const double ch = triplet_closeness(d, a, b, c);
            if (ch > bestCloseness) {
                bestCloseness = ch;
                best = Triplet{a, b, c};
            }
        }
    }
    if (bestCloseness <= 0.0) return std::nullopt;
    return best;
}

namespace detail {

inline void check_state_invariants(const ReconTree& t, const std::vector<SplittingTuple>& s) {
    for (int eid = 0; eid < t.edge_slot_count(); ++eid) {
        const ReconTree::Edge& e = t.edge(eid);
        if (!e.alive) continue;
        bool shared = false;
        for (int i = 0; i < t.def_size(e.a) && !shared; ++i)
            shared = t.def_contains(e.b, t.node(e.a).def[static_cast<std::size_t>(i)]);
        if (!shared) throw std::logic_error("edge endpoints must share a defining leaf");
    }
    for (const SplittingTuple& tuple : s) {
        if (tuple.empty()) continue;
        if (!t.edge(tuple.edge).alive) throw std::logic_error("candidate references a retired edge");
        if (t.leaf_in_tree(tuple.n)) throw std::logic_error("candidate leaf already inserted");
        if (!t.leaf_in_tree(tuple.x) || !t.leaf_in_tree(tuple.y))
            throw std::logic_error("candidate legs must be inserted leaves");
    }
}

}  // namespace detail

// Greedy tree growth: seed with the tightest triplet around leaf 0, then
// repeatedly insert the outside leaf whose best splitting tuple has maximal
// triplet closeness. O(n^2) split evaluations, O(n) working state.
inline FastHgtResult fast_hgt(const DistanceMatrix& d, const FastHgtOptions& opts) {
    const int n = d.size();
    if (n < 3) throw ValidationError("reconstruction needs at least 3 taxa");
    if (!(opts.deltaMin > 0.0)) throw ValidationError("delta_min must be positive");
    FastHgtResult res;

    const std::optional<Triplet> seed = init_triplet(d, 0);
    if (!seed) {
        res.failure = FastHgtFailure{FastHgtFailure::Stage::NoPositiveSeedTriplet, 0, 0,
                                     "no positive triplet contains the anchor leaf"};
        return res;
    }
    const auto [a, b, c] = *seed;
    const double dab = d.distance(a, b), dac = d.distance(a, c), dbc = d.distance(b, c);
    ReconTree tree(n);
    tree.make_star(a, b, c, center_leg(dab, dac, dbc), center_leg(dab, dbc, dac),
                   center_leg(dac, dbc, dab));
    res.stats.peakNodes = tree.node_count();

    std::vector<SplittingTuple> s(static_cast<std::size_t>(n));
    int liveCandidates = 0;
    std::vector<int> outside;
    outside.reserve(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m)
        if (!tree.leaf_in_tree(m)) outside.push_back(m);

    for (int eid = 0; eid < tree.edge_slot_count(); ++eid)
        update_candidates(tree, eid, d, opts.deltaMin, s, outside, res.stats, liveCandidates, opts);

    while (tree.inserted_leaf_count() < n) {
        int best = -1;
        for (int m = 0; m < n; ++m)
            if (!s[static_cast<std::size_t>(m)].empty() &&
                (best < 0 || s[static_cast<std::size_t>(m)].closeness > s[static_cast<std::size_t>(best)].closeness))
                best = m;
        if (best < 0) {
            res.failure = FastHgtFailure{
                FastHgtFailure::Stage::NoSplittingCandidates, tree.inserted_leaf_count(),
                res.stats.iterations,
                "no splitting tuple for any of the remaining " +
                    std::to_string(n - tree.inserted_leaf_count()) + " leaves"};
            return res;
        }
        const SplittingTuple chosen = s[static_cast<std::size_t>(best)];
        const ReconTree::SplitEdges grown =
            tree.split(chosen.edge, best, chosen.x, chosen.y, chosen.toA, chosen.toB, chosen.pendant);
        outside.erase(std::find(outside.begin(), outside.end(), best));
        for (SplittingTuple& tuple : s) {
            if (!tuple.empty() && tuple.edge == chosen.edge) {
                tuple = SplittingTuple{};
                --liveCandidates;
            }
        }
        update_candidates(tree, grown.toA, d, opts.deltaMin, s, outside, res.stats, liveCandidates, opts);
        update_candidates(tree, grown.toB, d, opts.deltaMin, s, outside, res.stats, liveCandidates, opts);
        update_candidates(tree, grown.pendant, d, opts.deltaMin, s, outside, res.stats, liveCandidates, opts);
        ++res.stats.iterations;
        res.stats.peakNodes = std::max(res.stats.peakNodes, tree.node_count());
        if (opts.checkInvariants) detail::check_state_invariants(tree, s);
    }
    res.tree = std::move(tree);
    return res;
}

}  // namespace fasthgt
