#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fasthgt/errors.hpp"
#include "fasthgt/model.hpp"
#include "fasthgt/rng.hpp"
#include "fasthgt/rooted_tree.hpp"

namespace fasthgt {

// Aligned leaf sequences over symbol ids 0..m-1, ordered by leaf index.
struct SequenceSet {
    EvoModel model;
    std::vector<std::string> names;
    std::vector<std::vector<std::uint8_t>> seqs;

    std::size_t length() const { return seqs.empty() ? 0 : seqs.front().size(); }
    int count() const { return static_cast<int>(seqs.size()); }
};

namespace detail {

// Sites are generated in fixed-size blocks; every tree node consumes its own
// substream per block (root = stream 0, edge above node v = stream v+1), so
// output is independent of evaluation order and identical for equal seeds.
constexpr std::size_t kSiteBlock = 1 << 16;

inline void mutate_block(const std::uint8_t* parent, std::uint8_t* child, std::size_t len,
                         double p, int m, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < len; ++i) {
        if (uniform01(rng) < p) {
            const auto shift = static_cast<std::uint8_t>(1 + uniform_index(rng, static_cast<std::uint64_t>(m - 1)));
            child[i] = static_cast<std::uint8_t>((parent[i] + shift) % m);
        } else {
            child[i] = parent[i];
        }
    }
}

}  // namespace detail

// Evolves `ell` i.i.d. sites down the tree. The root sequence is uniform
// i.i.d. unless `rootSeq` supplies one (then its length must equal ell).
inline SequenceSet evolve_sequences(const RootedEvoTree& t, std::size_t ell, std::uint64_t seed,
                                    const std::vector<std::uint8_t>* rootSeq = nullptr) {
    if (ell == 0) throw ValidationError("sequence length must be positive");
    if (rootSeq && rootSeq->size() != ell)
        throw ValidationError("root sequence length does not match requested length");
    const int m = t.model.m;
    if (rootSeq)
        for (const std::uint8_t s : *rootSeq)
            if (s >= m) throw ValidationError("root sequence symbol outside the alphabet");

    SequenceSet out;
    out.model = t.model;
    out.names = t.leaf_names;
    out.seqs.assign(t.leaf_names.size(), {});
    for (auto& s : out.seqs) s.resize(ell);

    const std::vector<int> order = t.preorder();
    std::vector<std::vector<std::uint8_t>> block(static_cast<std::size_t>(t.node_count()));
    for (auto& b : block) b.resize(detail::kSiteBlock);

    for (std::size_t start = 0, blockIdx = 0; start < ell; start += detail::kSiteBlock, ++blockIdx) {
        const std::size_t len = std::min(detail::kSiteBlock, ell - start);
        for (const int v : order) {
            if (v == t.root) {
                if (rootSeq) {
                    std::copy(rootSeq->begin() + static_cast<std::ptrdiff_t>(start),
                              rootSeq->begin() + static_cast<std::ptrdiff_t>(start + len),
                              block[static_cast<std::size_t>(v)].begin());
                } else {
                    std::mt19937_64 rng = make_rng(seed, 0, blockIdx);
                    for (std::size_t i = 0; i < len; ++i)
                        block[static_cast<std::size_t>(v)][i] =
                            static_cast<std::uint8_t>(uniform_index(rng, static_cast<std::uint64_t>(m)));
                }
            } else {
                std::mt19937_64 rng = make_rng(seed, static_cast<std::uint64_t>(v) + 1, blockIdx);
                detail::mutate_block(block[static_cast<std::size_t>(t.nodes[v].parent)].data(),
                                     block[static_cast<std::size_t>(v)].data(), len, t.nodes[v].p, m, rng);
            }
            const int leaf = t.nodes[v].leaf;
            if (leaf >= 0)
                std::copy_n(block[static_cast<std::size_t>(v)].data(), len,
                            out.seqs[static_cast<std::size_t>(leaf)].begin() + static_cast<std::ptrdiff_t>(start));
        }
    }
    return out;
}

}  // namespace fasthgt
