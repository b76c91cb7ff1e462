#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fasthgt/errors.hpp"
#include "fasthgt/simulate.hpp"

namespace fasthgt {

// Marker for pairs whose closeness estimate is non-positive; such distances
// carry no usable signal and never enter edge-length arithmetic.
inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

inline bool is_infinite_distance(double d) { return std::isinf(d); }

// Distance from closeness: -ln c for c > 0, the infinite marker otherwise
// (an estimate of exactly 0 counts as non-positive).
inline double closeness_to_distance(double c) {
    return c > 0.0 ? -std::log(c) : kInfiniteDistance;
}

// Average per-site agreement score: 1 for a match, -1/(m-1) for a mismatch.
// Unbiased for the pairwise closeness; range [-1/(m-1), 1].
inline double estimate_closeness(const std::vector<std::uint8_t>& x,
                                 const std::vector<std::uint8_t>& y, int m) {
    if (m < 2) throw ValidationError("alphabet size m must be >= 2");
    if (x.size() != y.size()) throw ValidationError("sequences have different lengths");
    if (x.empty()) throw ValidationError("sequences must be non-empty");
    std::size_t matches = 0;
    for (std::size_t i = 0; i < x.size(); ++i) matches += x[i] == y[i];
    const auto ell = static_cast<double>(x.size());
    return (static_cast<double>(m) * static_cast<double>(matches) - ell) / (ell * (m - 1));
}

// Symmetric closeness matrix over n taxa, diagonal 1. Closeness is the
// stored quantity; distances are derived on access, so the object stays
// immutable and cheap to share.
class DistanceMatrix {
  public:
    DistanceMatrix() = default;

    static DistanceMatrix from_closeness(std::vector<std::string> names, std::vector<double> values) {
        DistanceMatrix d;
        d.names_ = std::move(names);
        d.n_ = static_cast<int>(d.names_.size());
        if (d.n_ < 2) throw ValidationError("distance matrix needs at least 2 taxa");
        if (values.size() != static_cast<std::size_t>(d.n_) * static_cast<std::size_t>(d.n_))
            throw ValidationError("closeness matrix has wrong size");
        d.close_ = std::move(values);
        for (int i = 0; i < d.n_; ++i) {
            if (d.at(i, i) != 1.0) throw ValidationError("closeness diagonal must be 1");
            for (int j = i + 1; j < d.n_; ++j) {
                const double a = d.at(i, j), b = d.at(j, i);
                if (std::abs(a - b) > 1e-9) throw ValidationError("closeness matrix must be symmetric");
                d.close_[d.idx(j, i)] = a;
                if (a > 1.0 || !std::isfinite(a))
                    throw ValidationError("closeness entries must be finite and <= 1");
            }
        }
        for (int i = 0; i < d.n_; ++i)
            for (int j = i + 1; j < d.n_; ++j)
                if (d.names_[static_cast<std::size_t>(i)] == d.names_[static_cast<std::size_t>(j)])
                    throw ValidationError("duplicate taxon name: " + d.names_[static_cast<std::size_t>(i)]);
        return d;
    }

    int size() const { return n_; }
    const std::vector<std::string>& names() const { return names_; }

    double closeness(int i, int j) const { return close_[idx(i, j)]; }
    bool finite(int i, int j) const { return closeness(i, j) > 0.0; }
    double distance(int i, int j) const { return closeness_to_distance(closeness(i, j)); }

  private:
    int n_ = 0;
    std::vector<std::string> names_;
    std::vector<double> close_;

    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
    }
    double at(int i, int j) const { return close_[idx(i, j)]; }
};

// Pairwise estimated closeness over an aligned sequence set.
inline DistanceMatrix distance_matrix_from_sequences(const SequenceSet& seqs) {
    const int n = seqs.count();
    if (n < 2) throw ValidationError("need at least 2 sequences");
    std::vector<double> values(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double c = estimate_closeness(seqs.seqs[static_cast<std::size_t>(i)],
                                                seqs.seqs[static_cast<std::size_t>(j)], seqs.model.m);
            values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = c;
            values[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = c;
        }
    return DistanceMatrix::from_closeness(seqs.names, std::move(values));
}

}  // namespace fasthgt
