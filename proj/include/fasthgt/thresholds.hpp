#pragma once

#include <cmath>
#include <cstdint>

#include "fasthgt/errors.hpp"

namespace fasthgt {

// Triplet-closeness bands used by the sample-length analysis: triplets with
// harmonic closeness >= large are reliable, <= small are rejected, and the
// midpoint separates the two with a sqrt(2) safety ratio (small = large/sqrt2).
struct Thresholds {
    double large = 0.0;
    double small = 0.0;
    double middle = 0.0;
};

// d is the g-depth of the model tree; the guaranteed defining triplets have
// legs of at most d+1 edges, hence closeness at least (1 - alpha g)^(2(d+1)).
inline Thresholds closeness_thresholds(int m, double g, int d) {
    if (m < 2) throw ValidationError("alphabet size m must be >= 2");
    if (d < 0) throw ValidationError("g-depth must be non-negative");
    const double alpha = static_cast<double>(m) / (m - 1);
    if (!(g >= 0.0 && alpha * g < 1.0))
        throw ValidationError("upper mutation bound g must satisfy 0 <= g < 1 - 1/m");
    const double root2 = std::sqrt(2.0);
    const double ratio = (root2 - 1.0) / (root2 + 1.0);
    Thresholds th;
    th.large = 1.5 * root2 * ratio * ratio * std::pow(1.0 - alpha * g, 2 * d + 4);
    th.small = th.large / root2;
    th.middle = (th.large + th.small) / 2.0;
    return th;
}

// Default split-tolerance: a quarter of the shortest possible edge length.
// Valid range is 0 < deltaMin < -ln(1 - alpha f)/2.
inline double default_delta_min(int m, double f) {
    if (m < 2) throw ValidationError("alphabet size m must be >= 2");
    const double alpha = static_cast<double>(m) / (m - 1);
    if (!(f > 0.0 && alpha * f < 1.0))
        throw ValidationError("lower mutation bound f must satisfy 0 < f < 1 - 1/m");
    return -std::log(1.0 - alpha * f) / 4.0;
}

inline void validate_delta_min(double deltaMin, int m, double f) {
    const double alpha = static_cast<double>(m) / (m - 1);
    if (!(f > 0.0 && alpha * f < 1.0))
        throw ValidationError("lower mutation bound f must satisfy 0 < f < 1 - 1/m");
    const double limit = -std::log(1.0 - alpha * f) / 2.0;
    if (!(deltaMin > 0.0 && deltaMin < limit))
        throw ValidationError("delta_min must lie in (0, -ln(1-alpha f)/2)");
}

struct SampleLength {
    double forGreedy = 0.0;  // makes every greedy pick a safe triplet
    double forCenters = 0.0; // makes every center-leg estimate delta_min-accurate
    std::uint64_t length = 0;
};

// Sites required for recovery with probability >= 1 - delta on trees of
// g-depth d; the result is the ceiling of the larger of the two terms.
// c = deltaMin / (-ln(1 - alpha f)) must lie in (0, 1/2).
inline SampleLength sample_length(int n, double delta, int m, double f, double g, int d,
                                  double deltaMin) {
    if (n < 3) throw ValidationError("sample length needs n >= 3");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
    validate_delta_min(deltaMin, m, f);
    const double alpha = static_cast<double>(m) / (m - 1);
    const Thresholds th = closeness_thresholds(m, g, d);
    const double c = deltaMin / (-std::log(1.0 - alpha * f));
    SampleLength out;
    out.forGreedy = 210.0 * alpha * alpha * (3.0 * std::log(n) + std::log(3.0 / delta)) /
                    (th.large * th.large);
    out.forCenters = 81.0 * (3.0 * std::log(n) + std::log(7.0 / delta)) /
                     (th.large * th.large * f * f * c * c);
    out.length = static_cast<std::uint64_t>(std::ceil(std::max(out.forGreedy, out.forCenters)));
    return out;
}

}  // namespace fasthgt
