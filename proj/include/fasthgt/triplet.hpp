#pragma once

#include <cmath>

#include "fasthgt/distance_matrix.hpp"
#include "fasthgt/errors.hpp"

namespace fasthgt {

struct Triplet {
    int x = -1;
    int y = -1;
    int z = -1;
};

// A triplet is usable only when all three pairwise closenesses are positive.
inline bool is_positive_triplet(const DistanceMatrix& d, int x, int y, int z) {
    return d.finite(x, y) && d.finite(x, z) && d.finite(y, z);
}

// Harmonic mean of the three pairwise closenesses. At most 3 times the
// smallest of them, and equal to the common value when all three agree.
inline double triplet_closeness(double cxy, double cxz, double cyz) {
    if (!(cxy > 0.0 && cxz > 0.0 && cyz > 0.0))
        throw ValidationError("triplet closeness requires three positive pairwise closenesses");
    return 3.0 / (1.0 / cxy + 1.0 / cxz + 1.0 / cyz);
}

inline double triplet_closeness(const DistanceMatrix& d, int x, int y, int z) {
    return triplet_closeness(d.closeness(x, y), d.closeness(x, z), d.closeness(y, z));
}

// Leg from X to the meeting point P of the three pairwise paths:
// (d_XY + d_XZ - d_YZ) / 2. All three inputs must be finite.
inline double center_leg(double dxy, double dxz, double dyz) {
    if (is_infinite_distance(dxy) || is_infinite_distance(dxz) || is_infinite_distance(dyz))
        throw ValidationError("center leg requires three finite distances");
    return (dxy + dxz - dyz) / 2.0;
}

}  // namespace fasthgt
