#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fasthgt/errors.hpp"

namespace fasthgt {

// Substitution model over an alphabet of m symbols: along an edge with
// mutation probability p the child symbol equals the parent's with
// probability 1-p, otherwise it is uniform over the m-1 other symbols.
// Edge probabilities are bounded by 0 < f <= p <= g < 1 - 1/m.
struct EvoModel {
    int m = 4;
    double f = 0.0;
    double g = 0.0;

    double alpha() const { return static_cast<double>(m) / (m - 1); }

    // Pairwise closeness contributed by a single edge; positive for valid p.
    double edge_closeness(double p) const { return 1.0 - alpha() * p; }

    void validate() const {
        if (m < 2) throw ValidationError("alphabet size m must be >= 2");
        if (m > 256) throw ValidationError("alphabet size m must be <= 256");
        if (!(f > 0.0)) throw ValidationError("lower mutation bound f must be > 0");
        if (!(f <= g)) throw ValidationError("mutation bounds must satisfy f <= g");
        if (!(g < 1.0 - 1.0 / m)) throw ValidationError("upper mutation bound g must be < 1 - 1/m");
    }

    // Display symbols: A,C,G,T for m = 4, generic S0..S(m-1) otherwise.
    std::vector<std::string> alphabet() const {
        std::vector<std::string> sym;
        sym.reserve(static_cast<std::size_t>(m));
        if (m == 4) {
            sym = {"A", "C", "G", "T"};
        } else {
            for (int i = 0; i < m; ++i) sym.push_back("S" + std::to_string(i));
        }
        return sym;
    }
};

}  // namespace fasthgt
