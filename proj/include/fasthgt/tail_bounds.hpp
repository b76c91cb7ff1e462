#pragma once

#include <cmath>

#include "fasthgt/errors.hpp"

namespace fasthgt {

namespace detail {

inline void check_tail_args(std::size_t ell, double c, double eps, int m) {
    if (ell == 0) throw ValidationError("tail bound requires a positive sample length");
    if (!(c > 0.0 && c <= 1.0)) throw ValidationError("tail bound requires closeness in (0, 1]");
    if (!(eps >= 0.0)) throw ValidationError("tail bound requires eps >= 0");
    if (m < 2) throw ValidationError("alphabet size m must be >= 2");
}

}  // namespace detail

// Bound on the relative underestimation (or overestimation) of a pairwise
// closeness estimate: P[c_hat/c <= 1 - eps] <= exp(-(2/alpha^2) l c^2 eps^2).
inline double hoeffding_pair_tail(std::size_t ell, double c, double eps, int m) {
    detail::check_tail_args(ell, c, eps, m);
    const double alpha = static_cast<double>(m) / (m - 1);
    return std::exp(-(2.0 / (alpha * alpha)) * static_cast<double>(ell) * c * c * eps * eps);
}

// Bound on the one-sided error of an estimated center leg of a triplet with
// harmonic closeness cxyz: P[leg overestimate >= -ln(1-eps)/2] <= value.
// May exceed 1 for small l; cap at 1 when reporting it as a probability.
inline double center_tail(std::size_t ell, double cxyz, double eps, int m) {
    detail::check_tail_args(ell, cxyz, eps, m);
    const double alpha = static_cast<double>(m) / (m - 1);
    return 3.0 * std::exp(-(2.0 / (9.0 * alpha * alpha)) * static_cast<double>(ell) * cxyz * cxyz * eps * eps);
}

}  // namespace fasthgt
