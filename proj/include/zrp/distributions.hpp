#pragma once

#include <cmath>
#include <stdexcept>

#include "zrp/common.hpp"

namespace zrp {

/// Radial CDF of a standard 3-D Gaussian (chi distribution, 3 dof):
/// P(|N(0, I)| <= x) = erf(x/sqrt(2)) - sqrt(2/pi) x exp(-x^2/2).
inline double maxwell_chi3_cdf(double x) {
    if (x <= 0.0) return 0.0;
    return std::erf(x / sqrt_two) - std::sqrt(2.0 / pi) * x * std::exp(-x * x / 2.0);
}

/// Gamma(2,1) CDF, 1 - (1 + x) exp(-x); the radial law with density x e^{-x}.
inline double gamma21_cdf(double x) {
    if (x <= 0.0) return 0.0;
    return 1.0 - (1.0 + x) * std::exp(-x);
}

/// Exponential(rate) CDF.
inline double exponential_cdf(double x, double rate) {
    if (!(rate > 0.0)) throw std::domain_error("exponential_cdf: rate must be > 0");
    if (x <= 0.0) return 0.0;
    return -std::expm1(-rate * x);
}

} // namespace zrp
