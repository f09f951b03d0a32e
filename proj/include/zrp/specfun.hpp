#pragma once

#include <cmath>
#include <stdexcept>

#include "zrp/common.hpp"

namespace zrp {

namespace detail {

// Continued fraction for erfcx(x), x >= 5 (Lentz).  The fraction
//   sqrt(pi) x erfcx(x) = 1 / (1 + (1/2)/x^2 / (1 + (2/2)/x^2 / (1 + ...)))
// is evaluated in its equivalent form erfcx(x) = (1/sqrt(pi)) /
// (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
inline double erfcx_cf(double x) {
    const double tiny = 1e-300;
    double f = x, c = f, d = 0.0;
    for (int n = 1; n <= 200; ++n) {
        const double an = 0.5 * n;
        d = x + an * d;
        if (d == 0.0) d = tiny;
        c = x + an / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return 1.0 / (sqrt_pi * f);
}

} // namespace detail

/// Complementary error function, (2/sqrt(pi)) * int_x^inf exp(-s^2) ds.
/// Relative error <= 1e-14 for |x| <= 6, absolute error <= 1e-300 beyond;
/// libm loses absolute accuracy past x ~ 6, so the far tail goes through the
/// continued fraction instead.
inline double erfc(double x) {
    if (x > 6.0) return detail::erfcx_cf(x) * std::exp(-x * x);
    return std::erfc(x);
}

/// Scaled complementary error function exp(x^2) * erfc(x).
/// Never overflows for x >= 0; relative error <= 1e-13 on [0, 1e8].
/// Throws std::overflow_error once exp(x^2) exceeds double range (x <= -26.62).
inline double erfcx(double x) {
    if (x >= 5.0) return detail::erfcx_cf(x);
    if (x >= 0.0) return std::exp(x * x) * std::erfc(x);
    if (x * x > 708.0) throw std::overflow_error("erfcx: exp(x^2) overflows for x <= -26.62");
    return 2.0 * std::exp(x * x) - erfcx(-x);
}

/// Gaussian heat kernel in R^3 at time t and chord distance d:
/// (2 pi t)^{-3/2} exp(-d^2 / (2t)).
inline double free_heat_kernel(double t, double d) {
    if (!(t > 0.0)) throw std::domain_error("free_heat_kernel: t must be > 0");
    if (!(d >= 0.0)) throw std::domain_error("free_heat_kernel: d must be >= 0");
    return std::pow(two_pi * t, -1.5) * std::exp(-d * d / (2.0 * t));
}

} // namespace zrp
