#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

#include "zrp/common.hpp"
#include "zrp/laplace.hpp"
#include "zrp/quadrature.hpp"
#include "zrp/specfun.hpp"

namespace zrp {

/// The extension parameter gamma (units 1/length); the model's inverse
/// temperature offset.  Sign unrestricted.
struct Coupling {
    double gamma = 0.0;
};

/// A point of R^3 carried as (radius, unit direction).
struct SpatialPoint {
    double radius = 0.0;
    std::array<double, 3> direction{0.0, 0.0, 1.0};

    static SpatialPoint radial(double r) {
        if (!(r >= 0.0)) throw std::domain_error("SpatialPoint: radius must be >= 0");
        return {r, {0.0, 0.0, 1.0}};
    }
    static SpatialPoint cartesian(double x, double y, double z) {
        const double r = std::sqrt(x * x + y * y + z * z);
        if (r == 0.0) return {0.0, {0.0, 0.0, 1.0}};
        return {r, {x / r, y / r, z / r}};
    }
    std::array<double, 3> coords() const {
        return {radius * direction[0], radius * direction[1], radius * direction[2]};
    }
    bool at_origin() const { return radius == 0.0; }
};

inline void check_unit_direction(const SpatialPoint& p) {
    const double n2 = p.direction[0] * p.direction[0] + p.direction[1] * p.direction[1] +
                      p.direction[2] * p.direction[2];
    if (std::abs(n2 - 1.0) > 2e-12)
        throw std::domain_error("SpatialPoint: direction must be a unit vector");
}

/// Chord distance |x - y|; satisfies |r1 - r2| <= d <= r1 + r2.
inline double chord_distance(const SpatialPoint& x, const SpatialPoint& y) {
    const auto a = x.coords(), b = y.coords();
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

enum class eval_method { closed_form, quadrature };

/// A kernel evaluation: value, the route that produced it, and that route's
/// numerical error estimate (0 for pure closed forms; the time-integral
/// route of the partition function reports its adaptive-quadrature estimate).
struct KernelValue {
    double value = 0.0;
    eval_method method = eval_method::closed_form;
    double error_estimate = 0.0;
};

// ---------------------------------------------------------------------------
// shared bracket
// ---------------------------------------------------------------------------

/// F_u(t) = L^{-1}[ exp(-sqrt(2 lambda) u) / (sqrt(2 lambda) - gamma) ](t)
///        = exp(-u^2/2t)/sqrt(2 pi t)
///          + (gamma/2) exp(gamma^2 t/2 - gamma u) erfc(u/sqrt(2t) - gamma sqrt(t/2)).
/// This is the radial bracket every kernel below is assembled from.  The
/// erfc product is routed through erfcx when the argument is nonnegative:
/// with z = u/sqrt(2t) - gamma sqrt(t/2) one has z^2 = u^2/2t - gamma u
/// + gamma^2 t/2 exactly, so exp(gamma^2 t/2 - gamma u) erfc(z)
/// = erfcx(z) exp(-u^2/2t), which neither overflows nor cancels.
inline double kernel_bracket(double gamma, double t, double u) {
    if (!(t > 0.0)) throw std::domain_error("kernel_bracket: t must be > 0");
    if (!(u >= 0.0)) throw std::domain_error("kernel_bracket: u must be >= 0");
    const double gauss = std::exp(-u * u / (2.0 * t));
    const double term1 = gauss / std::sqrt(two_pi * t);
    if (gamma == 0.0) return term1;
    const double z = u / std::sqrt(2.0 * t) - gamma * std::sqrt(t / 2.0);
    if (z >= 0.0) return term1 + 0.5 * gamma * erfcx(z) * gauss;
    // z < 0 only for gamma > 0: split off the genuine eigenvalue growth
    return term1 + gamma * std::exp(gamma * gamma * t / 2.0 - gamma * u) -
           0.5 * gamma * erfcx(-z) * gauss;
}

/// u -> 0 limit of the bracket: 1/sqrt(2 pi t)
/// + (gamma/2) exp(gamma^2 t/2) erfc(-gamma sqrt(t/2)).
inline double kernel_bracket_origin(double gamma, double t) {
    return kernel_bracket(gamma, t, 0.0);
}

namespace detail {

// Contour for inverting the bracket-type transforms.  The abscissa balances
// exp(lambda t) against exp(-sqrt(2 lambda) u) at the saddle u^2/(2 t^2);
// without that shift, the quadrature cancels exp((a - u^2/2t^2) t) orders of
// magnitude and double precision cannot reach 1e-8.  The pole gamma^2/2
// (gamma > 0) must stay strictly inside.
inline ContourSpec bracket_contour(double gamma, double t, double u) {
    const double pole = gamma > 0.0 ? 0.5 * gamma * gamma : 0.0;
    double a = std::max(pole, u * u / (2.0 * t * t)) + 2.5 / t;
    a = std::min(a, 650.0 / t);
    if (gamma > 0.0) a = std::max(a, pole + 0.5 / t);
    auto spec = ContourSpec::ray(a);
    spec.singularities.push_back(0.0);
    if (gamma > 0.0) spec.singularities.push_back(pole);
    return spec;
}

} // namespace detail

// ---------------------------------------------------------------------------
// operations
// ---------------------------------------------------------------------------

/// Resolvent kernel of the point-interaction operator:
///   exp(-sqrt(2L) |x-y|) / (2 pi |x-y|)
///   + exp(-sqrt(2L)(|x|+|y|)) / ((sqrt(2L) - gamma) 2 pi |x||y|).
/// The free summand carries 2 pi |x-y| so that the kernel is exactly the
/// time-Laplace transform of the heat kernel.  Symmetric in x and y.
inline std::complex<double> resolvent_kernel(std::complex<double> lambda, Coupling g,
                                             const SpatialPoint& x, const SpatialPoint& y) {
    if (x.at_origin() || y.at_origin())
        throw std::domain_error("resolvent_kernel: x, y must be away from the origin");
    check_unit_direction(x);
    check_unit_direction(y);
    if (lambda.imag() == 0.0) {
        if (lambda.real() <= 0.0)
            throw std::domain_error("resolvent_kernel: lambda on the continuous spectrum");
        if (g.gamma > 0.0 && lambda.real() == 0.5 * g.gamma * g.gamma)
            throw std::domain_error("resolvent_kernel: lambda at the eigenvalue");
    }
    const double d = chord_distance(x, y);
    if (d == 0.0) throw std::domain_error("resolvent_kernel: kernel is singular at x = y");
    const std::complex<double> s = std::sqrt(2.0 * lambda);
    return std::exp(-s * d) / (two_pi * d) +
           std::exp(-s * (x.radius + y.radius)) / ((s - g.gamma) * two_pi * x.radius * y.radius);
}

/// Normalized eigenfunction of the gamma^2/2 eigenvalue (gamma > 0):
/// sqrt(gamma/(2 pi)) exp(-gamma r)/r.
inline double eigenfunction_psi(Coupling g, double r) {
    if (!(g.gamma > 0.0)) throw std::domain_error("eigenfunction_psi: gamma must be > 0");
    if (!(r > 0.0)) throw std::domain_error("eigenfunction_psi: r must be > 0");
    return std::sqrt(g.gamma / two_pi) * std::exp(-g.gamma * r) / r;
}

/// Point-interaction heat kernel p(t, x, y).  The closed form is
///   free_heat_kernel(t, |x-y|) + F_{|x|+|y|}(t) / (2 pi |x||y|);
/// the quadrature route inverts the resolvent's bound part on the deformed
/// Bromwich contour and adds the free summand analytically.
inline KernelValue heat_kernel(Coupling g, double t, const SpatialPoint& x,
                               const SpatialPoint& y,
                               eval_method method = eval_method::closed_form) {
    if (!(t > 0.0)) throw std::domain_error("heat_kernel: t must be > 0");
    if (x.at_origin() || y.at_origin())
        throw std::domain_error("heat_kernel: x, y must be away from the origin");
    check_unit_direction(x);
    check_unit_direction(y);
    const double r1 = x.radius, r2 = y.radius, u = r1 + r2;
    const double d = chord_distance(x, y);
    const double free_part = free_heat_kernel(t, d);
    if (method == eval_method::closed_form) {
        return {free_part + kernel_bracket(g.gamma, t, u) / (two_pi * r1 * r2),
                eval_method::closed_form, 0.0};
    }
    const double gamma = g.gamma;
    auto F = [gamma, u, r1, r2](std::complex<double> lam) {
        const std::complex<double> s = std::sqrt(2.0 * lam);
        return std::exp(-s * u) / ((s - gamma) * two_pi * r1 * r2);
    };
    const auto q = invert_laplace(F, t, detail::bracket_contour(gamma, t, u));
    return {free_part + q.value, eval_method::quadrature, q.error_estimate};
}

/// Partition function Z(t, r) = total mass of the heat kernel started at
/// radius r.  Closed route: 1 + (1/r) int_0^t F_r(s) ds (adaptive); the
/// quadrature route inverts exp(-sqrt(2L) r)/((sqrt(2L)-gamma) L r) on the
/// contour.  Always > 0.
inline KernelValue partition_function(Coupling g, double t, double r,
                                      eval_method method = eval_method::closed_form) {
    if (!(t > 0.0)) throw std::domain_error("partition_function: t must be > 0");
    if (!(r > 0.0)) throw std::domain_error("partition_function: r must be > 0");
    const double gamma = g.gamma;
    if (method == eval_method::closed_form) {
        const auto q = integrate([gamma, r](double s) { return kernel_bracket(gamma, s, r); },
                                 0.0, t, 1e-12, 1e-300);
        return {1.0 + q.value / r, eval_method::closed_form, q.error / r};
    }
    auto F = [gamma, r](std::complex<double> lam) {
        const std::complex<double> s = std::sqrt(2.0 * lam);
        return std::exp(-s * r) / ((s - gamma) * lam * r);
    };
    const auto q = invert_laplace(F, t, detail::bracket_contour(gamma, t, r));
    return {1.0 + q.value, eval_method::quadrature, q.error_estimate};
}

/// Transition density of the bulk stationary process (gamma = 1 normal form):
/// r(t, x, y) = p_1(t, x, y) psi_1(y) / psi_1(x) exp(-t/2); strictly positive.
inline KernelValue transition_density(double t, const SpatialPoint& x, const SpatialPoint& y,
                                      eval_method method = eval_method::closed_form) {
    const Coupling one{1.0};
    const KernelValue p = heat_kernel(one, t, x, y, method);
    const double factor =
        eigenfunction_psi(one, y.radius) / eigenfunction_psi(one, x.radius) * std::exp(-t / 2.0);
    return {p.value * factor, method, p.error_estimate * factor};
}

/// Leading large-t asymptotics at gamma = 1: first component exp(t/2)
/// psi_1(x) psi_1(y) (heat kernel), second exp(t/2) ||psi_1||_L1 psi_1(x)
/// (partition function), where ||psi_1||_L1 = 2 sqrt(2 pi).
inline std::pair<double, double> asymptotic_leading(double t, const SpatialPoint& x,
                                                    const SpatialPoint& y) {
    if (!(t > 0.0)) throw std::domain_error("asymptotic_leading: t must be > 0");
    const Coupling one{1.0};
    const double px = eigenfunction_psi(one, x.radius), py = eigenfunction_psi(one, y.radius);
    const double growth = std::exp(t / 2.0);
    return {growth * px * py, growth * 2.0 * sqrt_two_pi * px};
}

/// Origin limit lim_{|x| -> 0} p(t, x, y) / Z(T, x)
/// = [F_{|y|}(t) / (2 pi |y|)] / int_0^T F_0(s) ds,
/// the starting factor of paths launched from the origin.
inline double origin_ratio(Coupling g, double t, double T, const SpatialPoint& y) {
    if (!(t > 0.0)) throw std::domain_error("origin_ratio: t must be > 0");
    if (!(T >= t)) throw std::domain_error("origin_ratio: need t <= T");
    if (y.at_origin()) throw std::domain_error("origin_ratio: y must be away from the origin");
    check_unit_direction(y);
    const double gamma = g.gamma;
    const double num = kernel_bracket(gamma, t, y.radius) / (two_pi * y.radius);
    // int_0^T F_0(s) ds, s = w^2 so the 1/sqrt(s) endpoint becomes smooth
    const auto den = integrate(
        [gamma](double w) { return 2.0 * w * kernel_bracket_origin(gamma, w * w); }, 0.0,
        std::sqrt(T), 1e-12, 1e-300);
    return num / den.value;
}

// ---------------------------------------------------------------------------
// angular reductions
// ---------------------------------------------------------------------------

/// int_{-1}^{1} free_heat_kernel(t, d(c)) dc with d^2 = r1^2 + r2^2 - 2 r1 r2 c:
/// (t / (r1 r2)) [g(t, r1 - r2) - g(t, r1 + r2)], series for small r1 r2 / t.
inline double free_kernel_angular(double t, double r1, double r2) {
    const double z = r1 * r2 / t;
    const double norm = std::pow(two_pi * t, -1.5);
    if (z > 1e-6) {
        return norm * (std::exp(-(r1 - r2) * (r1 - r2) / (2.0 * t)) -
                       std::exp(-(r1 + r2) * (r1 + r2) / (2.0 * t))) / z;
    }
    return 2.0 * norm * std::exp(-(r1 * r1 + r2 * r2) / (2.0 * t)) * (1.0 + z * z / 6.0);
}

/// int_{-1}^{1} p_gamma(t; r1, r2, c) dc — the kernel with the angle
/// integrated out; radial sampling and all mass integrals reduce to it.
inline double angular_integrated_kernel(Coupling g, double t, double r1, double r2) {
    if (!(t > 0.0) || !(r1 > 0.0) || !(r2 > 0.0))
        throw std::domain_error("angular_integrated_kernel: t, r1, r2 must be > 0");
    return free_kernel_angular(t, r1, r2) +
           kernel_bracket(g.gamma, t, r1 + r2) / (pi * r1 * r2);
}

} // namespace zrp
