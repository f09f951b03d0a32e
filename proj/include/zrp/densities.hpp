#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "zrp/common.hpp"
#include "zrp/distributions.hpp"
#include "zrp/kernels.hpp"
#include "zrp/quadrature.hpp"
#include "zrp/specfun.hpp"

namespace zrp {

/// The critical-window parameter: the limit of gamma(T) sqrt(T).
struct KappaParam {
    double kappa = 0.0;
};

/// Normalization constant of the mixing density,
///   D(k) = 2 sqrt(2) int_0^inf (e^{k^2/2} - e^{-s^2})/(s^2 + k^2/2) ds
///          + 2 pi (e^{k^2/2} - 1)/k        (second term -> 0 as k -> 0).
/// Both pieces evaluate through int_0^inf e^{-s^2}/(s^2 + b^2) ds
/// = (pi/(2b)) erfcx(b) with b = |k|/sqrt(2), giving the cancellation-free
/// branches below.  D > 0 for every real k.
inline double normalization_D(KappaParam k) {
    const double kappa = k.kappa;
    if (kappa == 0.0) return 2.0 * sqrt_two_pi;
    const double b = std::abs(kappa) / sqrt_two;
    if (kappa < 0.0) return two_pi / (-kappa) * (1.0 - erfcx(b));
    return two_pi / kappa * (2.0 * std::exp(0.5 * kappa * kappa) - erfcx(b) - 1.0);
}

/// Mixing density of the compound-Gaussian endpoint law,
///   v_k(tau) = [ 2 int_0^inf sqrt(2s) e^{-s(1-tau)}/(2s + k^2) ds
///                + delta 2 pi k e^{k^2 (1-tau)/2} ] / D(k),  delta = 1 iff k > 0.
/// The s-integral reduces to sqrt(2 pi/p) / 2 - (pi |k|/2) e^{p k^2/2}
/// erfc(|k| sqrt(p/2)) with p = 1 - tau, so v is evaluated in closed form;
/// it is strictly positive and diverges like (1-tau)^{-1/2} at tau -> 1.
inline double mixing_density_v(KappaParam k, double tau) {
    if (!(tau > 0.0 && tau < 1.0))
        throw std::domain_error("mixing_density_v: tau must lie in (0, 1)");
    const double p = 1.0 - tau;
    const double kappa = k.kappa;
    const double base = sqrt_two_pi / std::sqrt(p);
    if (kappa == 0.0) return 0.5 / std::sqrt(p);
    const double z = std::abs(kappa) * std::sqrt(p / 2.0);
    const double D = normalization_D(k);
    if (kappa < 0.0) return (base - pi * (-kappa) * erfcx(z)) / D;
    // k > 0: the pole term merges with the erfc piece via erfc(-z) = 2 - erfc(z)
    return (base + pi * kappa * (2.0 * std::exp(0.5 * p * kappa * kappa) - erfcx(z))) / D;
}

/// Tabulated mixing density with its normalization residual |int v - 1|.
struct MixingDensity {
    KappaParam kappa;
    std::vector<double> tau;
    std::vector<double> values;
    double normalization_residual = 0.0;
};

inline MixingDensity mixing_density_table(KappaParam k, int n_grid = 100) {
    if (n_grid < 2) throw std::invalid_argument("mixing_density_table: need >= 2 grid points");
    MixingDensity out;
    out.kappa = k;
    out.tau.reserve(n_grid);
    out.values.reserve(n_grid);
    for (int i = 1; i <= n_grid; ++i) {
        const double tau = static_cast<double>(i) / (n_grid + 1);
        out.tau.push_back(tau);
        out.values.push_back(mixing_density_v(k, tau));
    }
    // tau = 1 - w^2 removes the endpoint divergence
    const auto mass = integrate(
        [&](double w) { return 2.0 * w * mixing_density_v(k, 1.0 - w * w); }, 0.0, 1.0,
        1e-11, 1e-300);
    out.normalization_residual = std::abs(mass.value - 1.0);
    return out;
}

/// Compound-Gaussian endpoint density
///   q_k(y) = int_0^1 (2 pi tau)^{-3/2} exp(-|y|^2 / 2 tau) v_k(tau) dtau,
/// integrated in w = sqrt(1 - tau) so the mixing density's endpoint
/// singularity cancels against the Jacobian.
inline double endpoint_density_q(KappaParam k, const SpatialPoint& y) {
    if (y.at_origin())
        throw std::domain_error("endpoint_density_q: y must be away from the origin");
    check_unit_direction(y);
    const double rho2 = y.radius * y.radius;
    const auto q = integrate(
        [&](double w) {
            const double tau = 1.0 - w * w;
            return 2.0 * w * std::pow(two_pi * tau, -1.5) * std::exp(-rho2 / (2.0 * tau)) *
                   mixing_density_v(k, tau);
        },
        0.0, 1.0, 1e-11, 1e-300);
    return q.value;
}

/// Radial CDF of the compound-Gaussian law: P(|Y| <= rho)
/// = int_0^1 v_k(tau) chi3_cdf(rho / sqrt(tau)) dtau.
inline double endpoint_radial_cdf_q(KappaParam k, double rho) {
    if (rho <= 0.0) return 0.0;
    const auto q = integrate(
        [&](double w) {
            const double tau = 1.0 - w * w;
            return 2.0 * w * mixing_density_v(k, tau) *
                   maxwell_chi3_cdf(rho / std::sqrt(tau));
        },
        0.0, 1.0, 1e-10, 1e-300);
    return q.value;
}

/// Endpoint density of the globular phase (gamma = 1 normal form):
/// psi_1(y) / ||psi_1||_L1 = psi_1(y) / (2 sqrt(2 pi)).
inline double globular_endpoint_density(const SpatialPoint& y) {
    if (y.at_origin())
        throw std::domain_error("globular_endpoint_density: y must be away from the origin");
    check_unit_direction(y);
    return eigenfunction_psi({1.0}, y.radius) / (2.0 * sqrt_two_pi);
}

/// Radial density of |Y| under the globular endpoint law: rho exp(-rho),
/// i.e. Gamma(2,1) with mode at rho = 1.
inline double globular_radial_density(double rho) {
    if (!(rho >= 0.0)) throw std::domain_error("globular_radial_density: rho must be >= 0");
    return rho * std::exp(-rho);
}

} // namespace zrp
