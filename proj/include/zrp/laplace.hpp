#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "zrp/common.hpp"

namespace zrp {

/// Thrown when a declared singularity touches the contour or sits on the
/// wrong side of the abscissa.
class contour_error : public std::invalid_argument {
public:
    explicit contour_error(const std::string& what) : std::invalid_argument(what) {}
};

enum class contour_shape {
    ray_pair, ///< rays from the abscissa at angles +-3pi/4 (deformed Bromwich)
    vertical  ///< classical vertical Bromwich line
};

/// Contour for the inverse Laplace transform.  The ray pair is the default:
/// exp(lambda t) decays along it, so truncation converges absolutely.
struct ContourSpec {
    double abscissa = 1.0;
    contour_shape shape = contour_shape::ray_pair;
    double truncation_radius = 0.0; ///< ray length / half-height; 0 = choose from t
    int min_nodes = 64;             ///< coarsest trapezoid level, >= 16
    std::vector<std::complex<double>> singularities;

    static ContourSpec ray(double a, double truncation = 0.0, int nodes = 64) {
        return {a, contour_shape::ray_pair, truncation, nodes, {}};
    }
    static ContourSpec bromwich(double a, double truncation = 0.0, int nodes = 64) {
        return {a, contour_shape::vertical, truncation, nodes, {}};
    }
    ContourSpec& with_singularities(std::vector<std::complex<double>> s) {
        singularities = std::move(s);
        return *this;
    }
};

/// Result of a contour quadrature: real value, error estimate (quadrature
/// refinement delta, roundoff floor and residual imaginary part folded in),
/// and the number of integrand evaluations spent.
struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int nodes_used = 0;
};

namespace detail {

inline void validate_contour(const ContourSpec& spec) {
    if (spec.min_nodes < 16) throw std::invalid_argument("ContourSpec: node count must be >= 16");
    if (spec.truncation_radius < 0.0)
        throw std::invalid_argument("ContourSpec: truncation radius must be > 0");
    for (const auto& s : spec.singularities) {
        const double margin = 1e-9 * (1.0 + std::abs(spec.abscissa) + std::abs(s));
        // region to the right of the ray pair is { Re z > a - |Im z| }
        const double edge = (spec.shape == contour_shape::ray_pair)
                                ? spec.abscissa - std::abs(s.imag())
                                : spec.abscissa;
        if (std::abs(s.real() - edge) <= margin)
            throw contour_error("invert_laplace: singularity lies on the contour");
        if (s.real() > edge)
            throw contour_error("invert_laplace: abscissa is not to the right of a singularity");
    }
}

} // namespace detail

/// Evaluates (1/2 pi i) int_Gamma exp(lambda t) F(lambda) dlambda by trapezoid
/// sums in the contour parameter with geometric refinement and Richardson
/// extrapolation.  F must be analytic to the right of its declared
/// singularities and decay along the contour; for conjugate-symmetric F the
/// imaginary part of the computed integral stays below the error estimate.
template <class F>
QuadratureResult invert_laplace(const F& f, double t, const ContourSpec& spec) {
    using cplx = std::complex<double>;
    if (!(t > 0.0)) throw std::domain_error("invert_laplace: t must be > 0");
    detail::validate_contour(spec);

    const double a = spec.abscissa;
    const bool rays = spec.shape == contour_shape::ray_pair;
    const cplx dir = rays ? cplx(-1.0, 1.0) / sqrt_two : cplx(0.0, 1.0);

    // g(s): both half-contours folded into one parameter s >= 0, oriented so
    // the full integral is int_0^smax g ds / (2 pi i)
    auto g = [&](double s) -> cplx {
        const cplx lam_up = a + s * dir;
        const cplx lam_lo = a + s * std::conj(dir);
        const cplx up = std::exp(lam_up * t) * f(lam_up) * dir;
        const cplx lo = std::exp(lam_lo * t) * f(lam_lo) * std::conj(dir);
        return up - lo;
    };
    int evals = 0;

    // effective truncation: caller's radius, or scan until the integrand has
    // decayed 22 orders below its running peak
    double smax = spec.truncation_radius;
    if (smax == 0.0) {
        smax = 65.0 * sqrt_two / t;
        double peak = 0.0;
        for (int pass = 0; pass < 8; ++pass) {
            const int n_scan = 256;
            double tail = 0.0;
            for (int i = n_scan / 2; i <= n_scan; ++i) {
                const double mag = std::abs(g(smax * i / n_scan));
                ++evals;
                if (i < n_scan) peak = std::max(peak, mag);
                if (i == n_scan) tail = mag;
            }
            if (tail <= 1e-22 * peak || peak == 0.0) break;
            smax *= 2.0;
        }
    }

    // pick the coarsest level so the integrand's shortest observed feature is
    // sampled a few times, then refine geometrically with a Romberg table
    int n0 = std::max(spec.min_nodes, 64);
    {
        const int n_scan = 512;
        double peak = 0.0;
        int i_peak = 0, i_drop = n_scan;
        std::vector<double> mags(n_scan + 1);
        for (int i = 0; i <= n_scan; ++i) {
            mags[i] = std::abs(g(smax * i / n_scan));
            ++evals;
            if (mags[i] > peak) {
                peak = mags[i];
                i_peak = i;
            }
        }
        for (int i = i_peak; i <= n_scan; ++i) {
            if (mags[i] < 1e-3 * peak) {
                i_drop = i;
                break;
            }
        }
        const double width = smax * std::max(i_drop - i_peak, 1) / n_scan;
        n0 = std::clamp(static_cast<int>(8.0 * smax / width), n0, 1 << 14);
    }

    std::vector<cplx> diag_prev, diag;
    cplx trap = 0.5 * (g(0.0) + g(smax));
    {
        const double h0 = smax / n0;
        for (int k = 1; k < n0; ++k) trap += g(k * h0);
        evals += n0 + 1;
    }
    int n = n0;
    double h = smax / n0;
    diag.push_back(trap * h);
    double err = std::abs(diag.back());
    double err_prev = err;
    double roundoff = 0.0;
    const double target_rel = 5e-12;
    const int max_level = 18;
    int level = 0;
    for (level = 1; level <= max_level; ++level) {
        // halve the step: add midpoints
        cplx add = 0.0;
        double asum = 0.0;
        for (int k = 0; k < n; ++k) {
            const cplx val = g((k + 0.5) * h);
            add += val;
            asum += std::abs(val);
        }
        evals += n;
        trap += add;
        n *= 2;
        h *= 0.5;
        diag_prev.swap(diag);
        diag.clear();
        diag.push_back(trap * h);
        for (std::size_t m = 0; m < diag_prev.size(); ++m) {
            const double fac = std::pow(4.0, static_cast<double>(m + 1));
            diag.push_back(diag.back() + (diag.back() - diag_prev[m]) / (fac - 1.0));
        }
        roundoff = 64.0 * 2.22e-16 * asum * h * 2.0;
        err_prev = err;
        err = std::abs(diag.back() - diag_prev.back());
        const double scale = std::abs(diag.back());
        if (level >= 3 && err <= std::max(target_rel * scale, roundoff)) break;
        if (n > (1 << 21)) break;
    }
    const cplx result = diag.back() / cplx(0.0, two_pi);
    const double floor_est = (roundoff + 1e-305) / two_pi;
    double est = std::max(err / two_pi, floor_est);
    const double scale = std::abs(result);
    if (err > std::max(1e-9 * scale * two_pi, 4.0 * roundoff)) {
        // refinement stalled above both the relative target and the roundoff
        // floor: report non-convergence if the last two deltas stopped
        // contracting, otherwise surface the achieved accuracy honestly
        if (err_prev > 0.0 && err > 0.5 * err_prev)
            throw convergence_error("invert_laplace: refinements failed to contract");
        est = std::max(est, err / two_pi);
    }
    est = std::max(est, std::abs(result.imag()));
    return {result.real(), est, evals};
}

} // namespace zrp
