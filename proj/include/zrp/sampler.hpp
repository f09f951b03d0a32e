#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "zrp/common.hpp"
#include "zrp/kernels.hpp"
#include "zrp/quadrature.hpp"
#include "zrp/rng.hpp"

namespace zrp {

/// One sampled polymer path: strictly increasing grid in (0, T] with t_0 = 0
/// prepended, one position per grid time, and the stream that produced it.
struct PathSample {
    std::vector<double> times;
    std::vector<SpatialPoint> positions;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    Coupling gamma;
    double horizon = 0.0;
};

/// Sampler resolution knobs.  The radial inverse-CDF table uses radial_nodes
/// points (>= 64); max_radius 0 lets each step choose its own support.  The
/// angular coordinate is inverted from its closed-form CDF, so angular_nodes
/// only sizes diagnostic grids.  rejection_cap bounds the per-path step count
/// of the Feynman-Kac sampler (>= 1e4); inversion sampling itself never
/// rejects.
struct SamplerConfig {
    int radial_nodes = 2048;
    double max_radius = 0.0;
    int angular_nodes = 256;
    long rejection_cap = 10'000'000;
    std::string rng_name = "philox4x64";
    std::uint64_t stream = 0;
    double normalization_guard = 1e-3;
};

inline void validate_config(const SamplerConfig& cfg) {
    if (cfg.radial_nodes < 64 || cfg.angular_nodes < 64)
        throw std::invalid_argument("SamplerConfig: grids need >= 64 nodes");
    if (cfg.rejection_cap < 10'000)
        throw std::invalid_argument("SamplerConfig: rejection cap must be >= 1e4");
    if (cfg.rng_name != "philox4x64")
        throw std::invalid_argument("SamplerConfig: unknown rng '" + cfg.rng_name + "'");
}

/// Short-range approximating potential: amplitude * 1_{|x| <= epsilon} with
/// amplitude pi^2/(8 eps^2) + gamma/eps (unscaled profile 1_{|x| <= 1},
/// ||v||_L1 = 4 pi / 3).  amplitude may be overridden in tests.
struct SmoothedPotential {
    double epsilon;
    Coupling gamma;
    double amplitude;

    SmoothedPotential(double eps, Coupling g)
        : epsilon(eps), gamma(g),
          amplitude(pi * pi / (8.0 * eps * eps) + g.gamma / eps) {
        if (!(eps > 0.0)) throw std::domain_error("SmoothedPotential: epsilon must be > 0");
    }
    double operator()(double radius) const { return radius <= epsilon ? amplitude : 0.0; }
};

// ---------------------------------------------------------------------------
// finite-dimensional densities
// ---------------------------------------------------------------------------

/// Joint density of (omega(t_1), ..., omega(t_n)) under the polymer measure:
///   Z(T,|x|)^{-1} prod p(dt_k, x_{k-1}, x_k) * Z(T - t_n, |x_n|),
/// with the first factor replaced by origin_ratio when the start is the
/// origin, and Z(0, .) = 1 when t_n = T.
inline double finite_dim_density(Coupling g, double T, const SpatialPoint& start,
                                 const std::vector<double>& times,
                                 const std::vector<SpatialPoint>& points) {
    if (times.empty() || times.size() != points.size())
        throw std::invalid_argument("finite_dim_density: times/points size mismatch");
    double prev_t = 0.0;
    for (double t : times) {
        if (!(t > prev_t) || !(t <= T))
            throw std::invalid_argument("finite_dim_density: times must increase within (0, T]");
        prev_t = t;
    }
    for (const auto& p : points)
        if (p.at_origin())
            throw std::domain_error("finite_dim_density: sampled points cannot be the origin");

    double density;
    if (start.at_origin()) {
        density = origin_ratio(g, times[0], T, points[0]);
    } else {
        density = heat_kernel(g, times[0], start, points[0]).value /
                  partition_function(g, T, start.radius).value;
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        density *= heat_kernel(g, times[k] - times[k - 1], points[k - 1], points[k]).value;
    }
    const double remaining = T - times.back();
    if (remaining > 0.0) density *= partition_function(g, remaining, points.back().radius).value;
    return density;
}

// ---------------------------------------------------------------------------
// sequential exact sampler
// ---------------------------------------------------------------------------

namespace detail {

// Table of I(r) = int_0^t F_r(s) ds on a uniform radial grid, so that
// Z(t, r) = 1 + I(r)/r without ever dividing by a vanishing radius.
struct BracketTimeIntegralTable {
    double t = 0.0;
    double r_max = 0.0;
    std::vector<double> values;

    double operator()(double r) const {
        const double h = r_max / (values.size() - 1);
        const double x = std::min(r, r_max) / h;
        const std::size_t j = std::min(static_cast<std::size_t>(x), values.size() - 2);
        const double w = x - static_cast<double>(j);
        return values[j] * (1.0 - w) + values[j + 1] * w;
    }
};

inline BracketTimeIntegralTable build_bracket_table(Coupling g, double t, double r_max,
                                                    int nodes) {
    BracketTimeIntegralTable table;
    table.t = t;
    table.r_max = r_max;
    table.values.resize(nodes);
    const double gamma = g.gamma;
    for (int j = 0; j < nodes; ++j) {
        const double r = r_max * j / (nodes - 1);
        if (r == 0.0) {
            // s = w^2 removes the 1/sqrt(s) endpoint of F_0
            table.values[j] = integrate(
                                  [gamma](double w) {
                                      return 2.0 * w * kernel_bracket_origin(gamma, w * w);
                                  },
                                  0.0, std::sqrt(t), 1e-10, 1e-300)
                                  .value;
        } else {
            table.values[j] =
                integrate([gamma, r](double s) { return kernel_bracket(gamma, s, r); }, 0.0,
                          t, 1e-10, 1e-300)
                    .value;
        }
    }
    return table;
}

// Unnormalized radial marginal of the next position, tabulated on [0, r_max]:
// all terms arranged so nothing divides by r.  prev_radius = 0 means an
// origin start, where the density is origin_ratio * weight and or_denominator
// must hold int_0^T F_0.
struct RadialMarginal {
    std::vector<double> r;
    std::vector<double> density;
    std::vector<double> cdf; // cumulative trapezoid, unnormalized
    double total = 0.0;

    void build(Coupling g, double dt, double prev_radius, double r_max, int nodes,
               const BracketTimeIntegralTable* weight, double or_denominator) {
        r.resize(nodes);
        density.resize(nodes);
        const double gamma = g.gamma;
        for (int j = 0; j < nodes; ++j) {
            const double rr = r_max * j / (nodes - 1);
            r[j] = rr;
            const double I = weight ? (*weight)(rr) : 0.0;
            if (prev_radius > 0.0) {
                const double fa = rr > 0.0 ? free_kernel_angular(dt, prev_radius, rr) : 0.0;
                const double br = kernel_bracket(gamma, dt, prev_radius + rr);
                density[j] = two_pi * rr * rr * fa + two_pi * rr * fa * I +
                             (2.0 * rr / prev_radius) * br + (2.0 / prev_radius) * br * I;
            } else {
                const double br = kernel_bracket(gamma, dt, rr);
                density[j] = 2.0 * br * (rr + I) / or_denominator;
            }
        }
        cdf.resize(nodes);
        cdf[0] = 0.0;
        const double h = r_max / (nodes - 1);
        for (int j = 1; j < nodes; ++j)
            cdf[j] = cdf[j - 1] + 0.5 * h * (density[j - 1] + density[j]);
        total = cdf.back();
    }

    double peak() const {
        double m = 0.0;
        for (double v : density) m = std::max(m, v);
        return m;
    }

    // inverse CDF with the density linear within each bin
    double invert(double u) const {
        const double target = u * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        if (it == cdf.begin()) return r.front();
        if (it == cdf.end()) return r.back();
        const std::size_t j = static_cast<std::size_t>(it - cdf.begin()) - 1;
        const double h = r[1] - r[0];
        const double excess = target - cdf[j];
        const double m0 = density[j], slope = (density[j + 1] - density[j]) / h;
        if (m0 <= 0.0 && slope == 0.0) return r[j] + 0.5 * h;
        const double disc = std::max(m0 * m0 + 2.0 * slope * excess, 0.0);
        double dx;
        if (std::abs(slope) < 1e-14 * std::max(m0, 1e-300)) {
            dx = excess / std::max(m0, 1e-300);
        } else {
            dx = (std::sqrt(disc) - m0) / slope;
            if (!(dx >= 0.0) || !(dx <= h)) dx = excess / std::max(m0, 1e-300);
        }
        return r[j] + std::clamp(dx, 0.0, h);
    }
};

// orthonormal frame completion: unit vectors e1, e2 perpendicular to d
inline void frame(const std::array<double, 3>& d, std::array<double, 3>& e1,
                  std::array<double, 3>& e2) {
    if (std::abs(d[0]) < 0.9) {
        e1 = {0.0, -d[2], d[1]};
    } else {
        e1 = {-d[1], d[0], 0.0};
    }
    const double n = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
    for (auto& c : e1) c /= n;
    e2 = {d[1] * e1[2] - d[2] * e1[1], d[2] * e1[0] - d[0] * e1[2],
          d[0] * e1[1] - d[1] * e1[0]};
}

} // namespace detail

/// Sequential exact sampler of polymer paths under the Gibbs measure with
/// horizon T.  Each step draws the next position from the conditional density
/// ~ p(dt, x_prev, y) Z(T - t_k, |y|): the radius by inversion of a tabulated
/// marginal (the angular integral of the kernel is closed-form), then
/// cos(theta) by exact inversion of its analytic CDF, then a uniform
/// azimuth.  Partition-function weight tables are cached per remaining time
/// and shared across paths; the cache is mutex-guarded.
class PolymerSampler {
public:
    PolymerSampler(Coupling g, double T, SamplerConfig cfg = {})
        : gamma_(g), horizon_(T), cfg_(cfg) {
        if (!(T > 0.0)) throw std::domain_error("PolymerSampler: T must be > 0");
        validate_config(cfg_);
    }

    const SamplerConfig& config() const { return cfg_; }

    PathSample sample(const SpatialPoint& start, const std::vector<double>& grid,
                      std::uint64_t seed, std::uint64_t stream) const {
        if (grid.empty()) throw std::invalid_argument("PolymerSampler: empty time grid");
        double prev_t = 0.0;
        for (double t : grid) {
            if (!(t > prev_t) || !(t > 0.0) || t > horizon_ * (1.0 + 1e-12))
                throw std::invalid_argument("PolymerSampler: grid must increase within (0, T]");
            prev_t = t;
        }
        check_unit_direction(start);

        RngStream rng(seed, stream);
        PathSample out;
        out.seed = seed;
        out.stream = stream;
        out.gamma = gamma_;
        out.horizon = horizon_;
        out.times.reserve(grid.size() + 1);
        out.positions.reserve(grid.size() + 1);
        out.times.push_back(0.0);
        out.positions.push_back(start);

        SpatialPoint prev = start;
        prev_t = 0.0;
        for (double t : grid) {
            const double dt = t - prev_t;
            const double remaining = std::max(horizon_ - t, 0.0);
            prev = step(prev, dt, remaining, rng);
            out.times.push_back(t);
            out.positions.push_back(prev);
            prev_t = t;
        }
        return out;
    }

private:
    struct StepTable {
        detail::RadialMarginal marginal;
        std::shared_ptr<const detail::BracketTimeIntegralTable> weight;
        double r_max = 0.0;
        double or_denominator = 0.0;
    };

    SpatialPoint step(const SpatialPoint& prev, double dt, double remaining,
                      RngStream& rng) const {
        const std::shared_ptr<const StepTable> table = step_table(prev.radius, dt, remaining);
        const double u_r = rng.uniform();
        const double radius = table->marginal.invert(u_r);

        if (prev.at_origin()) {
            // isotropic direction
            const double c = 2.0 * rng.uniform() - 1.0;
            const double phi = two_pi * rng.uniform();
            const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
            return {radius, {s * std::cos(phi), s * std::sin(phi), c}};
        }

        // angular law at fixed radii: density in c proportional to
        // A exp(kc c) + B.  Written with At = A exp(kc) (the c = 1 endpoint)
        // so nothing overflows for large kc.
        const double kc = prev.radius * radius / dt;
        const double At = std::pow(two_pi * dt, -1.5) *
                          std::exp(-(prev.radius - radius) * (prev.radius - radius) /
                                   (2.0 * dt));
        const double B = kernel_bracket(gamma_.gamma, dt, prev.radius + radius) /
                         (two_pi * prev.radius * radius);
        double c;
        const double u_pick = rng.uniform(), u_c = rng.uniform();
        const double q = std::exp(-2.0 * kc); // may flush to 0, benign
        const double w_exp = kc > 1e-8 ? At * (-std::expm1(-2.0 * kc)) / kc : 2.0 * At;
        const double w_uni = 2.0 * B;
        if (u_pick < w_exp / (w_exp + w_uni) && kc > 1e-8) {
            c = 1.0 + std::log(q + u_c * (1.0 - q)) / kc;
        } else {
            c = 2.0 * u_c - 1.0;
        }
        c = std::clamp(c, -1.0, 1.0);

        const double phi = two_pi * rng.uniform();
        std::array<double, 3> e1, e2;
        detail::frame(prev.direction, e1, e2);
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        std::array<double, 3> dir;
        for (int i = 0; i < 3; ++i)
            dir[i] = c * prev.direction[i] + s * (std::cos(phi) * e1[i] + std::sin(phi) * e2[i]);
        return {radius, dir};
    }

    std::shared_ptr<const StepTable> step_table(double prev_radius, double dt,
                                                double remaining) const {
        const std::array<double, 3> key{prev_radius, dt, remaining};
        {
            std::lock_guard<std::mutex> lock(mu_);
            const auto it = tables_.find(key);
            if (it != tables_.end()) return it->second;
        }
        auto table = std::make_shared<StepTable>(build_step_table(prev_radius, dt, remaining));
        std::lock_guard<std::mutex> lock(mu_);
        // shared-start steps hit the cache across paths; per-path radii would
        // grow it without reuse, so the cache is bounded
        if (tables_.size() < 64) tables_.emplace(key, table);
        return table;
    }

    StepTable build_step_table(double prev_radius, double dt, double remaining) const {
        StepTable st;
        double r_max = cfg_.max_radius > 0.0
                           ? cfg_.max_radius
                           : prev_radius + 8.0 * std::sqrt(dt) + 10.0;
        if (prev_radius == 0.0) {
            st.or_denominator = integrate(
                                    [this](double w) {
                                        return 2.0 * w *
                                               kernel_bracket_origin(gamma_.gamma, w * w);
                                    },
                                    0.0, std::sqrt(horizon_), 1e-10, 1e-300)
                                    .value;
        }
        for (int attempt = 0;; ++attempt) {
            st.weight = remaining > 0.0
                            ? weight_table(remaining, 1.05 * r_max)
                            : nullptr;
            st.marginal.build(gamma_, dt, prev_radius, r_max, cfg_.radial_nodes,
                              st.weight.get(), st.or_denominator);
            const bool tail_ok =
                st.marginal.density.back() <= 1e-12 * std::max(st.marginal.peak(), 1e-300);
            if ((tail_ok && st.marginal.total > 0.0) || cfg_.max_radius > 0.0 ||
                attempt >= 10) {
                break;
            }
            r_max *= 1.6;
        }
        st.r_max = r_max;

        // table-resolution guard: tabulated mass must reproduce the exact
        // normalizer (Z(dt + remaining, r_prev), or 1 from the origin)
        double predicted = 1.0;
        if (prev_radius > 0.0)
            predicted = partition_function(gamma_, dt + remaining, prev_radius).value;
        if (!(std::abs(st.marginal.total / predicted - 1.0) <= cfg_.normalization_guard))
            throw table_error("PolymerSampler: tabulated density normalization off by more "
                              "than the guard; refine the radial grid");
        return st;
    }

    std::shared_ptr<const detail::BracketTimeIntegralTable> weight_table(double remaining,
                                                                         double r_max) const {
        {
            std::lock_guard<std::mutex> lock(mu_);
            const auto it = weights_.find(remaining);
            if (it != weights_.end() && it->second->r_max >= r_max) return it->second;
        }
        auto built = std::make_shared<detail::BracketTimeIntegralTable>(
            detail::build_bracket_table(gamma_, remaining, r_max, 4096));
        std::lock_guard<std::mutex> lock(mu_);
        auto& slot = weights_[remaining];
        if (!slot || slot->r_max < r_max) slot = built;
        return slot;
    }

    Coupling gamma_;
    double horizon_;
    SamplerConfig cfg_;
    mutable std::mutex mu_;
    mutable std::map<std::array<double, 3>, std::shared_ptr<const StepTable>> tables_;
    mutable std::map<double, std::shared_ptr<detail::BracketTimeIntegralTable>> weights_;
};

/// One-shot form of the sequential sampler (spec operation): deterministic
/// given (seed, config.stream, config).
inline PathSample sample_polymer_path(Coupling g, double T, const SpatialPoint& start,
                                      const std::vector<double>& grid,
                                      const SamplerConfig& cfg, std::uint64_t seed) {
    PolymerSampler sampler(g, T, cfg);
    return sampler.sample(start, grid, seed, cfg.stream);
}

// ---------------------------------------------------------------------------
// Feynman-Kac sampler
// ---------------------------------------------------------------------------

/// Endpoints and log-weights of Brownian paths weighted by
/// exp(sum v(omega(t_i)) step): the Gibbs measure under the smoothed
/// potential.  The plain weight average estimates the smoothed partition
/// function.
struct WeightedEndpoints {
    std::vector<SpatialPoint> endpoints;
    std::vector<double> log_weights;
    double step = 0.0;
    double horizon = 0.0;

    double max_log_weight() const {
        double m = -1e300;
        for (double w : log_weights) m = std::max(m, w);
        return m;
    }
    /// mean of exp(log w), computed max-shifted
    double partition_estimate() const {
        const double m = max_log_weight();
        double s = 0.0;
        for (double w : log_weights) s += std::exp(w - m);
        return std::exp(m) * s / static_cast<double>(log_weights.size());
    }
    double partition_stderr() const {
        const double m = max_log_weight();
        const double n = static_cast<double>(log_weights.size());
        double s = 0.0, s2 = 0.0;
        for (double w : log_weights) {
            const double e = std::exp(w - m);
            s += e;
            s2 += e * e;
        }
        const double mean = s / n;
        const double var = std::max(s2 / n - mean * mean, 0.0) / std::max(n - 1.0, 1.0);
        return std::exp(m) * std::sqrt(var) * std::sqrt(n / std::max(n - 1.0, 1.0));
    }
};

/// Euler path simulation under the smoothed potential.  Path i uses the
/// stream (seed, stream_base + i), so replicas are reproducible and
/// independent of sharding.  Requires step <= epsilon^2/4 (the well must be
/// resolved) and at most `cap` steps per path.
inline WeightedEndpoints sample_feynman_kac(const SmoothedPotential& pot, double T,
                                            const SpatialPoint& start, int n_paths,
                                            double step, std::uint64_t seed,
                                            std::uint64_t stream_base = 0,
                                            long cap = 10'000'000) {
    if (n_paths < 1) throw std::invalid_argument("sample_feynman_kac: n_paths must be >= 1");
    if (!(T > 0.0)) throw std::domain_error("sample_feynman_kac: T must be > 0");
    if (!(step > 0.0) || step > pot.epsilon * pot.epsilon / 4.0 + 1e-15)
        throw std::invalid_argument(
            "sample_feynman_kac: step must satisfy step <= epsilon^2/4");
    const long n_steps = static_cast<long>(std::ceil(T / step - 1e-9));
    if (n_steps > cap)
        throw std::invalid_argument("sample_feynman_kac: step count exceeds the cap");
    const double h = T / static_cast<double>(n_steps);
    const double sqrt_h = std::sqrt(h);

    WeightedEndpoints out;
    out.step = h;
    out.horizon = T;
    out.endpoints.reserve(n_paths);
    out.log_weights.reserve(n_paths);
    const auto x0 = start.coords();
    for (int i = 0; i < n_paths; ++i) {
        RngStream rng(seed, stream_base + static_cast<std::uint64_t>(i));
        std::array<double, 3> x = x0;
        double logw = 0.0;
        for (long k = 0; k < n_steps; ++k) {
            const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            if (r2 <= pot.epsilon * pot.epsilon) logw += pot.amplitude * h;
            const auto z = rng.normal3();
            x[0] += sqrt_h * z[0];
            x[1] += sqrt_h * z[1];
            x[2] += sqrt_h * z[2];
        }
        out.endpoints.push_back(SpatialPoint::cartesian(x[0], x[1], x[2]));
        out.log_weights.push_back(logw);
    }
    return out;
}

// ---------------------------------------------------------------------------
// s-wave bound state of the smoothed potential
// ---------------------------------------------------------------------------

/// Positive eigenvalue of (1/2) Laplacian + v for the ball potential, from
/// the s-wave matching condition k cot(k eps) = -sqrt(2 lambda) with
/// k = sqrt(2 (W - lambda)); inside the well u = sin(k r), outside
/// u = exp(-sqrt(2 lambda) r).  Returns nothing when no positive root
/// exists (gamma <= 0 regime).  Bracketed bisection to 1e-12.
inline std::optional<double> radial_ground_state(const SmoothedPotential& pot) {
    const double W = pot.amplitude;
    if (W <= 0.0) return std::nullopt;
    const double eps = pot.epsilon;
    auto match = [&](double lam) {
        const double k = std::sqrt(2.0 * std::max(W - lam, 0.0));
        return k / std::tan(k * eps) + std::sqrt(2.0 * lam);
    };
    double lo = 1e-14 * W, hi = W * (1.0 - 1e-14);
    if (!(match(lo) < 0.0)) return std::nullopt; // no sign change: no bound state
    // match is increasing in lambda; match(hi) = 1/eps + sqrt(2W) > 0
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (match(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace zrp
