#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fd_eigensolver.hpp"
#include "quad2d.hpp"
#include "zrp/distributions.hpp"
#include "zrp/sampler.hpp"
#include "zrp/stats.hpp"

using zrp::Coupling;
using zrp::PolymerSampler;
using zrp::SamplerConfig;
using zrp::SmoothedPotential;
using zrp::SpatialPoint;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

SpatialPoint on_cone(double r, double c) {
    return {r, {std::sqrt(std::max(0.0, 1.0 - c * c)), 0.0, c}};
}

// piecewise-linear CDF of a radial density given by quadrature
struct TabulatedCdf {
    std::vector<double> r, c;
    template <class Density>
    TabulatedCdf(Density m, double r_max, int n) : r(n + 1), c(n + 1, 0.0) {
        for (int j = 0; j <= n; ++j) r[j] = r_max * j / n;
        for (int j = 1; j <= n; ++j) {
            c[j] = c[j - 1] + zrp::integrate(m, r[j - 1], r[j], 1e-9, 1e-14).value;
        }
        for (auto& v : c) v /= c.back();
    }
    double operator()(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= r.back()) return 1.0;
        const double h = r[1] - r[0];
        const std::size_t j = std::min(static_cast<std::size_t>(x / h), r.size() - 2);
        const double w = (x - r[j]) / h;
        return c[j] * (1.0 - w) + c[j + 1] * w;
    }
};

} // namespace

TEST_CASE("finite dimensional density: single factor form") {
    const Coupling g{0.8};
    const double T = 2.0;
    const SpatialPoint x = SpatialPoint::radial(1.0);
    const SpatialPoint y = on_cone(1.4, 0.3);
    const double direct = zrp::finite_dim_density(g, T, x, {0.7}, {y});
    const double manual = zrp::heat_kernel(g, 0.7, x, y).value /
                          zrp::partition_function(g, T, 1.0).value *
                          zrp::partition_function(g, T - 0.7, 1.4).value;
    CHECK(rel_err(direct, manual) < 1e-12);
}

TEST_CASE("finite dimensional density: marginalizing the middle point") {
    const Coupling g{1.0};
    const double T = 2.0;
    const SpatialPoint x = SpatialPoint::radial(1.0);
    const SpatialPoint x2 = SpatialPoint::radial(1.2);
    const double integrated = testutil::radial_angular(
        [&](double r, double c) {
            return zrp::finite_dim_density(g, T, x, {0.5, 1.0}, {on_cone(r, c), x2});
        },
        30.0, 1e-7);
    const double reduced = zrp::finite_dim_density(g, T, x, {1.0}, {x2});
    CHECK(rel_err(integrated, reduced) < 1e-4);
}

TEST_CASE("finite dimensional density: unit total mass") {
    const Coupling g{-1.0};
    const SpatialPoint x = SpatialPoint::radial(1.0);
    const double mass = testutil::radial_angular(
        [&](double r, double c) {
            return zrp::finite_dim_density(g, 1.0, x, {0.4}, {on_cone(r, c)});
        },
        30.0, 1e-8);
    CHECK(std::abs(mass - 1.0) < 1e-5);
}

TEST_CASE("finite dimensional density: grid validation") {
    const SpatialPoint x = SpatialPoint::radial(1.0);
    const SpatialPoint y = SpatialPoint::radial(2.0);
    CHECK_THROWS_AS(zrp::finite_dim_density({1.0}, 1.0, x, {0.5, 0.4}, {y, y}),
                    std::invalid_argument);
    CHECK_THROWS_AS(zrp::finite_dim_density({1.0}, 1.0, x, {0.5, 1.5}, {y, y}),
                    std::invalid_argument);
    CHECK_THROWS_AS(zrp::finite_dim_density({1.0}, 1.0, x, {0.5}, {SpatialPoint::radial(0.0)}),
                    std::domain_error);
}

TEST_CASE("path sampling is deterministic in (seed, stream, config)") {
    SamplerConfig cfg;
    cfg.stream = 3;
    const auto a = zrp::sample_polymer_path({1.0}, 4.0, SpatialPoint::radial(1.0),
                                            {1.0, 2.0, 4.0}, cfg, 42);
    const auto b = zrp::sample_polymer_path({1.0}, 4.0, SpatialPoint::radial(1.0),
                                            {1.0, 2.0, 4.0}, cfg, 42);
    REQUIRE(a.positions.size() == b.positions.size());
    for (std::size_t i = 0; i < a.positions.size(); ++i) {
        CHECK(a.positions[i].radius == b.positions[i].radius);
        CHECK(a.positions[i].direction == b.positions[i].direction);
    }
    CHECK(a.times.front() == 0.0);
    CHECK(a.positions.front().radius == 1.0);
    CHECK(a.times.back() == 4.0);
}

TEST_CASE("independent streams merge order-independently") {
    PolymerSampler sampler({1.0}, 2.0);
    std::vector<double> forward, backward;
    for (int s = 0; s < 8; ++s)
        forward.push_back(
            sampler.sample(SpatialPoint::radial(1.0), {2.0}, 7, s).positions.back().radius);
    for (int s = 7; s >= 0; --s)
        backward.push_back(
            sampler.sample(SpatialPoint::radial(1.0), {2.0}, 7, s).positions.back().radius);
    std::reverse(backward.begin(), backward.end());
    CHECK(forward == backward);
}

TEST_CASE("one-step law matches the analytic marginal") {
    const Coupling g{1.0};
    const double T = 30.0, t1 = 29.0;
    const SpatialPoint x = SpatialPoint::radial(1.0);
    const double z_T = zrp::partition_function(g, T, 1.0).value;
    TabulatedCdf cdf(
        [&](double s) {
            if (s <= 0.0) return 0.0;
            return zrp::two_pi * s * s * zrp::angular_integrated_kernel(g, t1, 1.0, s) *
                   zrp::partition_function(g, T - t1, s).value / z_T;
        },
        16.0, 1600);

    PolymerSampler sampler(g, T);
    const int n = 100000;
    std::vector<double> radii(n);
    for (int i = 0; i < n; ++i)
        radii[i] = sampler.sample(x, {t1}, 2027, i).positions.back().radius;
    const double d = zrp::ks_statistic(radii, [&](double s) { return cdf(s); });
    CHECK(d < 0.02);
}

TEST_CASE("sampled paths obey the self-similarity law") {
    // sqrt(a) omega(t/a) under (gamma, T) vs omega(t) under (gamma/sqrt(a), aT),
    // a = 4: endpoint radii from (1, 2, |x|=1) scaled by 2 vs (0.5, 8, |x|=2)
    const int n = 100000;
    PolymerSampler first({1.0}, 2.0);
    PolymerSampler second({0.5}, 8.0);
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a[i] = 2.0 * first.sample(SpatialPoint::radial(1.0), {2.0}, 11, i)
                          .positions.back()
                          .radius;
        b[i] = second.sample(SpatialPoint::radial(2.0), {8.0}, 12, i)
                   .positions.back()
                   .radius;
    }
    CHECK(zrp::ks_two_sample(a, b) < 0.02);
}

TEST_CASE("coarse radial tables trip the normalization guard") {
    SamplerConfig cfg;
    cfg.radial_nodes = 64;
    PolymerSampler sampler({0.0}, 1.0, cfg);
    // width sqrt(dt) = 1e-2 against a grid step of ~0.23
    CHECK_THROWS_AS(sampler.sample(SpatialPoint::radial(5.0), {1e-4}, 1, 0),
                    zrp::table_error);
}

TEST_CASE("sampler config validation") {
    SamplerConfig cfg;
    cfg.radial_nodes = 32;
    CHECK_THROWS_AS(PolymerSampler({1.0}, 1.0, cfg), std::invalid_argument);
    cfg = {};
    cfg.angular_nodes = 16;
    CHECK_THROWS_AS(PolymerSampler({1.0}, 1.0, cfg), std::invalid_argument);
    cfg = {};
    cfg.rejection_cap = 100;
    CHECK_THROWS_AS(PolymerSampler({1.0}, 1.0, cfg), std::invalid_argument);
    cfg = {};
    cfg.rng_name = "mt19937";
    CHECK_THROWS_AS(PolymerSampler({1.0}, 1.0, cfg), std::invalid_argument);
    CHECK_THROWS_AS(PolymerSampler({1.0}, 1.0).sample(SpatialPoint::radial(1.0), {}, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        PolymerSampler({1.0}, 1.0).sample(SpatialPoint::radial(1.0), {0.5, 1.5}, 1, 0),
        std::invalid_argument);
}

TEST_CASE("Feynman-Kac with the potential switched off is Brownian") {
    SmoothedPotential pot(0.2, {1.0});
    pot.amplitude = 0.0;
    const double T = 1.0;
    const auto res = zrp::sample_feynman_kac(pot, T, SpatialPoint::radial(0.0), 100000,
                                             0.01, 555);
    std::vector<double> scaled(res.endpoints.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        CHECK(res.log_weights[i] == 0.0);
        scaled[i] = res.endpoints[i].radius / std::sqrt(T);
    }
    CHECK(zrp::ks_statistic(scaled, zrp::maxwell_chi3_cdf) < 0.02);
}

TEST_CASE("Feynman-Kac partition estimate is stable under step halving") {
    SmoothedPotential pot(0.2, {1.0});
    const auto coarse = zrp::sample_feynman_kac(pot, 1.0, SpatialPoint::radial(1.0), 4000,
                                                0.01, 99);
    const auto fine = zrp::sample_feynman_kac(pot, 1.0, SpatialPoint::radial(1.0), 4000,
                                              0.005, 99);
    const double diff = std::abs(coarse.partition_estimate() - fine.partition_estimate());
    CHECK(diff <= 2.0 * (coarse.partition_stderr() + fine.partition_stderr()));
}

TEST_CASE("Feynman-Kac argument validation") {
    SmoothedPotential pot(0.1, {1.0});
    const SpatialPoint x = SpatialPoint::radial(1.0);
    CHECK_THROWS_AS(zrp::sample_feynman_kac(pot, 1.0, x, 10, 0.01, 1),
                    std::invalid_argument); // step > eps^2/4
    CHECK_THROWS_AS(zrp::sample_feynman_kac(pot, 1.0, x, 0, 0.001, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(zrp::sample_feynman_kac(pot, 100.0, x, 10, 0.0025, 1, 0, 10'000),
                    std::invalid_argument); // 40000 steps > cap
}

TEST_CASE("ground state of the smoothed well") {
    // frozen root of the matching condition at gamma = 1, eps = 0.1
    const auto lam = zrp::radial_ground_state(SmoothedPotential(0.1, {1.0}));
    REQUIRE(lam.has_value());
    CHECK(std::abs(*lam - 0.4720617761034335) < 1e-9);
    // independent finite-difference oracle, 1e4 grid points
    const double fd = oracle::fd_top_eigenvalue(0.1, SmoothedPotential(0.1, {1.0}).amplitude);
    CHECK(std::abs(*lam - fd) < 2e-3);

    double prev_gap = 1.0;
    for (double eps : {0.1, 0.05, 0.025}) {
        const auto l = zrp::radial_ground_state(SmoothedPotential(eps, {1.0}));
        REQUIRE(l.has_value());
        const double gap = std::abs(*l - 0.5);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }

    CHECK(!zrp::radial_ground_state(SmoothedPotential(0.05, {-1.0})).has_value());
    const double fd_neg =
        oracle::fd_top_eigenvalue(0.05, SmoothedPotential(0.05, {-1.0}).amplitude);
    CHECK(fd_neg < 1e-6);
    // amplitude itself nonpositive: trivially no bound state
    CHECK(!zrp::radial_ground_state(SmoothedPotential(0.05, {-40.0})).has_value());
}
