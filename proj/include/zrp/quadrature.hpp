#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <vector>

#include "zrp/common.hpp"

namespace zrp {

/// Value + error estimate + evaluation count of a 1-D quadrature.
struct quad_result {
    double value = 0.0;
    double error = 0.0;
    int evals = 0;
};

namespace detail {

// 7-15 Gauss-Kronrod pair on [-1, 1] (QUADPACK constants).
inline constexpr double gk_xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double gk_wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(const F& f, double a, double b, double& value, double& error) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = gk_wgk[7] * fc;
    double resg = gk_wg[3] * fc;
    double fv[7][2];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * gk_xgk[j];
        fv[j][0] = f(c - dx);
        fv[j][1] = f(c + dx);
        resk += gk_wgk[j] * (fv[j][0] + fv[j][1]);
    }
    for (int j = 0; j < 3; ++j) resg += gk_wg[j] * (fv[2 * j + 1][0] + fv[2 * j + 1][1]);
    value = resk * h;
    error = std::abs((resk - resg) * h);
}

struct gk_interval {
    double a, b, value, error;
    bool operator<(const gk_interval& o) const { return error < o.error; }
};

} // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b].
/// Bisects the interval with the largest error estimate until the summed
/// estimate meets max(abs_tol, rel_tol * |integral|); throws
/// convergence_error once the subdivision budget is exhausted.
template <class F>
quad_result integrate(const F& f, double a, double b, double rel_tol = 1e-12,
                      double abs_tol = 0.0, int max_intervals = 4000) {
    if (a == b) return {0.0, 0.0, 0};
    std::priority_queue<detail::gk_interval> heap;
    detail::gk_interval whole{a, b, 0.0, 0.0};
    detail::gk15(f, a, b, whole.value, whole.error);
    heap.push(whole);
    double total = whole.value, toterr = whole.error;
    int evals = 15;
    while (toterr > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (static_cast<int>(heap.size()) >= max_intervals || heap.top().error == 0.0) {
            if (toterr > std::max(abs_tol, 100.0 * rel_tol * std::abs(total)))
                throw convergence_error("integrate: interval budget exhausted");
            break;
        }
        const detail::gk_interval worst = heap.top();
        heap.pop();
        total -= worst.value;
        toterr -= worst.error;
        const double m = 0.5 * (worst.a + worst.b);
        detail::gk_interval le{worst.a, m, 0.0, 0.0}, ri{m, worst.b, 0.0, 0.0};
        detail::gk15(f, le.a, le.b, le.value, le.error);
        detail::gk15(f, ri.a, ri.b, ri.value, ri.error);
        evals += 30;
        total += le.value + ri.value;
        toterr += le.error + ri.error;
        heap.push(le);
        heap.push(ri);
    }
    return {total, toterr, evals};
}

/// Integral over [0, inf) of a decaying integrand: maps through x = w/(1-w).
template <class F>
quad_result integrate_half_line(const F& f, double rel_tol = 1e-12, double abs_tol = 0.0,
                                int max_intervals = 4000) {
    auto g = [&f](double w) {
        const double om = 1.0 - w;
        const double x = w / om;
        return f(x) / (om * om);
    };
    return integrate(g, 0.0, 1.0, rel_tol, abs_tol, max_intervals);
}

/// Mass integral over R^3 of an azimuthally symmetric f(radius, cos theta):
/// nested adaptive quadrature of 2 pi r^2 f over radius in [0, r_max] and
/// the polar cosine in [-1, 1].
template <class F>
double integrate_radial_angular(const F& f, double r_max, double rel = 1e-9) {
    auto outer = [&](double r) {
        if (r == 0.0) return 0.0;
        const auto inner =
            integrate([&](double c) { return f(r, c); }, -1.0, 1.0, rel * 0.1, 1e-300);
        return two_pi * r * r * inner.value;
    };
    return integrate(outer, 0.0, r_max, rel, 1e-300).value;
}

} // namespace zrp
