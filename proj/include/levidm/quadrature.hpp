#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include "levidm/errors.hpp"

// Adaptive 1D quadrature (Gauss-Kronrod 7-15 with bisection of the worst
// interval) plus helpers for panelized integration of oscillatory angular
// integrands and fixed-order Gauss-Legendre grids.

namespace levidm::quad {

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    std::size_t n_evals = 0;
    bool converged = false;
};

namespace detail {

// Kronrod-15 abscissae on [0,1] side of the symmetric rule.
constexpr std::array<double, 8> kXgk = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};

constexpr std::array<double, 8> kWgk = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};

// Embedded Gauss-7 weights, matching kXgk indices 1, 3, 5, 7.
constexpr std::array<double, 4> kWg = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <typename F>
inline void gk15(const F& f, double a, double b, double& value, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double res_k = 0.0;
    double res_g = 0.0;
    for (std::size_t j = 0; j < 8; ++j) {
        const double dx = h * kXgk[j];
        double fv = 0.0;
        if (j == 7) {
            fv = f(c);
        } else {
            fv = f(c - dx) + f(c + dx);
        }
        res_k += kWgk[j] * fv;
        if (j % 2 == 1) { // odd Kronrod indices are the embedded Gauss nodes
            res_g += kWg[j / 2] * fv;
        }
    }
    value = res_k * h;
    err = std::abs((res_k - res_g) * h);
}

} // namespace detail

// Adaptive Gauss-Kronrod over [a, b]. Stops when the summed error estimate
// drops below max(abs_tol, rel_tol * |integral|) or the interval budget is
// exhausted (converged=false in that case).
template <typename F>
Result integrate(const F& f, double a, double b, double rel_tol = 1e-8,
                 double abs_tol = 0.0, std::size_t max_intervals = 2000) {
    Result out;
    if (a == b) {
        out.converged = true;
        return out;
    }

    struct Seg {
        double a, b, value, err;
        bool operator<(const Seg& o) const { return err < o.err; }
    };

    auto eval = [&](double lo, double hi) {
        Seg s{lo, hi, 0.0, 0.0};
        detail::gk15(f, lo, hi, s.value, s.err);
        out.n_evals += 15;
        return s;
    };

    std::priority_queue<Seg> segs;
    segs.push(eval(a, b));
    double total = segs.top().value;
    double total_err = segs.top().err;

    std::size_t n = 1;
    while (n < max_intervals) {
        const double tol = std::max(abs_tol, rel_tol * std::abs(total));
        if (total_err <= tol) break;
        Seg worst = segs.top();
        segs.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) { // interval at machine limit
            segs.push(worst);
            break;
        }
        Seg left = eval(worst.a, mid);
        Seg right = eval(mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        segs.push(left);
        segs.push(right);
        ++n;
    }

    out.value = total;
    out.abs_error = total_err;
    out.converged =
        total_err <= std::max(abs_tol, rel_tol * std::abs(total)) + 1e-300;
    return out;
}

// Integrate over consecutive panels given by sorted breakpoints, each panel
// adaptively. Used for angular integrands whose oscillation scale is known.
template <typename F>
Result integrate_panels(const F& f, std::span<const double> breakpoints,
                        double rel_tol = 1e-8,
                        std::size_t max_intervals_per_panel = 200) {
    Result out;
    if (breakpoints.size() < 2) {
        out.converged = true;
        return out;
    }
    // First pass at moderate accuracy to set the scale for per-panel
    // absolute tolerances.
    double scale = 0.0;
    std::vector<double> rough(breakpoints.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        double v = 0.0, e = 0.0;
        detail::gk15(f, breakpoints[i], breakpoints[i + 1], v, e);
        out.n_evals += 15;
        rough[i] = v;
        scale += std::abs(v);
    }
    const double abs_tol =
        rel_tol * scale / static_cast<double>(breakpoints.size());
    out.converged = true;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        Result r = integrate(f, breakpoints[i], breakpoints[i + 1], rel_tol,
                             abs_tol, max_intervals_per_panel);
        out.value += r.value;
        out.abs_error += r.abs_error;
        out.n_evals += r.n_evals;
        out.converged = out.converged && r.converged;
    }
    return out;
}

// Geometric ladder of breakpoints in [0, top], refined near zero, merged
// with an oscillation grid of period `osc_period` (ignored when <= 0).
// Returned sorted, starting at 0 and ending at top.
inline std::vector<double> oscillation_breakpoints(double top,
                                                   double osc_period,
                                                   std::size_t max_points = 512) {
    std::vector<double> pts;
    pts.push_back(0.0);
    for (int k = 8; k >= 1; --k) {
        pts.push_back(top * std::pow(10.0, -k));
    }
    if (osc_period > 0.0 && osc_period < top) {
        const auto n_osc = static_cast<std::size_t>(top / osc_period);
        const std::size_t stride = n_osc / max_points + 1;
        for (std::size_t j = stride; j * osc_period < top; j += stride) {
            pts.push_back(static_cast<double>(j) * osc_period);
        }
    }
    pts.push_back(top);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// Nodes/weights of the n-point Gauss-Legendre rule on [-1,1], computed by
// Newton iteration on the Legendre polynomial.
inline void gauss_legendre(std::size_t n, std::vector<double>& x,
                           std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * static_cast<double>(j) + 1.0) * z * p1 -
                      static_cast<double>(j) * p2) /
                     (static_cast<double>(j) + 1.0);
            }
            pp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

} // namespace levidm::quad
