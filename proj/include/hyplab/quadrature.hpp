#pragma once

// Quadrature kit: adaptive Gauss-Kronrod 7-15 (moment integrals, tails),
// adaptive Simpson (phase integrals), and fixed Gauss-Legendre 16 panels
// (oscillatory integrals).

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "hyplab/errors.hpp"

namespace hyplab::quad {

namespace detail {

// QUADPACK dqk15 nodes/weights on [-1,1].
inline constexpr double kGK15X[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kGK15W[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kG7W[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <typename F>
void gk15(const F& f, double a, double b, double& result, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double resk = kGK15W[7] * f(c);
    double resg = kG7W[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const double fa = f(c - h * kGK15X[i]), fb = f(c + h * kGK15X[i]);
        resk += kGK15W[i] * (fa + fb);
        if (i % 2 == 1) resg += kG7W[i / 2] * (fa + fb);
    }
    result = resk * h;
    err = std::abs((resk - resg) * h);
}

}  // namespace detail

// Adaptive GK15 by interval bisection, absolute tolerance.
template <typename F>
double adaptive_gk(const F& f, double a, double b, double abstol, int max_depth = 48) {
    struct Frame {
        double a, b;
        int depth;
    };
    double total = 0.0;
    std::vector<Frame> stack{{a, b, 0}};
    while (!stack.empty()) {
        const Frame fr = stack.back();
        stack.pop_back();
        double r, e;
        detail::gk15(f, fr.a, fr.b, r, e);
        // Stop at the prorated tolerance or at the rounding floor of the
        // local result, whichever is larger.
        const double local_tol =
            std::max(abstol * (fr.b - fr.a) / (b - a), 5e-15 * std::abs(r));
        if (e <= std::max(local_tol, 1e-300) || fr.depth >= max_depth) {
            total += r;
        } else {
            const double m = 0.5 * (fr.a + fr.b);
            stack.push_back({fr.a, m, fr.depth + 1});
            stack.push_back({m, fr.b, fr.depth + 1});
        }
    }
    return total;
}

namespace detail {

template <typename F>
double simpson_rec(const F& f, double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 40) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, max_depth);
}

// Integral over [T0, +inf) (or (-inf, -T0] if dir < 0) by window doubling.
// Stops when the last window contributes less than tol; throws if the cap
// is reached first.
template <typename F>
double tail_integral(const F& f, double t0, int dir, double tol, double t_cap = 1048576.0) {
    double total = 0.0, lo = t0;
    double width = std::max(1.0, std::abs(t0));
    for (;;) {
        const double hi = lo + width;
        const double inc = dir > 0 ? adaptive_gk(f, lo, hi, 0.1 * tol) : adaptive_gk(f, -hi, -lo, 0.1 * tol);
        total += inc;
        if (std::abs(inc) < tol && width >= 4.0) return total;
        lo = hi;
        width *= 2.0;
        if (lo > t_cap) throw ConvergenceError("tail integral did not converge below cap");
    }
}

// 16-point Gauss-Legendre nodes/weights on [-1,1] (positive half; symmetric).
inline constexpr double kGL16X[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline constexpr double kGL16W[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

// Sum of f over fixed GL16 panels; works for complex-valued integrands.
template <typename F>
auto gl16_panels(const F& f, double a, double b, std::size_t panels) -> decltype(f(0.0)) {
    using R = decltype(f(0.0));
    R total{};
    const double h = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double c = a + (static_cast<double>(p) + 0.5) * h;
        R acc{};
        for (int i = 0; i < 8; ++i) {
            const double d = 0.5 * h * kGL16X[i];
            acc += kGL16W[i] * (f(c - d) + f(c + d));
        }
        total += acc * (0.5 * h);
    }
    return total;
}

// Cumulative integral of samples on a uniform grid (composite Simpson with
// a parabolic half-step for odd indices). values[i] = f(a + i*h).
inline std::vector<double> cumulative_uniform(const std::vector<double>& values, double h) {
    const std::size_t n = values.size();
    std::vector<double> cum(n, 0.0);
    if (n < 2) return cum;
    for (std::size_t i = 1; i < n; ++i) {
        if (i >= 2) {
            // Simpson over [i-2, i], added on top of cum[i-2].
            cum[i] = cum[i - 2] + h / 3.0 * (values[i - 2] + 4.0 * values[i - 1] + values[i]);
        } else {
            // Parabolic step through points 0,1,2 integrated over [0,1].
            if (n >= 3)
                cum[1] = h / 12.0 * (5.0 * values[0] + 8.0 * values[1] - values[2]);
            else
                cum[1] = 0.5 * h * (values[0] + values[1]);
        }
    }
    return cum;
}

}  // namespace hyplab::quad
