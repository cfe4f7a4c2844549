#pragma once

// Embedded Dormand-Prince 5(4) pair with PI-free step control, FSAL, and
// dense output via cubic Hermite interpolation of accepted steps.
// State can be any Eigen matrix/vector type (real or complex).

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hyplab/errors.hpp"

namespace hyplab::rk {

namespace detail {
inline constexpr double A21 = 1.0 / 5;
inline constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
inline constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
inline constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                        A54 = -212.0 / 729;
inline constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                        A64 = 49.0 / 176, A65 = -5103.0 / 18656;
inline constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                        B5 = -2187.0 / 6784, B6 = 11.0 / 84;
inline constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                        E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;
inline constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
}  // namespace detail

// Dense trajectory of an autonomous-in-form ODE y' = f(t, y).
template <typename State>
struct Trajectory {
    std::vector<double> ts;
    std::vector<State> ys;
    std::vector<State> fs;  // derivatives at the accepted points

    double t_front() const { return ts.front(); }
    double t_back() const { return ts.back(); }

    // Cubic Hermite between bracketing accepted steps; clamps outside.
    State eval(double t) const {
        if (ts.size() == 1 || t <= ts.front()) return ys.front();
        if (t >= ts.back()) return ys.back();
        const auto it = std::upper_bound(ts.begin(), ts.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - ts.begin()) - 1;
        const double h = ts[i + 1] - ts[i];
        const double s = (t - ts[i]) / h;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        return h00 * ys[i] + (h10 * h) * fs[i] + h01 * ys[i + 1] + (h11 * h) * fs[i + 1];
    }
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

// Integrates y' = f(t,y) from t0 to t1 (either direction). Returns the dense
// trajectory. rtol/atol control the embedded error estimate.
template <typename State, typename F>
Trajectory<State> integrate(const F& f, double t0, double t1, const State& y0, double rtol,
                            double atol, StepStats* stats = nullptr) {
    using detail::A21, detail::A31, detail::A32, detail::A41, detail::A42, detail::A43;
    using detail::A51, detail::A52, detail::A53, detail::A54;
    using detail::A61, detail::A62, detail::A63, detail::A64, detail::A65;
    using detail::B1, detail::B3, detail::B4, detail::B5, detail::B6;
    using detail::C2, detail::C3, detail::C4, detail::C5;
    using detail::E1, detail::E3, detail::E4, detail::E5, detail::E6, detail::E7;

    Trajectory<State> traj;
    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    double t = t0;
    State y = y0;
    State k1 = f(t, y);
    traj.ts.push_back(t);
    traj.ys.push_back(y);
    traj.fs.push_back(k1);
    if (span == 0.0) return traj;

    double h = dir * std::min(span, std::max(1e-6, 0.01 * span));
    const double h_min = span * 1e-14;
    std::size_t guard = 0;
    while (dir * (t1 - t) > 0) {
        if (++guard > 40'000'000u) throw ConvergenceError("step-size collapse in RK integrator");
        if (dir * (t + h - t1) > 0) h = t1 - t;
        const State k2 = f(t + C2 * h, y + h * (A21 * k1));
        const State k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
        const State k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        const State k5 = f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        const State k6 = f(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        const State ynew = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        const State k7 = f(t + h, ynew);
        const State err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        const double sc = atol + rtol * std::max(y.norm(), ynew.norm());
        const double err_norm = err.norm() / sc;
        if (err_norm <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            traj.ts.push_back(t);
            traj.ys.push_back(y);
            traj.fs.push_back(k1);
            if (stats) ++stats->accepted;
            const double fac = std::clamp(0.9 * std::pow(std::max(err_norm, 1e-12), -0.2), 1.0, 5.0);
            h *= fac;
        } else {
            if (stats) ++stats->rejected;
            const double fac = std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 0.9);
            h *= fac;
            if (std::abs(h) < h_min) throw ConvergenceError("step-size collapse in RK integrator");
        }
    }
    return traj;
}

}  // namespace hyplab::rk
