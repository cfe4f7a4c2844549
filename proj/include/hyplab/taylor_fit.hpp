#pragma once

// Taylor coefficients of a smooth 1-D function at 0 by Chebyshev least
// squares on [-radius, radius]. Shared by the level-set charts and the
// oscillatory phase-condition checks.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace hyplab::numeric {

namespace detail {

inline Eigen::MatrixXd cheb_to_mono_matrix(int degree) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
    t(0, 0) = 1.0;
    if (degree >= 1) t(1, 1) = 1.0;
    for (int j = 2; j <= degree; ++j) {
        for (int k = 0; k < degree; ++k) t(j, k + 1) += 2.0 * t(j - 1, k);
        for (int k = 0; k <= degree; ++k) t(j, k) -= t(j - 2, k);
    }
    return t;
}

}  // namespace detail

template <typename F>
std::vector<double> taylor_fit(const F& f, double radius, int degree) {
    const int mpts = std::max(4 * degree, 48);
    Eigen::MatrixXd a(mpts, degree + 1);
    Eigen::VectorXd b(mpts);
    for (int i = 0; i < mpts; ++i) {
        const double u = std::cos(M_PI * (i + 0.5) / mpts);
        b(i) = f(radius * u);
        double tprev = 1.0, tcur = u;
        a(i, 0) = 1.0;
        if (degree >= 1) a(i, 1) = u;
        for (int j = 2; j <= degree; ++j) {
            const double tnext = 2.0 * u * tcur - tprev;
            a(i, j) = tnext;
            tprev = tcur;
            tcur = tnext;
        }
    }
    const Eigen::VectorXd cheb = a.householderQr().solve(b);
    const Eigen::MatrixXd conv = detail::cheb_to_mono_matrix(degree);
    std::vector<double> taylor(static_cast<std::size_t>(degree + 1), 0.0);
    for (int k = 0; k <= degree; ++k) {
        double c = 0.0;
        for (int j = k; j <= degree; ++j) c += cheb(j) * conv(j, k);
        taylor[static_cast<std::size_t>(k)] = c / std::pow(radius, k);
    }
    return taylor;
}

}  // namespace hyplab::numeric
