#pragma once

// First-order reduction of the symbol to the companion system
// D_t v = H(t,xi)|xi| v, the exact diagonalizer N with N H = D N built from
// left eigenvectors in closed Vandermonde/Horner form, phase integrals
// theta_j(t;xi), the coupling matrix C = Phi^{-1} (D_t N) N^{-1} Phi, and the
// Gronwall energy check.
//
// All diagonalizer quantities are functions of (t, omega) with omega on the
// unit sphere; homogeneity of degree 0 in xi holds by construction.

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "hyplab/quadrature.hpp"
#include "hyplab/rk.hpp"
#include "hyplab/symbol.hpp"

namespace hyplab::spectral {

using symbol::OperatorSpec;
using symbol::Xi;
using Cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;

inline double op_norm(const RMat& a) { return a.jacobiSvd().singularValues()(0); }
inline double op_norm(const CMat& a) { return a.jacobiSvd().singularValues()(0); }

struct CompanionSystem {
    OperatorSpec op;

    // H(t, xi): companion matrix with -H_m ... -H_1 in the last row,
    // H_j = h_j at the unit direction of xi.
    RMat H(double t, const Xi& xi) const {
        const int m = op.m();
        std::vector<double> h(static_cast<std::size_t>(m));
        op.h_values(t, xi.unit(), h.data());
        RMat mat = RMat::Zero(m, m);
        for (int i = 0; i + 1 < m; ++i) mat(i, i + 1) = 1.0;
        for (int j = 0; j < m; ++j) mat(m - 1, j) = -h[static_cast<std::size_t>(m - 1 - j)];
        return mat;
    }

    // Diagonal of D(t;xi): unit-sphere roots in descending order.
    std::vector<double> D(double t, const Xi& xi) const { return symbol::unit_roots(op, t, xi.unit()); }
};

inline CompanionSystem build_companion(const OperatorSpec& op) { return CompanionSystem{op}; }

// Pointwise diagonalizer data at (t, omega).
struct DiagPoint {
    std::vector<double> mu;   // unit roots, descending
    std::vector<double> dmu;  // d/dt of the roots (closed formula)
    RMat N, N_inv, dtN;
};

// Row k of N holds the Horner coefficients of L(tau)/(tau - mu_k), last
// entry normalized to 1; N_inv(l,j) = mu_j^l / prod_{r!=j}(mu_j - mu_r).
inline DiagPoint diag_point(const OperatorSpec& op, double t, const Xi& omega) {
    const int m = op.m();
    DiagPoint d;
    std::vector<double> h(static_cast<std::size_t>(m)), hd(static_cast<std::size_t>(m));
    op.h_values(t, omega, h.data());
    op.h_derivatives(t, omega, hd.data());
    std::vector<double> mu(static_cast<std::size_t>(m));
    symbol::detail::poly_roots_descending(h.data(), m, mu.data(), t);
    d.mu = mu;
    d.dmu.resize(static_cast<std::size_t>(m));
    symbol::unit_root_time_derivatives(op, t, omega, mu, d.dmu.data());

    d.N = RMat::Zero(m, m);
    d.dtN = RMat::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        // b_0 = 1, b_i = mu_k b_{i-1} + h_i; N(k, m-1-i) = b_i.
        double b = 1.0, db = 0.0;
        d.N(k, m - 1) = b;
        d.dtN(k, m - 1) = db;
        for (int i = 1; i < m; ++i) {
            const double bp = b, dbp = db;
            b = mu[static_cast<std::size_t>(k)] * bp + h[static_cast<std::size_t>(i - 1)];
            db = d.dmu[static_cast<std::size_t>(k)] * bp + mu[static_cast<std::size_t>(k)] * dbp +
                 hd[static_cast<std::size_t>(i - 1)];
            d.N(k, m - 1 - i) = b;
            d.dtN(k, m - 1 - i) = db;
        }
    }
    d.N_inv = RMat::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        double denom = 1.0;
        for (int r = 0; r < m; ++r)
            if (r != j) denom *= mu[static_cast<std::size_t>(j)] - mu[static_cast<std::size_t>(r)];
        double pw = 1.0;
        for (int l = 0; l < m; ++l) {
            d.N_inv(l, j) = pw / denom;
            pw *= mu[static_cast<std::size_t>(j)];
        }
    }
    return d;
}

struct Diagonalizer {
    OperatorSpec op;
    double det_lower_bound = 0.0;  // sampled lower bound of |det N|

    DiagPoint at(double t, const Xi& xi) const { return diag_point(op, t, xi.unit()); }
    RMat N(double t, const Xi& xi) const { return at(t, xi).N; }
    RMat N_inv(double t, const Xi& xi) const { return at(t, xi).N_inv; }
    RMat dtN(double t, const Xi& xi) const { return at(t, xi).dtN; }
};

inline Diagonalizer build_diagonalizer(const CompanionSystem& cs, const symbol::RootField& roots,
                                       const std::vector<double>& t_samples = {-40, -10, -3, -1, 0, 1, 3, 10, 40},
                                       int sphere_samples = 16) {
    Diagonalizer d;
    d.op = cs.op;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& w : symbol::sphere_points(cs.op.n(), sphere_samples))
        for (const double t : t_samples)
            lo = std::min(lo, std::abs(diag_point(cs.op, t, w).N.determinant()));
    (void)roots;
    d.det_lower_bound = lo;
    return d;
}

// Phase integrals theta_j(t;xi) = int_0^t phi_j(s;xi) ds along a fixed ray
// direction; cumulative values are cached at previously requested times.
class PhaseAccumulator {
public:
    PhaseAccumulator(OperatorSpec op, Xi omega, double quad_tol = 1e-8)
        : op_(std::move(op)), omega_(omega.unit()), tol_(quad_tol),
          constant_(op_.all_constant()) {
        cache_[0.0] = std::vector<double>(static_cast<std::size_t>(op_.m()), 0.0);
        if (constant_) mu0_ = symbol::unit_roots(op_, 0.0, omega_);
    }

    const Xi& direction() const { return omega_; }
    double quad_tol() const { return tol_; }

    // theta at unit radius; scale by |xi| for a general point on the ray.
    std::vector<double> theta_unit(double t) {
        const int m = op_.m();
        if (constant_) {
            std::vector<double> th(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j) th[static_cast<std::size_t>(j)] = mu0_[static_cast<std::size_t>(j)] * t;
            return th;
        }
        auto it = cache_.find(t);
        if (it != cache_.end()) return it->second;
        // Integrate from the nearest cached time.
        auto base = cache_.lower_bound(t);
        if (base == cache_.end() || (base != cache_.begin() &&
                                     std::abs(std::prev(base)->first - t) < std::abs(base->first - t)))
            --base;
        std::vector<double> th = base->second;
        for (int j = 0; j < m; ++j) {
            th[static_cast<std::size_t>(j)] += quad::adaptive_simpson(
                [&](double s) { return symbol::unit_roots(op_, s, omega_)[static_cast<std::size_t>(j)]; },
                base->first, t, tol_);
        }
        cache_[t] = th;
        return th;
    }

    std::vector<double> theta(double t, const Xi& xi) {
        const double r = xi.norm();
        std::vector<double> th = theta_unit(t);
        for (auto& v : th) v *= r;
        return th;
    }

private:
    OperatorSpec op_;
    Xi omega_;
    double tol_;
    bool constant_;
    std::vector<double> mu0_;
    std::map<double, std::vector<double>> cache_;
};

inline std::vector<double> phases(const symbol::RootField& roots, double t, const Xi& xi,
                                  double quad_tol = 1e-8) {
    PhaseAccumulator acc(roots.op, xi, quad_tol);
    return acc.theta(t, xi);
}

// C(t;xi) = Phi^{-1} (D_t N) N^{-1} Phi with D_t = -i d/dt.
inline CMat coupling(const Diagonalizer& diag, PhaseAccumulator& ph, double t, const Xi& xi) {
    const int m = diag.op.m();
    const DiagPoint d = diag.at(t, xi);
    const RMat M = d.dtN * d.N_inv;
    const std::vector<double> th = ph.theta(t, xi);
    CMat c(m, m);
    const Cd mi(0.0, -1.0);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
            c(j, k) = mi * M(j, k) *
                      std::exp(Cd(0.0, th[static_cast<std::size_t>(k)] - th[static_cast<std::size_t>(j)]));
    return c;
}

// Direct adaptive integration of D_t v = |xi| H(t,xi) v; the reference
// solution path that bypasses the diagonalization entirely.
inline rk::Trajectory<CVec> integrate_companion(const CompanionSystem& cs, const Xi& xi,
                                                const CVec& v0, double t_end, double rtol = 1e-10,
                                                double atol = 1e-12) {
    const Xi omega = xi.unit();
    const double r = xi.norm();
    const auto rhs = [&](double t, const CVec& v) -> CVec {
        const RMat h = cs.H(t, omega);
        return Cd(0.0, 1.0) * r * (h.cast<Cd>() * v);
    };
    return rk::integrate(rhs, 0.0, t_end, v0, rtol, atol);
}

struct EnergyReport {
    double max_ratio = 0.0;      // worst |v(t)|^2 over the certified bound
    double exponent = 0.0;       // int 2 ||dtN|| ||N^{-1}|| over the run
    double const_factor = 0.0;   // sup ||N^{-1}||^2 * ||N(0)||^2
    bool pass = false;
};

// Integrates D_t v = H|xi| v for random data and checks the Gronwall bound
//   |v(t)|^2 <= C |v(0)|^2 exp(int_0^t 2 ||dtN|| ||N^{-1}||).
inline EnergyReport energy_check(const CompanionSystem& cs, const Diagonalizer& diag, const Xi& xi,
                                 double t_max, int n_data = 20, unsigned seed = 12345,
                                 double rk_tol = 1e-10) {
    const int m = cs.op.m();
    const double r = xi.norm();
    const Xi omega = xi.unit();

    const double norm_exp_tol = 1e-9;
    const double exponent = cs.op.all_constant()
                                ? 0.0
                                : quad::adaptive_simpson(
                                      [&](double s) {
                                          const DiagPoint d = diag_point(cs.op, s, omega);
                                          return 2.0 * op_norm(d.dtN) * op_norm(RMat(d.N_inv));
                                      },
                                      0.0, t_max, norm_exp_tol);
    double sup_ninv = 0.0;
    for (int i = 0; i <= 32; ++i) {
        const DiagPoint d = diag_point(cs.op, t_max * i / 32.0, omega);
        sup_ninv = std::max(sup_ninv, op_norm(RMat(d.N_inv)));
    }
    const double n0 = op_norm(diag_point(cs.op, 0.0, omega).N);
    const double cfac = sup_ninv * sup_ninv * n0 * n0;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    EnergyReport rep;
    rep.exponent = exponent;
    rep.const_factor = cfac;
    const auto rhs = [&](double t, const CVec& v) -> CVec {
        const RMat h = cs.H(t, omega);
        return Cd(0.0, 1.0) * r * (h.cast<Cd>() * v);
    };
    for (int trial = 0; trial < n_data; ++trial) {
        CVec v0(m);
        for (int i = 0; i < m; ++i) v0(i) = Cd(gauss(rng), gauss(rng));
        const auto traj = rk::integrate(rhs, 0.0, t_max, v0, rk_tol, rk_tol);
        const double denom = cfac * v0.squaredNorm() * std::exp(exponent);
        for (std::size_t i = 0; i < traj.ts.size(); ++i)
            rep.max_ratio = std::max(rep.max_ratio, traj.ys[i].squaredNorm() / denom);
    }
    rep.pass = rep.max_ratio <= 1.0 + 1e-8;
    return rep;
}

}  // namespace hyplab::spectral
