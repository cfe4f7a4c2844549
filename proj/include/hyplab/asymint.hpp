#pragma once

// Levinson-type asymptotic integration of the coupled system
// D_t z = C(t;xi) z:  solve for the fundamental matrix Q with Q(0) = N(0;xi),
// extract the limit amplitudes alpha_± = Q(±infinity) with a certified
// truncation bound, the decaying errors eps_±(t) = Q(t) - alpha_±, the
// Picard-series cross check, and the oscillatory-representation
// reconstruction of D_t^l u_hat.

#include <cmath>
#include <complex>
#include <vector>

#include "hyplab/quadrature.hpp"
#include "hyplab/rk.hpp"
#include "hyplab/spectral.hpp"

namespace hyplab::asymint {

using spectral::CMat;
using spectral::Cd;
using spectral::CVec;
using spectral::Diagonalizer;
using spectral::PhaseAccumulator;
using symbol::Xi;

// Q' = i C(t;xi) Q from 0 to t_end (either sign), Q(0) = N(0;xi).
inline rk::Trajectory<CMat> integrate_z(const Diagonalizer& diag, PhaseAccumulator& ph, const Xi& xi,
                                        double t_end, double tol = 1e-10) {
    const int m = diag.op.m();
    const Xi omega = xi.unit();
    const double r = xi.norm();
    const CMat q0 = spectral::diag_point(diag.op, 0.0, omega).N.cast<Cd>();
    if (diag.op.all_constant()) {
        // C vanishes identically; Q is constant.
        rk::Trajectory<CMat> traj;
        traj.ts = {0.0, t_end};
        traj.ys = {q0, q0};
        traj.fs = {CMat::Zero(m, m), CMat::Zero(m, m)};
        if (t_end < 0) std::swap(traj.ts[0], traj.ts[1]);
        return traj;
    }
    const auto rhs = [&](double t, const CMat& q) -> CMat {
        const auto d = spectral::diag_point(diag.op, t, omega);
        const spectral::RMat M = d.dtN * d.N_inv;
        const std::vector<double> th = ph.theta_unit(t);
        CMat c(m, m);
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                c(j, k) = M(j, k) * std::exp(Cd(0.0, r * (th[static_cast<std::size_t>(k)] -
                                                          th[static_cast<std::size_t>(j)])));
        // i * C with C = Phi^{-1} (-i dtN) N^{-1} Phi  =>  rhs = Phi^{-1} dtN N^{-1} Phi
        return c * q;
    };
    return rk::integrate(rhs, 0.0, t_end, q0, tol, tol);
}

struct AsymptoticProfile {
    Xi xi;
    CMat alpha_plus, alpha_minus;
    rk::Trajectory<CMat> traj_plus, traj_minus;
    double trunc_time = 0.0;
    double trunc_error_bound = 0.0;  // coupling_const * sup||Q|| * Psi tail
    double coupling_const = 0.0;     // sampled sup ||C|| / Psi

    const CMat& alpha(double t) const { return t >= 0 ? alpha_plus : alpha_minus; }

    CMat q(double t) const { return t >= 0 ? traj_plus.eval(t) : traj_minus.eval(t); }

    CMat eps(double t) const { return q(t) - alpha(t); }
};

struct ProfileOptions {
    double rk_tol = 1e-10;
    double tail_tol = 1e-8;   // target certified truncation error of alpha
    double t_cap = 1e6;       // refuse to integrate past this horizon
    double t_max = 0.0;       // 0 = choose from the Psi tail and tail_tol
    bool two_sided = true;
};

// Sampled constant c with ||C(t;xi)|| <= c Psi(t); moduli of C entries do not
// depend on |xi|, so any ray sample works.
inline double coupling_constant(const Diagonalizer& diag, double t_hi = 8.0) {
    if (diag.op.all_constant()) return 0.0;
    double worst = 0.0;
    for (int i = 1; i <= 64; ++i) {
        const double t = t_hi * i / 64.0;
        const double psi = diag.op.psi(t);
        if (psi < 1e-14) continue;
        for (const auto& w : symbol::sphere_points(diag.op.n(), 8)) {
            const auto d = spectral::diag_point(diag.op, t, w);
            const spectral::RMat M = d.dtN * d.N_inv;
            worst = std::max(worst, spectral::op_norm(M) / psi);
        }
    }
    return worst;
}

inline AsymptoticProfile extract_profile(const Diagonalizer& diag, rk::Trajectory<CMat> plus,
                                         rk::Trajectory<CMat> minus, const coeffs::PsiFunction& psi,
                                         double tail_tol) {
    AsymptoticProfile prof;
    prof.traj_plus = std::move(plus);
    prof.traj_minus = std::move(minus);
    prof.alpha_plus = prof.traj_plus.ys.back();
    prof.alpha_minus = prof.traj_minus.ys.back();
    prof.trunc_time = prof.traj_plus.t_back();
    prof.coupling_const = coupling_constant(diag);
    double supq = 0.0;
    for (const auto& y : prof.traj_plus.ys) supq = std::max(supq, spectral::op_norm(y));
    const double tail = psi.identically_zero() ? 0.0 : psi.tail(prof.trunc_time, +1, 0.01 * tail_tol);
    prof.trunc_error_bound = prof.coupling_const * supq * tail;
    return prof;
}

inline AsymptoticProfile compute_profile(const Diagonalizer& diag, PhaseAccumulator& ph, const Xi& xi,
                                         const ProfileOptions& opt = {}) {
    const auto psi = diag.op.psi_function();
    double t_max = opt.t_max;
    if (t_max <= 0.0) {
        if (diag.op.all_constant()) {
            t_max = 1.0;
        } else {
            const double c = std::max(coupling_constant(diag), 1e-6);
            t_max = 8.0;
            while (c * psi.tail(t_max, +1, 0.01 * opt.tail_tol) >= opt.tail_tol) {
                t_max *= 2.0;
                if (t_max > opt.t_cap)
                    throw ConvergenceError(
                        "Psi tail does not reach the requested truncation tolerance by t = " +
                        std::to_string(opt.t_cap) + "; required t_max exceeds it");
            }
        }
    }
    auto plus = integrate_z(diag, ph, xi, t_max, opt.rk_tol);
    auto minus = opt.two_sided ? integrate_z(diag, ph, xi, -t_max, opt.rk_tol)
                               : rk::Trajectory<CMat>{{0.0}, {plus.ys.front()}, {plus.fs.front()}};
    auto prof = extract_profile(diag, std::move(plus), std::move(minus), psi,
                                opt.tail_tol);
    prof.xi = xi;
    return prof;
}

// Truncated Picard (Dyson) series for Q(t), evaluated by iterated cumulative
// Simpson integrals on a uniform grid fine enough to resolve the phase
// oscillation of C. Independent of the adaptive integrator. `terms` is the
// truncation depth: the identity plus `terms` iterated integrals.
inline CMat picard_compare(const Diagonalizer& diag, PhaseAccumulator& ph, const Xi& xi, double t,
                           int terms, int min_points = 1025) {
    const int m = diag.op.m();
    const Xi omega = xi.unit();
    const double r = xi.norm();
    const CMat q0 = spectral::diag_point(diag.op, 0.0, omega).N.cast<Cd>();
    if (terms < 1) throw ConfigError("picard_compare needs terms >= 1");
    if (t == 0.0 || diag.op.all_constant()) return q0;

    // grid resolution from the largest phase gap
    double gap = 0.0;
    for (double s : {0.0, 0.3 * t, 0.7 * t, t}) {
        const auto mu = symbol::unit_roots(diag.op, s, omega);
        gap = std::max(gap, mu.front() - mu.back());
    }
    const double cycles = std::abs(t) * r * gap / (2.0 * M_PI);
    const int n = std::max(min_points, 2 * static_cast<int>(16.0 * cycles) + 1);
    const double h = t / (n - 1);

    std::vector<CMat> cmat(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double s = h * i;
        const auto d = spectral::diag_point(diag.op, s, omega);
        const spectral::RMat M = d.dtN * d.N_inv;
        const auto th = ph.theta_unit(s);
        CMat c(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                c(a, b) = M(a, b) * std::exp(Cd(0.0, r * (th[static_cast<std::size_t>(b)] -
                                                          th[static_cast<std::size_t>(a)])));
        cmat[static_cast<std::size_t>(i)] = c;  // i*C folded: rhs kernel is exactly this
    }

    // S_0 = Q0; S_{k+1}(t_i) = int_0^{t_i} C(s) S_k(s) ds (kernel already
    // includes the i factor); cumulative Simpson per entry.
    std::vector<CMat> total(static_cast<std::size_t>(n), q0);
    std::vector<CMat> cur(static_cast<std::size_t>(n), q0);
    for (int term = 1; term <= terms; ++term) {
        std::vector<CMat> prod(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) prod[static_cast<std::size_t>(i)] = cmat[static_cast<std::size_t>(i)] * cur[static_cast<std::size_t>(i)];
        std::vector<CMat> next(static_cast<std::size_t>(n), CMat::Zero(m, m));
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                std::vector<double> re(static_cast<std::size_t>(n)), im(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i) {
                    re[static_cast<std::size_t>(i)] = prod[static_cast<std::size_t>(i)](a, b).real();
                    im[static_cast<std::size_t>(i)] = prod[static_cast<std::size_t>(i)](a, b).imag();
                }
                const auto cre = quad::cumulative_uniform(re, h);
                const auto cim = quad::cumulative_uniform(im, h);
                for (int i = 0; i < n; ++i)
                    next[static_cast<std::size_t>(i)](a, b) = Cd(cre[static_cast<std::size_t>(i)], cim[static_cast<std::size_t>(i)]);
            }
        for (int i = 0; i < n; ++i) total[static_cast<std::size_t>(i)] += next[static_cast<std::size_t>(i)];
        cur = std::move(next);
    }
    return total.back();
}

// Oscillatory-representation reconstruction of D_t^l u_hat(t, xi):
//   sum_{j,k} e^{i theta_j} n^{lj}(t;xi) (alpha + eps(t))_{jk} |xi|^{l-k} f_hat_k.
inline Cd reconstruct_hat_u(const AsymptoticProfile& prof, const Diagonalizer& diag,
                            PhaseAccumulator& ph, const std::vector<Cd>& data_hat, int l, double t) {
    const int m = diag.op.m();
    const Xi omega = prof.xi.unit();
    const double r = prof.xi.norm();
    const CMat qt = prof.q(t);
    const auto d = spectral::diag_point(diag.op, t, omega);
    const auto th = ph.theta_unit(t);
    Cd acc(0.0, 0.0);
    for (int j = 0; j < m; ++j) {
        const Cd phase = std::exp(Cd(0.0, r * th[static_cast<std::size_t>(j)]));
        Cd inner(0.0, 0.0);
        for (int k = 0; k < m; ++k)
            inner += qt(j, k) * std::pow(r, l - k) * data_hat[static_cast<std::size_t>(k)];
        acc += phase * d.N_inv(l, j) * inner;
    }
    return acc;
}

struct DerivativeBoundReport {
    double sup_alpha_high = 0.0;   // sup |d alpha| over |xi| >= 1
    double sup_alpha_low = 0.0;    // sup |xi|^{|mu|} |d alpha| over |xi| < 1
    double sup_eps_ratio = 0.0;    // sup |d eps(t)| / envelope
    bool pass = true;
};

// Finite-difference xi-derivatives of alpha and eps along coordinate
// direction dir; asserts the amplitude envelopes with reported constants.
inline DerivativeBoundReport derivative_bounds_probe(const Diagonalizer& diag,
                                                     const std::vector<Xi>& xi_grid, int dir,
                                                     const std::vector<double>& times,
                                                     double envelope_cap = 1e4,
                                                     const ProfileOptions& opt = {}) {
    DerivativeBoundReport rep;
    const auto psi = diag.op.psi_function();
    for (const auto& xi : xi_grid) {
        const double r = xi.norm();
        const double h = 1e-4 * std::max(r, 0.1);
        Xi xp = xi, xm = xi;
        xp[dir] += h;
        xm[dir] -= h;
        PhaseAccumulator php(diag.op, xp.unit(), 1e-10), phm(diag.op, xm.unit(), 1e-10);
        const auto pp = compute_profile(diag, php, xp, opt);
        const auto pm = compute_profile(diag, phm, xm, opt);
        const double dalpha = ((pp.alpha_plus - pm.alpha_plus) / (2 * h)).cwiseAbs().maxCoeff();
        if (r >= 1.0)
            rep.sup_alpha_high = std::max(rep.sup_alpha_high, dalpha);
        else
            rep.sup_alpha_low = std::max(rep.sup_alpha_low, dalpha * r);
        for (const double t : times) {
            const double envelope =
                std::exp(quad::adaptive_gk([&](double s) { return (1.0 + s) * psi(s); }, 0.0,
                                           std::abs(t), 1e-10));
            const double deps = ((pp.eps(t) - pm.eps(t)) / (2 * h)).cwiseAbs().maxCoeff();
            const double scaled = r >= 1.0 ? deps : deps * r;
            rep.sup_eps_ratio = std::max(rep.sup_eps_ratio, scaled / envelope);
        }
    }
    rep.pass = rep.sup_alpha_high < envelope_cap && rep.sup_alpha_low < envelope_cap &&
               rep.sup_eps_ratio < envelope_cap;
    return rep;
}

}  // namespace hyplab::asymint
