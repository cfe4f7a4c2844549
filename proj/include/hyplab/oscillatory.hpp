#pragma once

// Oscillatory integrals at desk scale: the model integral
// I(lambda,nu) = int e^{i lambda Phi(x,nu)} a(x,nu) chi(x) dx with the
// van der Corput phase conditions (F1)-(F4), the windowed dispersive kernel
// I(t,x) of the propagator with profile amplitudes, the stationary /
// non-stationary split, and log-log envelope fits against predicted powers.
//
// Quadrature is oscillation-resolved fixed-order panels (Gauss-Legendre 16),
// with a hard budget on function evaluations.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "hyplab/asymint.hpp"
#include "hyplab/cutoffs.hpp"
#include "hyplab/quadrature.hpp"
#include "hyplab/taylor_fit.hpp"

namespace hyplab::oscillatory {

using Cd = std::complex<double>;
using symbol::Xi;

using cutoffs::bump;

struct ModelIntegral {
    int dim = 1;   // N in {1, 2}
    int gamma = 2; // expected contact order of the phase
    // dim 1: Phi(x, nu) on the line; dim 2: Phi given in polar form F(rho, omega_angle, nu)
    std::function<double(double, const std::vector<double>&)> phase_line;
    std::function<double(double, double, const std::vector<double>&)> phase_polar;
    std::function<double(double, const std::vector<double>&)> amplitude =
        [](double, const std::vector<double>&) { return 1.0; };
    std::function<double(double)> cutoff = [](double x) { return bump(x, 1.0); };
    double support = 1.0;            // integration reach in |x| (or rho)
    std::size_t eval_budget = 10'000'000;
};

// Convenience: the power-phase model F = x^gamma with a choice of cutoff.
inline ModelIntegral power_phase_model(int gamma, const std::string& cutoff, double width) {
    ModelIntegral mi;
    mi.dim = 1;
    mi.gamma = gamma;
    mi.phase_line = [gamma](double x, const std::vector<double>&) {
        double p = 1.0;
        for (int i = 0; i < gamma; ++i) p *= x;
        return p;
    };
    if (cutoff == "gauss") {
        const double w = width;
        mi.cutoff = [w](double x) { return std::exp(-(x * x) / (w * w)); };
        mi.support = 8.0 * width;
    } else if (cutoff == "bump") {
        const double w = width;
        mi.cutoff = [w](double x) { return bump(x, w); };
        mi.support = width;
    } else {
        throw ConfigError("unknown cutoff profile: " + cutoff);
    }
    return mi;
}

namespace detail {

inline std::size_t panels_for(double total_phase, std::size_t base, std::size_t budget) {
    const double periods = std::abs(total_phase) / (2.0 * M_PI);
    // >= 20 points per period at 16 points per panel
    const std::size_t need = static_cast<std::size_t>(std::ceil(periods * 20.0 / 16.0)) + base;
    if (need * 16 > budget) throw ResolutionError("oscillatory quadrature exceeds the evaluation budget");
    return need;
}

}  // namespace detail

inline Cd eval_model(const ModelIntegral& mi, double lambda, const std::vector<double>& nu = {}) {
    if (lambda < 0) throw ConfigError("eval_model needs lambda >= 0");
    if (mi.dim == 1) {
        // estimate the phase range on a coarse grid
        double fmin = 0.0, fmax = 0.0;
        for (int i = 0; i <= 64; ++i) {
            const double x = -mi.support + 2.0 * mi.support * i / 64.0;
            const double f = mi.phase_line(x, nu);
            fmin = std::min(fmin, f);
            fmax = std::max(fmax, f);
        }
        const std::size_t panels = detail::panels_for(lambda * (fmax - fmin), 16, mi.eval_budget);
        return quad::gl16_panels(
            [&](double x) -> Cd {
                const double chi = mi.cutoff(x);
                if (chi == 0.0) return Cd(0.0, 0.0);
                return std::exp(Cd(0.0, lambda * mi.phase_line(x, nu))) * (mi.amplitude(x, nu) * chi);
            },
            -mi.support, mi.support, panels);
    }
    if (mi.dim != 2) throw ConfigError("model integrals support N in {1,2}");
    // polar tensor quadrature: int_0^{2pi} int_0^support e^{i lambda F} a chi rho drho dang
    double fr = 0.0, fa = 0.0;
    for (int i = 0; i <= 32; ++i)
        for (int j = 0; j <= 32; ++j) {
            const double rho = mi.support * i / 32.0;
            const double ang = 2.0 * M_PI * j / 32.0;
            const double f = mi.phase_polar(rho, ang, nu);
            fr = std::max(fr, std::abs(f));
            fa = std::max(fa, std::abs(f));
        }
    const std::size_t pr = detail::panels_for(2.0 * lambda * fr, 8, mi.eval_budget);
    const std::size_t pa = detail::panels_for(2.0 * lambda * fa, 8, mi.eval_budget / (16 * pr));
    return quad::gl16_panels(
        [&](double ang) -> Cd {
            return quad::gl16_panels(
                [&](double rho) -> Cd {
                    const double chi = mi.cutoff(rho);
                    if (chi == 0.0) return Cd(0.0, 0.0);
                    return std::exp(Cd(0.0, lambda * mi.phase_polar(rho, ang, nu))) *
                           (mi.amplitude(rho, nu) * chi * rho);
                },
                0.0, mi.support, pr);
        },
        0.0, 2.0 * M_PI, pa);
}

struct PhaseConditionReport {
    bool f1 = false, f2 = false, f3 = false, f4 = false;
    double a0 = 0.0, a1 = 0.0;
    double f2_constant = 0.0;  // min over nu of sum_{j=2..gamma} |a_j|
    double f4_bound = 0.0;     // max over rho, nu, k <= gamma+1 of |d^k F|
    bool all() const { return f1 && f2 && f3 && f4; }
};

// Numerical verification of conditions (F1)-(F4) for a family of radial
// phases F(rho, nu) over the sampled parameter set.
template <typename PhaseF>
PhaseConditionReport check_phase_conditions(const PhaseF& f, const std::vector<std::vector<double>>& nus,
                                            int gamma, double delta) {
    PhaseConditionReport rep;
    rep.f1 = rep.f2 = rep.f3 = rep.f4 = true;
    rep.f2_constant = std::numeric_limits<double>::infinity();
    for (const auto& nu : nus) {
        const auto taylor = numeric::taylor_fit([&](double r) { return f(r, nu); },
                                                0.45 * delta, std::max(gamma + 3, 12));
        rep.a0 = std::max(rep.a0, std::abs(taylor[0]));
        rep.a1 = std::max(rep.a1, std::abs(taylor[1]));
        if (std::abs(taylor[0]) > 1e-8 || std::abs(taylor[1]) > 1e-8) rep.f1 = false;
        double s = 0.0;
        for (int j = 2; j <= gamma; ++j) s += std::abs(taylor[static_cast<std::size_t>(j)]);
        rep.f2_constant = std::min(rep.f2_constant, s);
        // |dF/drho| increasing on (0, delta)
        double prev = 0.0;
        for (int i = 1; i <= 40; ++i) {
            const double rho = delta * i / 41.0;
            const double h = 1e-6 * delta;
            const double d = std::abs((f(rho + h, nu) - f(rho - h, nu)) / (2 * h));
            if (d + 1e-10 < prev) rep.f3 = false;
            prev = d;
        }
        // boundedness of d^k F up to gamma+1 via the fitted polynomial
        double fk = 0.0;
        double fact = 1.0;
        for (int k = 0; k <= gamma + 1 && k < static_cast<int>(taylor.size()); ++k) {
            if (k > 0) fact *= k;
            fk = std::max(fk, std::abs(taylor[static_cast<std::size_t>(k)]) * fact);
        }
        rep.f4_bound = std::max(rep.f4_bound, fk);
        if (!std::isfinite(fk)) rep.f4 = false;
    }
    if (rep.f2_constant <= 1e-8) rep.f2 = false;
    return rep;
}

struct EnvelopeFit {
    std::vector<double> lambdas;
    std::vector<double> magnitudes;
    double fitted_slope = 0.0;
    double sup_constant = 0.0;  // sup (1+lambda)^{power} |I|
    double predicted_power = 0.0;
};

// Log-log least squares over [window_lo, window_hi].
inline EnvelopeFit fit_envelope(const std::vector<double>& lambdas, const std::vector<double>& mags,
                                double predicted_power, double window_lo, double window_hi) {
    if (lambdas.size() != mags.size() || lambdas.size() < 2)
        throw ConfigError("envelope fit needs matching lambda/magnitude series");
    EnvelopeFit fit;
    fit.lambdas = lambdas;
    fit.magnitudes = mags;
    fit.predicted_power = predicted_power;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        fit.sup_constant = std::max(fit.sup_constant,
                                    std::pow(1.0 + lambdas[i], predicted_power) * mags[i]);
        if (lambdas[i] < window_lo || lambdas[i] > window_hi) continue;
        if (!(mags[i] > 0.0)) throw ConfigError("non-positive magnitude inside the fit window");
        const double x = std::log(lambdas[i]), y = std::log(mags[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) throw ConfigError("fit window too small");
    const double det = m * sxx - sx * sx;
    fit.fitted_slope = (m * sxy - sx * sy) / det;
    return fit;
}

// ---------------------------------------------------------------------------
// Dispersive kernel I(t,x) over a frequency annulus, with amplitudes
// (alpha + eps(t)) n^{lj} |xi|^{l-k} from the asymptotic profiles.

struct KernelOptions {
    int l = 0;                  // derivative row
    int k = 0;                  // data column
    double r_lo = 0.5, r_hi = 4.0;
    int angular_nodes = 128;    // table resolution over owega
    double radial_oversample = 10.0;
    bool smooth_window = true;  // taper the annulus edges (C^inf plateau)
    double rk_tol = 1e-10;
    std::size_t eval_budget = 30'000'000;
};

class KernelEvaluator {
public:
    KernelEvaluator(const symbol::OperatorSpec& op, double t, KernelOptions opt = {})
        : op_(op), diag_{op, 0.0}, t_(t), opt_(opt) {
        if (op.n() != 2) throw ConfigError("dispersive kernels are implemented for n = 2");
        if (t == 0.0) throw ConfigError("kernel time must be nonzero");
        const int m = op.m();
        const int na = opt_.angular_nodes;
        theta_.assign(static_cast<std::size_t>(na), {});
        nlj_.assign(static_cast<std::size_t>(na), {});
        double max_gap = 0.0;
        for (int i = 0; i < 8; ++i) {
            const auto mu = symbol::unit_roots(op_, 0.4 * i, Xi(std::cos(0.7 * i), std::sin(0.7 * i)));
            max_gap = std::max(max_gap, mu.front() - mu.back());
        }
        // radial table must resolve the oscillation of Q(t; r omega) in r,
        // whose rate is bounded by the phase gap over the coupling window
        const double tq = std::min(std::abs(t), 20.0);
        const int nr = std::max<int>(12, static_cast<int>(opt_.radial_oversample * (opt_.r_hi - opt_.r_lo) *
                                                          max_gap * tq / (2.0 * M_PI)) + 8);
        q_table_.assign(static_cast<std::size_t>(na),
                        std::vector<std::vector<Cd>>(static_cast<std::size_t>(nr)));
        r_nodes_.resize(static_cast<std::size_t>(nr));
        for (int j = 0; j < nr; ++j)
            r_nodes_[static_cast<std::size_t>(j)] =
                opt_.r_lo + (opt_.r_hi - opt_.r_lo) * j / std::max(1, nr - 1);
        asymint::ProfileOptions popt;
        popt.rk_tol = opt_.rk_tol;
        popt.two_sided = false;
        for (int i = 0; i < na; ++i) {
            const double ang = 2.0 * M_PI * i / na;
            const Xi omega(std::cos(ang), std::sin(ang));
            spectral::PhaseAccumulator acc(op_, omega, 1e-10);
            const auto d = spectral::diag_point(op_, t, omega);
            theta_[static_cast<std::size_t>(i)] = acc.theta_unit(t);
            nlj_[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j)
                nlj_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d.N_inv(opt_.l, j);
            for (int j = 0; j < nr; ++j) {
                const double r = r_nodes_[static_cast<std::size_t>(j)];
                auto prof = asymint::compute_profile(diag_, acc, omega.scaled(r), popt);
                const auto q = prof.q(std::min(std::abs(t), prof.trunc_time));
                std::vector<Cd> col(static_cast<std::size_t>(m));
                for (int a = 0; a < m; ++a) col[static_cast<std::size_t>(a)] = q(a, opt_.k);
                q_table_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::move(col);
            }
        }
    }

    // Gradient (in xi) of theta_j at angle ang; r-independent by homogeneity.
    std::array<double, 2> grad_theta(double ang, int j) const {
        const int na = opt_.angular_nodes;
        const double pos = ang / (2.0 * M_PI) * na;
        int i0 = static_cast<int>(std::floor(pos)) % na;
        if (i0 < 0) i0 += na;
        const int im = (i0 + na - 1) % na, ip = (i0 + 1) % na;
        const double dth = 2.0 * M_PI / na;
        const double tv = theta_[static_cast<std::size_t>(i0)][static_cast<std::size_t>(j)];
        const double dv = (theta_[static_cast<std::size_t>(ip)][static_cast<std::size_t>(j)] -
                           theta_[static_cast<std::size_t>(im)][static_cast<std::size_t>(j)]) /
                          (2.0 * dth);
        const double c = std::cos(ang), s = std::sin(ang);
        return {tv * c - dv * s, tv * s + dv * c};
    }

    // Full kernel over the annulus; mode 0 = everything, +1 = stationary
    // part (branchwise bump on |x + grad theta_j|/|t| <= rcut), -1 = rest.
    Cd eval(double x1, double x2) const { return eval_cut(x1, x2, 0.0, 0); }

    std::pair<Cd, Cd> split(double x1, double x2, double rcut) const {
        return {eval_cut(x1, x2, rcut, +1), eval_cut(x1, x2, rcut, -1)};
    }

    double sup_group_speed() const {
        double v = 0.0;
        for (std::size_t i = 0; i < theta_.size(); ++i)
            for (std::size_t j = 0; j < theta_[i].size(); ++j)
                v = std::max(v, std::abs(theta_[i][j]) / std::abs(t_));
        return v;
    }

private:
    template <typename T>
    static T catmull_rom(const T& ym, const T& y0, const T& y1, const T& yp, double u) {
        return y0 + 0.5 * u * (y1 - ym + u * (2.0 * ym - 5.0 * y0 + 4.0 * y1 - yp +
                                              u * (3.0 * (y0 - y1) + yp - ym)));
    }

    Cd eval_cut(double x1, double x2, double rcut, int mode) const {
        const double xabs = std::hypot(x1, x2);
        const double reach = sup_group_speed() * std::abs(t_);
        const double dphase_r = xabs + reach;
        const std::size_t pr =
            detail::panels_for((opt_.r_hi - opt_.r_lo) * dphase_r, 12, opt_.eval_budget);
        const std::size_t pa = detail::panels_for(2.0 * M_PI * opt_.r_hi * dphase_r, 12,
                                                  opt_.eval_budget / (16 * pr));
        return quad::gl16_panels(
            [&](double ang) -> Cd {
                return quad::gl16_panels(
                    [&](double r) -> Cd { return integrand(r, ang, x1, x2, rcut, mode) * r; },
                    opt_.r_lo, opt_.r_hi, pr);
            },
            0.0, 2.0 * M_PI, pa);
    }

    Cd integrand(double r, double ang, double x1, double x2, double rcut, int mode) const {
        const int m = op_.m();
        const int na = opt_.angular_nodes;
        const int nr = static_cast<int>(r_nodes_.size());
        double pos = ang / (2.0 * M_PI) * na;
        int i0 = static_cast<int>(std::floor(pos));
        const double fu = pos - i0;
        i0 %= na;
        if (i0 < 0) i0 += na;
        const double rpos = (r - opt_.r_lo) / (r_nodes_.back() - r_nodes_.front()) * (nr - 1);
        const int j0 = std::min(nr - 2, std::max(0, static_cast<int>(std::floor(rpos))));
        const double gu = rpos - j0;
        const auto ai = [na](int i) { return static_cast<std::size_t>(((i % na) + na) % na); };
        const auto rj = [nr](int j) { return static_cast<std::size_t>(std::clamp(j, 0, nr - 1)); };
        const double xdot = (x1 * std::cos(ang) + x2 * std::sin(ang)) * r;
        double window = 1.0;
        if (opt_.smooth_window) {
            const double margin = 0.15 * (opt_.r_hi - opt_.r_lo);
            window = cutoffs::smoothstep((r - opt_.r_lo) / margin) * cutoffs::smoothstep((opt_.r_hi - r) / margin);
        }
        if (window == 0.0) return Cd(0.0, 0.0);
        Cd acc(0.0, 0.0);
        for (int j = 0; j < m; ++j) {
            const std::size_t sj = static_cast<std::size_t>(j);
            const double th = catmull_rom(theta_[ai(i0 - 1)][sj], theta_[ai(i0)][sj],
                                          theta_[ai(i0 + 1)][sj], theta_[ai(i0 + 2)][sj], fu) *
                              r;
            const double nl = catmull_rom(nlj_[ai(i0 - 1)][sj], nlj_[ai(i0)][sj],
                                          nlj_[ai(i0 + 1)][sj], nlj_[ai(i0 + 2)][sj], fu);
            std::array<Cd, 4> qrow;
            for (int d = -1; d <= 2; ++d) {
                const auto& tab = q_table_[ai(i0 + d)];
                qrow[static_cast<std::size_t>(d + 1)] =
                    catmull_rom(tab[rj(j0 - 1)][sj], tab[rj(j0)][sj], tab[rj(j0 + 1)][sj],
                                tab[rj(j0 + 2)][sj], gu);
            }
            const Cd q = catmull_rom(qrow[0], qrow[1], qrow[2], qrow[3], fu);
            double weight = 1.0;
            if (mode != 0) {
                const auto g = grad_theta(ang, j);
                const double dist = std::hypot(x1 + g[0], x2 + g[1]) / std::abs(t_);
                const double kappa = bump(dist, rcut);
                weight = (mode > 0) ? kappa : 1.0 - kappa;
            }
            if (weight != 0.0)
                acc += std::exp(Cd(0.0, xdot + th)) * (nl * weight * window) * q *
                       std::pow(r, opt_.l - opt_.k);
        }
        return acc;
    }

    symbol::OperatorSpec op_;
    spectral::Diagonalizer diag_;
    double t_;
    KernelOptions opt_;
    std::vector<std::vector<double>> theta_;
    std::vector<std::vector<double>> nlj_;
    std::vector<std::vector<std::vector<Cd>>> q_table_;  // [ang][r][j]
    std::vector<double> r_nodes_;
};

}  // namespace hyplab::oscillatory
