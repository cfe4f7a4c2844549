#pragma once

// Level-set geometry of homogeneous-degree-one phases: the sets
// Sigma = {phi(xi) = 1}, local graph charts, contact orders of tangent lines
// against plane sections, convexity verdicts, and the convex/non-convex
// indices gamma = sup_sigma sup_P and gamma0 = sup_sigma inf_P.
//
// Taylor data of a section graph is obtained by a Chebyshev least-squares fit
// of the solved graph; per-order finite differences at a usable step cannot
// separate "a2 = 0 exactly" from "a2 small" at flat points (the quartic's
// step-size bias is ~1e-3 against a 1e-5 threshold), so the fit estimates all
// coefficients jointly and the thresholds carry per-order noise floors.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyplab/errors.hpp"
#include "hyplab/expr.hpp"
#include "hyplab/symbol.hpp"
#include "hyplab/taylor_fit.hpp"
#include "json.hpp"

namespace hyplab::geometry {

using symbol::Xi;

struct HomogeneousPhase {
    int n = 0;
    std::function<double(const Xi&)> f;
    std::string label;

    double operator()(const Xi& xi) const { return f(xi); }
};

// Standalone phase from an expression in xi1..xin; validated to be
// homogeneous of degree one on random samples.
inline HomogeneousPhase phase_from_expression(const std::string& source, int n) {
    if (n < 2 || n > 3) throw ConfigError("phase expressions need n in {2,3}");
    expr::ParseOptions opt;
    opt.variables = {"xi1", "xi2", "xi3"};
    opt.allow_sqrt = true;
    opt.allow_real_exponents = true;
    const expr::NodePtr ast = expr::parse(source, opt);
    HomogeneousPhase ph;
    ph.n = n;
    ph.label = source;
    ph.f = [ast](const Xi& xi) {
        const double vars[3] = {xi[0], xi[1], xi[2]};
        return expr::eval_node(*ast, vars);
    };
    // homogeneity check
    std::uint64_t state = 88172645463325252ull;
    const auto rnd = [&state]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return 2.0 * (static_cast<double>(state % 1000000) / 1000000.0) - 1.0;
    };
    for (int i = 0; i < 32; ++i) {
        Xi xi;
        xi.n = n;
        for (int d = 0; d < n; ++d) xi[d] = rnd();
        if (xi.norm() < 0.3) continue;
        const double base = ph(xi);
        for (double s : {0.5, 2.0, 10.0}) {
            const double scaled = ph(xi.scaled(s));
            if (std::abs(scaled - s * base) > 1e-10 * std::max(1.0, std::abs(s * base)))
                throw ConfigError("phase expression is not homogeneous of degree one: " + source);
        }
    }
    return ph;
}

// sigma = direction / phi(direction); phi(sigma) = 1 exactly by homogeneity.
inline Xi trace_point(const HomogeneousPhase& phase, const Xi& direction) {
    const double v = phase(direction);
    if (!(v > 0.0)) throw EvalError("phase is not positive along the requested direction");
    return direction.scaled(1.0 / v);
}

namespace detail {

inline Xi gradient(const HomogeneousPhase& phase, const Xi& p) {
    Xi g;
    g.n = phase.n;
    const double h = 1e-6;
    for (int d = 0; d < phase.n; ++d) {
        Xi pp = p, pm = p;
        pp[d] += h;
        pm[d] -= h;
        g[d] = (phase(pp) - phase(pm)) / (2.0 * h);
    }
    return g;
}

}  // namespace detail

// Local graph chart at sigma: rotated coordinates with the outward normal as
// the last axis; the level set is {sigma + sum y_i tan_i + w(y) normal}.
class GraphChart {
public:
    GraphChart(const HomogeneousPhase& phase, const Xi& sigma) : phase_(&phase), sigma_(sigma) {
        const Xi g = detail::gradient(phase, sigma);
        const double gn = g.norm();
        if (gn < 1e-8) throw ChartError("degenerate normal at the chart point");
        normal_ = g.scaled(1.0 / gn);
        if (phase.n == 2) {
            tan_[0] = Xi(-normal_[1], normal_[0]);
            ntan_ = 1;
        } else {
            // Gram-Schmidt a coordinate axis least aligned with the normal.
            int least = 0;
            for (int d = 1; d < 3; ++d)
                if (std::abs(normal_[d]) < std::abs(normal_[least])) least = d;
            Xi u;
            u.n = 3;
            u[least] = 1.0;
            const double proj = u[0] * normal_[0] + u[1] * normal_[1] + u[2] * normal_[2];
            for (int d = 0; d < 3; ++d) u[d] -= proj * normal_[d];
            const double un = u.norm();
            for (int d = 0; d < 3; ++d) u[d] /= un;
            Xi v;
            v.n = 3;
            v[0] = normal_[1] * u[2] - normal_[2] * u[1];
            v[1] = normal_[2] * u[0] - normal_[0] * u[2];
            v[2] = normal_[0] * u[1] - normal_[1] * u[0];
            tan_[0] = u;
            tan_[1] = v;
            ntan_ = 2;
        }
    }

    const Xi& sigma() const { return sigma_; }
    const Xi& normal() const { return normal_; }
    int codim() const { return ntan_; }

    // Natural length scale of the chart; windows and thresholds are taken in
    // these units so that order detection commutes with phase rescaling.
    double scale() const { return sigma_.norm(); }

    // Graph offset along the normal at tangent displacement s in the plane
    // direction ang (ignored when n=2). Brackets the intersection nearest to
    // w=0 along the normal line, then bisects with Newton acceleration.
    double w(double s, double ang = 0.0) const {
        Xi dir = tan_[0];
        if (ntan_ == 2) {
            const double ca = std::cos(ang), sa = std::sin(ang);
            for (int d = 0; d < 3; ++d) dir[d] = ca * tan_[0][d] + sa * tan_[1][d];
        }
        Xi base = sigma_;
        for (int d = 0; d < phase_->n; ++d) base[d] += s * dir[d];
        const auto g = [&](double wv) {
            Xi p = base;
            for (int d = 0; d < phase_->n; ++d) p[d] += wv * normal_[d];
            return (*phase_)(p)-1.0;
        };
        // outward scan for the sign change nearest to w = 0
        const double step = 0.05, reach = 1.0;
        double lo = 0.0, hi = 0.0, glo = g(0.0), ghi = glo;
        bool found = std::abs(glo) < 1e-15;
        if (!found) {
            for (double off = step; off <= reach; off += step) {
                for (const double wv : {-off, off}) {
                    const double gv = g(wv);
                    if ((gv < 0) != (glo < 0)) {
                        hi = wv;
                        ghi = gv;
                        if (wv < 0) {
                            lo = wv + step;
                            glo = g(lo);
                            std::swap(lo, hi);
                            std::swap(glo, ghi);
                        } else {
                            lo = wv - step;
                            glo = g(lo);
                        }
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
        } else {
            return 0.0;
        }
        if (!found) throw ChartError("chart breakdown: level set not found along the normal");
        if (lo > hi) {
            std::swap(lo, hi);
            std::swap(glo, ghi);
        }
        // safeguarded Newton within [lo, hi]
        double wv = 0.5 * (lo + hi);
        for (int it = 0; it < 100; ++it) {
            const double gv = g(wv);
            if (std::abs(gv) < 1e-14) return wv;
            const double hstep = 1e-7;
            const double dg = (g(wv + hstep) - gv) / hstep;
            double cand = (dg != 0.0) ? wv - gv / dg : lo - 1.0;
            if ((gv < 0) == (glo < 0)) {
                lo = wv;
                glo = gv;
            } else {
                hi = wv;
            }
            if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
            if (hi - lo < 1e-15) return 0.5 * (lo + hi);
            wv = cand;
        }
        return wv;
    }

    // Absolute height h(y) = sigma.normal + w(y); matches the textbook chart
    // where the level set is {(y, h(y))} in rotated coordinates.
    double h(double s, double ang = 0.0) const {
        double s0 = 0.0;
        for (int d = 0; d < phase_->n; ++d) s0 += sigma_[d] * normal_[d];
        return s0 + w(s, ang);
    }

    // Taylor coefficients a_0..a_degree of w at 0 along plane direction ang,
    // by Chebyshev least squares on [-radius, radius].
    std::vector<double> section_taylor(double ang, int degree, double radius) const {
        return numeric::taylor_fit([&](double s) { return w(s, ang); }, radius, degree);
    }

private:
    const HomogeneousPhase* phase_;
    Xi sigma_, normal_;
    std::array<Xi, 2> tan_{};
    int ntan_ = 0;
};

inline GraphChart graph_chart(const HomogeneousPhase& phase, const Xi& sigma) {
    return GraphChart(phase, sigma);
}

namespace detail {

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// First k >= 2 whose derivative w^(k)(0) = a_k k! exceeds the noise-aware
// threshold; nullopt when everything through gamma_max stays below it.
inline std::optional<int> order_from_taylor(const std::vector<double>& taylor, int gamma_max,
                                            double radius, double h_scale) {
    const double fit_sigma = 3e-12;
    for (int k = 2; k <= gamma_max && k < static_cast<int>(taylor.size()); ++k) {
        const double deriv = taylor[static_cast<std::size_t>(k)] * factorial(k);
        const double noise = 20.0 * fit_sigma / std::pow(radius, k) * factorial(k);
        const double thresh = std::max(1e-5 * h_scale, noise);
        if (std::abs(deriv) > thresh) return k;
    }
    return std::nullopt;
}

}  // namespace detail

namespace detail {

// Section fit with radius fallback: sharply bent sections can push the chart
// past its validity range, in which case the fit window is halved.
inline std::pair<std::vector<double>, double> section_taylor_adaptive(const GraphChart& chart,
                                                                      double ang, int degree,
                                                                      double radius) {
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            return {chart.section_taylor(ang, degree, radius), radius};
        } catch (const ChartError&) {
            if (attempt == 3) throw;
            radius *= 0.5;
        }
    }
    throw ChartError("chart breakdown");
}

// Taylor data of the normalized section w(scale*u)/scale on a window of
// (normalized) half-width `radius`, plus the window actually used.
inline std::pair<std::vector<double>, double> normalized_section(const GraphChart& chart, double ang,
                                                                 int degree, double radius) {
    const double sc = chart.scale();
    auto [taylor, used] = section_taylor_adaptive(chart, ang, degree, radius * sc);
    double pw = 1.0 / sc;
    for (auto& c : taylor) {
        c *= pw;
        pw *= sc;
    }
    return {std::move(taylor), used / sc};
}

}  // namespace detail

// Contact order of the tangent line against the section curve of the chart
// along plane direction ang.
inline std::optional<int> contact_order(const GraphChart& chart, double ang = 0.0, int gamma_max = 8,
                                        double radius = 0.35) {
    const int degree = std::min(gamma_max + 4, 14);
    const auto [taylor, used] = detail::normalized_section(chart, ang, degree, radius);
    return detail::order_from_taylor(taylor, gamma_max, used, 1.0);
}

struct PointReport {
    Xi sigma;
    std::vector<int> orders;  // one per sampled plane (single entry for n=2)
    double a2 = 0.0;          // leading curvature coefficient of the chart
};

struct ContactReport {
    bool convex = false;
    int gamma = 0;
    int gamma0 = 0;
    std::vector<PointReport> points;

    nlohmann::json to_json() const {
        nlohmann::json js;
        js["convex"] = convex;
        js["gamma"] = gamma;
        js["gamma0"] = gamma0;
        js["points"] = nlohmann::json::array();
        for (const auto& p : points) {
            nlohmann::json pt;
            pt["sigma"] = std::vector<double>(p.sigma.c.begin(), p.sigma.c.begin() + p.sigma.n);
            pt["orders"] = p.orders;
            js["points"].push_back(pt);
        }
        return js;
    }
};

namespace detail {

struct SectionProbe {
    double a2 = 0.0;
    std::optional<int> order;
};

inline SectionProbe probe_direction(const HomogeneousPhase& phase, double theta, int gamma_max,
                                    double radius) {
    const Xi dir(std::cos(theta), std::sin(theta));
    const GraphChart chart(phase, trace_point(phase, dir));
    const int degree = std::min(gamma_max + 4, 14);
    const auto [taylor, used] = normalized_section(chart, 0.0, degree, radius);
    return SectionProbe{taylor[2], order_from_taylor(taylor, gamma_max, used, 1.0)};
}

}  // namespace detail

// Indices for n=2: the normal plane is unique, so gamma = gamma0 = the top
// contact order over the curve. Samples the circle, then refines the
// critical points of a2 (sign changes -> inflections, interior minima of
// |a2| -> flat tangencies) so that off-grid extremal orders are found.
inline ContactReport sugimoto_indices_2d(const HomogeneousPhase& phase, int sphere_samples,
                                         int gamma_max, double radius = 0.35) {
    const int ns = std::max(sphere_samples, 16);
    std::vector<double> thetas(static_cast<std::size_t>(ns));
    std::vector<detail::SectionProbe> probes(static_cast<std::size_t>(ns));
    ContactReport rep;
    for (int i = 0; i < ns; ++i) {
        const double th = 2.0 * M_PI * i / ns;
        thetas[static_cast<std::size_t>(i)] = th;
        probes[static_cast<std::size_t>(i)] = detail::probe_direction(phase, th, gamma_max, radius);
    }

    bool convex = true;
    int top = 0;
    const auto account = [&](double theta, const detail::SectionProbe& p) {
        if (p.a2 > 1e-8) convex = false;
        if (!p.order)
            throw ConvergenceError("contact order exceeds gamma_max at theta = " + std::to_string(theta));
        top = std::max(top, *p.order);
        PointReport pr;
        pr.sigma = trace_point(phase, Xi(std::cos(theta), std::sin(theta)));
        pr.orders = {*p.order};
        pr.a2 = p.a2;
        rep.points.push_back(std::move(pr));
    };
    for (int i = 0; i < ns; ++i) account(thetas[static_cast<std::size_t>(i)], probes[static_cast<std::size_t>(i)]);

    // refinement of the critical angles of a2
    const auto a2_at = [&](double th) { return detail::probe_direction(phase, th, gamma_max, radius).a2; };
    for (int i = 0; i < ns; ++i) {
        const int j = (i + 1) % ns;
        double ta = thetas[static_cast<std::size_t>(i)];
        double tb = ta + 2.0 * M_PI / ns;
        const double fa = probes[static_cast<std::size_t>(i)].a2;
        const double fb = probes[static_cast<std::size_t>(j)].a2;
        if ((fa < 0) != (fb < 0)) {
            double lo = ta, hi = tb, flo = fa;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = a2_at(mid);
                if ((flo < 0) == (fm < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            const double th = 0.5 * (lo + hi);
            account(th, detail::probe_direction(phase, th, gamma_max, radius));
        }
    }
    for (int i = 0; i < ns; ++i) {
        const double prev = std::abs(probes[static_cast<std::size_t>((i + ns - 1) % ns)].a2);
        const double cur = std::abs(probes[static_cast<std::size_t>(i)].a2);
        const double next = std::abs(probes[static_cast<std::size_t>((i + 1) % ns)].a2);
        if (cur < prev && cur < next && cur < 0.1) {
            // Flat-tangency candidate: iterate the parabola vertex of the
            // signed a2 (smooth in theta), which stays accurate well below
            // the |a2| noise plateau where a section search would stall.
            double th = thetas[static_cast<std::size_t>(i)];
            double span = 2.0 * M_PI / ns;
            for (int it = 0; it < 4; ++it) {
                const double fm = a2_at(th - span), f0 = a2_at(th), fp = a2_at(th + span);
                // all probes at the noise floor: already on the flat point
                if (std::max({std::abs(fm), std::abs(f0), std::abs(fp)}) < 3e-8) break;
                const double denom = fm - 2.0 * f0 + fp;
                if (std::abs(denom) < 1e-14) break;
                double shift = 0.5 * (fm - fp) / denom * span;
                shift = std::clamp(shift, -span, span);
                th += shift;
                span = std::max(span / 32.0, 1e-7);
            }
            // sup semantics: take the largest order over the refined triple
            for (const double probe_th : {th - span, th, th + span})
                account(probe_th, detail::probe_direction(phase, probe_th, gamma_max, radius));
        }
    }

    rep.convex = convex;
    rep.gamma = top;
    rep.gamma0 = top;
    return rep;
}

inline ContactReport sugimoto_indices_3d(const HomogeneousPhase& phase, int sphere_samples,
                                         int plane_samples, int gamma_max, double radius = 0.3) {
    ContactReport rep;
    bool convex = true;
    int top = 0, top_inf = 0;
    const int degree = std::min(gamma_max + 4, 14);
    for (const auto& dir : symbol::sphere_points(3, std::max(sphere_samples, 8))) {
        const Xi sigma = trace_point(phase, dir);
        const GraphChart chart(phase, sigma);
        PointReport pr;
        pr.sigma = sigma;
        int point_min = gamma_max + 1;
        bool any_exceeds = false;
        for (int j = 0; j < std::max(plane_samples, 4); ++j) {
            const double ang = M_PI * j / std::max(plane_samples, 4);
            const auto [taylor, used] = detail::normalized_section(chart, ang, degree, radius);
            if (taylor[2] > 1e-8) convex = false;
            const auto ord = detail::order_from_taylor(taylor, gamma_max, used, 1.0);
            if (!ord) {
                any_exceeds = true;
                continue;
            }
            pr.orders.push_back(*ord);
            point_min = std::min(point_min, *ord);
            top = std::max(top, *ord);
        }
        if (any_exceeds)
            throw ConvergenceError("contact order exceeds gamma_max at a sampled plane");
        top_inf = std::max(top_inf, point_min);
        rep.points.push_back(std::move(pr));
    }
    rep.convex = convex;
    rep.gamma = top;
    rep.gamma0 = top_inf;
    return rep;
}

inline ContactReport sugimoto_indices(const HomogeneousPhase& phase, int sphere_samples = 256,
                                      int plane_samples = 64, int gamma_max = 8) {
    if (phase.n == 2) return sugimoto_indices_2d(phase, sphere_samples, gamma_max);
    if (phase.n == 3) return sugimoto_indices_3d(phase, sphere_samples, plane_samples, gamma_max);
    throw ConfigError("contact indices need n in {2,3}");
}

struct ShiftedPhase {
    HomogeneousPhase phase;
    bool sign_flipped = false;
    bool alpha_linear = true;
    int branch = 0;
};

// Subtracts the mid-gap function alpha (arithmetic mean of the two middle
// roots for even m, the middle root for odd m) from branch k of the limiting
// roots, flipping sign so that the result is positive on the sphere.
inline ShiftedPhase linear_shift(const symbol::LimitRoots& lr, int k, bool plus_side = true) {
    const symbol::OperatorSpec op = plus_side ? lr.limit_plus : lr.limit_minus;
    const int m = op.m();
    if (k < 0 || k >= m) throw ConfigError("branch index out of range");
    const auto roots_at = [op](const Xi& xi) { return symbol::characteristic_roots(op, 0.0, xi); };
    const auto alpha_at = [m, roots_at](const Xi& xi) {
        const auto r = roots_at(xi);
        if (m % 2 == 1) return r[static_cast<std::size_t>((m - 1) / 2)];
        return 0.5 * (r[static_cast<std::size_t>(m / 2 - 1)] + r[static_cast<std::size_t>(m / 2)]);
    };

    ShiftedPhase sp;
    sp.branch = k;
    // sampled linearity of alpha
    Xi e1, e2;
    e1.n = e2.n = op.n();
    e1[0] = 1.0;
    e2[std::min(1, op.n() - 1)] = 1.0;
    const double a1 = alpha_at(e1), a2v = alpha_at(e2);
    for (int i = 0; i < 16 && sp.alpha_linear; ++i) {
        Xi p;
        p.n = op.n();
        p[0] = std::cos(0.39 * i + 0.2);
        p[std::min(1, op.n() - 1)] = std::sin(0.39 * i + 0.2);
        const double lin = a1 * p[0] + (op.n() > 1 ? a2v * p[1] : 0.0);
        if (std::abs(alpha_at(p) - lin) > 1e-8 * std::max(1.0, std::abs(lin))) sp.alpha_linear = false;
    }

    // sign of the shifted branch on the sphere
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (const auto& w : symbol::sphere_points(op.n(), 64)) {
        const double v = roots_at(w)[static_cast<std::size_t>(k)] - alpha_at(w);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    const double tol = 1e-9;
    bool flip = false;
    if (mn > tol) {
        flip = false;
    } else if (mx < -tol) {
        flip = true;
    } else {
        throw EvalError("shifted phase is not sign-definite on the sampled sphere (branch " +
                        std::to_string(k) + ")");
    }
    sp.sign_flipped = flip;
    const double sgn = flip ? -1.0 : 1.0;
    sp.phase.n = op.n();
    sp.phase.label = "limit-branch-" + std::to_string(k) + (plus_side ? "+" : "-");
    sp.phase.f = [roots_at, alpha_at, k, sgn](const Xi& xi) {
        return sgn * (roots_at(xi)[static_cast<std::size_t>(k)] - alpha_at(xi));
    };
    return sp;
}

}  // namespace hyplab::geometry
