#pragma once

// The operator L(t, tau, xi) with homogeneous symbol of order m, its real
// characteristic roots phi_k(t;xi) in strictly descending order, the closed
// formula for their time derivatives, sampled strict-hyperbolicity
// certification, and the limiting roots phi_k^± of the constant-coefficient
// operator at t -> ±infinity.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "hyplab/coeffs.hpp"
#include "hyplab/errors.hpp"
#include "json.hpp"

namespace hyplab::symbol {

// Frequency point, dimension n <= 3.
struct Xi {
    std::array<double, 3> c{0.0, 0.0, 0.0};
    int n = 0;

    Xi() = default;
    Xi(double x) : c{x, 0.0, 0.0}, n(1) {}
    Xi(double x, double y) : c{x, y, 0.0}, n(2) {}
    Xi(double x, double y, double z) : c{x, y, z}, n(3) {}

    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

    double norm() const {
        return std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    }
    Xi unit() const {
        const double r = norm();
        Xi u = *this;
        if (r > 0)
            for (auto& x : u.c) x /= r;
        return u;
    }
    Xi scaled(double s) const {
        Xi u = *this;
        for (auto& x : u.c) x *= s;
        return u;
    }
};

inline Xi operator+(const Xi& a, const Xi& b) {
    Xi r = a;
    for (int i = 0; i < 3; ++i) r.c[static_cast<std::size_t>(i)] += b.c[static_cast<std::size_t>(i)];
    return r;
}

struct TableEntry {
    std::array<int, 3> nu{0, 0, 0};
    int j = 0;
    coeffs::CoeffExpr a;

    int nu_order() const { return nu[0] + nu[1] + nu[2]; }
};

inline double monomial(const Xi& xi, const std::array<int, 3>& nu) {
    double r = 1.0;
    for (int i = 0; i < xi.n; ++i)
        for (int k = 0; k < nu[static_cast<std::size_t>(i)]; ++k) r *= xi[i];
    return r;
}

class OperatorSpec {
public:
    OperatorSpec() = default;

    OperatorSpec(int m, int n, std::vector<TableEntry> entries)
        : m_(m), n_(n), entries_(std::move(entries)) {
        if (m_ < 2) throw ConfigError("operator order m must be >= 2");
        if (n_ < 1 || n_ > 3) throw ConfigError("spatial dimension n must be in 1..3");
        if (entries_.empty()) throw ConfigError("empty coefficient table");
        for (const auto& e : entries_) {
            if (e.j < 0 || e.j > m_ - 1) throw ConfigError("coefficient with j outside 0..m-1");
            if (e.nu_order() + e.j != m_)
                throw ConfigError("coefficient with |nu|+j != m (symbol must be homogeneous)");
            for (int i = n_; i < 3; ++i)
                if (e.nu[static_cast<std::size_t>(i)] != 0)
                    throw ConfigError("multi-index longer than the spatial dimension");
        }
    }

    static OperatorSpec from_json(const nlohmann::json& js) {
        if (!js.contains("m") || !js.contains("n") || !js.contains("coeffs"))
            throw ConfigError("operator file must contain m, n, coeffs");
        const int m = js.at("m").get<int>();
        const int n = js.at("n").get<int>();
        std::vector<TableEntry> entries;
        for (const auto& item : js.at("coeffs")) {
            TableEntry e;
            const auto nu = item.at("nu").get<std::vector<int>>();
            if (static_cast<int>(nu.size()) != n)
                throw ConfigError("multi-index length must equal the dimension n");
            for (std::size_t i = 0; i < nu.size(); ++i) {
                if (nu[i] < 0) throw ConfigError("negative multi-index entry");
                e.nu[i] = nu[i];
            }
            e.j = item.at("j").get<int>();
            e.a = coeffs::CoeffExpr(item.at("expr").get<std::string>());
            entries.push_back(std::move(e));
        }
        return OperatorSpec(m, n, std::move(entries));
    }

    nlohmann::json to_json() const {
        nlohmann::json js;
        js["m"] = m_;
        js["n"] = n_;
        js["coeffs"] = nlohmann::json::array();
        for (const auto& e : entries_) {
            nlohmann::json item;
            item["nu"] = std::vector<int>(e.nu.begin(), e.nu.begin() + n_);
            item["j"] = e.j;
            item["expr"] = e.a.source();
            js["coeffs"].push_back(item);
        }
        return js;
    }

    int m() const { return m_; }
    int n() const { return n_; }
    const std::vector<TableEntry>& entries() const { return entries_; }

    bool all_constant() const {
        for (const auto& e : entries_)
            if (!e.a.is_constant()) return false;
        return true;
    }

    coeffs::PsiFunction psi_function() const {
        std::vector<coeffs::CoeffExpr> terms;
        for (const auto& e : entries_) terms.push_back(e.a);
        return coeffs::PsiFunction(std::move(terms));
    }

    // Psi(t) = sum |a'_{nu,j}(t)| over the coefficient table.
    double psi(double t) const {
        double s = 0.0;
        for (const auto& e : entries_) s += std::abs(e.a.derivative(t));
        return s;
    }

    // h[j-1] = h_j(t;xi) = sum_{|nu|=j} a_{nu,m-j}(t) xi^nu, j = 1..m.
    void h_values(double t, const Xi& xi, double* h) const {
        std::fill(h, h + m_, 0.0);
        for (const auto& e : entries_) h[e.nu_order() - 1] += e.a(t) * monomial(xi, e.nu);
    }

    // Same with the symbolic time derivative a'.
    void h_derivatives(double t, const Xi& xi, double* hd) const {
        std::fill(hd, hd + m_, 0.0);
        for (const auto& e : entries_) hd[e.nu_order() - 1] += e.a.derivative(t) * monomial(xi, e.nu);
    }

    // L(t, tau, xi) = tau^m + sum a_{nu,j}(t) xi^nu tau^j.
    double eval_symbol(double t, double tau, const Xi& xi) const {
        double v = std::pow(tau, m_);
        for (const auto& e : entries_) v += e.a(t) * monomial(xi, e.nu) * std::pow(tau, e.j);
        return v;
    }

private:
    int m_ = 0, n_ = 0;
    std::vector<TableEntry> entries_;
};

namespace detail {

// Real roots of mu^m + h[0] mu^{m-1} + ... + h[m-1], strictly descending.
// Companion-matrix eigenvalues with one Newton polish; imaginary parts below
// imag_tol are flattened, larger ones raise NonHyperbolicError.
inline void poly_roots_descending(const double* h, int m, double* out, double t_for_error,
                                  double imag_tol = 1e-9, double collision_tol = 1e-7) {
    if (m == 2) {
        const double b = h[0], c = h[1];
        const double disc = b * b - 4.0 * c;
        if (disc < -imag_tol * imag_tol)
            throw NonHyperbolicError("complex characteristic roots (negative discriminant)", t_for_error);
        const double sq = std::sqrt(std::max(disc, 0.0));
        double r1, r2;
        if (b >= 0) {
            const double q = -0.5 * (b + sq);
            r1 = q;
            r2 = (q != 0.0) ? c / q : 0.0;
        } else {
            const double q = -0.5 * (b - sq);
            r1 = q;
            r2 = (q != 0.0) ? c / q : 0.0;
        }
        out[0] = std::max(r1, r2);
        out[1] = std::min(r1, r2);
    } else {
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i + 1 < m; ++i) comp(i, i + 1) = 1.0;
        for (int j = 0; j < m; ++j) comp(m - 1, j) = -h[m - 1 - j];
        Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
        const auto ev = es.eigenvalues();
        for (int k = 0; k < m; ++k) {
            if (std::abs(ev[k].imag()) > imag_tol)
                throw NonHyperbolicError("complex characteristic root beyond tolerance", t_for_error);
            out[k] = ev[k].real();
        }
        // One Newton step per root.
        for (int k = 0; k < m; ++k) {
            double p = 1.0, dp = 0.0, mu = out[k];
            for (int j = 0; j < m; ++j) {
                dp = dp * mu + p;
                p = p * mu + h[j];
            }
            if (dp != 0.0) out[k] = mu - p / dp;
        }
        std::sort(out, out + m, std::greater<double>());
    }
    for (int k = 0; k + 1 < m; ++k)
        if (out[k] - out[k + 1] < collision_tol)
            throw RootCollisionError("characteristic root gap below separation tolerance", t_for_error);
}

}  // namespace detail

// Roots at unit frequency direction; phi_k(t;xi) = |xi| * unit_roots(t, xi/|xi|).
inline std::vector<double> unit_roots(const OperatorSpec& op, double t, const Xi& omega) {
    std::vector<double> h(static_cast<std::size_t>(op.m()));
    op.h_values(t, omega, h.data());
    std::vector<double> mu(static_cast<std::size_t>(op.m()));
    detail::poly_roots_descending(h.data(), op.m(), mu.data(), t);
    return mu;
}

inline std::vector<double> characteristic_roots(const OperatorSpec& op, double t, const Xi& xi) {
    const double r = xi.norm();
    if (r == 0.0) throw ConfigError("characteristic roots need xi != 0");
    std::vector<double> mu = unit_roots(op, t, xi.unit());
    for (auto& v : mu) v *= r;
    return mu;
}

// d/dt phi_k by the closed product formula, using the symbolic a'.
// Index k is 0-based into the descending order.
inline double root_time_derivative(const OperatorSpec& op, double t, const Xi& xi, int k) {
    const std::vector<double> phi = characteristic_roots(op, t, xi);
    double num = 0.0;
    const double phik = phi[static_cast<std::size_t>(k)];
    for (const auto& e : op.entries())
        num += e.a.derivative(t) * std::pow(phik, e.j) * monomial(xi, e.nu);
    double den = 1.0;
    for (int r = 0; r < op.m(); ++r)
        if (r != k) den *= phik - phi[static_cast<std::size_t>(r)];
    return -num / den;
}

// All m root derivatives at the unit direction, given the unit roots.
inline void unit_root_time_derivatives(const OperatorSpec& op, double t, const Xi& omega,
                                       const std::vector<double>& mu, double* dmu) {
    const int m = op.m();
    std::vector<double> hd(static_cast<std::size_t>(m));
    op.h_derivatives(t, omega, hd.data());
    for (int k = 0; k < m; ++k) {
        const double muk = mu[static_cast<std::size_t>(k)];
        // numerator: sum_j hd[j-1] mu_k^{m-j}  (h_j carries xi^nu with |nu| = j)
        double num = 0.0, pw = 1.0;
        for (int j = m; j >= 1; --j) {
            num += hd[static_cast<std::size_t>(j - 1)] * pw;
            pw *= muk;
        }
        double den = 1.0;
        for (int r = 0; r < m; ++r)
            if (r != k) den *= muk - mu[static_cast<std::size_t>(r)];
        dmu[k] = -num / den;
    }
}

// Quasi-uniform unit sphere sample; samples_per_dim is the resolution per
// angular dimension (n=1 gives {+1,-1}; n=3 uses a Fibonacci lattice).
inline std::vector<Xi> sphere_points(int n, int samples_per_dim) {
    std::vector<Xi> pts;
    if (n == 1) {
        pts.emplace_back(1.0);
        pts.emplace_back(-1.0);
    } else if (n == 2) {
        const int count = std::max(samples_per_dim, 8);
        for (int i = 0; i < count; ++i) {
            const double a = 2.0 * M_PI * i / count;
            pts.emplace_back(std::cos(a), std::sin(a));
        }
    } else {
        const int count = std::max(samples_per_dim, 8) * std::max(samples_per_dim, 8);
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double a = golden * i;
            pts.emplace_back(r * std::cos(a), r * std::sin(a), z);
        }
    }
    return pts;
}

// Sampled certificate of (1.5)-style root separation plus the linear growth
// bound |phi_k| <= C |xi|.
struct RootField {
    OperatorSpec op;
    double separation = 0.0;     // min gap of unit-sphere roots over samples
    double bound_constant = 0.0; // max |unit root| over samples

    std::vector<double> roots(double t, const Xi& xi) const {
        return characteristic_roots(op, t, xi);
    }
};

inline RootField hyperbolicity_certificate(const OperatorSpec& op, const std::vector<double>& t_grid,
                                           int sphere_samples) {
    RootField rf;
    rf.op = op;
    double min_gap = std::numeric_limits<double>::infinity();
    double max_root = 0.0;
    const auto omegas = sphere_points(op.n(), sphere_samples);
    for (const double t : t_grid) {
        for (const auto& w : omegas) {
            const auto mu = unit_roots(op, t, w);
            for (std::size_t k = 0; k + 1 < mu.size(); ++k) min_gap = std::min(min_gap, mu[k] - mu[k + 1]);
            for (const double v : mu) max_root = std::max(max_root, std::abs(v));
        }
    }
    rf.separation = min_gap;
    rf.bound_constant = max_root;
    return rf;
}

// Limiting coefficients a^± = a(0) + int_0^{±inf} a' and the roots of the
// limiting constant-coefficient operator.
struct LimitRoots {
    OperatorSpec limit_plus;   // constant-coefficient operators
    OperatorSpec limit_minus;
    std::vector<std::pair<double, double>> limit_coeffs;  // (a^+, a^-) per table entry

    std::vector<double> plus(const Xi& xi) const { return characteristic_roots(limit_plus, 0.0, xi); }
    std::vector<double> minus(const Xi& xi) const { return characteristic_roots(limit_minus, 0.0, xi); }
};

namespace detail {
inline std::string number_source(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}
}  // namespace detail

inline LimitRoots limiting_roots(const OperatorSpec& op, double tol = 1e-11) {
    LimitRoots lr;
    std::vector<TableEntry> plus_entries, minus_entries;
    for (const auto& e : op.entries()) {
        double ap = e.a(0.0), am = e.a(0.0);
        if (!e.a.is_constant()) {
            const auto rep = coeffs::moment_check(e.a, 0, tol);
            if (!rep.converged) throw ConvergenceError("divergent moment: coefficient " + e.a.source());
            // a^± = a(0) + int_0^{±inf} a'; the minus branch integral reverses
            // orientation relative to int_{-inf}^0.
            ap += quad::tail_integral([&](double s) { return e.a.derivative(s); }, 0.0, +1, tol);
            am -= quad::tail_integral([&](double s) { return e.a.derivative(s); }, 0.0, -1, tol);
        }
        lr.limit_coeffs.emplace_back(ap, am);
        TableEntry pe = e, me = e;
        pe.a = coeffs::CoeffExpr(detail::number_source(ap));
        me.a = coeffs::CoeffExpr(detail::number_source(am));
        plus_entries.push_back(std::move(pe));
        minus_entries.push_back(std::move(me));
    }
    lr.limit_plus = OperatorSpec(op.m(), op.n(), std::move(plus_entries));
    lr.limit_minus = OperatorSpec(op.m(), op.n(), std::move(minus_entries));
    return lr;
}

}  // namespace hyplab::symbol
