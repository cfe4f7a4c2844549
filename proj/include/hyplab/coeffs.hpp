#pragma once

// Time-dependent coefficients a(t) as parsed expressions with exact symbolic
// derivatives, L1-moment certification of a', and the perturbation weight
// Psi(t) = sum |a'(t)| over the principal coefficients.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "hyplab/expr.hpp"
#include "hyplab/quadrature.hpp"

namespace hyplab::coeffs {

class CoeffExpr {
public:
    CoeffExpr() = default;

    explicit CoeffExpr(const std::string& source) : source_(source) {
        expr::ParseOptions opt;
        opt.variables = {"t"};
        ast_ = expr::parse(source, opt);
        deriv_ = expr::differentiate(ast_, 0);
    }

    double operator()(double t) const {
        const double v = expr::eval_node(*ast_, &t);
        if (!std::isfinite(v)) throw EvalError("coefficient evaluated to a non-finite value");
        return v;
    }

    double derivative(double t) const {
        const double v = expr::eval_node(*deriv_, &t);
        if (!std::isfinite(v)) throw EvalError("coefficient derivative evaluated to a non-finite value");
        return v;
    }

    // True when the symbolic derivative folded to the literal 0.
    bool is_constant() const {
        return deriv_ && deriv_->kind == expr::Node::Kind::Const && deriv_->value == 0.0;
    }

    const std::string& source() const { return source_; }
    bool valid() const { return static_cast<bool>(ast_); }

private:
    std::string source_;
    expr::NodePtr ast_, deriv_;
};

inline CoeffExpr parse_coefficient(const std::string& source) { return CoeffExpr(source); }

inline double eval(const CoeffExpr& e, double t) { return e(t); }

struct MomentReport {
    int order = 0;
    double value = 0.0;
    bool converged = false;
    double tail_bound = 0.0;
};

// Certifies (1+|t|)^r a' in L1 by adaptive quadrature over doubling windows
// [-T, T]; converged=false (never a throw) when the cap is hit first.
inline MomentReport moment_check(const CoeffExpr& e, int r, double tol, double t_cap = 1048576.0) {
    MomentReport rep;
    rep.order = r;
    if (e.is_constant()) {
        rep.converged = true;
        return rep;
    }
    const auto weighted = [&](double t) {
        return std::pow(1.0 + std::abs(t), r) * std::abs(e.derivative(t));
    };
    double T = 1.0;
    double total = quad::adaptive_gk(weighted, -T, T, 0.1 * tol);
    for (;;) {
        const double inc = quad::adaptive_gk(weighted, T, 2.0 * T, 0.1 * tol) +
                           quad::adaptive_gk(weighted, -2.0 * T, -T, 0.1 * tol);
        total += inc;
        T *= 2.0;
        rep.value = total;
        rep.tail_bound = std::abs(inc);
        if (std::abs(inc) < tol && T >= 8.0) {
            rep.converged = true;
            return rep;
        }
        if (T > t_cap) return rep;  // converged stays false
    }
}

// Psi(t) = sum over the stored coefficients of |a'(t)|.
class PsiFunction {
public:
    PsiFunction() = default;
    explicit PsiFunction(std::vector<CoeffExpr> terms) : terms_(std::move(terms)) {}

    double operator()(double t) const {
        double s = 0.0;
        for (const auto& e : terms_) s += std::abs(e.derivative(t));
        return s;
    }

    bool identically_zero() const {
        for (const auto& e : terms_)
            if (!e.is_constant()) return false;
        return true;
    }

    // int_{|t|}^{+inf} Psi(s) ds over the branch sign(dir).
    double tail(double t, int dir, double tol = 1e-12) const {
        if (identically_zero()) return 0.0;
        return quad::tail_integral([this](double s) { return (*this)(s); }, std::abs(t), dir, tol);
    }

    // Two-sided tail: int over |s| >= |t| of Psi.
    double tail_both(double t, double tol = 1e-12) const {
        return tail(t, +1, tol) + tail(t, -1, tol);
    }

    const std::vector<CoeffExpr>& terms() const { return terms_; }

private:
    std::vector<CoeffExpr> terms_;
};

}  // namespace hyplab::coeffs
