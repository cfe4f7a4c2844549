#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include "hyplab/asymint.hpp"

using namespace hyplab;
using namespace hyplab::asymint;

namespace {

symbol::OperatorSpec load(const std::string& name) {
    std::ifstream in(std::string(HYPLAB_DATA_DIR) + "/" + name);
    REQUIRE(in.good());
    nlohmann::json js;
    in >> js;
    return symbol::OperatorSpec::from_json(js);
}

}  // namespace

TEST_CASE("constant coefficients: Q stays at N(0) and eps vanishes") {
    const auto op = load("wave_constant_n2.json");
    const Diagonalizer dg{op, 0.0};
    PhaseAccumulator ph(op, symbol::Xi(1.0, 0.0));
    auto prof = compute_profile(dg, ph, symbol::Xi(1.0, 0.0));
    const CMat n0 = spectral::diag_point(op, 0.0, symbol::Xi(1.0, 0.0)).N.cast<Cd>();
    CHECK((prof.alpha_plus - n0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((prof.alpha_minus - n0).cwiseAbs().maxCoeff() == 0.0);
    for (double t : {-0.7, 0.0, 0.4, 1.0})
        CHECK(prof.eps(t).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(prof.trunc_error_bound == 0.0);
}

TEST_CASE("Gaussian wave: trajectory is frozen after the bump and growth is Gronwall-bounded") {
    const auto op = load("wave_gauss_n2.json");
    const Diagonalizer dg{op, 0.0};
    PhaseAccumulator ph(op, symbol::Xi(1.0, 0.0));
    const auto traj = integrate_z(dg, ph, symbol::Xi(1.5, 0.0), 60.0, 1e-11);
    const CMat q40 = traj.eval(40.0);
    for (double t : {45.0, 50.0, 60.0})
        CHECK((traj.eval(t) - q40).cwiseAbs().maxCoeff() <= 1e-10);

    // ||Q(t)|| <= ||Q0|| exp(int ||C||) with int ||C|| <= c int Psi
    const auto psi = op.psi_function();
    const double c = coupling_constant(dg);
    const double budget = std::exp(c * (psi.tail(0.0, +1) )) * spectral::op_norm(traj.ys.front()) * (1.0 + 1e-6);
    for (const auto& q : traj.ys) CHECK(spectral::op_norm(q) <= budget);
}

TEST_CASE("eps decay is controlled by the Psi tail with one constant") {
    const auto op = load("wave_gauss_n2.json");
    const Diagonalizer dg{op, 0.0};
    const auto psi = op.psi_function();
    PhaseAccumulator ph(op, symbol::Xi(1.0, 0.0));
    auto prof = compute_profile(dg, ph, symbol::Xi(1.0, 0.0), {1e-12, 1e-10});
    double worst = 0.0;
    for (double t : {2.0, 2.5, 3.0, 4.0}) {
        const double tail = psi.tail(t, +1, 1e-14);
        const double e = prof.eps(t).cwiseAbs().maxCoeff();
        worst = std::max(worst, e / tail);
    }
    CHECK(worst > 0.0);
    CHECK(worst < 50.0);
}

TEST_CASE("time-asymmetric coefficient separates the two limits") {
    const auto op = load("asym_wave_n1.json");
    const Diagonalizer dg{op, 0.0};
    PhaseAccumulator ph(op, symbol::Xi(1.0));
    ProfileOptions opt;
    opt.tail_tol = 1e-6;
    auto prof = compute_profile(dg, ph, symbol::Xi(1.0), opt);
    CHECK((prof.alpha_plus - prof.alpha_minus).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("profile horizon reporting when the tail cannot be certified") {
    const auto op = load("slowtail_wave_n2.json");
    const Diagonalizer dg{op, 0.0};
    PhaseAccumulator ph(op, symbol::Xi(1.0, 0.0));
    ProfileOptions opt;
    opt.tail_tol = 1e-12;  // unreachable below the small cap
    opt.t_cap = 64.0;
    CHECK_THROWS_AS(compute_profile(dg, ph, symbol::Xi(1.0, 0.0), opt), hyplab::ConvergenceError);
}

TEST_CASE("Picard series") {
    const auto cw = load("wave_constant_n2.json");
    {
        const Diagonalizer dg{cw, 0.0};
        PhaseAccumulator ph(cw, symbol::Xi(1.0, 0.0));
        const CMat n0 = spectral::diag_point(cw, 0.0, symbol::Xi(1.0, 0.0)).N.cast<Cd>();
        CHECK((picard_compare(dg, ph, symbol::Xi(1.0, 0.0), 0.0, 1) - n0).cwiseAbs().maxCoeff() == 0.0);
        CHECK((picard_compare(dg, ph, symbol::Xi(1.0, 0.0), 3.0, 7) - n0).cwiseAbs().maxCoeff() == 0.0);
    }
    const auto op = load("wave_gauss_n2.json");
    const Diagonalizer dg{op, 0.0};
    for (double r : {0.7, 1.0, 3.0}) {
        PhaseAccumulator ph(op, symbol::Xi(1.0, 0.0), 1e-10);
        const symbol::Xi xi(r, 0.0);
        const CMat direct = integrate_z(dg, ph, xi, 5.0, 1e-12).eval(5.0);
        const CMat series = picard_compare(dg, ph, xi, 5.0, 6);
        CHECK((series - direct).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("reconstruction is the identity at t = 0") {
    const auto op = load("biwave_n2.json");
    const Diagonalizer dg{op, 0.0};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    PhaseAccumulator ph(op, symbol::Xi(0.6, 0.8));
    const symbol::Xi xi(1.2, 1.6);
    auto prof = compute_profile(dg, ph, xi);
    std::vector<Cd> data(4);
    for (auto& d : data) d = Cd(uni(rng), uni(rng));
    for (int l = 0; l < 4; ++l) {
        const Cd rec = reconstruct_hat_u(prof, dg, ph, data, l, 0.0);
        CHECK(std::abs(rec - data[static_cast<std::size_t>(l)]) <= 1e-10);
    }
}

TEST_CASE("constant wave reconstruction reproduces the cosine propagator") {
    const auto op = load("wave_constant_n2.json");
    const Diagonalizer dg{op, 0.0};
    PhaseAccumulator ph(op, symbol::Xi(1.0, 0.0));
    const symbol::Xi xi(2.0, 0.0);
    auto prof = compute_profile(dg, ph, xi);
    const std::vector<Cd> data{Cd(1.0, 0.0), Cd(0.0, 0.0)};
    for (double t : {0.5, 1.0, 4.0}) {
        const Cd rec = reconstruct_hat_u(prof, dg, ph, data, 0, t);
        CHECK(rec.real() == doctest::Approx(std::cos(2.0 * t)).epsilon(1e-9));
        CHECK(std::abs(rec.imag()) <= 1e-9);
    }
}

TEST_CASE("representation agrees with direct companion integration") {
    const auto op = load("wave_gauss_n2.json");
    const auto cs = spectral::build_companion(op);
    const Diagonalizer dg{op, 0.0};
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        const double a = uni(rng) * M_PI;
        const double r = 0.5 + 3.0 * std::abs(uni(rng));
        const symbol::Xi xi(r * std::cos(a), r * std::sin(a));
        PhaseAccumulator ph(op, xi.unit(), 1e-10);
        auto prof = compute_profile(dg, ph, xi, {1e-11, 1e-9});
        std::vector<Cd> data{Cd(uni(rng), uni(rng)), Cd(uni(rng), uni(rng))};
        // companion state v_k = |xi|^{m-1-k} D_t^k u_hat
        CVec v0(2);
        v0 << data[0] * r, data[1];
        const auto vtraj = spectral::integrate_companion(cs, xi, v0, 12.0, 1e-11, 1e-13);
        for (double t : {3.0, 7.0, 12.0}) {
            const CVec vt = vtraj.eval(t);
            for (int l = 0; l < 2; ++l) {
                const Cd direct = vt(l) * std::pow(r, l + 1 - 2);
                const Cd rec = reconstruct_hat_u(prof, dg, ph, data, l, t);
                CHECK(std::abs(rec - direct) <= 1e-6 * std::max(1.0, std::abs(direct)));
            }
        }
    }
}

TEST_CASE("the z-flow is reversible") {
    const auto op = load("wave_gauss_n2.json");
    const auto cs = spectral::build_companion(op);
    const symbol::Xi xi(1.3, -0.4);
    CVec v0(2);
    v0 << Cd(0.3, -0.2), Cd(0.9, 0.1);
    const auto fwd = spectral::integrate_companion(cs, xi, v0, 10.0, 1e-11, 1e-13);
    const CVec vT = fwd.ys.back();
    const double r = xi.norm();
    const auto rhs = [&](double t, const CVec& v) -> CVec {
        const spectral::RMat h = cs.H(t, xi.unit());
        return Cd(0.0, 1.0) * r * (h.cast<Cd>() * v);
    };
    const auto bwd = rk::integrate(rhs, 10.0, 0.0, vT, 1e-11, 1e-13);
    CHECK((bwd.ys.back() - v0).norm() <= 1e-8);
}

TEST_CASE("derivative bounds probe") {
    const auto cw = load("wave_constant_n2.json");
    {
        const Diagonalizer dg{cw, 0.0};
        const auto rep = derivative_bounds_probe(dg, {symbol::Xi(1.0, 0.0), symbol::Xi(2.0, 0.0)}, 0,
                                                 {1.0, 5.0});
        CHECK(rep.sup_eps_ratio == 0.0);
        CHECK(rep.pass);
    }
    const auto op = load("wave_gauss_n2.json");
    const Diagonalizer dg{op, 0.0};
    std::vector<symbol::Xi> grid;
    for (double r : {1.0, 2.0, 4.0, 8.0}) grid.emplace_back(r, 0.3);
    const auto rep = derivative_bounds_probe(dg, grid, 0, {2.0, 5.0});
    CHECK(rep.pass);
    CHECK(rep.sup_alpha_high < 1e3);

    // small-frequency scaling: sup|d alpha| should grow like 1/|xi|
    const auto rep1 = derivative_bounds_probe(dg, {symbol::Xi(0.1, 0.0)}, 0, {});
    const auto rep2 = derivative_bounds_probe(dg, {symbol::Xi(0.2, 0.0)}, 0, {});
    const double d1 = rep1.sup_alpha_low / 0.1;  // undo the |xi| scaling stored in the report
    const double d2 = rep2.sup_alpha_low / 0.2;
    if (d2 > 1e-9) {
        const double ratio = d1 / d2;
        CHECK(ratio > 2.0 / 3.0);
        CHECK(ratio < 6.0);
    }
}
