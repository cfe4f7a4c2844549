#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include "hyplab/spectral.hpp"

using namespace hyplab;
using namespace hyplab::spectral;

namespace {

symbol::OperatorSpec load(const std::string& name) {
    std::ifstream in(std::string(HYPLAB_DATA_DIR) + "/" + name);
    REQUIRE(in.good());
    nlohmann::json js;
    in >> js;
    return symbol::OperatorSpec::from_json(js);
}

double rand_in(std::mt19937_64& rng, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
}

}  // namespace

TEST_CASE("companion matrix of model operators") {
    const auto gauss = load("wave_gauss_n2.json");
    const auto cs = build_companion(gauss);
    const double t = 0.7;
    const double c2 = 1.0 + std::exp(-t * t);
    const RMat h = cs.H(t, symbol::Xi(0.0, 3.0));
    CHECK(h(0, 0) == 0.0);
    CHECK(h(0, 1) == 1.0);
    CHECK(h(1, 0) == doctest::Approx(c2).epsilon(1e-14));
    CHECK(h(1, 1) == 0.0);

    // m=3, L = tau(tau^2-|xi|^2): last row (0, 1, 0)
    symbol::OperatorSpec triple(3, 2,
                                {symbol::TableEntry{{2, 0, 0}, 1, coeffs::parse_coefficient("-1")},
                                 symbol::TableEntry{{0, 2, 0}, 1, coeffs::parse_coefficient("-1")}});
    const RMat h3 = build_companion(triple).H(0.0, symbol::Xi(1.0, 1.0));
    CHECK(h3(2, 0) == doctest::Approx(0.0));
    CHECK(h3(2, 1) == doctest::Approx(1.0));
    CHECK(h3(2, 2) == doctest::Approx(0.0));
}

TEST_CASE("companion eigenvalues match the unit-sphere roots") {
    for (const char* file : {"wave_gauss_n2.json", "triple_n2.json", "biwave_n2.json"}) {
        const auto op = load(file);
        const auto cs = build_companion(op);
        std::mt19937_64 rng(42);
        for (int i = 0; i < 20; ++i) {
            const double t = rand_in(rng, -3.0, 3.0);
            const double a = rand_in(rng, 0.0, 2 * M_PI);
            const symbol::Xi xi(std::cos(a), std::sin(a));
            Eigen::EigenSolver<RMat> es(cs.H(t, xi));
            std::vector<double> ev;
            for (int k = 0; k < op.m(); ++k) {
                CHECK(std::abs(es.eigenvalues()[k].imag()) < 1e-9);
                ev.push_back(es.eigenvalues()[k].real());
            }
            std::sort(ev.begin(), ev.end(), std::greater<double>());
            const auto mu = cs.D(t, xi);
            for (int k = 0; k < op.m(); ++k)
                CHECK(ev[static_cast<std::size_t>(k)] ==
                      doctest::Approx(mu[static_cast<std::size_t>(k)]).epsilon(1e-9));
        }
    }
}

TEST_CASE("diagonalizer identities N H = D N and N N_inv = I") {
    for (const char* file : {"wave_gauss_n2.json", "triple_n2.json", "biwave_n2.json"}) {
        const auto op = load(file);
        const auto cs = build_companion(op);
        std::mt19937_64 rng(7);
        for (int i = 0; i < 150; ++i) {
            const double t = rand_in(rng, -5.0, 5.0);
            const double a = rand_in(rng, 0.0, 2 * M_PI);
            const symbol::Xi xi(std::cos(a), std::sin(a));
            const auto d = diag_point(op, t, xi);
            const RMat lhs = d.N * cs.H(t, xi);
            RMat rhs = d.N;
            for (int r = 0; r < op.m(); ++r) rhs.row(r) *= d.mu[static_cast<std::size_t>(r)];
            const double hnorm = cs.H(t, xi).norm();
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, hnorm));
            CHECK((d.N * d.N_inv - RMat::Identity(op.m(), op.m())).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("wave diagonalizer rows and determinant") {
    const auto gauss = load("wave_gauss_n2.json");
    const double t = 1.3;
    const double c = std::sqrt(1.0 + std::exp(-t * t));
    const auto d = diag_point(gauss, t, symbol::Xi(1.0, 0.0));
    CHECK(d.N(0, 0) == doctest::Approx(c).epsilon(1e-12));
    CHECK(d.N(0, 1) == doctest::Approx(1.0));
    CHECK(d.N(1, 0) == doctest::Approx(-c).epsilon(1e-12));
    CHECK(d.N(1, 1) == doctest::Approx(1.0));
    CHECK(d.N.determinant() == doctest::Approx(2.0 * c).epsilon(1e-12));
}

TEST_CASE("N is homogeneous of degree zero and dtN matches finite differences") {
    const auto op = load("biwave_n2.json");
    const Diagonalizer dg{op, 0.0};
    const symbol::Xi xi(0.3, -0.7);
    CHECK((dg.N(0.4, xi) - dg.N(0.4, xi.scaled(2.0))).norm() == doctest::Approx(0.0).scale(1.0));

    std::mt19937_64 rng(11);
    for (int i = 0; i < 25; ++i) {
        const double t = rand_in(rng, -2.0, 2.0);
        const double a = rand_in(rng, 0.0, 2 * M_PI);
        const symbol::Xi w(std::cos(a), std::sin(a));
        const double h = 1e-6;
        const RMat fd = (diag_point(op, t + h, w).N - diag_point(op, t - h, w).N) / (2 * h);
        const RMat sym = diag_point(op, t, w).dtN;
        CHECK((fd - sym).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, sym.cwiseAbs().maxCoeff()) + 1e-7);
    }

    // constant coefficients: dtN identically zero
    const auto cw = load("wave_constant_n2.json");
    CHECK(diag_point(cw, 1.0, symbol::Xi(0.6, 0.8)).dtN.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("determinant lower bound is positive") {
    const auto op = load("biwave_n2.json");
    const auto cs = build_companion(op);
    const auto rf = symbol::hyperbolicity_certificate(op, {-10, -1, 0, 1, 10}, 16);
    const auto dg = build_diagonalizer(cs, rf);
    CHECK(dg.det_lower_bound > 0.0);
}

TEST_CASE("phases: constant roots give exact linear phases") {
    symbol::OperatorSpec c2(2, 2,
                            {symbol::TableEntry{{2, 0, 0}, 0, coeffs::parse_coefficient("-4")},
                             symbol::TableEntry{{0, 2, 0}, 0, coeffs::parse_coefficient("-4")}});
    PhaseAccumulator acc(c2, symbol::Xi(1.0, 0.0));
    const auto th = acc.theta(3.0, symbol::Xi(1.0, 0.0));
    CHECK(th[0] == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(th[1] == doctest::Approx(-6.0).epsilon(1e-15));
    const auto th0 = acc.theta(0.0, symbol::Xi(1.0, 0.0));
    CHECK(th0[0] == 0.0);
}

TEST_CASE("phase integral of the Gaussian wave against the quadrature oracle") {
    const auto op = load("wave_gauss_n2.json");
    PhaseAccumulator acc(op, symbol::Xi(1.0, 0.0));
    // int_0^1 sqrt(1+exp(-s^2)) ds, Romberg reference
    const double reference = 1.3194285584541172;
    CHECK(acc.theta(1.0, symbol::Xi(1.0, 0.0))[0] == doctest::Approx(reference).epsilon(1e-8));
    const auto rf = symbol::hyperbolicity_certificate(op, {0.0, 1.0}, 8);
    CHECK(phases(rf, 1.0, symbol::Xi(1.0, 0.0))[0] == doctest::Approx(reference).epsilon(1e-8));
    // homogeneity of degree one
    CHECK(acc.theta(1.0, symbol::Xi(3.0, 0.0))[0] == doctest::Approx(3.0 * reference).epsilon(1e-8));
    // d theta / dt = phi by central differences
    const double h = 1e-5;
    const double fd = (acc.theta(2.0 + h, symbol::Xi(1.0, 0.0))[0] -
                       acc.theta(2.0 - h, symbol::Xi(1.0, 0.0))[0]) /
                      (2 * h);
    const double phi = symbol::characteristic_roots(op, 2.0, symbol::Xi(1.0, 0.0))[0];
    CHECK(fd == doctest::Approx(phi).epsilon(1e-6));
}

TEST_CASE("coupling matrix of the wave family") {
    const auto cw = load("wave_constant_n2.json");
    {
        const Diagonalizer dg{cw, 0.0};
        PhaseAccumulator acc(cw, symbol::Xi(1.0, 0.0));
        const CMat c = coupling(dg, acc, 0.8, symbol::Xi(1.0, 0.0));
        CHECK(c.cwiseAbs().maxCoeff() == 0.0);
    }
    const auto gauss = load("wave_gauss_n2.json");
    {
        const Diagonalizer dg{gauss, 0.0};
        PhaseAccumulator acc(gauss, symbol::Xi(1.0, 0.0));
        const double t = 1.1;
        const double c2 = 1.0 + std::exp(-t * t);
        // every entry has modulus |c'|/(2c) = |(c^2)'|/(4c^2)
        const double expected = std::abs(-2.0 * t * std::exp(-t * t)) / (4.0 * c2);
        const CMat c = coupling(dg, acc, t, symbol::Xi(1.0, 0.0));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(std::abs(c(i, j)) == doctest::Approx(expected).epsilon(1e-10));
        // moduli are invariant under xi scaling
        const CMat c2m = coupling(dg, acc, t, symbol::Xi(2.0, 0.0));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(std::abs(c2m(i, j)) == doctest::Approx(std::abs(c(i, j))).epsilon(1e-12));
    }
}

TEST_CASE("coupling norm is bounded by a multiple of Psi") {
    const auto op = load("wave_gauss_n2.json");
    const Diagonalizer dg{op, 0.0};
    PhaseAccumulator acc(op, symbol::Xi(0.6, 0.8));
    double worst = 0.0;
    for (double t = 0.05; t <= 4.0; t += 0.11) {
        const double psi = op.psi(t);
        const double cn = op_norm(coupling(dg, acc, t, symbol::Xi(0.6, 0.8)));
        if (psi > 1e-14) worst = std::max(worst, cn / psi);
    }
    CHECK(worst > 0.0);
    CHECK(worst < 10.0);  // single moderate constant
}

TEST_CASE("xi-derivative growth of the coupling entries") {
    // |d/dxi C| <= c |xi|^{-1} (1+|t|) Psi(t) spot check at |mu|=1
    const auto op = load("wave_gauss_n2.json");
    const Diagonalizer dg{op, 0.0};
    const double t = 1.4;
    const double psi = op.psi(t);
    for (double r : {1.0, 2.0, 4.0}) {
        PhaseAccumulator acc(op, symbol::Xi(1.0, 0.0));
        const double h = 1e-5 * r;
        const CMat cp = coupling(dg, acc, t, symbol::Xi(r + h, 0.0));
        const CMat cm = coupling(dg, acc, t, symbol::Xi(r - h, 0.0));
        const double deriv = ((cp - cm) / (2 * h)).cwiseAbs().maxCoeff();
        CHECK(deriv <= 5.0 * (1.0 / r) * (1.0 + t) * psi);
    }
}

TEST_CASE("energy bound holds and norms are conserved for constant coefficients") {
    const auto cw = load("wave_constant_n2.json");
    const auto cs = build_companion(cw);
    const Diagonalizer dg{cw, 0.0};

    // c=1 wave: H is symmetric, |v| itself is conserved
    const auto rep = energy_check(cs, dg, symbol::Xi(0.8, 0.6), 20.0, 5, 99);
    CHECK(rep.exponent == 0.0);
    CHECK(rep.pass);

    // ||N v|| conserved exactly for any constant-coefficient operator
    std::mt19937_64 rng(3);
    const symbol::Xi xi(1.7, -0.4);
    const auto d = diag_point(cw, 0.0, xi.unit());
    Eigen::VectorXcd v0(2);
    v0 << Cd(rand_in(rng, -1, 1), rand_in(rng, -1, 1)), Cd(rand_in(rng, -1, 1), rand_in(rng, -1, 1));
    const double r = xi.norm();
    const auto rhs = [&](double t, const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
        const RMat h = cs.H(t, xi.unit());
        return Cd(0, 1) * r * (h.cast<Cd>() * v);
    };
    const auto traj = rk::integrate(rhs, 0.0, 15.0, v0, 1e-11, 1e-13);
    const double w0 = (d.N.cast<Cd>() * v0).norm();
    for (std::size_t i = 0; i < traj.ts.size(); ++i)
        CHECK((d.N.cast<Cd>() * traj.ys[i]).norm() == doctest::Approx(w0).epsilon(1e-8));
}

TEST_CASE("energy bound for the Gaussian wave with random data") {
    const auto op = load("wave_gauss_n2.json");
    const auto cs = build_companion(op);
    const Diagonalizer dg{op, 0.0};
    std::mt19937_64 rng(17);
    for (int i = 0; i < 4; ++i) {
        const double a = rand_in(rng, 0.0, 2 * M_PI);
        const double r = rand_in(rng, 0.3, 6.0);
        const auto rep = energy_check(cs, dg, symbol::Xi(r * std::cos(a), r * std::sin(a)), 25.0, 5,
                                      1000 + static_cast<unsigned>(i));
        CHECK(rep.pass);
        CHECK(std::isfinite(rep.exponent));
    }
}
