#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include "hyplab/symbol.hpp"

using namespace hyplab::symbol;

namespace {

OperatorSpec load(const std::string& name) {
    std::ifstream in(std::string(HYPLAB_DATA_DIR) + "/" + name);
    REQUIRE(in.good());
    nlohmann::json js;
    in >> js;
    return OperatorSpec::from_json(js);
}

double rand_in(std::mt19937_64& rng, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
}

}  // namespace

TEST_CASE("operator file validation") {
    CHECK_THROWS_AS(OperatorSpec::from_json(nlohmann::json::parse(R"({"m":2,"n":1,"coeffs":[]})")),
                    hyplab::ConfigError);
    CHECK_THROWS_AS(
        OperatorSpec::from_json(nlohmann::json::parse(
            R"({"m":2,"n":2,"coeffs":[{"nu":[1],"j":0,"expr":"1"}]})")),
        hyplab::ConfigError);
    CHECK_THROWS_AS(
        OperatorSpec::from_json(nlohmann::json::parse(
            R"({"m":2,"n":1,"coeffs":[{"nu":[2],"j":1,"expr":"1"}]})")),
        hyplab::ConfigError);
}

TEST_CASE("eval_symbol on reference points") {
    // wave with c=1: L = tau^2 - |xi|^2
    const auto wave = load("wave_constant_n2.json");
    CHECK(wave.eval_symbol(0.0, 2.0, Xi(1.0, 0.0)) == doctest::Approx(3.0));

    // triple with Gaussian bump, at t=0: tau(tau^2 - 2|xi|^2)
    const auto triple = load("triple_n2.json");
    CHECK(triple.eval_symbol(0.0, 1.0, Xi(1.0, 0.0)) == doctest::Approx(1.0 - 2.0));

    const auto gauss = load("wave_gauss_n2.json");
    CHECK(gauss.eval_symbol(0.0, 0.0, Xi(1.0, 0.0)) == doctest::Approx(-2.0));
}

TEST_CASE("characteristic roots of model operators") {
    // c=2 wave: tau^2 - 4|xi|^2
    OperatorSpec c2(2, 2,
                    {TableEntry{{2, 0, 0}, 0, hyplab::coeffs::parse_coefficient("-4")},
                     TableEntry{{0, 2, 0}, 0, hyplab::coeffs::parse_coefficient("-4")}});
    const auto r = characteristic_roots(c2, 0.0, Xi(1.0, 0.0));
    CHECK(r[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r[1] == doctest::Approx(-2.0).epsilon(1e-12));

    // tau(tau - |xi|)(tau + |xi|) at xi=(3,4): roots {5, 0, -5}
    OperatorSpec triple(3, 2,
                        {TableEntry{{2, 0, 0}, 1, hyplab::coeffs::parse_coefficient("-1")},
                         TableEntry{{0, 2, 0}, 1, hyplab::coeffs::parse_coefficient("-1")}});
    const auto r3 = characteristic_roots(triple, 0.0, Xi(3.0, 4.0));
    CHECK(r3[0] == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(r3[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(r3[2] == doctest::Approx(-5.0).epsilon(1e-10));

    // bi-wave (tau^2-|xi|^2)(tau^2-4|xi|^2) at xi=(1,0): {2,1,-1,-2}
    OperatorSpec biwave(4, 2,
                        {TableEntry{{2, 0, 0}, 2, hyplab::coeffs::parse_coefficient("-5")},
                         TableEntry{{0, 2, 0}, 2, hyplab::coeffs::parse_coefficient("-5")},
                         TableEntry{{4, 0, 0}, 0, hyplab::coeffs::parse_coefficient("4")},
                         TableEntry{{0, 4, 0}, 0, hyplab::coeffs::parse_coefficient("4")},
                         TableEntry{{2, 2, 0}, 0, hyplab::coeffs::parse_coefficient("8")}});
    const auto r4 = characteristic_roots(biwave, 0.0, Xi(1.0, 0.0));
    CHECK(r4[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r4[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r4[2] == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(r4[3] == doctest::Approx(-2.0).epsilon(1e-10));
}

TEST_CASE("roots are homogeneous of degree one") {
    const auto op = load("biwave_n2.json");
    std::mt19937_64 rng(101);
    for (int i = 0; i < 30; ++i) {
        const double t = rand_in(rng, -5.0, 5.0);
        const Xi xi(rand_in(rng, -3.0, 3.0), rand_in(rng, -3.0, 3.0));
        if (xi.norm() < 0.1) continue;
        const auto base = characteristic_roots(op, t, xi);
        for (double s : {0.5, 2.0, 10.0}) {
            const auto scaled = characteristic_roots(op, t, xi.scaled(s));
            for (std::size_t k = 0; k < base.size(); ++k)
                CHECK(scaled[k] == doctest::Approx(s * base[k]).epsilon(1e-10));
        }
    }
}

TEST_CASE("root product reproduces the symbol") {
    for (const char* file : {"wave_gauss_n2.json", "triple_n2.json", "biwave_n2.json"}) {
        const auto op = load(file);
        std::mt19937_64 rng(55);
        for (int i = 0; i < 100; ++i) {
            const double t = rand_in(rng, -4.0, 4.0);
            const double tau = rand_in(rng, -6.0, 6.0);
            const Xi xi(rand_in(rng, -2.0, 2.0), rand_in(rng, -2.0, 2.0));
            if (xi.norm() < 0.2) continue;
            const auto phi = characteristic_roots(op, t, xi);
            double prod = 1.0;
            for (const double p : phi) prod *= tau - p;
            const double lhs = op.eval_symbol(t, tau, xi);
            CHECK(lhs == doctest::Approx(prod).epsilon(1e-8).scale(std::abs(prod) + 1.0));
        }
    }
}

TEST_CASE("closed-formula root derivative vs finite differences") {
    for (const char* file : {"wave_gauss_n2.json", "triple_n2.json", "biwave_n2.json"}) {
        const auto op = load(file);
        std::mt19937_64 rng(202);
        for (int i = 0; i < 40; ++i) {
            const double t = rand_in(rng, -3.0, 3.0);
            const Xi xi(rand_in(rng, -2.0, 2.0), rand_in(rng, -2.0, 2.0));
            if (xi.norm() < 0.3) continue;
            const int k = static_cast<int>(i) % op.m();
            const double h = 1e-6;
            const auto fwd = characteristic_roots(op, t + h, xi);
            const auto bwd = characteristic_roots(op, t - h, xi);
            const double fd = (fwd[static_cast<std::size_t>(k)] - bwd[static_cast<std::size_t>(k)]) / (2 * h);
            const double closed = root_time_derivative(op, t, xi, k);
            CHECK(closed == doctest::Approx(fd).epsilon(1e-6).scale(std::abs(fd) + 1e-3));
        }
    }
}

TEST_CASE("wave root derivative reference value") {
    // phi_1 = c(t)|xi| with c = sqrt(1+e^{-t^2}); c'(1) = -e^{-1}/c(1).
    const auto op = load("wave_gauss_n2.json");
    const double expected = -std::exp(-1.0) / std::sqrt(1.0 + std::exp(-1.0));
    CHECK(root_time_derivative(op, 1.0, Xi(1.0, 0.0), 0) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(root_time_derivative(op, 0.0, Xi(1.0, 0.0), 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    // constant coefficients: derivative vanishes identically
    const auto cw = load("wave_constant_n2.json");
    CHECK(root_time_derivative(cw, 0.7, Xi(0.3, 0.4), 1) == 0.0);
}

TEST_CASE("hyperbolicity certificate") {
    std::vector<double> grid;
    for (double t = -40.0; t <= 40.0; t += 0.5) grid.push_back(t);

    const auto gauss = load("wave_gauss_n2.json");
    const auto rf = hyperbolicity_certificate(gauss, grid, 16);
    CHECK(rf.separation == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(rf.bound_constant == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));

    const auto cw = load("wave_constant_n2.json");
    const auto rfc = hyperbolicity_certificate(cw, {0.0}, 16);
    CHECK(rfc.separation == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rfc.bound_constant == doctest::Approx(1.0).epsilon(1e-12));

    const auto dbl = load("double_root_n1.json");
    CHECK_THROWS_AS(hyperbolicity_certificate(dbl, {0.0}, 8), hyplab::RootCollisionError);
}

TEST_CASE("sorted labels do not swap along sampled paths") {
    const auto op = load("biwave_n2.json");
    const auto rf = hyperbolicity_certificate(op, {-10, -3, -1, 0, 1, 3, 10}, 16);
    // walk a path in (t, angle) and check continuity of each branch
    double prev_t = -6.0;
    auto prev = characteristic_roots(op, prev_t, Xi(1.0, 0.0));
    for (int i = 1; i <= 200; ++i) {
        const double t = -6.0 + 12.0 * i / 200.0;
        const double a = 2.0 * M_PI * i / 200.0;
        const auto cur = characteristic_roots(op, t, Xi(std::cos(a), std::sin(a)));
        for (std::size_t k = 0; k < cur.size(); ++k)
            CHECK(std::abs(cur[k] - prev[k]) < rf.separation / 2.0);
        prev = cur;
    }
}

TEST_CASE("limiting roots") {
    const auto gauss = load("wave_gauss_n2.json");
    const auto lim = limiting_roots(gauss);
    for (const auto& [ap, am] : lim.limit_coeffs) {
        CHECK(ap == doctest::Approx(-1.0).epsilon(1e-9));
        CHECK(am == doctest::Approx(-1.0).epsilon(1e-9));
    }
    const auto rp = lim.plus(Xi(1.0, 0.0));
    CHECK(rp[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rp[1] == doctest::Approx(-1.0).epsilon(1e-9));

    // c(t)^2 = 4 + 1/(1+t^2): limiting c^2 = 4 on both sides
    const auto slow = load("slowtail_wave_n2.json");
    const auto lim2 = limiting_roots(slow);
    CHECK(lim2.plus(Xi(1.0, 0.0))[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(lim2.minus(Xi(0.0, 1.0))[1] == doctest::Approx(-2.0).epsilon(1e-8));

    // constants: limits equal the coefficients
    const auto cw = load("wave_constant_n2.json");
    const auto limc = limiting_roots(cw);
    for (const auto& [ap, am] : limc.limit_coeffs) {
        CHECK(ap == -1.0);
        CHECK(am == -1.0);
    }

    // divergent moment
    OperatorSpec bad(2, 1, {TableEntry{{2, 0, 0}, 0, hyplab::coeffs::parse_coefficient("-1 - t^2")}});
    CHECK_THROWS_AS(limiting_roots(bad), hyplab::ConvergenceError);
}

TEST_CASE("root convergence to the limit is controlled by the Psi tail") {
    // slow polynomial tail so the bound is numerically meaningful
    const auto op = load("slowtail_wave_n2.json");
    const auto lim = limiting_roots(op);
    const auto psi = op.psi_function();
    const Xi xi(0.6, 0.8);
    const auto target = lim.plus(xi);
    for (double T : {10.0, 20.0, 40.0}) {
        const auto cur = characteristic_roots(op, T, xi);
        const double tail = psi.tail(T, +1, 1e-10);
        for (std::size_t k = 0; k < cur.size(); ++k)
            CHECK(std::abs(cur[k] - target[k]) <= 2.0 * tail);
    }
}

TEST_CASE("psi of an operator") {
    const auto cw = load("wave_constant_n2.json");
    CHECK(cw.psi(0.33) == 0.0);
    const auto gauss = load("wave_gauss_n1.json");
    CHECK(gauss.psi(1.0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));
    CHECK(gauss.psi(0.0) == 0.0);
}
