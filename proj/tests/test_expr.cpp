#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hyplab/coeffs.hpp"

using hyplab::coeffs::CoeffExpr;
using hyplab::coeffs::parse_coefficient;

TEST_CASE("parse and evaluate basic expressions") {
    CHECK(parse_coefficient("1 + 0.5*exp(-t^2)")(0.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(parse_coefficient("t^3")(2.0) == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(parse_coefficient("exp(-t^2)")(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(parse_coefficient("1/(1+t^2)")(3.0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(parse_coefficient("2*(t - 1)^2 / 2")(3.0) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("unary minus binds looser than power") {
    // -t^2 must mean -(t^2); exp(-t^2) then decays.
    CHECK(parse_coefficient("-t^2")(2.0) == doctest::Approx(-4.0));
    CHECK(parse_coefficient("exp(-t^2)")(3.0) == doctest::Approx(std::exp(-9.0)));
}

TEST_CASE("symbolic derivatives at fixed points") {
    CHECK(parse_coefficient("1 + 0.5*exp(-t^2)").derivative(0.0) == doctest::Approx(0.0).epsilon(1e-15));
    // d/dt 2/(1+t^2) = -4t/(1+t^2)^2 -> -1 at t=1
    CHECK(parse_coefficient("2/(1+t^2)").derivative(1.0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(parse_coefficient("t^3").derivative(2.0) == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("parse errors carry byte offsets") {
    CHECK_THROWS_AS(parse_coefficient("1 + "), hyplab::ParseError);
    CHECK_THROWS_AS(parse_coefficient("2*x"), hyplab::ParseError);
    CHECK_THROWS_AS(parse_coefficient("t^0.5"), hyplab::ParseError);
    CHECK_THROWS_AS(parse_coefficient("sin(t)"), hyplab::ParseError);
    CHECK_THROWS_AS(parse_coefficient("(1+t"), hyplab::ParseError);
    try {
        parse_coefficient("1 + %");
    } catch (const hyplab::ParseError& e) {
        CHECK(e.offset == 4);
    }
}

TEST_CASE("evaluation errors") {
    CHECK_THROWS_AS(parse_coefficient("1/(t-1)")(1.0), hyplab::EvalError);
    CHECK_THROWS_AS(parse_coefficient("exp(t^2)")(1e6), hyplab::EvalError);  // overflow
}

TEST_CASE("constant detection") {
    CHECK(parse_coefficient("3.5").is_constant());
    CHECK(parse_coefficient("2*(1+1)^2").is_constant());
    CHECK_FALSE(parse_coefficient("t").is_constant());
    CHECK_FALSE(parse_coefficient("exp(-t^2)").is_constant());
}

TEST_CASE("symbolic derivative matches central differences on random points") {
    const char* sources[] = {
        "1 + 0.5*exp(-t^2)", "2/(1+t^2)", "t^3 - 2*t + 1",
        "exp(-t^2)*(1+t^2)", "1/(2+exp(-t^2))", "4 + 1/(1+(t-3)^2)",
    };
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> uni(-50.0, 50.0);
    for (const char* src : sources) {
        const CoeffExpr e = parse_coefficient(src);
        for (int i = 0; i < 1000; ++i) {
            const double t = uni(rng);
            const double h = 1e-5;
            const double fd = (e(t + h) - e(t - h)) / (2.0 * h);
            const double sym = e.derivative(t);
            // relative agreement above the finite-difference noise floor
            CHECK(std::abs(sym - fd) <= 1e-6 * std::max(std::abs(fd), std::abs(sym)) + 1e-9);
        }
    }
}
