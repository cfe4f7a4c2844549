#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>

#include "hyplab/geometry.hpp"

using namespace hyplab;
using namespace hyplab::geometry;
using symbol::Xi;

namespace {

symbol::OperatorSpec load(const std::string& name) {
    std::ifstream in(std::string(HYPLAB_DATA_DIR) + "/" + name);
    REQUIRE(in.good());
    nlohmann::json js;
    in >> js;
    return symbol::OperatorSpec::from_json(js);
}

}  // namespace

TEST_CASE("expression phases validate homogeneity") {
    CHECK_NOTHROW(phase_from_expression("sqrt(xi1^2 + xi2^2)", 2));
    CHECK_NOTHROW(phase_from_expression("(xi1^4 + xi2^4)^0.25", 2));
    CHECK_THROWS_AS(phase_from_expression("xi1^2 + xi2^2", 2), ConfigError);
    CHECK_THROWS_AS(phase_from_expression("1 + sqrt(xi1^2 + xi2^2)", 2), ConfigError);
}

TEST_CASE("trace_point scales directions onto the level set") {
    const auto sphere = phase_from_expression("sqrt(xi1^2 + xi2^2)", 2);
    const Xi p = trace_point(sphere, Xi(0.0, 1.0));
    CHECK(p[0] == doctest::Approx(0.0));
    CHECK(p[1] == doctest::Approx(1.0));

    const auto twice = phase_from_expression("2*sqrt(xi1^2 + xi2^2)", 2);
    const Xi q = trace_point(twice, Xi(1.0, 0.0));
    CHECK(q[0] == doctest::Approx(0.5));

    const auto quartic = phase_from_expression("(xi1^4 + xi2^4)^0.25", 2);
    const Xi r = trace_point(quartic, Xi(1.0, 1.0));
    CHECK(r[0] == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-12));
    CHECK(r[1] == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-12));
}

TEST_CASE("graph charts reproduce closed-form sections") {
    const auto sphere = phase_from_expression("sqrt(xi1^2 + xi2^2)", 2);
    const GraphChart circ(sphere, Xi(0.0, 1.0));
    CHECK(circ.h(0.3) == doctest::Approx(std::sqrt(1.0 - 0.09)).epsilon(1e-10));
    const auto tc = circ.section_taylor(0.0, 12, 0.35);
    CHECK(2.0 * tc[2] == doctest::Approx(-1.0).epsilon(1e-8));

    const auto quartic = phase_from_expression("(xi1^4 + xi2^4)^0.25", 2);
    const GraphChart q(quartic, Xi(1.0, 0.0));
    const auto tq = q.section_taylor(0.0, 10, 0.35);
    CHECK(std::abs(2.0 * tq[2]) < 1e-6);
    CHECK(24.0 * tq[4] == doctest::Approx(-6.0).epsilon(1e-4));

    const auto ellipse = phase_from_expression("sqrt(xi1^2/4 + xi2^2)", 2);
    const GraphChart e(ellipse, Xi(2.0, 0.0));
    const auto te = e.section_taylor(0.0, 12, 0.3);
    CHECK(2.0 * te[2] == doctest::Approx(-2.0).epsilon(1e-8));
}

TEST_CASE("contact orders of reference curves") {
    const auto sphere = phase_from_expression("sqrt(xi1^2 + xi2^2)", 2);
    CHECK(*contact_order(GraphChart(sphere, trace_point(sphere, Xi(0.3, 0.9)))) == 2);

    const auto quartic = phase_from_expression("(xi1^4 + xi2^4)^0.25", 2);
    CHECK(*contact_order(GraphChart(quartic, Xi(1.0, 0.0))) == 4);
    CHECK(*contact_order(GraphChart(quartic, trace_point(quartic, Xi(1.0, 1.0)))) == 2);
}

TEST_CASE("indices of model level sets in n=2") {
    const auto sphere = phase_from_expression("sqrt(xi1^2 + xi2^2)", 2);
    const auto rs = sugimoto_indices(sphere, 64);
    CHECK(rs.convex);
    CHECK(rs.gamma == 2);
    CHECK(rs.gamma0 == 2);

    const auto quartic = phase_from_expression("(xi1^4 + xi2^4)^0.25", 2);
    const auto rq = sugimoto_indices(quartic, 128);
    CHECK(rq.convex);
    CHECK(rq.gamma == 4);
    CHECK(rq.gamma0 == 4);

    const auto ellipse = phase_from_expression("sqrt(xi1^2/4 + xi2^2)", 2);
    const auto re = sugimoto_indices(ellipse, 64);
    CHECK(re.convex);
    CHECK(re.gamma == 2);

    // perturbed quartic with an indefinite curvature: inflections of order 3
    const auto wobble = phase_from_expression("(xi1^4 + xi2^4 - xi1^2*xi2^2)^0.25", 2);
    const auto rw = sugimoto_indices(wobble, 128);
    CHECK_FALSE(rw.convex);
    CHECK(rw.gamma0 == 3);
}

TEST_CASE("indices are invariant under rotation and scaling") {
    const auto quartic = phase_from_expression("(xi1^4 + xi2^4)^0.25", 2);
    const double a = 0.6180339887;  // irrational angle: flat points land off-grid
    HomogeneousPhase rotated;
    rotated.n = 2;
    rotated.f = [&quartic, a](const Xi& xi) {
        return quartic(Xi(std::cos(a) * xi[0] - std::sin(a) * xi[1],
                          std::sin(a) * xi[0] + std::cos(a) * xi[1]));
    };
    const auto rr = sugimoto_indices(rotated, 128);
    CHECK(rr.convex);
    CHECK(rr.gamma == 4);

    HomogeneousPhase scaled;
    scaled.n = 2;
    scaled.f = [&quartic](const Xi& xi) { return 3.0 * quartic(xi); };
    const auto rsc = sugimoto_indices(scaled, 128);
    CHECK(rsc.gamma == 4);
    CHECK(rsc.convex);
}

TEST_CASE("sphere indices in n=3") {
    const auto sphere = phase_from_expression("sqrt(xi1^2 + xi2^2 + xi3^2)", 3);
    const auto r = sugimoto_indices(sphere, 8, 8);
    CHECK(r.convex);
    CHECK(r.gamma == 2);
    CHECK(r.gamma0 == 2);
}

TEST_CASE("linear shift of limiting branches") {
    const auto gauss = load("wave_gauss_n2.json");
    const auto lim = symbol::limiting_roots(gauss);
    const auto b0 = linear_shift(lim, 0);
    CHECK_FALSE(b0.sign_flipped);
    CHECK(b0.alpha_linear);
    CHECK(b0.phase(Xi(1.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-8));
    const auto b1 = linear_shift(lim, 1);
    CHECK(b1.sign_flipped);
    CHECK(b1.phase(Xi(1.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(sugimoto_indices(b0.phase, 64).gamma == 2);
    CHECK(sugimoto_indices(b1.phase, 64).gamma == 2);

    // bi-wave: four branches, all circles; gamma <= 2 floor(m/2) = 4
    const auto biwave = load("biwave_n2.json");
    const auto blim = symbol::limiting_roots(biwave);
    for (int k = 0; k < 4; ++k) {
        const auto sb = linear_shift(blim, k);
        CHECK(sb.alpha_linear);
        const auto rep = sugimoto_indices(sb.phase, 64);
        CHECK(rep.convex);
        CHECK(rep.gamma <= 4);
        CHECK(rep.gamma == 2);
    }

    // triple: zero middle branch is excluded as sign-indefinite
    const auto triple = load("triple_n2.json");
    const auto tlim = symbol::limiting_roots(triple);
    CHECK_THROWS_AS(linear_shift(tlim, 1), EvalError);
    const auto t0 = linear_shift(tlim, 0);
    CHECK(sugimoto_indices(t0.phase, 64).gamma == 2);
}
