#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "weyl/angles.hpp"
#include "weyl/errors.hpp"
#include "weyl/symbol.hpp"

using namespace weyl;
using weyl::test::constant_model;
using weyl::test::cos_model;

TEST_SUITE("symbol") {

TEST_CASE("trig polynomial evaluation and derivatives") {
    // f = 2 + 3 cos x - sin 2x
    const std::vector<cplx> c{2.0, 3.0};
    const std::vector<cplx> s{0.0, 0.0, -1.0};
    const auto f = TrigPoly::from_cos_sin(c, s);
    CHECK(f.degree() == 2);
    for (double x : {0.0, 0.3, 1.7, 4.0}) {
        CHECK(std::abs(f(x) - cplx{2.0 + 3.0 * std::cos(x) - std::sin(2 * x)}) < 1e-14);
        CHECK(std::abs(f.derivative(x, 1) - cplx{-3.0 * std::sin(x) - 2.0 * std::cos(2 * x)}) < 1e-13);
        CHECK(std::abs(f.derivative(x, 3) - cplx{3.0 * std::sin(x) + 8.0 * std::cos(2 * x)}) < 1e-12);
    }
    CHECK(f.is_real());
    CHECK(TrigPoly::constant(2.0).is_constant());
}

TEST_CASE("eval_symbol examples and homogeneity") {
    const auto model = cos_model();
    CHECK(std::abs(eval_symbol(model, 0.0, 2.0) - cplx{4.0, 2.0}) < 1e-14);
    CHECK(eval_symbol(model, 1.3, 0.0) == cplx{0.0});
    for (int i = 0; i < 64; ++i) {
        const double x = kTwoPi * i / 64.0;
        CHECK(std::abs(eval_symbol(model, x, 3.0) - 9.0 * eval_symbol(model, x, 1.0)) < 1e-14);
        for (double r : {2.0, 3.0, 10.0}) {
            const cplx lhs = eval_symbol(model, x, r * 0.7);
            const cplx rhs = r * r * eval_symbol(model, x, 0.7);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
        }
        CHECK(eval_symbol(model, x, -1.3) == eval_symbol(model, x, 1.3));
    }
}

TEST_CASE("arg_function examples") {
    const auto model = cos_model();
    CHECK(std::abs(arg_function(model, std::numbers::pi / 2, 1)) < 1e-15);
    CHECK(std::abs(arg_function(model, 0.0, 1) - std::atan(0.5)) < 1e-15);
    CHECK(std::abs(arg_function(model, 0.0, 1) - 0.46365) < 1e-5);
    CHECK(arg_function(model, 0.8, 1) == arg_function(model, 0.8, -1));
    const auto rotated = constant_model(std::polar(1.0, std::numbers::pi / 4));
    for (double x : {0.0, 1.0, 5.0}) CHECK(std::abs(arg_function(rotated, x, 1) - std::numbers::pi / 4) < 1e-15);
}

TEST_CASE("arg jets against the closed form and finite differences") {
    const auto model = cos_model();
    // F = atan(0.5 cos x), F' = -0.5 sin x / (1 + 0.25 cos^2 x)
    for (double x : {0.1, 1.0, 2.5, 4.4}) {
        const auto jets = arg_jets(model, x, 1, 3);
        const double c = std::cos(x), s = std::sin(x);
        CHECK(std::abs(jets[0] - (-0.5 * s / (1 + 0.25 * c * c))) < 1e-14);
        const double h = 1e-3;
        auto F = [&](double y) { return arg_function(model, y, 1); };
        const double fd1 = (F(x + h) - F(x - h)) / (2 * h);
        const double fd2 = (F(x + h) - 2 * F(x) + F(x - h)) / (h * h);
        const double fd3 = (F(x + 2 * h) - 2 * F(x + h) + 2 * F(x - h) - F(x - 2 * h)) / (2 * h * h * h);
        CHECK(std::abs(jets[0] - fd1) < std::max(1e-6, h * h));
        CHECK(std::abs(jets[1] - fd2) < std::max(1e-6, h * h));
        CHECK(std::abs(jets[2] - fd3) < 10 * std::max(1e-6, h * h));
    }
    const auto at_quarter = arg_jets(model, std::numbers::pi / 2, 1, 1);
    CHECK(std::abs(at_quarter[0] + 0.5) < 1e-14);
}

TEST_CASE("level crossings of the test symbol") {
    const auto model = cos_model();
    const auto xs = level_crossings(model, 1, 0.0);
    REQUIRE(xs.size() == 2);
    CHECK(std::abs(xs[0] - std::numbers::pi / 2) < 1e-11);
    CHECK(std::abs(xs[1] - 3 * std::numbers::pi / 2) < 1e-11);
    CHECK(level_crossings(model, 1, 1.0).empty());
}

TEST_CASE("non-degeneracy truth table") {
    const auto model = cos_model();
    const auto r0 = check_nondegeneracy(model, 0.0, 1);
    CHECK(r0.verdict == Verdict::holds);
    CHECK(r0.witness.points.size() == 4);  // x = pi/2, 3pi/2 on both sheets
    for (const auto& p : r0.witness.points) {
        CHECK(std::abs(std::abs(p.jets[0]) - 0.5) < 1e-10);
        CHECK(std::abs(p.residual) <= 1e-12);
        CHECK(p.kind != LevelPoint::Kind::tangency);
    }

    const double top = std::atan(0.5);
    CHECK(check_nondegeneracy(model, top, 1).verdict == Verdict::fails);
    const auto r2 = check_nondegeneracy(model, top, 2);
    CHECK(r2.verdict == Verdict::holds);
    for (const auto& p : r2.witness.points) {
        CHECK(std::abs(p.x) < 1e-6);
        CHECK(std::abs(p.jets[0]) < 1e-8);
        CHECK(std::abs(p.jets[1]) > 0.1);
    }

    const auto rotated = constant_model(std::polar(1.0, std::numbers::pi / 4));
    for (int n0 = 1; n0 <= 4; ++n0) {
        const auto r = check_nondegeneracy(rotated, std::numbers::pi / 4, n0);
        CHECK(r.verdict == Verdict::fails);
        CHECK(r.witness.continuum);
    }
}

TEST_CASE("empty level sets hold vacuously") {
    const auto model = cos_model();
    CHECK(check_nondegeneracy(model, 1.0, 1).holds());
    CHECK(check_nondegeneracy(weyl::test::laplacian(), std::numbers::pi, 1).holds());
    CHECK(check_nondegeneracy(weyl::test::laplacian(), 0.0, 4).verdict == Verdict::fails);
}

TEST_CASE("non-degeneracy is stable under small changes of theta") {
    const auto model = cos_model();
    for (double theta : {0.0, 0.2, -0.3}) {
        REQUIRE(check_nondegeneracy(model, theta, 1).holds());
        CHECK(check_nondegeneracy(model, theta + 1e-4, 1).holds());
        CHECK(check_nondegeneracy(model, theta - 1e-4, 1).holds());
    }
    REQUIRE(check_nondegeneracy(model, std::atan(0.5), 2).holds());
    CHECK(check_nondegeneracy(model, std::atan(0.5) - 1e-4, 2).holds());
    CHECK(check_nondegeneracy(model, std::atan(0.5) + 1e-4, 2).holds());
}

TEST_CASE("model validation") {
    const std::vector<cplx> c{1.0};
    CHECK_THROWS_AS(SymbolModel::create(1, {{1, TrigPoly::constant(1.0)}}), ConfigError);
    CHECK_THROWS_AS(SymbolModel::create(2, {{2, TrigPoly::constant(1.0)}}, 2), ConfigError);
    CHECK_THROWS_AS(SymbolModel::create(2, {{3, TrigPoly::constant(1.0)}}), ConfigError);
    CHECK_THROWS_AS(SymbolModel::create(2, {{0, TrigPoly::constant(1.0)}}), ConfigError);
    // cos x vanishes: not elliptic
    const std::vector<cplx> cosx{0.0, 1.0};
    CHECK_THROWS_AS(SymbolModel::create(2, {{2, TrigPoly::from_cos_sin(cosx, {})}}), HypothesisError);
    // e^{ix} winds once: arg p covers the whole circle
    CHECK_THROWS_AS(SymbolModel::create(2, {{2, TrigPoly::from_exponential({0.0, 0.0, 1.0})}}), HypothesisError);
    // odd order breaks p(x, -xi) = p(x, xi)
    CHECK_THROWS_AS(SymbolModel::create(3, {{3, TrigPoly::constant(1.0)}}), HypothesisError);
    CHECK_THROWS_AS(check_nondegeneracy(cos_model(), 0.0, 0), ConfigError);
}

TEST_CASE("range gap and branch centre") {
    const auto model = cos_model();
    // F ranges over [-atan 0.5, atan 0.5]; the gap is the rest of the circle.
    CHECK(std::abs(model.range_gap() - (kTwoPi - 2 * std::atan(0.5))) < 1e-2);
    CHECK(std::abs(wrap_near(model.arg_center(), 0.0)) < 1e-2);
    CHECK(model.bandwidth() == 1);
    CHECK_FALSE(model.constant_coefficients());
}

}
