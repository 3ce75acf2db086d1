#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "weyl/config.hpp"
#include "weyl/errors.hpp"
#include "weyl/experiment.hpp"

using namespace weyl;
using weyl::test::constant_model;
using weyl::test::cos_model;
using weyl::test::laplacian;

namespace {

constexpr double kPiD = std::numbers::pi;

DyadicPlan baseline_plan(int k_min = 2, int k_max = 8) {
    DyadicPlan plan(laplacian());
    plan.sector.theta1 = kPiD;
    plan.sector.theta2 = 3 * kPiD;
    plan.k_min = k_min;
    plan.k_max = k_max;
    plan.trials = 1;
    plan.seed = 1;
    return plan;
}

DyadicPlan perturbed_plan(unsigned workers) {
    DyadicPlan plan(cos_model());
    plan.perturbation = PerturbationSpec{};
    plan.sector.theta1 = 0.0;
    plan.sector.theta2 = 2 * kPiD;
    plan.k_min = 2;
    plan.k_max = 4;
    plan.trials = 3;
    plan.seed = 5;
    plan.workers = workers;
    return plan;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("baseline annulus against the integer lattice") {
    const auto res = annulus_experiment(baseline_plan(), 4);
    REQUIRE(res.cells.size() == 1);
    const auto& cell = res.cells[0];
    // Eigenvalues k^2 in [16, 32): k = +-4, +-5.
    CHECK(cell.count == 4);
    CHECK(std::abs(cell.prediction - 2 * (std::sqrt(32.0) - 4.0)) < 1e-9);
    CHECK(std::abs(cell.error - (4 - 2 * (std::sqrt(32.0) - 4.0))) < 1e-9);
    CHECK(std::abs(cell.error - 0.686) < 1e-3);
    CHECK(cell.count_semiclassical == cell.count);
    CHECK(res.summary.prediction_identity_defect <= kPredictionIdentityTol);
}

TEST_CASE("baseline report") {
    const auto report = dyadic_weyl_experiment(baseline_plan(2, 10));
    REQUIRE(report.annuli.size() == 9);
    for (const auto& cell : report.cells) {
        // Integer lattice count in [2^k, 2^{k+1}).
        std::size_t lattice = 0;
        for (long k = -100; k <= 100; ++k)
            if (k * k >= (1L << cell.k) && k * k < (1L << (cell.k + 1))) ++lattice;
        CHECK(cell.count == lattice);
        CHECK(cell.untrusted_inside == 0);
    }
    CHECK(report.count_identity_holds);
    CHECK(report.prediction_identity_holds);
    CHECK(report.triangle_holds);
    REQUIRE(report.fit_full.has_value());
    CHECK(report.fit_full->slope < 0.5);
    CHECK(std::abs(report.theorem_exponent - 0.3875) < 1e-12);
    CHECK(report.trivial_exponent == 0.5);
}

TEST_CASE("cumulative errors") {
    const auto report = dyadic_weyl_experiment(baseline_plan(2, 6));
    // Cumulative count over [4, 2^{k+1}) is the lattice count of 4 <= k^2 < 2^{k+1}.
    for (const auto& pt : report.cumulative) {
        std::size_t lattice = 0;
        for (long j = -20; j <= 20; ++j)
            if (j * j >= 4 && j * j < (1L << (pt.k + 1))) ++lattice;
        const double pred = 2 * (std::sqrt(std::ldexp(1.0, pt.k + 1)) - 2.0);
        CHECK(std::abs(pt.prediction - pred) < 1e-9);
        CHECK(std::abs(pt.max_abs_error - std::abs(double(lattice) - pred)) < 1e-9);
        CHECK(pt.max_abs_error <= pt.max_sum_of_annulus_errors + 1e-12);
    }
}

TEST_CASE("slope fit") {
    std::vector<CumulativePoint> pts;
    for (int k = 2; k <= 9; ++k) {
        CumulativePoint p;
        p.k = k;
        p.lambda = std::ldexp(1.0, k + 1);
        p.max_abs_error = 3.0 * std::pow(p.lambda, 0.25);
        pts.push_back(p);
    }
    const auto full = fit_error_slope(pts, false);
    REQUIRE(full);
    CHECK(std::abs(full->slope - 0.25) < 1e-12);
    CHECK(std::abs(full->intercept - std::log(3.0)) < 1e-12);
    CHECK(full->points == 8);
    const auto top = fit_error_slope(pts, true);
    REQUIRE(top);
    CHECK(top->points == 4);
    pts[3].max_abs_error = 0.0;
    CHECK(fit_error_slope(pts, false)->points == 7);
    CHECK_FALSE(fit_error_slope({}, false).has_value());
}

TEST_CASE("zero trials give an empty report") {
    auto plan = baseline_plan();
    plan.trials = 0;
    const auto report = dyadic_weyl_experiment(plan);
    CHECK(report.cells.empty());
    CHECK_FALSE(report.fit_full.has_value());
}

TEST_CASE("plan validation") {
    auto plan = baseline_plan();
    plan.k_min = 5;
    plan.k_max = 4;
    CHECK_THROWS_AS(plan.validate(), ConfigError);
    plan = baseline_plan();
    plan.modes_max = 8;
    CHECK_THROWS_AS(dyadic_weyl_experiment(plan), HypothesisError);
    // Constant-argument symbol along its own direction: hypothesis failure.
    DyadicPlan flat(constant_model(std::polar(1.0, kPiD / 4)));
    flat.sector.theta1 = kPiD / 4;
    flat.sector.theta2 = kPiD / 2;
    flat.k_min = flat.k_max = 2;
    flat.trials = 1;
    CHECK_THROWS_AS(dyadic_weyl_experiment(flat), HypothesisError);
}

TEST_CASE("perturbed run is independent of the worker count") {
    const auto a = dyadic_weyl_experiment(perturbed_plan(1));
    const auto b = dyadic_weyl_experiment(perturbed_plan(3));
    CHECK(report_json(a).dump() == report_json(b).dump());
    CHECK(cells_csv(a) == cells_csv(b));
    CHECK(plot_csv(a) == plot_csv(b));
    CHECK(a.count_identity_holds);
    CHECK(a.prediction_identity_holds);
    CHECK(a.untrusted_total == 0);
    // distinct trials see distinct potentials
    CHECK(a.cells[0].seed != a.cells[1].seed);
}

TEST_CASE("family sweep") {
    const auto plan = perturbed_plan(2);
    SUBCASE("a single member reproduces the plain experiment") {
        const auto sweep = family_sweep(plan, {plan.sector});
        REQUIRE(sweep.members.size() == 1);
        CHECK(report_json(sweep.members[0]).dump() == report_json(dyadic_weyl_experiment(plan)).dump());
    }
    SUBCASE("a degenerate member is named") {
        SectorSpec ok;
        ok.theta1 = -0.2;
        ok.theta2 = 0.2;
        SectorSpec bad;  // arctan(0.5) needs two derivatives
        bad.theta1 = std::atan(0.5);
        bad.theta2 = 0.7;
        try {
            family_sweep(plan, {ok, bad});
            FAIL("expected a hypothesis failure");
        } catch (const HypothesisError& e) {
            CHECK(std::string(e.what()).find("family member 1") != std::string::npos);
        }
    }
}

TEST_CASE("configs load") {
    const auto loaded = plan_from_file(std::string(WEYL_CONFIG_DIR) + "/plans/family.json");
    CHECK(loaded.family.size() == 5);
    CHECK(loaded.plan.trials == 10);
    CHECK(loaded.plan.perturbation.has_value());
    CHECK_THROWS_AS(plan_from_file(std::string(WEYL_CONFIG_DIR) + "/plans/none.json"), ConfigError);
    CHECK_THROWS_AS(symbol_from_json(nlohmann::json{{"m", 2}, {"colour", 1}}), ConfigError);
}

}
