#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "weyl/errors.hpp"
#include "weyl/perturbation.hpp"

using namespace weyl;

namespace {

PerturbationSpec default_spec() { return PerturbationSpec{}; }

}  // namespace

TEST_SUITE("perturbation") {

TEST_CASE("variance schedule examples") {
    auto spec = default_spec();
    CHECK(std::abs(sigma_schedule(spec, 0) - 1.0) < 1e-15);
    CHECK(std::abs(sigma_schedule(spec, 1) - 0.5) < 1e-15);
    CHECK(std::abs(sigma_schedule(spec, 2) - 0.5) < 1e-15);
    spec.beta = 0.25;
    CHECK(std::abs(sigma_schedule(spec, 0) - std::exp(-1.0)) < 1e-15);
    for (std::size_t j = 1; j < 40; ++j) CHECK(sigma_schedule(spec, j) <= sigma_schedule(spec, j - 1) + 1e-15);
}

TEST_CASE("basis ordering") {
    CHECK(RTildeBasis::wavenumber(0) == 0);
    CHECK(RTildeBasis::wavenumber(1) == 1);
    CHECK(RTildeBasis::wavenumber(2) == 1);
    CHECK(RTildeBasis::wavenumber(5) == 3);
    CHECK_FALSE(RTildeBasis::is_sine(1));
    CHECK(RTildeBasis::is_sine(2));
    CHECK(std::abs(RTildeBasis::mu(3) - std::sqrt(5.0)) < 1e-15);
}

TEST_CASE("parameter validation") {
    auto bad = default_spec();
    bad.s = 0.4;  // s must exceed n/2
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = default_spec();
    bad.s = 1.6;  // s < rho - n/2
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = default_spec();
    bad.eps = 0.3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = default_spec();
    bad.beta = 0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_NOTHROW(default_spec().validate());
}

TEST_CASE("sampling is deterministic per seed") {
    const auto spec = default_spec();
    const auto a = sample_potential(spec, 42, 33);
    const auto b = sample_potential(spec, 42, 33);
    const auto c = sample_potential(spec, 43, 33);
    CHECK(a.alphas == b.alphas);
    CHECK(a.alphas != c.alphas);
    CHECK(a.alphas.size() == 33);
}

TEST_CASE("coefficient moments") {
    const auto spec = default_spec();
    const std::size_t draws = 100000, J = 5;
    std::vector<double> second(J, 0.0);
    std::vector<cplx> mean(J, 0.0), pseudo(J, 0.0);
    cplx cross = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
        const auto pot = sample_potential(spec, 1000 + d, J);
        for (std::size_t j = 0; j < J; ++j) {
            mean[j] += pot.alphas[j];
            second[j] += std::norm(pot.alphas[j]);
            pseudo[j] += pot.alphas[j] * pot.alphas[j];
        }
        cross += pot.alphas[0] * std::conj(pot.alphas[1]);
    }
    for (std::size_t j = 0; j < J; ++j) {
        const double s2 = std::pow(sigma_schedule(spec, j), 2);
        // standard errors: mean ~ sigma / sqrt(N), |alpha|^2 ~ sigma^2 / sqrt(N)
        const double n = static_cast<double>(draws);
        CHECK(std::abs(mean[j] / n) < 5 * std::sqrt(s2 / n));
        CHECK(std::abs(second[j] / n - s2) < 5 * s2 / std::sqrt(n));
        CHECK(std::abs(pseudo[j] / n) < 5 * s2 / std::sqrt(n));  // circular symmetry
    }
    CHECK(std::abs(cross / static_cast<double>(draws)) < 5 * 0.5 / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("H^s norm examples") {
    RandomPotential one{{1.0}, 0};
    CHECK(hs_norm(one, 0.0) == 1.0);
    CHECK(hs_norm(one, 3.7) == 1.0);
    RandomPotential two{{0.0, 2.0}, 0};
    CHECK(std::abs(hs_norm(two, 1.0) - 2.0 * std::sqrt(2.0)) < 1e-14);
}

TEST_CASE("Fourier synthesis agrees with direct evaluation") {
    const auto pot = sample_potential(default_spec(), 5, 21);
    const auto q = potential_fourier(pot);
    const double pi = std::numbers::pi;
    auto direct = [&](double x) {
        cplx sum = 0.0;
        for (std::size_t j = 0; j < pot.alphas.size(); ++j) {
            const int k = RTildeBasis::wavenumber(j);
            double e = 1.0 / std::sqrt(2 * pi);
            if (j > 0) e = (RTildeBasis::is_sine(j) ? std::sin(k * x) : std::cos(k * x)) / std::sqrt(pi);
            sum += pot.alphas[j] * e;
        }
        return sum;
    };
    for (double x : {0.0, 0.4, 2.2, 5.9}) CHECK(std::abs(q(x) - direct(x)) < 1e-13);
    // Parseval: the basis is orthonormal in L^2, so ||q||^2 = 2 pi sum |c_k|^2 = sum |alpha|^2.
    double coeff = 0.0;
    for (const cplx& c : q.coefficients()) coeff += std::norm(c);
    CHECK(std::abs(2 * pi * coeff - std::pow(hs_norm(pot, 0.0), 2)) < 1e-12);
}

TEST_CASE("expected norm and cutoff") {
    const auto spec = default_spec();
    const auto cut = resolve_cutoff(spec, 1e-3);
    CHECK(cut.tail_ratio <= 1e-3);
    CHECK_FALSE(cut.capped);
    const std::size_t J = cut.j;
    const double expected = expected_hs_norm_sq(spec, spec.s, J);
    double acc = 0.0;
    const int draws = 20000;
    for (int d = 0; d < draws; ++d) acc += std::pow(hs_norm(sample_potential(spec, 77 + d, J), spec.s), 2);
    CHECK(std::abs(acc / draws - expected) <= 0.05 * expected);

    // The tolerance is unreachable under a tiny cap.
    const auto capped = resolve_cutoff(spec, 1e-12, RTildeBasis::size_for_modes(4));
    CHECK(capped.capped);
    CHECK(capped.j == RTildeBasis::size_for_modes(4));

    // Rougher norms carry less weight: E||q||_{H^s}^2 increases with s.
    double prev = 0.0;
    for (double s : {0.0, 0.5, 0.75, 1.0}) {
        const double e = expected_hs_norm_sq(spec, s, 201);
        CHECK(e > prev);
        prev = e;
    }
}

TEST_CASE("tail bound right-hand side") {
    CHECK(std::abs(tail_bound_rhs({{1.0}, 3.0, 1.0}) - std::exp(-1.0)) < 1e-15);
    CHECK(tail_bound_rhs({{1.0}, 1.0, 1.0}) == 1.0);
    CHECK(tail_bound_rhs({{1.0, 0.5}, 0.5, 1.0}) == 1.0);
}

TEST_CASE("tail bound Monte Carlo") {
    // A single circular complex Gaussian: |d|^2 is exponential with mean sigma^2.
    const auto single = verify_tail_bound({{1.0}, 3.0, 1.0}, 100000, 3);
    CHECK(std::abs(single.empirical - std::exp(-3.0)) <= 3 * single.mc_sigma);
    CHECK(std::abs(single.bound - std::exp(-1.0)) < 1e-15);
    CHECK(single.dominated);

    const auto three = verify_tail_bound({{1.0, 0.5, 0.25}, 4.0, 1.0}, 100000, 4, 2);
    CHECK(three.dominated);
    CHECK(three.subfamily_monotone);
    CHECK(three.prefix_len == 2);

    // Worker count does not change the estimate.
    const auto w1 = verify_tail_bound({{1.0, 0.5}, 2.0, 1.0}, 20000, 9, 1, 1);
    const auto w3 = verify_tail_bound({{1.0, 0.5}, 2.0, 1.0}, 20000, 9, 1, 3);
    CHECK(w1.empirical == w3.empirical);
    CHECK(w1.prefix_empirical == w3.prefix_empirical);
}

TEST_CASE("calibration dominates the standard matrix") {
    const auto matrix = standard_tail_matrix();
    CHECK(matrix.size() == 9);
    const auto cal = calibrate_c0(matrix, 20000, 5);
    for (const auto& chk : cal.checks) CHECK(chk.dominated);
    CHECK(cal.c0 >= 1.0);
}

TEST_CASE("semiclassical smallness shape") {
    const auto spec = default_spec();
    const std::vector<double> hs{0.9, 0.7, 0.5, 0.35};
    const auto table = prop_sc1_experiment(spec, 2, hs, 4000, 21, 65);
    REQUIRE(table.rows.size() == hs.size());
    CHECK(table.monotone);
    for (std::size_t i = 1; i < table.rows.size(); ++i)
        CHECK(table.rows[i].failure_prob <= table.rows[i - 1].failure_prob);

    // Independent oracle: |alpha_j|^2 = sigma_j^2 E_j with E_j standard exponential,
    // failure when sum mu_j^{2s} |alpha_j|^2 > h^{2(1-m)}.
    std::mt19937_64 rng(123);
    std::exponential_distribution<double> expo(1.0);
    const int n = 40000;
    std::vector<int> fails(hs.size(), 0);
    for (int d = 0; d < n; ++d) {
        double norm_sq = 0.0;
        for (std::size_t j = 0; j < 65; ++j)
            norm_sq += std::pow(RTildeBasis::mu(j), 2 * spec.s) * std::pow(sigma_schedule(spec, j), 2) * expo(rng);
        for (std::size_t i = 0; i < hs.size(); ++i) fails[i] += norm_sq > std::pow(hs[i], -2.0) ? 1 : 0;
    }
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double p = static_cast<double>(fails[i]) / n;
        const double sd = std::sqrt(std::pow(table.rows[i].mc_sigma, 2) + p * (1 - p) / n);
        CHECK(std::abs(table.rows[i].failure_prob - p) <= 4 * sd + 1e-12);
    }

    // Doubling the cutoff changes the estimate by less than the MC error.
    const auto doubled = prop_sc1_experiment(spec, 2, hs, 4000, 21, 129);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double tol = 3 * std::max({table.rows[i].mc_sigma, doubled.rows[i].mc_sigma, 1.0 / 4000});
        CHECK(std::abs(table.rows[i].failure_prob - doubled.rows[i].failure_prob) <= tol);
    }

    // Higher order makes the potential smaller in the rescaled norm.
    const auto cubic = prop_sc1_experiment(spec, 3, hs, 4000, 21, 65);
    for (std::size_t i = 0; i < hs.size(); ++i) CHECK(cubic.rows[i].failure_prob <= table.rows[i].failure_prob);
}

}
