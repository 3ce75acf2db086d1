// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "weyl/config.hpp"
#include "weyl/discretization.hpp"
#include "weyl/errors.hpp"
#include "weyl/experiment.hpp"
#include "weyl/geometry.hpp"
#include "weyl/parallel.hpp"
#include "weyl/perturbation.hpp"
#include "weyl/spectra.hpp"
#include "weyl/symbol.hpp"

using namespace weyl;

namespace {

constexpr double kPiD = std::numbers::pi;
const std::string kConfigs = WEYL_CONFIG_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

SymbolModel laplacian() { return SymbolModel::create(2, {{2, TrigPoly::constant(1.0)}}); }

SymbolModel test_symbol() {
    const std::vector<cplx> c{1.0, cplx{0.0, 0.5}};
    return SymbolModel::create(2, {{2, TrigPoly::from_cos_sin(c, {})}});
}

SectorSpec sector(double t1, double t2, double r1, double r2) {
    SectorSpec s;
    s.theta1 = t1;
    s.theta2 = t2;
    s.r1 = r1;
    s.r2 = r2;
    return s;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome baseline_exactness() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = laplacian();
    const double lambda = 1e4;
    const auto lo = eigensolve(assemble_operator(model, 256));
    const auto hi = eigensolve(assemble_operator(model, 512), {.certify = false});
    const auto spectrum = filter_trusted(lo, hi, lambda);
    const auto disk = sector(kPiD, 3 * kPiD, 0.0, lambda);
    const auto count = count_in_sector(spectrum, disk);
    const double prediction = sector_volume(model, disk).value / kTwoPi;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double error = static_cast<double>(count.count) - prediction;
    const bool pass = count.count == 201 && std::abs(prediction - 200.0) < 1e-9 && std::abs(error - 1.0) < 1e-9 &&
                      secs < 5.0;
    return {pass, fmt("count %zu (want 201), prediction %.10f (want 200), error %.10f, %.2f s (< 5 s)", count.count,
                      prediction, error, secs)};
}

Outcome volume_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const double lap = sector_volume(laplacian(), sector(kPiD, 3 * kPiD, 0.0, 1.0)).value;
    const auto model = test_symbol();
    const auto narrow = sector(-0.2, 0.2, 0.0, 1.0);
    const double vol = sector_volume(model, narrow).value;

    // 2D Monte Carlo membership over (x, xi) in [0, 2pi) x [-Xi, Xi]; |p| <= 1 needs |xi| <= 1.
    const double xi_max = 1.01;
    const std::size_t samples = 10000000, chunks = 64;
    std::vector<std::size_t> hits(chunks, 0);
    parallel_for(chunks, default_workers(), [&](std::size_t c) {
        std::mt19937_64 rng(1000 + c);
        std::uniform_real_distribution<double> ux(0.0, kTwoPi), uxi(-xi_max, xi_max);
        for (std::size_t i = 0; i < samples / chunks; ++i) {
            const double x = ux(rng), xi = uxi(rng);
            const cplx p = cplx{1.0, 0.5 * std::cos(x)} * xi * xi;
            if (sector_membership(p, narrow)) ++hits[c];
        }
    });
    std::size_t total = 0;
    for (auto h : hits) total += h;
    const double n = static_cast<double>(samples / chunks * chunks);
    const double frac = total / n, box = kTwoPi * 2 * xi_max;
    const double mc = box * frac, sigma = box * std::sqrt(frac * (1 - frac) / n);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = std::abs(lap - 4 * kPiD) <= 1e-9 && std::abs(vol - mc) <= 3 * sigma && secs < 30.0;
    return {pass, fmt("xi^2: |vol - 4pi| = %.2e (<= 1e-9); test symbol narrow sector %.6f vs MC %.6f, "
                      "|diff| = %.2f sigma_MC (<= 3); %.1f s (< 30 s)",
                      std::abs(lap - 4 * kPiD), vol, mc, std::abs(vol - mc) / sigma, secs)};
}

Outcome vz_scaling() {
    const auto model = laplacian();
    std::vector<double> ratios;
    double worst_rel = 0.0;
    for (double t : {1e-2, 1e-4, 1e-6}) {
        const double v = v_z_of_t(model, 1.0, t).value;
        const double closed = 4 * kPiD * (std::sqrt(1 + std::sqrt(t)) - std::sqrt(1 - std::sqrt(t)));
        worst_rel = std::max(worst_rel, std::abs(v - closed) / closed);
        ratios.push_back(v / std::sqrt(t));
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    const double spread = (*hi - *lo) / *lo;
    return {spread < 0.05 && worst_rel <= 1e-6,
            fmt("ratio spread %.3e (< 5%%), worst relative deviation from closed form %.2e (<= 1e-6)", spread,
                worst_rel)};
}

Outcome tube_exponents() {
    const auto model = test_symbol();
    const std::vector<double> ts{1e-2, 1e-3, 1e-4, 1e-5};
    auto slope_of = [&](const TubeSpec& base) {
        std::vector<double> v;
        for (double t : ts) {
            TubeSpec spec = base;
            spec.thickness = t;
            v.push_back(tube_volume(model, spec).value);
        }
        return loglog_slope(ts, v);
    };
    const double arc = slope_of(TubeSpec{ProfileArc{1.0, RadialProfile(1.0), 0.0, kTwoPi}, 0.0});
    const double theta_n2 = std::atan(0.5);
    const bool n1_holds = check_nondegeneracy(model, 0.0, 1).holds();
    const bool n2_holds = check_nondegeneracy(model, theta_n2, 2).holds();
    const double seg1 = slope_of(TubeSpec{RadialSegment{0.0, 1.0, 2.0}, 0.0});
    const double seg2 = slope_of(TubeSpec{RadialSegment{theta_n2, 1.0, 2.0}, 0.0});
    const bool pass = std::abs(arc - 1.0) <= 0.02 && n1_holds && seg1 >= 1.0 - 0.02 && n2_holds &&
                      seg2 >= 0.5 - 0.02;
    return {pass, fmt("circle arc slope %.4f (1 +- 0.02); segment theta0 = 0 (N0 = 1) slope %.4f (>= 0.98); "
                      "segment theta0 = atan 0.5 (N0 = 2) slope %.4f (>= 0.48)",
                      arc, seg1, seg2)};
}

Outcome truth_table() {
    const auto model = test_symbol();
    const auto flat = SymbolModel::create(2, {{2, TrigPoly::constant(std::polar(1.0, kPiD / 4))}});
    const bool a = check_nondegeneracy(model, 0.0, 1).verdict == Verdict::holds;
    const bool b = check_nondegeneracy(model, std::atan(0.5), 1).verdict == Verdict::fails;
    const bool c = check_nondegeneracy(model, std::atan(0.5), 2).verdict == Verdict::holds;
    bool d = true;
    for (int n0 = 1; n0 <= 4; ++n0) d = d && check_nondegeneracy(flat, kPiD / 4, n0).verdict == Verdict::fails;
    return {a && b && c && d, fmt("theta0 = 0, N0 = 1 holds: %d; atan 0.5 fails at N0 = 1: %d, holds at N0 = 2: %d; "
                                  "constant argument fails for N0 = 1..4: %d",
                                  a, b, c, d)};
}

Outcome tail_bound() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t trials = 100000;
    const unsigned workers = default_workers();
    const auto cal = calibrate_c0(standard_tail_matrix(), trials, 2024, 1.0, 1.05, 400, workers);
    bool all_below = true;
    double worst_margin = -1e300;
    for (const auto& chk : cal.checks) {
        all_below = all_below && chk.empirical <= chk.bound;
        worst_margin = std::max(worst_margin, chk.empirical - chk.bound);
    }
    const auto single = verify_tail_bound({{1.0}, 2.0, cal.c0}, trials, 2025, 1, workers);
    const double closed = std::exp(-2.0);
    const bool single_ok = std::abs(single.empirical - closed) <= 3 * single.mc_sigma;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = cal.checks.size() >= 9 && all_below && single_ok && secs < 60.0;
    return {pass, fmt("c0 = %.4f, %zu configurations x %zu trials, max(empirical - bound) = %.4f (<= 0); "
                      "single Gaussian %.5f vs e^{-2} = %.5f (%.2f sigma_MC, <= 3); %.1f s (< 60 s)",
                      cal.c0, cal.checks.size(), trials, worst_margin, single.empirical, closed,
                      std::abs(single.empirical - closed) / single.mc_sigma, secs)};
}

Outcome semiclassical_shape() {
    const PerturbationSpec spec{};
    const auto cut = resolve_cutoff(spec);
    const auto table = prop_sc1_experiment(spec, 2, {0.9, 0.7, 0.5, 0.35}, 10000, 31, cut.j, 1.0, default_workers());
    std::ostringstream probs;
    for (const auto& r : table.rows) probs << ' ' << r.failure_prob;
    const bool pass = table.monotone && table.log_slope.has_value() && *table.log_slope < 0.0;
    return {pass, fmt("failure probabilities%s; monotone %d; log-failure slope vs h^-2 %s", probs.str().c_str(),
                      table.monotone,
                      table.log_slope ? fmt("%.4f (< 0)", *table.log_slope).c_str() : "undefined (all zero)")};
}

struct WeylRuns {
    WeylReport main;
    double seconds = 0.0;
};

Outcome weyl_trend(const WeylRuns& runs) {
    const auto& r = runs.main;
    if (!r.fit_full || r.annuli.empty()) return {false, "no fit"};
    const double rel = r.annuli.back().max_rel_error;
    const bool pass = r.fit_full->slope < 0.5 && rel <= 0.10 && runs.seconds < 1800.0;
    return {pass, fmt("cumulative max error slope %.4f over %zu points (< 0.5; top half %.4f); relative error at k = "
                      "%d: %.4f (<= 0.10); %.0f s (< 1800 s)",
                      r.fit_full->slope, r.fit_full->points, r.fit_top_half ? r.fit_top_half->slope : NAN,
                      r.annuli.back().k, rel, runs.seconds)};
}

std::string serialize(const WeylReport& r) { return report_json(r).dump(2) + cells_csv(r) + plot_csv(r); }

Outcome identities(const WeylRuns& runs) {
    auto baseline = plan_from_file(kConfigs + "/plans/baseline.json").plan;
    baseline.workers = 1;
    const auto b1 = dyadic_weyl_experiment(baseline);
    baseline.workers = std::max(3u, default_workers());
    const auto b2 = dyadic_weyl_experiment(baseline);

    auto perturbed = plan_from_file(kConfigs + "/plans/weyl.json").plan;
    perturbed.k_max = 7;
    perturbed.trials = 4;
    perturbed.workers = 1;
    const auto p1 = dyadic_weyl_experiment(perturbed);
    perturbed.workers = std::max(3u, default_workers());
    const auto p2 = dyadic_weyl_experiment(perturbed);

    bool ids = true;
    double worst = 0.0;
    for (const WeylReport* r : {&b1, &b2, &p1, &p2, &runs.main}) {
        ids = ids && r->count_identity_holds && r->prediction_identity_holds;
        worst = std::max(worst, r->max_prediction_identity_defect);
    }
    const bool det = serialize(b1) == serialize(b2) && serialize(p1) == serialize(p2);
    return {ids && det, fmt("count identity and prediction identity on 5 runs: %d (worst defect %.2e, <= 1e-9); "
                            "byte-identical reruns across worker counts: %d",
                            ids, worst, det)};
}

}  // namespace

int main() {
    std::vector<std::pair<int, std::function<Outcome()>>> criteria;
    WeylRuns weyl_runs;
    bool weyl_ok = true;
    std::string weyl_error;
    auto weyl_once = [&]() {
        static bool done = false;
        if (done) return;
        done = true;
        try {
            auto plan = plan_from_file(kConfigs + "/plans/weyl.json").plan;
            plan.workers = default_workers();
            const auto t0 = std::chrono::steady_clock::now();
            weyl_runs.main = dyadic_weyl_experiment(plan);
            weyl_runs.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } catch (const std::exception& e) {
            weyl_ok = false;
            weyl_error = e.what();
        }
    };

    criteria.emplace_back(1, baseline_exactness);
    criteria.emplace_back(2, volume_oracle);
    criteria.emplace_back(3, vz_scaling);
    criteria.emplace_back(4, tube_exponents);
    criteria.emplace_back(5, truth_table);
    criteria.emplace_back(6, tail_bound);
    criteria.emplace_back(7, semiclassical_shape);
    criteria.emplace_back(8, [&]() -> Outcome {
        weyl_once();
        if (!weyl_ok) return {false, "experiment failed: " + weyl_error};
        return weyl_trend(weyl_runs);
    });
    criteria.emplace_back(9, [&]() -> Outcome {
        weyl_once();
        if (!weyl_ok) return {false, "experiment failed: " + weyl_error};
        return identities(weyl_runs);
    });

    int failures = 0;
    for (const auto& [id, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
