#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "weyl/geometry.hpp"
#include "weyl/perturbation.hpp"
#include "weyl/symbol.hpp"

namespace weyl {

inline constexpr const char* kVersion = "weyl-lab 0.1.0";

/// Dyadic Weyl experiment: annuli [2^k, 2^{k+1}) for k = k_min..k_max, each
/// counted against the phase-space volume prediction. The sector supplies
/// the angles and the radial profile g; its radii are replaced per annulus.
struct DyadicPlan {
    explicit DyadicPlan(SymbolModel m) : model(std::move(m)) {}

    SymbolModel model;
    std::optional<PerturbationSpec> perturbation;  // nullopt: no potential
    SectorSpec sector{};
    int k_min = 2;
    int k_max = 10;
    std::size_t trials = 10;
    std::uint64_t seed = 0;
    int n0 = 1;
    double delta = 0.05;          // only enters the reference exponent
    bool symmetrize = true;
    int modes_max = 2048;         // cap on the high resolution 2K
    unsigned workers = 1;
    std::string config_text;      // canonical config, hashed into reports

    /// h_k = 2^{-k/m}, so that h_k^m 2^k = 1.
    double h(int k) const;
    void validate() const;
};

struct CellResult {
    int k = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t count = 0;
    std::size_t count_semiclassical = 0;  // 2^{-k} sigma counted in [1, 2)
    double prediction = 0.0;
    double error = 0.0;                   // count - prediction
    std::size_t grazing = 0;
    std::size_t untrusted_inside = 0;
    std::size_t ambiguous = 0;
    std::size_t clustered = 0;            // trusted pairs closer than the match tolerance
    double max_residual = 0.0;
};

struct AnnulusSummary {
    int k = 0;
    double h = 0.0;
    double lambda_low = 0.0;
    double lambda_high = 0.0;
    int modes_low = 0;
    int modes_high = 0;
    double trusted_radius = 0.0;
    std::size_t potential_cutoff_j = 0;
    double potential_tail_ratio = 0.0;
    double prediction = 0.0;
    double prediction_semiclassical = 0.0;  // vol(Gamma_{1,2}) / (2 pi h)
    double prediction_identity_defect = 0.0;
    double mean_count = 0.0;
    double mean_abs_error = 0.0;
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;
};

struct CumulativePoint {
    int k = 0;
    double lambda = 0.0;  // 2^{k+1}
    double prediction = 0.0;
    double mean_abs_error = 0.0;
    double max_abs_error = 0.0;
    double max_sum_of_annulus_errors = 0.0;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

struct WeylReport {
    std::string version = kVersion;
    std::string config_hash;
    std::uint64_t seed = 0;
    int m = 2;
    int n = 1;
    int n0 = 1;
    double delta = 0.05;
    double beta = 0.0;
    SectorSpec sector{};
    std::string verdict_theta1;
    std::string verdict_theta2;
    std::vector<CellResult> cells;          // ordered by (k, trial)
    std::vector<AnnulusSummary> annuli;
    std::vector<CumulativePoint> cumulative;
    std::optional<SlopeFit> fit_full;
    std::optional<SlopeFit> fit_top_half;
    double trivial_exponent = 0.5;          // n/m
    double theorem_exponent = 0.0;          // (n - (1/2 - beta - delta)/(N0 + 1))/m
    std::size_t grazing_total = 0;
    std::size_t untrusted_total = 0;
    std::size_t ambiguous_total = 0;
    std::size_t clustered_total = 0;
    bool count_identity_holds = true;
    double max_prediction_identity_defect = 0.0;
    bool prediction_identity_holds = true;  // defect <= 1e-9
    bool triangle_holds = true;             // cumulative <= sum of annulus errors
};

inline constexpr double kPredictionIdentityTol = 1e-9;

/// Trials of one annulus k. Checks the angular hypotheses and the trusted
/// radius first (HypothesisError when they fail).
struct AnnulusResult {
    AnnulusSummary summary;
    std::vector<CellResult> cells;
};
AnnulusResult annulus_experiment(const DyadicPlan& plan, int k);

WeylReport dyadic_weyl_experiment(const DyadicPlan& plan);

struct FamilySweep {
    std::vector<WeylReport> members;
    std::vector<CumulativePoint> worst_cumulative;  // max over members
    std::vector<double> worst_annulus_error;         // max abs error per annulus over members
    std::optional<SlopeFit> worst_fit_full;
    std::optional<SlopeFit> worst_fit_top_half;
};

/// Runs every member on the same potential draws. Each member's angles must
/// pass the non-degeneracy check; the first failure names its index.
FamilySweep family_sweep(const DyadicPlan& plan, const std::vector<SectorSpec>& family);

/// Least squares of log(max error) against log lambda; zero errors are
/// skipped. `top_half` keeps the upper half of the dyadic range.
std::optional<SlopeFit> fit_error_slope(const std::vector<CumulativePoint>& points, bool top_half);

nlohmann::json report_json(const WeylReport& report);
nlohmann::json family_json(const FamilySweep& sweep);
std::string cells_csv(const WeylReport& report);
std::string plot_csv(const WeylReport& report);

}  // namespace weyl
