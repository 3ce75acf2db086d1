#include "weyl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "weyl/discretization.hpp"
#include "weyl/errors.hpp"
#include "weyl/hash.hpp"
#include "weyl/parallel.hpp"
#include "weyl/random.hpp"
#include "weyl/spectra.hpp"

namespace weyl {

double DyadicPlan::h(int k) const { return std::exp2(-static_cast<double>(k) / model.order()); }

void DyadicPlan::validate() const {
    if (k_min < 0 || k_max < k_min) throw ConfigError("plan: need 0 <= k_min <= k_max");
    if (k_max > 40) throw ConfigError("plan: k_max above 40 is out of range");
    if (n0 < 1 || n0 > SymbolModel::kMaxJetOrder) throw ConfigError("plan: n0 must lie in [1, 8]");
    if (modes_max < 2) throw ConfigError("plan: modes_max must be at least 2");
    if (!(delta > 0.0)) throw ConfigError("plan: delta must be positive");
    sector.validate();
    if (perturbation) perturbation->validate();
}

namespace {

struct AnnulusSetup {
    int k = 0;
    int modes_low = 0;
    int modes_high = 0;
    double trusted_radius = 0.0;
    std::size_t cutoff_j = 0;
    double tail_ratio = 0.0;
};

double pow2(int k) { return std::ldexp(1.0, k); }

std::pair<std::string, std::string> check_angles(const DyadicPlan& plan, const SectorSpec& sector,
                                                 const std::string& who) {
    const auto r1 = check_nondegeneracy(plan.model, sector.theta1, plan.n0);
    if (!r1.holds())
        throw HypothesisError(who + ": non-degeneracy at theta1 = " + std::to_string(sector.theta1) + " with N0 = " +
                              std::to_string(plan.n0) + " is " + to_string(r1.verdict) + " (" + r1.detail + ")");
    const auto r2 = check_nondegeneracy(plan.model, sector.theta2, plan.n0);
    if (!r2.holds())
        throw HypothesisError(who + ": non-degeneracy at theta2 = " + std::to_string(sector.theta2) + " with N0 = " +
                              std::to_string(plan.n0) + " is " + to_string(r2.verdict) + " (" + r2.detail + ")");
    return {to_string(r1.verdict), to_string(r2.verdict)};
}

OperatorProvenance plan_provenance(const DyadicPlan& plan) {
    return describe_operator(plan.model, plan.perturbation.has_value(), plan.symmetrize);
}

AnnulusSetup setup_annulus(const DyadicPlan& plan, int k, double max_g) {
    AnnulusSetup s;
    s.k = k;
    const auto prov = plan_provenance(plan);
    const double target = 4.0 * pow2(k + 1) * max_g;
    s.modes_low = required_modes(prov, target);
    s.modes_high = 2 * s.modes_low;
    if (s.modes_high > plan.modes_max)
        throw HypothesisError("annulus k = " + std::to_string(k) + ": the trusted radius " + std::to_string(target) +
                              " needs 2K = " + std::to_string(s.modes_high) + " modes, above modes_max = " +
                              std::to_string(plan.modes_max));
    s.trusted_radius = trusted_window(prov, s.modes_low);
    if (plan.perturbation) {
        if (plan.perturbation->cutoff_j) {
            s.cutoff_j = *plan.perturbation->cutoff_j;
        } else {
            const auto choice = resolve_cutoff(*plan.perturbation, 1e-12, RTildeBasis::size_for_modes(s.modes_low));
            s.cutoff_j = choice.j;
            s.tail_ratio = choice.tail_ratio;
        }
    }
    return s;
}

DiscretizedOperator build_operator(const DyadicPlan& plan, int modes, const TrigPoly* potential) {
    DiscretizedOperator op = assemble_operator(plan.model, modes);
    if (plan.symmetrize) op = symmetrize(op);
    if (potential) op = add_potential(op, *potential);
    return op;
}

SpectrumResult solve_cell(const DyadicPlan& plan, const AnnulusSetup& setup, std::uint64_t cell_seed) {
    std::optional<TrigPoly> pot;
    if (plan.perturbation) pot = potential_fourier(sample_potential(*plan.perturbation, cell_seed, setup.cutoff_j));
    const TrigPoly* q = pot ? &*pot : nullptr;
    const auto low = eigensolve(build_operator(plan, setup.modes_low, q), {true, 1e-10});
    const auto high = eigensolve(build_operator(plan, setup.modes_high, q), {false, 1e-10});
    return filter_trusted(low, high, setup.trusted_radius);
}

SpectrumResult scaled(const SpectrumResult& s, double factor) {
    SpectrumResult out = s;
    for (auto& z : out.eigenvalues) z *= factor;
    out.radius_max *= factor;
    return out;
}

std::size_t count_clusters(const SpectrumResult& s) {
    const auto t = s.trusted_eigenvalues();
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = i + 1; j < t.size(); ++j)
            if (std::abs(t[i] - t[j]) <= match_tolerance(t[i])) ++n;
    return n;
}

CellResult count_cell(const SpectrumResult& spectrum, const SectorSpec& sector, int k, std::size_t trial,
                      std::uint64_t seed, double prediction) {
    CellResult c;
    c.k = k;
    c.trial = trial;
    c.seed = seed;
    const auto annulus = sector.with_radii(pow2(k), pow2(k + 1));
    const auto sc = count_in_sector(spectrum, annulus);
    const auto unit = count_in_sector(scaled(spectrum, pow2(-k)), sector.with_radii(1.0, 2.0));
    c.count = sc.count;
    c.count_semiclassical = unit.count;
    c.prediction = prediction;
    c.error = static_cast<double>(c.count) - prediction;
    c.grazing = sc.grazing;
    c.untrusted_inside = sc.untrusted_inside;
    c.ambiguous = spectrum.ambiguous;
    c.clustered = count_clusters(spectrum);
    c.max_residual = spectrum.max_residual;
    return c;
}

SectorSpec annulus_sector(const SectorSpec& sector) {
    SectorSpec s = sector;
    s.closure = RadialClosure::half_open;
    return s;
}

struct Predictions {
    double direct = 0.0;
    double semiclassical = 0.0;
    double defect = 0.0;
};

Predictions predict(const DyadicPlan& plan, const SectorSpec& sector, int k) {
    Predictions p;
    const double h = plan.h(k);
    p.direct = sector_volume(plan.model, sector.with_radii(pow2(k), pow2(k + 1))).value / kTwoPi;
    p.semiclassical = sector_volume(plan.model, sector.with_radii(1.0, 2.0)).value / (kTwoPi * h);
    p.defect = std::abs(p.direct - p.semiclassical) / std::max(std::abs(p.semiclassical), 1e-300);
    return p;
}

AnnulusSummary summarize(const DyadicPlan& plan, const AnnulusSetup& setup, const Predictions& pred,
                         const std::vector<CellResult>& cells) {
    AnnulusSummary a;
    a.k = setup.k;
    a.h = plan.h(setup.k);
    a.lambda_low = pow2(setup.k);
    a.lambda_high = pow2(setup.k + 1);
    a.modes_low = setup.modes_low;
    a.modes_high = setup.modes_high;
    a.trusted_radius = setup.trusted_radius;
    a.potential_cutoff_j = setup.cutoff_j;
    a.potential_tail_ratio = setup.tail_ratio;
    a.prediction = pred.direct;
    a.prediction_semiclassical = pred.semiclassical;
    a.prediction_identity_defect = pred.defect;
    if (cells.empty()) return a;
    for (const auto& c : cells) {
        a.mean_count += static_cast<double>(c.count);
        a.mean_abs_error += std::abs(c.error);
        a.max_abs_error = std::max(a.max_abs_error, std::abs(c.error));
    }
    a.mean_count /= static_cast<double>(cells.size());
    a.mean_abs_error /= static_cast<double>(cells.size());
    a.max_rel_error = pred.direct > 0.0 ? a.max_abs_error / pred.direct : 0.0;
    return a;
}

void finish_report(WeylReport& r, std::size_t trials) {
    r.cumulative.clear();
    std::vector<double> cum(trials, 0.0), tri(trials, 0.0);
    double cum_pred = 0.0;
    for (const auto& a : r.annuli) {
        cum_pred += a.prediction;
        CumulativePoint p;
        p.k = a.k;
        p.lambda = a.lambda_high;
        for (const auto& c : r.cells) {
            if (c.k != a.k) continue;
            cum[c.trial] += static_cast<double>(c.count);
            tri[c.trial] += std::abs(c.error);
        }
        p.prediction = cum_pred;
        for (std::size_t t = 0; t < trials; ++t) {
            const double e = std::abs(cum[t] - cum_pred);
            p.mean_abs_error += e / static_cast<double>(trials);
            p.max_abs_error = std::max(p.max_abs_error, e);
            p.max_sum_of_annulus_errors = std::max(p.max_sum_of_annulus_errors, tri[t]);
            if (e > tri[t] + 1e-9 * (1.0 + tri[t])) r.triangle_holds = false;
        }
        r.cumulative.push_back(p);
        r.max_prediction_identity_defect = std::max(r.max_prediction_identity_defect, a.prediction_identity_defect);
    }
    r.prediction_identity_holds = r.max_prediction_identity_defect <= kPredictionIdentityTol;
    for (const auto& c : r.cells) {
        r.grazing_total += c.grazing;
        r.untrusted_total += c.untrusted_inside;
        r.ambiguous_total += c.ambiguous;
        r.clustered_total += c.clustered;
        if (c.count != c.count_semiclassical) r.count_identity_holds = false;
    }
    if (trials > 0) {
        r.fit_full = fit_error_slope(r.cumulative, false);
        r.fit_top_half = fit_error_slope(r.cumulative, true);
    }
}

WeylReport report_header(const DyadicPlan& plan, const SectorSpec& sector) {
    WeylReport r;
    r.config_hash = hex64(fnv1a(plan.config_text));
    r.seed = plan.seed;
    r.m = plan.model.order();
    r.n = plan.model.dim();
    r.n0 = plan.n0;
    r.delta = plan.delta;
    r.beta = plan.perturbation ? plan.perturbation->beta : 0.0;
    r.sector = sector;
    r.trivial_exponent = static_cast<double>(r.n) / r.m;
    r.theorem_exponent = (r.n - (0.5 - r.beta - r.delta) / (r.n0 + 1.0)) / r.m;
    return r;
}

std::vector<WeylReport> run_members(const DyadicPlan& plan, const std::vector<SectorSpec>& family) {
    plan.validate();
    std::vector<SectorSpec> sectors;
    std::vector<WeylReport> reports;
    double max_g = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) {
        SectorSpec s = annulus_sector(family[i]);
        s.validate();
        const std::string who = family.size() == 1 ? "sector" : "family member " + std::to_string(i);
        const auto [v1, v2] = check_angles(plan, s, who);
        WeylReport r = report_header(plan, s);
        r.verdict_theta1 = v1;
        r.verdict_theta2 = v2;
        reports.push_back(std::move(r));
        max_g = std::max(max_g, s.max_g());
        sectors.push_back(std::move(s));
    }

    std::vector<AnnulusSetup> setups;
    for (int k = plan.k_min; k <= plan.k_max; ++k) setups.push_back(setup_annulus(plan, k, max_g));

    // predictions[member][annulus]
    std::vector<std::vector<Predictions>> predictions(sectors.size());
    for (std::size_t i = 0; i < sectors.size(); ++i)
        for (const auto& s : setups) predictions[i].push_back(predict(plan, sectors[i], s.k));

    const std::size_t n_annuli = setups.size();
    const std::size_t n_cells = n_annuli * plan.trials;
    // results[cell][member]
    std::vector<std::vector<CellResult>> results(n_cells);
    parallel_for(n_cells, plan.workers, [&](std::size_t idx) {
        const std::size_t a = idx / plan.trials;
        const std::size_t trial = idx % plan.trials;
        const auto& setup = setups[a];
        const std::uint64_t seed = derive_seed(plan.seed, {static_cast<std::uint64_t>(setup.k), trial});
        const SpectrumResult spectrum = solve_cell(plan, setup, seed);
        auto& row = results[idx];
        for (std::size_t i = 0; i < sectors.size(); ++i)
            row.push_back(count_cell(spectrum, sectors[i], setup.k, trial, seed, predictions[i][a].direct));
    });

    for (std::size_t i = 0; i < sectors.size(); ++i) {
        WeylReport& r = reports[i];
        if (plan.trials == 0) continue;
        for (std::size_t a = 0; a < n_annuli; ++a) {
            std::vector<CellResult> cells;
            for (std::size_t t = 0; t < plan.trials; ++t) cells.push_back(results[a * plan.trials + t][i]);
            r.annuli.push_back(summarize(plan, setups[a], predictions[i][a], cells));
            r.cells.insert(r.cells.end(), cells.begin(), cells.end());
        }
        finish_report(r, plan.trials);
    }
    return reports;
}

double least_squares(const std::vector<double>& x, const std::vector<double>& y, double* intercept) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    *intercept = (sy - slope * sx) / n;
    return slope;
}

}  // namespace

AnnulusResult annulus_experiment(const DyadicPlan& plan, int k) {
    DyadicPlan single = plan;
    single.k_min = k;
    single.k_max = k;
    auto reports = run_members(single, {plan.sector});
    AnnulusResult out;
    if (!reports[0].annuli.empty()) out.summary = reports[0].annuli[0];
    out.cells = std::move(reports[0].cells);
    return out;
}

WeylReport dyadic_weyl_experiment(const DyadicPlan& plan) {
    return std::move(run_members(plan, {plan.sector})[0]);
}

FamilySweep family_sweep(const DyadicPlan& plan, const std::vector<SectorSpec>& family) {
    if (family.empty()) throw ConfigError("family sweep: empty family");
    FamilySweep out;
    out.members = run_members(plan, family);
    const auto& first = out.members[0];
    out.worst_cumulative = first.cumulative;
    for (const auto& a : first.annuli) out.worst_annulus_error.push_back(a.max_abs_error);
    for (std::size_t i = 1; i < out.members.size(); ++i) {
        const auto& r = out.members[i];
        for (std::size_t p = 0; p < r.cumulative.size(); ++p) {
            auto& w = out.worst_cumulative[p];
            w.max_abs_error = std::max(w.max_abs_error, r.cumulative[p].max_abs_error);
            w.mean_abs_error = std::max(w.mean_abs_error, r.cumulative[p].mean_abs_error);
            w.max_sum_of_annulus_errors =
                std::max(w.max_sum_of_annulus_errors, r.cumulative[p].max_sum_of_annulus_errors);
        }
        for (std::size_t a = 0; a < r.annuli.size(); ++a)
            out.worst_annulus_error[a] = std::max(out.worst_annulus_error[a], r.annuli[a].max_abs_error);
    }
    if (!out.worst_cumulative.empty()) {
        out.worst_fit_full = fit_error_slope(out.worst_cumulative, false);
        out.worst_fit_top_half = fit_error_slope(out.worst_cumulative, true);
    }
    return out;
}

std::optional<SlopeFit> fit_error_slope(const std::vector<CumulativePoint>& points, bool top_half) {
    const std::size_t start = top_half ? points.size() / 2 : 0;
    std::vector<double> x, y;
    for (std::size_t i = start; i < points.size(); ++i) {
        if (!(points[i].max_abs_error > 0.0)) continue;
        x.push_back(std::log(points[i].lambda));
        y.push_back(std::log(points[i].max_abs_error));
    }
    if (x.size() < 2) return std::nullopt;
    SlopeFit fit;
    fit.slope = least_squares(x, y, &fit.intercept);
    fit.points = x.size();
    return fit;
}

namespace {

nlohmann::json sector_json(const SectorSpec& s) {
    nlohmann::json j = {{"theta1", s.theta1}, {"theta2", s.theta2}, {"closure", "half_open"}};
    if (s.g.is_constant()) {
        j["g"] = s.g.constant_value();
    } else {
        nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
        for (const auto& c : s.g.poly()->coefficients()) {
            re.push_back(c.real());
            im.push_back(c.imag());
        }
        j["g"] = {{"exponential_re", re}, {"exponential_im", im}};
    }
    return j;
}

nlohmann::json fit_json(const std::optional<SlopeFit>& f) {
    if (!f) return nullptr;
    return {{"slope", f->slope}, {"intercept", f->intercept}, {"points", f->points}};
}

nlohmann::json cumulative_json(const std::vector<CumulativePoint>& pts) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : pts)
        arr.push_back({{"k", p.k},
                       {"lambda", p.lambda},
                       {"prediction", p.prediction},
                       {"mean_abs_error", p.mean_abs_error},
                       {"max_abs_error", p.max_abs_error},
                       {"max_sum_of_annulus_errors", p.max_sum_of_annulus_errors}});
    return arr;
}

}  // namespace

nlohmann::json report_json(const WeylReport& r) {
    nlohmann::json annuli = nlohmann::json::array();
    for (const auto& a : r.annuli)
        annuli.push_back({{"k", a.k},
                          {"h", a.h},
                          {"lambda_low", a.lambda_low},
                          {"lambda_high", a.lambda_high},
                          {"modes_low", a.modes_low},
                          {"modes_high", a.modes_high},
                          {"trusted_radius", a.trusted_radius},
                          {"potential_cutoff_j", a.potential_cutoff_j},
                          {"potential_tail_ratio", a.potential_tail_ratio},
                          {"prediction", a.prediction},
                          {"prediction_semiclassical", a.prediction_semiclassical},
                          {"prediction_identity_defect", a.prediction_identity_defect},
                          {"mean_count", a.mean_count},
                          {"mean_abs_error", a.mean_abs_error},
                          {"max_abs_error", a.max_abs_error},
                          {"max_rel_error", a.max_rel_error}});
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells)
        cells.push_back({{"k", c.k},
                         {"trial", c.trial},
                         {"seed", c.seed},
                         {"count", c.count},
                         {"count_semiclassical", c.count_semiclassical},
                         {"prediction", c.prediction},
                         {"error", c.error},
                         {"grazing", c.grazing},
                         {"untrusted_inside", c.untrusted_inside},
                         {"ambiguous", c.ambiguous},
                         {"clustered", c.clustered},
                         {"max_residual", c.max_residual}});
    nlohmann::json j;
    j["version"] = r.version;
    j["config_hash"] = r.config_hash;
    j["seed"] = r.seed;
    j["m"] = r.m;
    j["n"] = r.n;
    j["n0"] = r.n0;
    j["delta"] = r.delta;
    j["beta"] = r.beta;
    j["sector"] = sector_json(r.sector);
    j["nondegeneracy"] = {{"theta1", r.verdict_theta1}, {"theta2", r.verdict_theta2}};
    j["constants"] = {{"match_tolerance", "1e-6 * (1 + |lambda|)"},
                      {"residual_tolerance", 1e-10},
                      {"grazing_distance", kGrazingDistance},
                      {"jet_relative_threshold", NondegeneracyOptions{}.jet_rel_threshold},
                      {"jet_absolute_floor", NondegeneracyOptions{}.jet_abs_floor},
                      {"prediction_identity_tolerance", kPredictionIdentityTol}};
    j["annuli"] = annuli;
    j["cumulative"] = cumulative_json(r.cumulative);
    j["fit_full_range"] = fit_json(r.fit_full);
    j["fit_top_half"] = fit_json(r.fit_top_half);
    j["random_constant_proxy"] = r.fit_full ? nlohmann::json(std::exp(r.fit_full->intercept)) : nlohmann::json(nullptr);
    j["trivial_exponent"] = r.trivial_exponent;
    j["theorem_exponent"] = r.theorem_exponent;
    j["flags"] = {{"grazing", r.grazing_total},
                  {"untrusted_inside", r.untrusted_total},
                  {"ambiguous", r.ambiguous_total},
                  {"clustered", r.clustered_total}};
    j["identities"] = {{"count_identity_holds", r.count_identity_holds},
                       {"prediction_identity_holds", r.prediction_identity_holds},
                       {"max_prediction_identity_defect", r.max_prediction_identity_defect},
                       {"triangle_holds", r.triangle_holds}};
    j["cells"] = cells;
    return j;
}

nlohmann::json family_json(const FamilySweep& sweep) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& r : sweep.members) members.push_back(report_json(r));
    return {{"version", kVersion},
            {"members", members},
            {"worst_cumulative", cumulative_json(sweep.worst_cumulative)},
            {"worst_annulus_error", sweep.worst_annulus_error},
            {"worst_fit_full_range", fit_json(sweep.worst_fit_full)},
            {"worst_fit_top_half", fit_json(sweep.worst_fit_top_half)}};
}

std::string cells_csv(const WeylReport& r) {
    std::ostringstream out;
    out.precision(17);
    out << "k,trial,count,prediction,error\n";
    for (const auto& c : r.cells) out << c.k << ',' << c.trial << ',' << c.count << ',' << c.prediction << ',' << c.error << '\n';
    return out.str();
}

std::string plot_csv(const WeylReport& r) {
    std::ostringstream out;
    out.precision(17);
    out << "log_lambda,log_max_error,log_mean_error,trivial_reference,theorem_reference\n";
    if (r.cumulative.empty()) return out.str();
    // Reference lines share the first point's height.
    const double x0 = std::log(r.cumulative.front().lambda);
    const double y0 = r.cumulative.front().max_abs_error > 0.0 ? std::log(r.cumulative.front().max_abs_error) : 0.0;
    for (const auto& p : r.cumulative) {
        const double x = std::log(p.lambda);
        out << x << ',';
        if (p.max_abs_error > 0.0) out << std::log(p.max_abs_error);
        out << ',';
        if (p.mean_abs_error > 0.0) out << std::log(p.mean_abs_error);
        out << ',' << y0 + r.trivial_exponent * (x - x0) << ',' << y0 + r.theorem_exponent * (x - x0) << '\n';
    }
    return out.str();
}

}  // namespace weyl
