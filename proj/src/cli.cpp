#include "weyl/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "weyl/config.hpp"
#include "weyl/discretization.hpp"
#include "weyl/errors.hpp"
#include "weyl/experiment.hpp"
#include "weyl/hash.hpp"
#include "weyl/parallel.hpp"
#include "weyl/random.hpp"
#include "weyl/spectra.hpp"

namespace weyl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string symbol, pert, sector, plan;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::optional<unsigned> workers;
    std::optional<int> modes_max;
    std::string format = "both";

    double theta = 0.0;
    int n0 = 1;
    std::optional<double> vz_re, vz_im, t;
    std::optional<std::size_t> cutoff;
    int modes = 64;
    std::optional<double> radius;
    bool no_symmetrize = false;
    std::size_t trials = 0;
    std::optional<double> c0;
    int m = 2;
    std::vector<double> h_list{0.9, 0.7, 0.5, 0.35};
};

struct Outputs {
    fs::path dir;
    std::string format;
    std::vector<std::string> written;

    bool json_on() const { return format != "csv"; }
    bool csv_on() const { return format != "json"; }

    void write(const std::string& name, const std::string& content) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        const fs::path p = dir / name;
        std::ofstream f(p, std::ios::binary);
        if (!f) throw ConfigError("cannot write output file: " + p.string());
        f << content;
        written.push_back(p.string());
    }
    void write_json(const std::string& name, const json& j) {
        if (json_on()) write(name, j.dump(2) + "\n");
    }
    void write_csv(const std::string& name, const std::string& csv) {
        if (csv_on()) write(name, csv);
    }
};

unsigned resolve_workers(const Options& o) {
    if (o.workers) return *o.workers;
    if (const char* env = std::getenv("WEYL_LAB_WORKERS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0') throw ConfigError(std::string("WEYL_LAB_WORKERS is not an integer: ") + env);
        return static_cast<unsigned>(v);
    }
    return default_workers();
}

std::string need(const std::string& value, const char* flag) {
    if (value.empty()) throw ConfigError(std::string("missing required option ") + flag);
    return value;
}

json embed(const Options& o, std::uint64_t seed) {
    return {{"version", kVersion}, {"seed", seed}, {"workers_do_not_affect_results", true},
            {"inputs", {{"symbol", o.symbol}, {"pert", o.pert}, {"sector", o.sector}, {"plan", o.plan}}}};
}

std::string config_hash_of(const std::vector<json>& parts) {
    std::string raw;
    for (const auto& p : parts) raw += p.dump() + "\n";
    return hex64(fnv1a(raw));
}

json points_json(const ArgLevelSet& set) {
    json arr = json::array();
    for (const auto& p : set.points) {
        const char* kind = p.kind == LevelPoint::Kind::crossing ? "crossing"
                           : p.kind == LevelPoint::Kind::grid_zero ? "grid_zero"
                                                                   : "tangency";
        arr.push_back({{"x", p.x},
                       {"omega", p.omega},
                       {"kind", kind},
                       {"residual", p.residual},
                       {"jets", p.jets},
                       {"degenerate", p.degenerate},
                       {"resolved", p.resolved}});
    }
    return arr;
}

int cmd_symbol_check(const Options& o, Outputs& outs, std::ostream& out) {
    const json sj = read_json_file(need(o.symbol, "--symbol"));
    const SymbolModel model = symbol_from_json(sj);
    const auto res = check_nondegeneracy(model, o.theta, o.n0);
    json j = embed(o, o.seed.value_or(0));
    j["config_hash"] = config_hash_of({sj});
    j["theta0"] = o.theta;
    j["n0"] = o.n0;
    j["verdict"] = to_string(res.verdict);
    j["detail"] = res.detail;
    j["thresholds"] = res.thresholds;
    j["continuum"] = res.witness.continuum;
    j["level_set"] = points_json(res.witness);
    j["arg_center"] = model.arg_center();
    j["range_gap"] = model.range_gap();
    const NondegeneracyOptions defaults;
    j["constants"] = {{"grid", defaults.grid},
                      {"root_tol", defaults.root_tol},
                      {"jet_rel_threshold", defaults.jet_rel_threshold},
                      {"jet_abs_floor", defaults.jet_abs_floor},
                      {"tangency_tol", defaults.tangency_tol}};
    outs.write_json("symbol_check.json", j);
    out << "symbol-check: P(" << o.theta << ", " << o.n0 << ") " << to_string(res.verdict) << " ("
        << res.witness.points.size() << " level points)\n";
    return res.holds() ? kOk : kHypothesisFailure;
}

int cmd_volume(const Options& o, Outputs& outs, std::ostream& out) {
    const json sj = read_json_file(need(o.symbol, "--symbol"));
    const SymbolModel model = symbol_from_json(sj);
    json j = embed(o, o.seed.value_or(0));
    std::vector<json> parts{sj};
    if (o.t) {
        const cplx z{o.vz_re.value_or(1.0), o.vz_im.value_or(0.0)};
        const auto r = v_z_of_t(model, z, *o.t);
        j["kind"] = "v_z";
        j["z"] = {z.real(), z.imag()};
        j["t"] = *o.t;
        j["volume"] = r.value;
        j["error_estimate"] = r.error;
        out << "volume: V_z(t) = " << r.value << " (z = " << z.real() << (z.imag() < 0 ? "" : "+") << z.imag()
            << "i, t = " << *o.t << ")\n";
    } else {
        const json sec = read_json_file(need(o.sector, "--sector"));
        parts.push_back(sec);
        const SectorSpec sector = sector_from_json(sec);
        const auto r = sector_volume(model, sector);
        j["kind"] = "sector";
        j["volume"] = r.value;
        j["error_estimate"] = r.error;
        j["weyl_prediction"] = r.value / kTwoPi;
        out << "volume: sector volume = " << r.value << ", prediction = " << r.value / kTwoPi << "\n";
    }
    j["config_hash"] = config_hash_of(parts);
    outs.write_json("volume.json", j);
    return kOk;
}

std::size_t cutoff_for(const PerturbationSpec& spec, const Options& o, json& info) {
    if (o.cutoff) {
        info["cutoff_J"] = *o.cutoff;
        info["cutoff_source"] = "flag";
        return *o.cutoff;
    }
    if (spec.cutoff_j) {
        info["cutoff_J"] = *spec.cutoff_j;
        info["cutoff_source"] = "config";
        return *spec.cutoff_j;
    }
    const auto choice = resolve_cutoff(spec, 1e-12, RTildeBasis::size_for_modes(o.modes_max.value_or(2048)));
    info["cutoff_J"] = choice.j;
    info["cutoff_source"] = "auto";
    info["cutoff_tail_ratio"] = choice.tail_ratio;
    info["cutoff_capped"] = choice.capped;
    return choice.j;
}

int cmd_sample(const Options& o, Outputs& outs, std::ostream& out) {
    const json pj = read_json_file(need(o.pert, "--pert"));
    const PerturbationSpec spec = perturbation_from_json(pj);
    const std::uint64_t seed = o.seed.value_or(0);
    json j = embed(o, seed);
    j["config_hash"] = config_hash_of({pj});
    const std::size_t cutoff = cutoff_for(spec, o, j);
    const auto pot = sample_potential(spec, seed, cutoff);
    j["hs_norm"] = hs_norm(pot, spec.s);
    j["expected_hs_norm_sq"] = expected_hs_norm_sq(spec, spec.s, cutoff);
    j["m_exponent"] = spec.m_exponent();
    outs.write_json("sample.json", j);
    outs.write_csv("potential.csv", potential_csv(pot));
    out << "sample: J = " << cutoff << ", |q|_{H^s} = " << hs_norm(pot, spec.s) << "\n";
    return kOk;
}

int cmd_spectrum(const Options& o, Outputs& outs, std::ostream& out) {
    const json sj = read_json_file(need(o.symbol, "--symbol"));
    const SymbolModel model = symbol_from_json(sj);
    const std::uint64_t seed = o.seed.value_or(0);
    std::vector<json> parts{sj};
    json j = embed(o, seed);
    std::optional<TrigPoly> pot;
    if (!o.pert.empty()) {
        const json pj = read_json_file(o.pert);
        parts.push_back(pj);
        const PerturbationSpec spec = perturbation_from_json(pj);
        json info;
        const std::size_t cutoff = o.cutoff ? *o.cutoff
                                   : spec.cutoff_j ? *spec.cutoff_j
                                                   : resolve_cutoff(spec, 1e-12, RTildeBasis::size_for_modes(o.modes)).j;
        pot = potential_fourier(sample_potential(spec, seed, cutoff));
        j["potential_cutoff_J"] = cutoff;
    }
    if (2 * o.modes > o.modes_max.value_or(2048))
        throw ConfigError("spectrum: 2K = " + std::to_string(2 * o.modes) + " exceeds --modes-max");
    auto build = [&](int k) {
        DiscretizedOperator op = assemble_operator(model, k);
        if (!o.no_symmetrize) op = symmetrize(op);
        if (pot) op = add_potential(op, *pot);
        return op;
    };
    const auto low_op = build(o.modes);
    const auto low = eigensolve(low_op);
    const auto high = eigensolve(build(2 * o.modes), {false, 1e-10});
    const double window = trusted_window(low_op);
    const double radius = o.radius.value_or(window);
    const auto spec = filter_trusted(low, high, radius);
    j["config_hash"] = config_hash_of(parts);
    j["modes_low"] = o.modes;
    j["modes_high"] = 2 * o.modes;
    j["symmetrized"] = !o.no_symmetrize;
    j["trusted_window"] = window;
    j["radius_max"] = radius;
    j["eigenvalues"] = low.eigenvalues.size();
    j["trusted"] = spec.trusted_count();
    j["untrusted_inside"] = spec.untrusted_inside;
    j["ambiguous"] = spec.ambiguous;
    j["max_residual"] = spec.max_residual;
    j["symmetry_defect"] = adjoint_symmetry_test(low_op, 8, derive_seed(seed, {0x5e}));
    if (!o.sector.empty()) {
        const json sec = read_json_file(o.sector);
        const auto c = count_in_sector(spec, sector_from_json(sec));
        j["sector_count"] = {{"count", c.count}, {"grazing", c.grazing}, {"untrusted_inside", c.untrusted_inside}};
    }
    outs.write_json("spectrum.json", j);
    outs.write_csv("spectrum.csv", spectrum_csv(spec));
    out << "spectrum: " << spec.trusted_count() << " trusted of " << low.eigenvalues.size() << " eigenvalues (radius "
        << radius << ")\n";
    return kOk;
}

DyadicPlan& apply_overrides(LoadedPlan& lp, const Options& o) {
    DyadicPlan& plan = lp.plan;
    if (o.seed) plan.seed = *o.seed;
    if (o.modes_max) plan.modes_max = *o.modes_max;
    plan.workers = resolve_workers(o);
    plan.validate();
    return plan;
}

int cmd_experiment_weyl(const Options& o, Outputs& outs, std::ostream& out) {
    LoadedPlan lp = plan_from_file(need(o.plan, "--plan"));
    const DyadicPlan& plan = apply_overrides(lp, o);
    const WeylReport report = dyadic_weyl_experiment(plan);
    outs.write_json("weyl_report.json", report_json(report));
    outs.write_csv("weyl_cells.csv", cells_csv(report));
    outs.write_csv("weyl_plot.csv", plot_csv(report));
    out << "experiment-weyl: k = " << plan.k_min << ".." << plan.k_max << ", " << plan.trials << " trials";
    if (report.fit_full) out << ", slope " << report.fit_full->slope;
    if (report.fit_top_half) out << " (top half " << report.fit_top_half->slope << ")";
    out << " vs n/m = " << report.trivial_exponent << "\n";
    return kOk;
}

int cmd_family_sweep(const Options& o, Outputs& outs, std::ostream& out) {
    LoadedPlan lp = plan_from_file(need(o.plan, "--plan"));
    const DyadicPlan& plan = apply_overrides(lp, o);
    if (lp.family.empty()) throw ConfigError("family-sweep: the plan has no \"family\" list");
    const FamilySweep sweep = family_sweep(plan, lp.family);
    outs.write_json("family_report.json", family_json(sweep));
    if (outs.csv_on()) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "member,k,trial,count,prediction,error\n";
        for (std::size_t i = 0; i < sweep.members.size(); ++i)
            for (const auto& c : sweep.members[i].cells)
                csv << i << ',' << c.k << ',' << c.trial << ',' << c.count << ',' << c.prediction << ',' << c.error
                    << '\n';
        outs.write_csv("family_cells.csv", csv.str());
    }
    out << "family-sweep: " << sweep.members.size() << " members";
    if (sweep.worst_fit_full) out << ", worst-case slope " << sweep.worst_fit_full->slope;
    if (sweep.worst_fit_top_half) out << " (top half " << sweep.worst_fit_top_half->slope << ")";
    out << "\n";
    return kOk;
}

json tail_check_json(const TailBoundInput& in, const TailBoundCheck& c) {
    return {{"sigma_hats", in.sigma_hats},
            {"t", in.t},
            {"c0", in.c0},
            {"empirical", c.empirical},
            {"mc_sigma", c.mc_sigma},
            {"bound", c.bound},
            {"dominated", c.dominated},
            {"prefix_len", c.prefix_len},
            {"prefix_empirical", c.prefix_empirical},
            {"prefix_bound", c.prefix_bound},
            {"subfamily_monotone", c.subfamily_monotone}};
}

int cmd_tailbound(const Options& o, Outputs& outs, std::ostream& out) {
    const std::uint64_t seed = o.seed.value_or(0);
    const std::size_t trials = o.trials ? o.trials : 100000;
    const unsigned workers = resolve_workers(o);
    json j = embed(o, seed);
    j["trials"] = trials;
    double c0 = o.c0.value_or(0.0);
    if (!o.c0) {
        const auto cal = calibrate_c0(standard_tail_matrix(), trials, derive_seed(seed, {1}), 1.0, 1.05, 400, workers);
        c0 = cal.c0;
        j["c0_source"] = "calibrated";
    } else {
        j["c0_source"] = "flag";
    }
    j["c0"] = c0;
    json rows = json::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "config,t,empirical,mc_sigma,bound,dominated\n";
    bool all = true;
    const auto matrix = standard_tail_matrix(c0);
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        const auto c = verify_tail_bound(matrix[i], trials, derive_seed(seed, {2, i}), 3, workers);
        all = all && c.dominated;
        rows.push_back(tail_check_json(matrix[i], c));
        csv << i << ',' << matrix[i].t << ',' << c.empirical << ',' << c.mc_sigma << ',' << c.bound << ','
            << c.dominated << '\n';
    }
    // One Gaussian: P(|d|^2 >= t) = exp(-t / sigma^2).
    const TailBoundInput single{{1.0}, 2.0, c0};
    const auto sc = verify_tail_bound(single, trials, derive_seed(seed, {3}), 1, workers);
    const double closed = std::exp(-single.t);
    j["configurations"] = rows;
    j["all_dominated"] = all;
    j["single_gaussian"] = {{"t", single.t},
                            {"empirical", sc.empirical},
                            {"mc_sigma", sc.mc_sigma},
                            {"closed_form", closed},
                            {"within_3_sigma", std::abs(sc.empirical - closed) <= 3.0 * sc.mc_sigma}};
    outs.write_json("tailbound.json", j);
    outs.write_csv("tailbound.csv", csv.str());
    out << "experiment-tailbound: c0 = " << c0 << ", " << matrix.size() << " configurations "
        << (all ? "dominated" : "NOT all dominated") << "\n";
    return kOk;
}

int cmd_calibrate(const Options& o, Outputs& outs, std::ostream& out) {
    const std::uint64_t seed = o.seed.value_or(0);
    const std::size_t trials = o.trials ? o.trials : 100000;
    const auto matrix = standard_tail_matrix();
    const auto cal = calibrate_c0(matrix, trials, derive_seed(seed, {1}), o.c0.value_or(1.0), 1.05, 400,
                                  resolve_workers(o));
    json j = embed(o, seed);
    j["trials"] = trials;
    j["c0"] = cal.c0;
    j["iterations"] = cal.iterations;
    json rows = json::array();
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        TailBoundInput in = matrix[i];
        in.c0 = cal.c0;
        rows.push_back(tail_check_json(in, cal.checks[i]));
    }
    j["configurations"] = rows;
    outs.write_json("c0.json", j);
    out << "calibrate-c0: c0 = " << cal.c0 << " after " << cal.iterations << " steps\n";
    return kOk;
}

int cmd_sc1(const Options& o, Outputs& outs, std::ostream& out) {
    const json pj = read_json_file(need(o.pert, "--pert"));
    const PerturbationSpec spec = perturbation_from_json(pj);
    const std::uint64_t seed = o.seed.value_or(0);
    json j = embed(o, seed);
    j["config_hash"] = config_hash_of({pj});
    const std::size_t cutoff = cutoff_for(spec, o, j);
    const std::size_t trials = o.trials ? o.trials : 10000;
    const auto table =
        prop_sc1_experiment(spec, o.m, o.h_list, trials, seed, cutoff, o.c0.value_or(1.0), resolve_workers(o));
    json rows = json::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "h,trials,failures,failure_prob,mc_sigma,analytic_bound\n";
    for (const auto& r : table.rows) {
        rows.push_back({{"h", r.h},
                        {"trials", r.trials},
                        {"failures", r.failures},
                        {"failure_prob", r.failure_prob},
                        {"mc_sigma", r.mc_sigma},
                        {"sum_sigma_tilde_sq", r.sum_sigma_tilde_sq},
                        {"max_sigma_tilde_sq", r.max_sigma_tilde_sq},
                        {"analytic_bound", r.analytic_bound}});
        csv << r.h << ',' << r.trials << ',' << r.failures << ',' << r.failure_prob << ',' << r.mc_sigma << ','
            << r.analytic_bound << '\n';
    }
    j["m"] = table.m;
    j["s"] = table.s_order;
    j["c0"] = o.c0.value_or(1.0);
    j["rows"] = rows;
    j["monotone"] = table.monotone;
    j["log_slope"] = table.log_slope ? json(*table.log_slope) : json(nullptr);
    j["fitted_c"] = table.fitted_c ? json(*table.fitted_c) : json(nullptr);
    outs.write_json("sc1.json", j);
    outs.write_csv("sc1.csv", csv.str());
    out << "experiment-sc1: " << table.rows.size() << " h values, monotone = " << (table.monotone ? "yes" : "no");
    if (table.log_slope) out << ", log slope " << *table.log_slope;
    out << "\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weyl-law laboratory for non-self-adjoint operators on the circle", "weyl-lab"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Master seed (unsigned 64-bit)");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--workers", o.workers, "Worker threads (default: WEYL_LAB_WORKERS or all cores)");
        sub->add_option("--modes-max", o.modes_max, "Largest Galerkin resolution 2K");
        sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv", "both"}));
    };

    auto* symbol_check = app.add_subcommand("symbol-check", "Check the angular non-degeneracy condition");
    symbol_check->add_option("--symbol", o.symbol)->required();
    symbol_check->add_option("--theta", o.theta, "Direction theta0");
    symbol_check->add_option("--n0", o.n0, "Jet order N0");

    auto* volume = app.add_subcommand("volume", "Phase-space volume of a sector, or V_z(t) with --t");
    volume->add_option("--symbol", o.symbol)->required();
    volume->add_option("--sector", o.sector);
    volume->add_option("--t", o.t, "Disk radius squared for V_z(t)");
    volume->add_option("--z-re", o.vz_re, "Re z for V_z(t)");
    volume->add_option("--z-im", o.vz_im, "Im z for V_z(t)");

    auto* sample = app.add_subcommand("sample", "Draw one random potential");
    sample->add_option("--pert", o.pert)->required();
    sample->add_option("--cutoff", o.cutoff, "Basis size J");

    auto* spectrum = app.add_subcommand("spectrum", "Trusted spectrum at K modes, cross-checked at 2K");
    spectrum->add_option("--symbol", o.symbol)->required();
    spectrum->add_option("--pert", o.pert);
    spectrum->add_option("--sector", o.sector);
    spectrum->add_option("--modes", o.modes, "Low resolution K");
    spectrum->add_option("--radius", o.radius, "Matching radius (default: trusted window)");
    spectrum->add_option("--cutoff", o.cutoff, "Potential basis size J");
    spectrum->add_flag("--no-symmetrize", o.no_symmetrize, "Skip the (P + Gamma P* Gamma)/2 step");

    auto* weyl = app.add_subcommand("experiment-weyl", "Dyadic Weyl-law experiment");
    weyl->add_option("--plan", o.plan)->required();

    auto* family = app.add_subcommand("family-sweep", "Dyadic experiment over a family of sectors");
    family->add_option("--plan", o.plan)->required();

    auto* tail = app.add_subcommand("experiment-tailbound", "Gaussian tail bound against Monte Carlo");
    tail->add_option("--trials", o.trials, "Trials per configuration");
    tail->add_option("--c0", o.c0, "Use this c0 instead of calibrating");

    auto* sc1 = app.add_subcommand("experiment-sc1", "Failure probability of the semiclassical smallness");
    sc1->add_option("--pert", o.pert)->required();
    sc1->add_option("--m", o.m, "Operator order");
    sc1->add_option("--h-values", o.h_list, "Values of h");
    sc1->add_option("--trials", o.trials, "Trials");
    sc1->add_option("--cutoff", o.cutoff, "Basis size J");
    sc1->add_option("--c0", o.c0, "c0 for the analytic bound column");

    auto* calibrate = app.add_subcommand("calibrate-c0", "Calibrate c0 on the standard tail matrix");
    calibrate->add_option("--trials", o.trials, "Trials per configuration");
    calibrate->add_option("--c0", o.c0, "Starting value");

    for (auto* sub : {symbol_check, volume, sample, spectrum, weyl, family, tail, sc1, calibrate}) add_common(sub);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigFailure;
    }

    Outputs outs{o.out, o.format, {}};
    try {
        int code = kOk;
        if (*symbol_check) code = cmd_symbol_check(o, outs, out);
        else if (*volume) code = cmd_volume(o, outs, out);
        else if (*sample) code = cmd_sample(o, outs, out);
        else if (*spectrum) code = cmd_spectrum(o, outs, out);
        else if (*weyl) code = cmd_experiment_weyl(o, outs, out);
        else if (*family) code = cmd_family_sweep(o, outs, out);
        else if (*tail) code = cmd_tailbound(o, outs, out);
        else if (*sc1) code = cmd_sc1(o, outs, out);
        else if (*calibrate) code = cmd_calibrate(o, outs, out);
        for (const auto& p : outs.written) out << "wrote " << p << "\n";
        return code;
    } catch (const HypothesisError& e) {
        err << "hypothesis failure: " << e.what() << "\n";
        return kHypothesisFailure;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigFailure;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace weyl::cli
