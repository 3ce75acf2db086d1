#include "weyl/config.hpp"

#include <fstream>
#include <set>

#include "weyl/errors.hpp"

namespace weyl {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& what) {
    if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& what) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key)) throw ConfigError(what + ": unknown key \"" + key + "\"");
    }
}

double number_at(const json& j, const char* key, double fallback, const std::string& what) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(what + ": \"" + key + "\" must be a number");
    return j.at(key).get<double>();
}

int int_at(const json& j, const char* key, int fallback, const std::string& what) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw ConfigError(what + ": \"" + key + "\" must be an integer");
    return j.at(key).get<int>();
}

std::vector<double> numbers_at(const json& j, const char* key, const std::string& what) {
    if (!j.contains(key)) return {};
    const json& arr = j.at(key);
    if (!arr.is_array()) throw ConfigError(what + ": \"" + key + "\" must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : arr) {
        if (!v.is_number()) throw ConfigError(what + ": \"" + key + "\" must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<cplx> combine(const std::vector<double>& re, const std::vector<double>& im) {
    std::vector<cplx> out(std::max(re.size(), im.size()), cplx{0.0});
    for (std::size_t i = 0; i < re.size(); ++i) out[i] += re[i];
    for (std::size_t i = 0; i < im.size(); ++i) out[i] += cplx{0.0, im[i]};
    return out;
}

RadialProfile profile_from_json(const json& g) {
    if (g.is_number()) return RadialProfile(g.get<double>());
    require_object(g, "sector.g");
    reject_unknown(g, {"cos", "sin"}, "sector.g");
    const auto cos_t = combine(numbers_at(g, "cos", "sector.g"), {});
    const auto sin_t = combine(numbers_at(g, "sin", "sector.g"), {});
    if (cos_t.empty() && sin_t.empty()) throw ConfigError("sector.g: empty trig polynomial");
    return RadialProfile(TrigPoly::from_cos_sin(cos_t, sin_t));
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
}

SymbolModel symbol_from_json(const json& j) {
    const std::string what = "symbol";
    require_object(j, what);
    reject_unknown(j, {"m", "n", "coeffs"}, what);
    if (!j.contains("m")) throw ConfigError("symbol: missing \"m\"");
    const int m = int_at(j, "m", 2, what);
    const int n = int_at(j, "n", 1, what);
    if (!j.contains("coeffs") || !j.at("coeffs").is_array()) throw ConfigError("symbol: \"coeffs\" must be an array");
    std::map<int, TrigPoly> coeffs;
    for (const auto& c : j.at("coeffs")) {
        require_object(c, "symbol.coeffs[]");
        reject_unknown(c, {"alpha", "cos", "sin", "cos_imag", "sin_imag"}, "symbol.coeffs[]");
        if (!c.contains("alpha")) throw ConfigError("symbol.coeffs[]: missing \"alpha\"");
        const int alpha = int_at(c, "alpha", 0, "symbol.coeffs[]");
        const auto cos_t = combine(numbers_at(c, "cos", what), numbers_at(c, "cos_imag", what));
        const auto sin_t = combine(numbers_at(c, "sin", what), numbers_at(c, "sin_imag", what));
        TrigPoly poly = TrigPoly::from_cos_sin(cos_t, sin_t);
        auto [it, inserted] = coeffs.emplace(alpha, poly);
        if (!inserted) it->second += poly;
    }
    return SymbolModel::create(m, std::move(coeffs), n);
}

PerturbationSpec perturbation_from_json(const json& j) {
    const std::string what = "perturbation";
    require_object(j, what);
    reject_unknown(j, {"rho", "s", "eps", "beta", "cutoff_J", "n"}, what);
    PerturbationSpec spec;
    spec.rho = number_at(j, "rho", spec.rho, what);
    spec.s = number_at(j, "s", spec.s, what);
    spec.eps = number_at(j, "eps", spec.eps, what);
    spec.beta = number_at(j, "beta", spec.beta, what);
    spec.dim_n = int_at(j, "n", 1, what);
    if (j.contains("cutoff_J")) {
        const json& c = j.at("cutoff_J");
        if (c.is_string()) {
            if (c.get<std::string>() != "auto") throw ConfigError("perturbation: cutoff_J must be an integer or \"auto\"");
        } else if (c.is_number_integer() && c.get<long long>() > 0) {
            spec.cutoff_j = c.get<std::size_t>();
        } else {
            throw ConfigError("perturbation: cutoff_J must be a positive integer or \"auto\"");
        }
    }
    spec.validate();
    return spec;
}

SectorSpec sector_from_json(const json& j) {
    const std::string what = "sector";
    require_object(j, what);
    reject_unknown(j, {"theta1", "theta2", "r1", "r2", "g", "closure"}, what);
    SectorSpec s;
    s.theta1 = number_at(j, "theta1", s.theta1, what);
    s.theta2 = number_at(j, "theta2", s.theta2, what);
    s.r1 = number_at(j, "r1", s.r1, what);
    s.r2 = number_at(j, "r2", s.r2, what);
    if (j.contains("g")) s.g = profile_from_json(j.at("g"));
    if (j.contains("closure")) {
        const auto& c = j.at("closure");
        if (c == "closed") s.closure = RadialClosure::closed;
        else if (c == "half_open") s.closure = RadialClosure::half_open;
        else throw ConfigError("sector: closure must be \"closed\" or \"half_open\"");
    }
    s.validate();
    return s;
}

json resolve_reference(const json& value, const std::filesystem::path& base_dir) {
    if (value.is_string()) {
        std::filesystem::path p = value.get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        return read_json_file(p);
    }
    return value;
}

LoadedPlan plan_from_json(const json& j, const std::filesystem::path& base_dir) {
    const std::string what = "plan";
    require_object(j, what);
    reject_unknown(j,
                   {"symbol", "perturbation", "sector", "family", "k_min", "k_max", "trials", "seed", "n0", "delta",
                    "symmetrize", "modes_max"},
                   what);
    if (!j.contains("symbol")) throw ConfigError("plan: missing \"symbol\"");
    json resolved = j;
    resolved["symbol"] = resolve_reference(j.at("symbol"), base_dir);
    LoadedPlan out{DyadicPlan(symbol_from_json(resolved["symbol"])), {}};
    DyadicPlan& plan = out.plan;
    if (j.contains("perturbation") && !j.at("perturbation").is_null()) {
        resolved["perturbation"] = resolve_reference(j.at("perturbation"), base_dir);
        plan.perturbation = perturbation_from_json(resolved["perturbation"]);
    }
    if (j.contains("sector")) {
        resolved["sector"] = resolve_reference(j.at("sector"), base_dir);
        plan.sector = sector_from_json(resolved["sector"]);
    }
    if (j.contains("family")) {
        if (!j.at("family").is_array()) throw ConfigError("plan: \"family\" must be an array of sectors");
        json fam = json::array();
        for (const auto& item : j.at("family")) {
            fam.push_back(resolve_reference(item, base_dir));
            out.family.push_back(sector_from_json(fam.back()));
        }
        resolved["family"] = fam;
    }
    plan.k_min = int_at(j, "k_min", plan.k_min, what);
    plan.k_max = int_at(j, "k_max", plan.k_max, what);
    const int trials = int_at(j, "trials", static_cast<int>(plan.trials), what);
    if (trials < 0) throw ConfigError("plan: trials must be non-negative");
    plan.trials = static_cast<std::size_t>(trials);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ConfigError("plan: seed must be an unsigned 64-bit integer");
        plan.seed = j.at("seed").get<std::uint64_t>();
    }
    plan.n0 = int_at(j, "n0", plan.n0, what);
    plan.delta = number_at(j, "delta", plan.delta, what);
    if (j.contains("symmetrize")) {
        if (!j.at("symmetrize").is_boolean()) throw ConfigError("plan: symmetrize must be a boolean");
        plan.symmetrize = j.at("symmetrize").get<bool>();
    }
    plan.modes_max = int_at(j, "modes_max", plan.modes_max, what);
    plan.config_text = resolved.dump();
    plan.validate();
    return out;
}

LoadedPlan plan_from_file(const std::filesystem::path& path) {
    return plan_from_json(read_json_file(path), path.parent_path());
}

}  // namespace weyl
