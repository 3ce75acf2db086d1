#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"

#include "weyl/experiment.hpp"
#include "weyl/geometry.hpp"
#include "weyl/perturbation.hpp"
#include "weyl/symbol.hpp"

namespace weyl {

/// Parses a JSON file; ConfigError names the path on any failure.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// { "m": int, "n": 1, "coeffs": [ { "alpha": int, "cos": [...], "sin": [...],
///   "cos_imag": [...], "sin_imag": [...] } ] }
SymbolModel symbol_from_json(const nlohmann::json& j);

/// { "rho", "s", "eps", "beta", "cutoff_J": int | "auto" }
PerturbationSpec perturbation_from_json(const nlohmann::json& j);

/// { "theta1", "theta2", "r1", "r2", "g": number | { "cos": [...], "sin": [...] },
///   "closure": "closed" | "half_open" }
SectorSpec sector_from_json(const nlohmann::json& j);

/// Experiment plan. "symbol", "perturbation" and "sector" are file paths
/// (relative to `base_dir`) or inline objects; "family" is an optional list
/// of sectors.
struct LoadedPlan {
    DyadicPlan plan;
    std::vector<SectorSpec> family;
};
LoadedPlan plan_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
LoadedPlan plan_from_file(const std::filesystem::path& path);

/// Loads a file reference or returns an inline object as is.
nlohmann::json resolve_reference(const nlohmann::json& value, const std::filesystem::path& base_dir);

}  // namespace weyl
