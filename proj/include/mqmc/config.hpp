#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mqmc/errors.hpp"
#include "mqmc/estimators.hpp"
#include "mqmc/problems.hpp"
#include "mqmc/space.hpp"

namespace mqmc {

/// Invalid configuration. Carries a field path such as "study.k" or a
/// "line L, column C" location for syntax errors.
class ConfigError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

/// Parses a JSON config file, reporting syntax errors with line and column.
nlohmann::json read_config_file(const std::filesystem::path& path);
nlohmann::json parse_config_text(const std::string& text);

/// 64-bit FNV-1a of the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string config_digest(const nlohmann::json& config);

/// Returns config[name] or throws ConfigError naming the missing section.
const nlohmann::json& require_section(const nlohmann::json& config, const std::string& name);

/// Space section:
///   {"preset": "example1", "dimension": s}
/// or
///   {"density": "standard-normal",
///    "dimension": s,
///    "weight_function": {"kind": "exp-abs", "alpha": a, "scale": c}   (shared by all coordinates)
///      or "weight_functions": [ ... one per coordinate ... ],
///    "weights": {"kind": "product", "gamma": [...] | {"rule": "inverse-power", "exponent": p, "scale": c}}
///            or {"kind": "pod", "gamma": ..., "order_weights": [Gamma_0, ..., Gamma_s]}}
WeightedSpace parse_space(const nlohmann::json& section);

enum class ProblemKind { exp_linear, asian, pde };

struct ProblemConfig {
    ProblemKind kind = ProblemKind::exp_linear;
    Integrand integrand;
    std::vector<std::uint64_t> default_grid;
    std::vector<std::uint64_t> full_grid;
    /// Space used for the CBC baseline when no "space" section is given.
    std::function<WeightedSpace()> default_space;
};

/// Problem section:
///   {"kind": "exp-linear", "a": [...]}
///   {"kind": "asian", "S0", "R_rate", "sigma", "T", "steps", "mode": "value"|"cdf", "K" or "x"}
///   {"kind": "pde", "s", "x0", "lambda"}
ProblemConfig parse_problem(const nlohmann::json& section);

} // namespace mqmc
