#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bvpop/errors.hpp"
#include "bvpop/grid_fn.hpp"
#include "bvpop/population.hpp"
#include "bvpop/stieltjes.hpp"

namespace bvpop::cli {

enum class ScenarioKind { integrate, ibp_check, prop_suite, hm_check, reproduction, equilibrium, threshold };

std::string_view to_string(ScenarioKind k) noexcept;
std::optional<ScenarioKind> parse_kind(std::string_view s) noexcept;
const std::vector<ScenarioKind>& all_kinds();

struct ConfigIssue {
  std::string path;  // dotted field path, e.g. "rates.beta.base.values[3]"
  std::string message;
};

/// Every problem found while loading a config.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  ConfigError(std::string path, std::string message)
      : ConfigError(std::vector<ConfigIssue>{{std::move(path), std::move(message)}}) {}
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

struct IntegrateSpec {
  GridFn h;
  GridFn g;
  Interval interval;
};

struct IbpSpec {
  GridFn h;
  Direction h_direction;
  GridFn g;
  Interval interval;
};

struct PropSuiteSpec {
  enum class Suite { properties, R_monotone };
  Suite suite = Suite::properties;
  std::size_t n_instances = 0;
  unsigned threads = 1;
  std::vector<double> hm_exponents{0.25, 0.5, 0.75, 1.0, 2.0, 4.0};
  bool corrupt_integrator = false;
};

struct HmSpec {
  GridFn h;
  GridFn g;
  std::vector<double> exponents;
};

struct ReproductionSpec {
  VitalRates rates;
  Density density;
};

struct EquilibriumSpec {
  VitalRates rates;
};

struct ThresholdSpec {
  VitalRates rates;
};

using ScenarioSpec = std::variant<std::monostate, IntegrateSpec, IbpSpec, PropSuiteSpec, HmSpec, ReproductionSpec,
                                  EquilibriumSpec, ThresholdSpec>;

struct ScenarioConfig {
  ScenarioKind kind;
  ScenarioSpec spec;
  PopulationConfig cfg;  // cfg.quad holds the quadrature settings
  SolverConfig solver;
  std::pair<double, double> bracket{0.0, 100.0};
  std::uint64_t seed = 0;
  std::filesystem::path output_path = ".";
  std::string name = "scenario";  // base name of the output files
};

/// Parses and validates a config document. Relative "file" references are
/// resolved against base_dir. Throws ConfigError listing every issue.
ScenarioConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                            std::string name = "scenario");

/// Reads `path` and calls parse_config; output files are named after its stem.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Closest candidate within edit distance 2, if any.
std::optional<std::string> suggest_key(std::string_view key, const std::vector<std::string>& candidates);

}  // namespace bvpop::cli
