#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "autohedge/hedge_env.hpp"
#include "autohedge/portfolio_env.hpp"
#include "autohedge/sac.hpp"

namespace autohedge {

enum class ExperimentMode { kSingle, kSkew, kPriceOfRisk, kPortfolio, kDummy, kRandom };

std::string to_string(ExperimentMode mode);
ExperimentMode experiment_mode_from_string(const std::string& name);

// Which environment the dummy/random baselines run in.
enum class BaselineEnv { kSingle, kSkew, kPriceOfRisk, kPortfolio };

std::string to_string(BaselineEnv env);

struct PortfolioSettings {
  double w = 0.5;
  double rho = 0.0;
  double phi = 1.0;
  double gamma_penalty = 0.1;
  double max_pos_limit = 50.0;
  double max_hedge_size = 10.0;
  double termination_multiple = 2.0;
  std::optional<double> terminal_extra_penalty;
  bool convex_parametrization = false;
};

// Flat key/value experiment description. Every field has a default and
// round-trips through serialize_config / parse_config.
struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::kSingle;
  BaselineEnv baseline_env = BaselineEnv::kSingle;
  std::uint64_t seed = 1;
  int eval_episodes = 50;
  std::string output_dir = "runs/default";
  EnvConfig env;  // env.mode is derived from `mode`
  PortfolioSettings portfolio;
  // Keys under market2.* / flow2.* that differ for the second portfolio asset.
  std::map<std::string, std::string> asset2_overrides;
  SacHyper sac;

  void validate() const;
  bool is_portfolio() const;
  EnvConfig env_config() const;
  PortfolioConfig portfolio_config() const;
};

// Presets applied by the per-mode CLI subcommands before any user input.
ExperimentConfig preset_config(ExperimentMode mode);

// Sets one key; throws ConfigError for unknown keys or unparsable values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Parses `key = value` lines; '#' starts a comment. Applied on top of `base`.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

std::string serialize_config(const ExperimentConfig& cfg);

// Environment overrides: AUTOHEDGE_<SECTION>__<KEY>=value maps to
// section.key (lower-cased; "__" becomes "."). Entries are NAME=VALUE.
inline constexpr const char* kEnvOverridePrefix = "AUTOHEDGE_";
void apply_env_overrides(ExperimentConfig& cfg, std::span<const std::string> environment);
std::vector<std::string> process_environment();

// Every recognised key, in serialisation order.
std::vector<std::string> config_keys();

}  // namespace autohedge
