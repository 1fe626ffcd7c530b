#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "autohedge/checkpoint.hpp"
#include "autohedge/environment.hpp"
#include "autohedge/episode_io.hpp"
#include "autohedge/experiment.hpp"
#include "autohedge/metrics.hpp"
#include "autohedge/sac.hpp"

namespace autohedge {

// Environment name stored in checkpoints: single, skew, price_of_risk or portfolio.
std::string env_tag(const ExperimentConfig& cfg);
std::unique_ptr<Environment> make_environment(const ExperimentConfig& cfg);
EnvFactory environment_factory(const ExperimentConfig& cfg);

// Maps an observation to an action in environment units. Policies may keep
// state (the random policy owns its generator) and are not thread-safe.
using Policy = std::function<std::vector<double>(const Environment& env, const Observation& obs)>;

// Deterministic (mean) action; zero-padded when the environment has more
// action dimensions than the agent (non-skew agent in a skew environment).
Policy agent_policy(const SacAgent& agent);
// Offsets the outstanding net position; single-asset environments only.
Policy heuristic_policy();
Policy never_hedge_policy();
// Uniform over the action box.
Policy random_policy(std::uint64_t seed);

// Seed of the i-th evaluation episode.
std::uint64_t evaluation_episode_seed(std::uint64_t seed, std::uint64_t episode);

// Cumulative net PNL after each step of the current episode.
std::vector<double> cumulative_net_pnl(const Environment& env);
// Sharpe of the cumulative net PNL with a leading zero (PNL before the first
// step); nullopt when undefined.
std::optional<double> episode_sharpe(const Environment& env);
EpisodeTable episode_table(const Environment& env);

struct EpisodeOutcome {
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  double total_reward = 0.0;
  double net_pnl = 0.0;
  std::optional<double> sharpe;
  double mean_abs_risk = 0.0;  // mean of StepInfo::risk over the episode
  bool limit_breached = false;
};

EpisodeOutcome run_episode(Environment& env, const Policy& policy, std::uint64_t seed);

struct EvaluationSummary {
  std::vector<EpisodeOutcome> episodes;
  SampleStats reward;
  SampleStats net_pnl;
  SampleStats sharpe;  // over episodes where it is defined
  double mean_abs_risk = 0.0;

  bool empty() const { return episodes.empty(); }
};

using EpisodeHook = std::function<void(std::size_t index, const Environment& env)>;

EvaluationSummary evaluate_policy(const EnvFactory& make_env, const Policy& policy,
                                  std::size_t n_episodes, std::uint64_t seed,
                                  const EpisodeHook& on_episode = {});

// Throws DataError when the checkpoint does not fit the configured environment.
void check_agent_fits(const SacAgent& agent, const Environment& env);

struct ComparisonRow {
  std::uint64_t seed = 0;
  std::optional<double> sharpe_a;
  std::optional<double> sharpe_b;
  double reward_a = 0.0;
  double reward_b = 0.0;
};

struct ComparisonReport {
  std::string env_a;
  std::string env_b;
  std::string shared_env;
  std::vector<ComparisonRow> rows;
  int sharpe_wins_a = 0;  // ties and undefined values count for neither side
  int sharpe_wins_b = 0;
  int reward_wins_a = 0;
  int reward_wins_b = 0;
  // Market and client flow arrays were checked to be identical for both agents.
  bool shared_data_verified = true;
};

// Runs both frozen agents on the same generated market per seed. Skew and
// non-skew agents meet in the skew environment with the missing skew at zero.
ComparisonReport compare_agents(const ExperimentConfig& cfg, const Checkpoint& a,
                                const Checkpoint& b, std::size_t n_seeds, std::uint64_t seed);
void write_comparison_csv(const ComparisonReport& report, const std::filesystem::path& path);

std::string metrics_json_line(const EpochMetrics& m);

struct RunResult {
  std::filesystem::path dir;
  std::vector<EpochMetrics> metrics;
  std::optional<SacAgent> agent;
  bool diverged = false;
  std::string message;
};

inline constexpr const char* kConfigFile = "config.txt";
inline constexpr const char* kCheckpointFile = "model.ckpt";
inline constexpr const char* kMetricsFile = "metrics.jsonl";
inline constexpr const char* kEpisodeFile = "episode.csv";
inline constexpr const char* kDashboardFile = "dashboard.svg";
inline constexpr const char* kComparisonFile = "comparison.csv";
inline constexpr const char* kEvaluationFile = "evaluation.jsonl";

// Trains (or, for dummy/random, evaluates the baseline) and writes the run
// directory: config.txt, model.ckpt (trained modes only), metrics.jsonl and
// episode.csv. Config errors are raised before anything is written.
RunResult run_training(const ExperimentConfig& cfg, const EpochCallback& on_epoch = {});

// Writes one JSON line per episode followed by a summary line.
void write_evaluation_jsonl(const EvaluationSummary& summary, const std::filesystem::path& path);

// Runs one episode of `policy` and writes episode.csv and dashboard.svg into `dir`.
EpisodeTable export_episode(const ExperimentConfig& cfg, const Policy& policy, std::uint64_t seed,
                            const std::filesystem::path& dir);

}  // namespace autohedge
