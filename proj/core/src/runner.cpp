#include "autohedge/runner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "autohedge/checkpoint.hpp"
#include "autohedge/dashboard.hpp"
#include "autohedge/error.hpp"
#include "autohedge/hedge_env.hpp"
#include "autohedge/portfolio_env.hpp"
#include "autohedge/rng.hpp"

namespace autohedge {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kEvaluationStream = 9000;

ordered_json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json number_or_null(const std::optional<double>& v) {
  return v ? number_or_null(*v) : ordered_json(nullptr);
}

ordered_json stats_json(const SampleStats& s) {
  ordered_json j;
  j["count"] = s.count;
  j["mean"] = s.count > 0 ? number_or_null(s.mean) : ordered_json(nullptr);
  j["stdev"] = s.count > 1 ? number_or_null(s.stdev) : ordered_json(nullptr);
  return j;
}

SampleStats stats_or_empty(const std::vector<double>& v) {
  if (v.empty()) return {};
  return sample_stats(v);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// Flattened copy of every array an agent consumes, for the fairness check.
std::vector<double> scenario_fingerprint(const Environment& env) {
  std::vector<double> out;
  auto add_market = [&](const MarketPath& m) {
    for (const auto* v : {&m.mid, &m.client_bid, &m.client_ask, &m.hedge_bid, &m.hedge_ask}) {
      out.insert(out.end(), v->begin(), v->end());
    }
  };
  auto add_flow = [&](const FlowPath& f) {
    for (auto n : f.bid_size) out.push_back(static_cast<double>(n));
    for (auto n : f.ask_size) out.push_back(static_cast<double>(n));
    out.insert(out.end(), f.trade_rate.begin(), f.trade_rate.end());
  };
  if (const auto* h = dynamic_cast<const HedgeEnv*>(&env)) {
    add_market(h->scenario().market);
    add_flow(h->scenario().flow);
  } else if (const auto* p = dynamic_cast<const PortfolioEnv*>(&env)) {
    add_market(p->scenario().market1);
    add_market(p->scenario().market2);
    add_flow(p->scenario().flow1);
    add_flow(p->scenario().flow2);
  }
  return out;
}

bool bit_identical(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

}  // namespace

std::string env_tag(const ExperimentConfig& cfg) {
  if (cfg.is_portfolio()) return "portfolio";
  return to_string(cfg.env_config().mode);
}

std::unique_ptr<Environment> make_environment(const ExperimentConfig& cfg) {
  if (cfg.is_portfolio()) return std::make_unique<PortfolioEnv>(cfg.portfolio_config());
  return std::make_unique<HedgeEnv>(cfg.env_config());
}

EnvFactory environment_factory(const ExperimentConfig& cfg) {
  return [cfg] { return make_environment(cfg); };
}

Policy agent_policy(const SacAgent& agent) {
  return [&agent](const Environment& env, const Observation& obs) {
    auto a = deterministic_action(agent, obs);
    a.resize(env.action_dim(), 0.0);
    return a;
  };
}

Policy heuristic_policy() {
  return [](const Environment& env, const Observation&) {
    const auto* h = dynamic_cast<const HedgeEnv*>(&env);
    if (h == nullptr) throw ConfigError("the dummy hedger needs a single-asset environment");
    const AgentAction a = heuristic_action(h->state(), h->config());
    std::vector<double> out{a.hedge_size};
    if (env.action_dim() > 1) out.push_back(a.skew);
    return out;
  };
}

Policy never_hedge_policy() {
  return [](const Environment& env, const Observation&) {
    if (const auto* p = dynamic_cast<const PortfolioEnv*>(&env);
        p != nullptr && p->config().convex_parametrization) {
      return std::vector<double>{0.5, 0.0};
    }
    return std::vector<double>(env.action_dim(), 0.0);
  };
}

Policy random_policy(std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [rng](const Environment& env, const Observation&) {
    const auto lo = env.action_low();
    const auto hi = env.action_high();
    std::vector<double> out(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) out[i] = rng->uniform(lo[i], hi[i]);
    return out;
  };
}

std::uint64_t evaluation_episode_seed(std::uint64_t seed, std::uint64_t episode) {
  return derive_seed(seed, kEvaluationStream + episode);
}

std::vector<double> cumulative_net_pnl(const Environment& env) {
  std::vector<double> out;
  if (const auto* h = dynamic_cast<const HedgeEnv*>(&env)) {
    for (const auto& r : h->state().history) out.push_back(r.cum_net_pnl);
  } else if (const auto* p = dynamic_cast<const PortfolioEnv*>(&env)) {
    for (const auto& r : p->state().history) out.push_back(r.cum_net);
  } else {
    throw ConfigError("unsupported environment type");
  }
  return out;
}

std::optional<double> episode_sharpe(const Environment& env) {
  std::vector<double> series{0.0};
  const auto pnl = cumulative_net_pnl(env);
  series.insert(series.end(), pnl.begin(), pnl.end());
  if (series.size() < 3) return std::nullopt;
  return sharpe_ratio(series);
}

EpisodeTable episode_table(const Environment& env) {
  if (const auto* h = dynamic_cast<const HedgeEnv*>(&env)) {
    return episode_table(h->state(), h->config());
  }
  if (const auto* p = dynamic_cast<const PortfolioEnv*>(&env)) {
    return episode_table(p->state(), p->config());
  }
  throw ConfigError("unsupported environment type");
}

EpisodeOutcome run_episode(Environment& env, const Policy& policy, std::uint64_t seed) {
  EpisodeOutcome out;
  out.seed = seed;
  Observation obs = env.reset(seed);
  double risk_sum = 0.0;
  while (true) {
    const auto action = policy(env, obs);
    const StepResult step = env.step(action);
    out.total_reward += step.reward;
    risk_sum += step.info.risk;
    out.limit_breached = out.limit_breached || step.info.limit_breached;
    ++out.steps;
    obs = step.observation;
    if (step.done) break;
  }
  const auto pnl = cumulative_net_pnl(env);
  out.net_pnl = pnl.empty() ? 0.0 : pnl.back();
  out.sharpe = episode_sharpe(env);
  out.mean_abs_risk = risk_sum / static_cast<double>(out.steps);
  return out;
}

EvaluationSummary evaluate_policy(const EnvFactory& make_env, const Policy& policy,
                                  std::size_t n_episodes, std::uint64_t seed,
                                  const EpisodeHook& on_episode) {
  EvaluationSummary summary;
  if (n_episodes == 0) return summary;
  auto env = make_env();
  std::vector<double> rewards, pnls, sharpes;
  double risk_sum = 0.0;
  for (std::size_t i = 0; i < n_episodes; ++i) {
    const auto outcome = run_episode(*env, policy, evaluation_episode_seed(seed, i));
    if (on_episode) on_episode(i, *env);
    rewards.push_back(outcome.total_reward);
    pnls.push_back(outcome.net_pnl);
    if (outcome.sharpe) sharpes.push_back(*outcome.sharpe);
    risk_sum += outcome.mean_abs_risk;
    summary.episodes.push_back(outcome);
  }
  summary.reward = stats_or_empty(rewards);
  summary.net_pnl = stats_or_empty(pnls);
  summary.sharpe = stats_or_empty(sharpes);
  summary.mean_abs_risk = risk_sum / static_cast<double>(n_episodes);
  return summary;
}

void check_agent_fits(const SacAgent& agent, const Environment& env) {
  if (static_cast<std::size_t>(agent.obs_dim) != env.observation_dim()) {
    throw DataError("checkpoint observation size " + std::to_string(agent.obs_dim) +
                    " does not match the environment's " + std::to_string(env.observation_dim()));
  }
  if (static_cast<std::size_t>(agent.act_dim) > env.action_dim()) {
    throw DataError("checkpoint action size " + std::to_string(agent.act_dim) +
                    " does not fit the environment's " + std::to_string(env.action_dim()));
  }
}

ComparisonReport compare_agents(const ExperimentConfig& cfg, const Checkpoint& a,
                                const Checkpoint& b, std::size_t n_seeds, std::uint64_t seed) {
  ComparisonReport report;
  report.env_a = a.env_tag;
  report.env_b = b.env_tag;

  ExperimentConfig shared = cfg;
  if (a.env_tag == b.env_tag) {
    shared.mode = experiment_mode_from_string(a.env_tag);
  } else {
    const bool single_skew = (a.env_tag == "single" || a.env_tag == "skew") &&
                             (b.env_tag == "single" || b.env_tag == "skew");
    if (!single_skew) {
      throw ConfigError("cannot compare a '" + a.env_tag + "' agent with a '" + b.env_tag +
                        "' agent");
    }
    shared.mode = ExperimentMode::kSkew;
  }
  report.shared_env = env_tag(shared);

  auto env = make_environment(shared);
  check_agent_fits(a.agent, *env);
  check_agent_fits(b.agent, *env);
  const Policy pa = agent_policy(a.agent);
  const Policy pb = agent_policy(b.agent);

  for (std::size_t i = 0; i < n_seeds; ++i) {
    const std::uint64_t s = evaluation_episode_seed(seed, i);
    ComparisonRow row;
    row.seed = s;
    const auto ra = run_episode(*env, pa, s);
    const auto data_a = scenario_fingerprint(*env);
    const auto rb = run_episode(*env, pb, s);
    if (!bit_identical(data_a, scenario_fingerprint(*env))) report.shared_data_verified = false;
    row.sharpe_a = ra.sharpe;
    row.sharpe_b = rb.sharpe;
    row.reward_a = ra.total_reward;
    row.reward_b = rb.total_reward;
    if (row.sharpe_a && row.sharpe_b) {
      if (*row.sharpe_a > *row.sharpe_b) ++report.sharpe_wins_a;
      if (*row.sharpe_b > *row.sharpe_a) ++report.sharpe_wins_b;
    }
    if (row.reward_a > row.reward_b) ++report.reward_wins_a;
    if (row.reward_b > row.reward_a) ++report.reward_wins_b;
    report.rows.push_back(row);
  }
  return report;
}

void write_comparison_csv(const ComparisonReport& report, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string();
    return ordered_json(*v).dump();
  };
  out << "seed,sharpe_a,sharpe_b,reward_a,reward_b\n";
  for (const auto& r : report.rows) {
    out << r.seed << ',' << cell(r.sharpe_a) << ',' << cell(r.sharpe_b) << ','
        << ordered_json(r.reward_a).dump() << ',' << ordered_json(r.reward_b).dump() << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string metrics_json_line(const EpochMetrics& m) {
  ordered_json j;
  j["epoch"] = m.epoch;
  j["episodes"] = m.episodes;
  j["mean_reward"] = number_or_null(m.mean_reward);
  j["q1_loss"] = number_or_null(m.q1_loss);
  j["q2_loss"] = number_or_null(m.q2_loss);
  j["policy_loss"] = number_or_null(m.policy_loss);
  j["alpha"] = number_or_null(m.alpha);
  j["mean_abs_position"] = number_or_null(m.mean_abs_position);
  return j.dump();
}

RunResult run_training(const ExperimentConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  // Construct once so environment-level config errors surface before any output.
  (void)make_environment(cfg);

  RunResult result;
  result.dir = cfg.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(result.dir, ec);
  if (ec) throw IoError("cannot create '" + result.dir.string() + "': " + ec.message());
  write_text(result.dir / kConfigFile, serialize_config(cfg));

  auto metrics_out = open_for_write(result.dir / kMetricsFile);
  const auto factory = environment_factory(cfg);
  const std::uint64_t episode_seed = evaluation_episode_seed(cfg.seed, 0);

  if (cfg.mode == ExperimentMode::kDummy || cfg.mode == ExperimentMode::kRandom) {
    const Policy policy = cfg.mode == ExperimentMode::kDummy
                              ? heuristic_policy()
                              : random_policy(derive_seed(cfg.seed, kEvaluationStream - 1));
    const auto n = static_cast<std::size_t>(std::max(cfg.eval_episodes, 1));
    std::optional<EpisodeTable> first;
    const auto summary = evaluate_policy(factory, policy, n, cfg.seed,
                                         [&](std::size_t i, const Environment& env) {
                                           if (i == 0) first = episode_table(env);
                                         });
    EpochMetrics m;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    m.epoch = 0;
    m.episodes = static_cast<int>(n);
    m.mean_reward = summary.reward.mean;
    m.q1_loss = m.q2_loss = m.policy_loss = m.alpha = nan;
    m.mean_abs_position = summary.mean_abs_risk;
    metrics_out << metrics_json_line(m) << '\n';
    result.metrics.push_back(m);
    if (on_epoch) on_epoch(m);
    write_episode_csv(*first, result.dir / kEpisodeFile);
    return result;
  }

  auto trained = train(factory, cfg.sac, cfg.seed, [&](const EpochMetrics& m) {
    metrics_out << metrics_json_line(m) << '\n' << std::flush;
    if (on_epoch) on_epoch(m);
  });
  metrics_out.close();
  result.metrics = trained.metrics;
  result.diverged = trained.diverged;
  result.message = trained.message;
  if (trained.diverged) return result;

  save_checkpoint(trained.agent, result.dir / kCheckpointFile, env_tag(cfg));
  auto env = make_environment(cfg);
  run_episode(*env, agent_policy(trained.agent), episode_seed);
  write_episode_csv(episode_table(*env), result.dir / kEpisodeFile);
  result.agent = std::move(trained.agent);
  return result;
}

void write_evaluation_jsonl(const EvaluationSummary& summary, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (std::size_t i = 0; i < summary.episodes.size(); ++i) {
    const auto& e = summary.episodes[i];
    ordered_json j;
    j["episode"] = i;
    j["seed"] = e.seed;
    j["steps"] = e.steps;
    j["reward"] = number_or_null(e.total_reward);
    j["net_pnl"] = number_or_null(e.net_pnl);
    j["sharpe"] = number_or_null(e.sharpe);
    j["mean_abs_risk"] = number_or_null(e.mean_abs_risk);
    j["limit_breached"] = e.limit_breached;
    out << j.dump() << '\n';
  }
  ordered_json s;
  s["summary"] = true;
  s["episodes"] = summary.episodes.size();
  s["reward"] = stats_json(summary.reward);
  s["net_pnl"] = stats_json(summary.net_pnl);
  s["sharpe"] = stats_json(summary.sharpe);
  s["mean_abs_risk"] = summary.empty() ? ordered_json(nullptr) : number_or_null(summary.mean_abs_risk);
  out << s.dump() << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

EpisodeTable export_episode(const ExperimentConfig& cfg, const Policy& policy, std::uint64_t seed,
                            const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  auto env = make_environment(cfg);
  run_episode(*env, policy, seed);
  auto table = episode_table(*env);
  write_episode_csv(table, dir / kEpisodeFile);
  write_dashboard_svg(table, dir / kDashboardFile, env_tag(cfg) + " episode, seed " + std::to_string(seed));
  return table;
}

}  // namespace autohedge
