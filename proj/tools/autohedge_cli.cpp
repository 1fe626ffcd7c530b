#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "autohedge/checkpoint.hpp"
#include "autohedge/dashboard.hpp"
#include "autohedge/error.hpp"
#include "autohedge/experiment.hpp"
#include "autohedge/runner.hpp"

namespace fs = std::filesystem;
using namespace autohedge;

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kRuntime = 2, kIo = 3 };

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> episodes;
  std::string out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_epochs) {
  cmd->add_option("--config", f.config_path, "key = value config file");
  cmd->add_option("--seed", f.seed, "master seed");
  if (with_epochs) cmd->add_option("--epochs", f.epochs, "training epochs");
  cmd->add_option("--episodes", f.episodes, "evaluation episodes");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--set", f.sets, "override one key, e.g. --set market.sigma=0.03");
}

// preset -> config file -> AUTOHEDGE_* environment -> --set -> explicit flags
ExperimentConfig build_config(ExperimentConfig base, const CommonFlags& f) {
  if (!f.config_path.empty()) base = load_config_file(f.config_path, std::move(base));
  apply_env_overrides(base, process_environment());
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_setting(base, s.substr(0, eq), s.substr(eq + 1));
  }
  if (f.seed) base.seed = *f.seed;
  if (f.epochs) base.sac.epochs = *f.epochs;
  if (f.episodes) base.eval_episodes = *f.episodes;
  if (!f.out.empty()) base.output_dir = f.out;
  return base;
}

// Config for a saved agent: --config if given, else config.txt beside the checkpoint.
ExperimentConfig config_for_checkpoint(const fs::path& ckpt, const Checkpoint& loaded,
                                       CommonFlags f) {
  if (f.config_path.empty()) {
    const auto beside = ckpt.parent_path() / kConfigFile;
    if (fs::exists(beside)) f.config_path = beside.string();
  }
  ExperimentConfig cfg = build_config(ExperimentConfig{}, f);
  if (!loaded.env_tag.empty()) cfg.mode = experiment_mode_from_string(loaded.env_tag);
  cfg.validate();
  return cfg;
}

void print_summary(const EvaluationSummary& s) {
  std::printf("episodes        %zu\n", s.episodes.size());
  if (s.empty()) return;
  std::printf("reward          mean %.6g  stdev %.6g\n", s.reward.mean, s.reward.stdev);
  std::printf("net pnl         mean %.6g  stdev %.6g\n", s.net_pnl.mean, s.net_pnl.stdev);
  if (s.sharpe.count > 0) {
    std::printf("sharpe          mean %.6g  stdev %.6g  (%zu defined)\n", s.sharpe.mean,
                s.sharpe.stdev, s.sharpe.count);
  }
  std::printf("mean |risk|     %.6g\n", s.mean_abs_risk);
}

int run_train(ExperimentMode mode, const CommonFlags& f) {
  const ExperimentConfig cfg = build_config(preset_config(mode), f);
  cfg.validate();
  std::printf("training %s for %d epochs x %d steps into %s\n", to_string(mode).c_str(),
              cfg.sac.epochs, cfg.sac.steps_per_epoch, cfg.output_dir.c_str());
  const auto result = run_training(cfg, [](const EpochMetrics& m) {
    std::printf("epoch %4d  episodes %3d  mean reward %12.4f  |pos| %8.3f  alpha %.4f\n", m.epoch,
                m.episodes, m.mean_reward, m.mean_abs_position, m.alpha);
    std::fflush(stdout);
  });
  if (result.diverged) {
    std::fprintf(stderr, "error: %s\n", result.message.c_str());
    return kRuntime;
  }
  std::printf("wrote %s\n", result.dir.string().c_str());
  return kOk;
}

int run_baseline(const std::string& policy, const std::string& env, const CommonFlags& f) {
  ExperimentConfig base = preset_config(policy == "random" ? ExperimentMode::kRandom
                                                           : ExperimentMode::kDummy);
  apply_setting(base, "baseline_env", env);
  const ExperimentConfig cfg = build_config(base, f);
  cfg.validate();
  const auto result = run_training(cfg);
  const auto& m = result.metrics.front();
  std::printf("%s policy over %d episodes: mean reward %.6g, mean |risk| %.6g\n",
              to_string(cfg.mode).c_str(), m.episodes, m.mean_reward, m.mean_abs_position);
  std::printf("wrote %s\n", result.dir.string().c_str());
  return kOk;
}

int run_eval(const std::string& ckpt_path, const CommonFlags& f, bool episode_csvs) {
  const auto ckpt = load_checkpoint(ckpt_path);
  const auto cfg = config_for_checkpoint(ckpt_path, ckpt, f);
  auto probe = make_environment(cfg);
  check_agent_fits(ckpt.agent, *probe);
  const auto n = static_cast<std::size_t>(cfg.eval_episodes);
  const fs::path out = f.out;
  if (!out.empty()) fs::create_directories(out);
  const auto summary =
      evaluate_policy(environment_factory(cfg), agent_policy(ckpt.agent), n, cfg.seed,
                      [&](std::size_t i, const Environment& env) {
                        if (episode_csvs && !out.empty()) {
                          write_episode_csv(episode_table(env),
                                            out / ("episode_" + std::to_string(i) + ".csv"));
                        }
                      });
  print_summary(summary);
  if (!out.empty()) write_evaluation_jsonl(summary, out / kEvaluationFile);
  return kOk;
}

int run_compare(const std::string& a_path, const std::string& b_path, const CommonFlags& f) {
  const auto a = load_checkpoint(a_path);
  const auto b = load_checkpoint(b_path);
  const auto cfg = config_for_checkpoint(a_path, a, f);
  const auto n = static_cast<std::size_t>(f.episodes.value_or(30));
  const auto report = compare_agents(cfg, a, b, n, cfg.seed);
  std::printf("a: %s   b: %s   shared environment: %s\n", report.env_a.c_str(),
              report.env_b.c_str(), report.shared_env.c_str());
  std::printf("%22s %12s %12s %14s %14s\n", "seed", "sharpe_a", "sharpe_b", "reward_a", "reward_b");
  for (const auto& r : report.rows) {
    std::printf("%22llu %12.4f %12.4f %14.4f %14.4f\n", static_cast<unsigned long long>(r.seed),
                r.sharpe_a.value_or(NAN), r.sharpe_b.value_or(NAN), r.reward_a, r.reward_b);
  }
  std::printf("sharpe wins  a %d  b %d\nreward wins  a %d  b %d\n", report.sharpe_wins_a,
              report.sharpe_wins_b, report.reward_wins_a, report.reward_wins_b);
  if (!report.shared_data_verified) {
    std::fprintf(stderr, "error: agents did not see identical market data\n");
    return kRuntime;
  }
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    write_comparison_csv(report, fs::path(f.out) / kComparisonFile);
  }
  return kOk;
}

int run_export(const std::string& ckpt_path, const std::string& csv_path, const std::string& policy,
               const std::string& env, const CommonFlags& f) {
  if (f.out.empty()) throw ConfigError("export needs --out");
  const fs::path out = f.out;
  if (!csv_path.empty()) {
    const auto table = read_episode_csv(fs::path(csv_path));
    const auto problems = check_episode_table(table);
    for (const auto& p : problems) std::fprintf(stderr, "warning: %s\n", p.c_str());
    fs::create_directories(out);
    write_dashboard_svg(table, out / kDashboardFile, fs::path(csv_path).filename().string());
    std::printf("wrote %s\n", (out / kDashboardFile).string().c_str());
    return kOk;
  }
  ExperimentConfig cfg;
  std::optional<Checkpoint> ckpt;
  Policy pol;
  if (!ckpt_path.empty()) {
    ckpt = load_checkpoint(ckpt_path);
    cfg = config_for_checkpoint(ckpt_path, *ckpt, f);
    auto probe = make_environment(cfg);
    check_agent_fits(ckpt->agent, *probe);
    pol = agent_policy(ckpt->agent);
  } else {
    ExperimentConfig base;
    apply_setting(base, "baseline_env", env);
    cfg = build_config(base, f);
    if (policy == "dummy") {
      cfg.mode = ExperimentMode::kDummy;
      pol = heuristic_policy();
    } else if (policy == "random") {
      cfg.mode = ExperimentMode::kRandom;
      pol = random_policy(cfg.seed);
    } else if (policy == "never") {
      cfg.mode = ExperimentMode::kRandom;
      pol = never_hedge_policy();
    } else {
      throw ConfigError("unknown policy '" + policy + "'");
    }
    cfg.validate();
  }
  const auto table = export_episode(cfg, pol, evaluation_episode_seed(cfg.seed, 0), out);
  std::printf("wrote %zu rows to %s\n", table.size(), (out / kEpisodeFile).string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Network-sized temporaries are large enough to be mmapped on every
  // allocation by default; keep them on the heap instead.
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 128 << 20);
#endif
  CLI::App app{"Market-making hedger laboratory: train, evaluate, compare and export."};
  app.require_subcommand(1);

  struct TrainCmd {
    const char* name;
    ExperimentMode mode;
    const char* help;
  };
  const TrainCmd trains[] = {
      {"train-single", ExperimentMode::kSingle, "train the hedge-only agent"},
      {"train-skew", ExperimentMode::kSkew, "train the hedge + skew agent"},
      {"train-price-of-risk", ExperimentMode::kPriceOfRisk, "train with the spread-cost reward"},
      {"train-portfolio", ExperimentMode::kPortfolio, "train the two-asset portfolio hedger"},
  };
  CommonFlags flags;
  std::optional<ExperimentMode> train_mode;
  for (const auto& t : trains) {
    auto* cmd = app.add_subcommand(t.name, t.help);
    add_common(cmd, flags, true);
    cmd->callback([&train_mode, m = t.mode] { train_mode = m; });
  }

  std::string baseline_policy = "dummy";
  std::string baseline_env = "single";
  auto* dummy = app.add_subcommand("run-dummy", "evaluate the dummy or random baseline");
  add_common(dummy, flags, false);
  dummy->add_option("--policy", baseline_policy, "dummy or random")
      ->check(CLI::IsMember({"dummy", "random"}));
  dummy->add_option("--env", baseline_env, "single, skew, price_of_risk or portfolio");

  std::string ckpt_a, ckpt_b;
  bool episode_csvs = false;
  auto* eval = app.add_subcommand("eval", "evaluate a saved agent");
  eval->add_option("checkpoint", ckpt_a, "model.ckpt")->required();
  add_common(eval, flags, false);
  eval->add_flag("--episode-csv", episode_csvs, "also write one CSV per episode into --out");

  auto* compare = app.add_subcommand("compare", "run two saved agents on shared market seeds");
  compare->add_option("checkpoint_a", ckpt_a, "first model.ckpt")->required();
  compare->add_option("checkpoint_b", ckpt_b, "second model.ckpt")->required();
  add_common(compare, flags, false);

  std::string export_csv;
  std::string export_policy = "dummy";
  std::string export_env = "single";
  auto* exp = app.add_subcommand("export", "write episode.csv and dashboard.svg");
  add_common(exp, flags, false);
  exp->add_option("--checkpoint", ckpt_a, "agent to run");
  exp->add_option("--csv", export_csv, "render an existing episode CSV instead of running");
  exp->add_option("--policy", export_policy, "baseline when no checkpoint: dummy, random, never");
  exp->add_option("--env", export_env, "baseline environment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (train_mode) return run_train(*train_mode, flags);
    if (dummy->parsed()) return run_baseline(baseline_policy, baseline_env, flags);
    if (eval->parsed()) return run_eval(ckpt_a, flags, episode_csvs);
    if (compare->parsed()) return run_compare(ckpt_a, ckpt_b, flags);
    if (exp->parsed()) return run_export(ckpt_a, export_csv, export_policy, export_env, flags);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kOk;
}
