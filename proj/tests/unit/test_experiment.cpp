#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "autohedge/error.hpp"
#include "autohedge/experiment.hpp"

using namespace autohedge;

TEST(Config, DefaultsValidate) {
  ExperimentConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  for (auto m : {ExperimentMode::kSingle, ExperimentMode::kSkew, ExperimentMode::kPriceOfRisk,
                 ExperimentMode::kPortfolio, ExperimentMode::kDummy, ExperimentMode::kRandom}) {
    EXPECT_NO_THROW(preset_config(m).validate()) << to_string(m);
    EXPECT_EQ(experiment_mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(experiment_mode_from_string("ppo"), ConfigError);
}

TEST(Config, SerializeParseIsFixedPoint) {
  ExperimentConfig cfg = preset_config(ExperimentMode::kPortfolio);
  cfg.seed = 42;
  cfg.env.market.sigma = 0.0123456789012345;
  cfg.env.flow.beta_skew = 3.5;
  cfg.sac.hidden = {64, 32, 16};
  cfg.sac.target_entropy = -0.75;
  cfg.portfolio.w = 0.25;
  cfg.portfolio.terminal_extra_penalty = 12.5;
  cfg.env.terminal_extra_penalty = std::nullopt;
  apply_setting(cfg, "market2.sigma", "0.03");
  apply_setting(cfg, "flow2.c_scale", "2");

  const std::string text = serialize_config(cfg);
  const auto back = parse_config(text);
  EXPECT_EQ(serialize_config(back), text);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.env.market.sigma, 0.0123456789012345);
  EXPECT_EQ(back.sac.hidden, (std::vector<int>{64, 32, 16}));
  EXPECT_EQ(back.sac.target_entropy, -0.75);
  EXPECT_EQ(back.portfolio.terminal_extra_penalty, 12.5);
  EXPECT_FALSE(back.env.terminal_extra_penalty.has_value());
  EXPECT_EQ(back.mode, ExperimentMode::kPortfolio);
}

TEST(Config, EveryKeyIsSerialized) {
  const std::string text = serialize_config(ExperimentConfig{});
  const auto keys = config_keys();
  EXPECT_EQ(std::set<std::string>(keys.begin(), keys.end()).size(), keys.size());
  for (const auto& k : keys) EXPECT_NE(text.find(k + " = "), std::string::npos) << k;
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_THROW(parse_config("market.sigmaa = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("market2.nope = 1\n"), ConfigError);
  ExperimentConfig cfg;
  EXPECT_THROW(apply_setting(cfg, "sac.lr", "0.1"), ConfigError);
}

TEST(Config, BadValuesAreRejected) {
  EXPECT_THROW(parse_config("market.sigma = fast\n"), ConfigError);
  EXPECT_THROW(parse_config("market.n_steps = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("sac.auto_alpha = maybe\n"), ConfigError);
  EXPECT_THROW(parse_config("just some words\n"), ConfigError);
  EXPECT_THROW(parse_config("market2.sigma = x\n"), ConfigError);
}

TEST(Config, CommentsAndWhitespace) {
  const auto cfg = parse_config(
      "# leading comment\n"
      "\n"
      "  market.sigma=0.05   # trailing\n"
      "mode = skew\n"
      "sac.hidden = 8, 4\n");
  EXPECT_EQ(cfg.env.market.sigma, 0.05);
  EXPECT_EQ(cfg.mode, ExperimentMode::kSkew);
  EXPECT_EQ(cfg.sac.hidden, (std::vector<int>{8, 4}));
  EXPECT_EQ(cfg.env_config().mode, EnvMode::kSkew);
}

TEST(Config, ParsesOnTopOfBase) {
  auto base = preset_config(ExperimentMode::kPriceOfRisk);
  const auto cfg = parse_config("seed = 9\n", base);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.env.market.nu_client, base.env.market.nu_client);
  EXPECT_EQ(cfg.sac.reward_scale, base.sac.reward_scale);
}

TEST(Config, EnvironmentOverrides) {
  ExperimentConfig cfg;
  const std::vector<std::string> env{
      "PATH=/usr/bin",
      "AUTOHEDGE_MARKET__SIGMA=0.04",
      "AUTOHEDGE_SAC__BATCH_SIZE=64",
      "AUTOHEDGE_SEED=17",
      "AUTOHEDGE_PORTFOLIO__W=0",
  };
  apply_env_overrides(cfg, env);
  EXPECT_EQ(cfg.env.market.sigma, 0.04);
  EXPECT_EQ(cfg.sac.batch_size, 64);
  EXPECT_EQ(cfg.seed, 17u);
  EXPECT_EQ(cfg.portfolio.w, 0.0);

  const std::vector<std::string> bad{"AUTOHEDGE_MARKET__NOPE=1"};
  EXPECT_THROW(apply_env_overrides(cfg, bad), ConfigError);
}

TEST(Config, SecondAssetOverrides) {
  ExperimentConfig cfg = preset_config(ExperimentMode::kPortfolio);
  cfg.env.market.sigma = 0.02;
  apply_setting(cfg, "market2.sigma", "0.05");
  apply_setting(cfg, "market2.s0", "50");
  const auto p = cfg.portfolio_config();
  EXPECT_EQ(p.market1.sigma, 0.02);
  EXPECT_EQ(p.market2.sigma, 0.05);
  EXPECT_EQ(p.market2.s0, 50.0);
  EXPECT_EQ(p.market2.n_steps, p.market1.n_steps);
  EXPECT_EQ(p.flow1.max_hedge_size, p.max_hedge_size);
  EXPECT_EQ(p.flow2.max_hedge_size, p.max_hedge_size);
}

TEST(Config, ModeSelectsEnvironment) {
  ExperimentConfig cfg;
  cfg.mode = ExperimentMode::kRandom;
  cfg.baseline_env = BaselineEnv::kPortfolio;
  EXPECT_TRUE(cfg.is_portfolio());
  EXPECT_NO_THROW(cfg.validate());
  cfg.mode = ExperimentMode::kDummy;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.baseline_env = BaselineEnv::kPriceOfRisk;
  EXPECT_FALSE(cfg.is_portfolio());
  EXPECT_EQ(cfg.env_config().mode, EnvMode::kPriceOfRisk);
}

TEST(Config, InvalidCombinationsFailValidation) {
  ExperimentConfig cfg;
  cfg.sac.batch_size = cfg.sac.replay_capacity + 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.eval_episodes = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.env.market.sigma = -1.0;
  EXPECT_ANY_THROW(cfg.validate());
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "autohedge_cfg_test.txt";
  {
    std::ofstream out(path);
    out << "mode = price_of_risk\nenv.max_pos_limit = 30\n";
  }
  const auto cfg = load_config_file(path.string());
  EXPECT_EQ(cfg.mode, ExperimentMode::kPriceOfRisk);
  EXPECT_EQ(cfg.env.max_pos_limit, 30.0);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config_file(path.string()), ConfigError);
}
