#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "autohedge/dashboard.hpp"
#include "autohedge/episode_io.hpp"
#include "autohedge/error.hpp"
#include "autohedge/hedge_env.hpp"
#include "autohedge/portfolio_env.hpp"
#include "autohedge/rng.hpp"

using namespace autohedge;

namespace {

EnvConfig env_config(EnvMode mode) {
  EnvConfig cfg;
  cfg.mode = mode;
  cfg.market.n_steps = 64;
  cfg.termination_multiple = 1e6;  // full-length episodes
  return cfg;
}

HedgeEnv random_episode(EnvMode mode, std::uint64_t seed) {
  HedgeEnv env(env_config(mode));
  env.reset(seed);
  Rng rng(seed + 1);
  const auto lo = env.action_low();
  const auto hi = env.action_high();
  while (!env.state().done) {
    std::vector<double> a(lo.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(lo[i], hi[i]);
    env.step(a);
  }
  return env;
}

PortfolioEnv random_portfolio_episode(std::uint64_t seed) {
  PortfolioConfig cfg;
  cfg.market1.n_steps = 64;
  cfg.market2.n_steps = 64;
  cfg.termination_multiple = 1e6;
  PortfolioEnv env(cfg);
  env.reset(seed);
  Rng rng(seed + 1);
  const auto lo = env.action_low();
  const auto hi = env.action_high();
  while (!env.state().done) {
    std::vector<double> a{rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1])};
    env.step(a);
  }
  return env;
}

EpisodeTable round_trip(const EpisodeTable& t) {
  std::stringstream ss;
  write_episode_csv(t, ss);
  return read_episode_csv(ss);
}

}  // namespace

TEST(EpisodeCsv, RowCountIsEpisodeLength) {
  auto env = random_episode(EnvMode::kSingle, 3);
  const auto t = episode_table(env.state(), env.config());
  EXPECT_EQ(t.size(), env.state().history.size());
  EXPECT_EQ(t.size(), 63u);
  EXPECT_EQ(t.columns, single_episode_columns(EnvMode::kSingle));
  EXPECT_EQ(round_trip(t).size(), t.size());
}

TEST(EpisodeCsv, MakerTakerColumnsOnlyForPriceOfRisk) {
  for (auto mode : {EnvMode::kSingle, EnvMode::kSkew, EnvMode::kPriceOfRisk}) {
    const auto cols = single_episode_columns(mode);
    const bool has = std::find(cols.begin(), cols.end(), "maker_spread") != cols.end();
    EXPECT_EQ(has, mode == EnvMode::kPriceOfRisk) << to_string(mode);
    EXPECT_EQ(std::find(cols.begin(), cols.end(), "taker_spread") != cols.end(), has);
  }
  const auto p = portfolio_episode_columns();
  EXPECT_EQ(std::find(p.begin(), p.end(), "maker_spread"), p.end());
}

TEST(EpisodeCsv, PnlColumnsSumToNet) {
  for (auto mode : {EnvMode::kSingle, EnvMode::kSkew, EnvMode::kPriceOfRisk}) {
    auto env = random_episode(mode, 11);
    const auto t = round_trip(episode_table(env.state(), env.config()));
    const auto c = t.column("client_pnl"), h = t.column("hedge_pnl"), m = t.column("market_pnl");
    const auto net = t.column("net_pnl");
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_NEAR(c[i] + h[i] + m[i], net[i], 1e-9 * std::max(1.0, std::abs(net[i])));
    }
  }
}

TEST(EpisodeCsv, ReingestedTablesPassInvariantChecks) {
  for (auto mode : {EnvMode::kSingle, EnvMode::kSkew, EnvMode::kPriceOfRisk}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto env = random_episode(mode, seed);
      const auto t = round_trip(episode_table(env.state(), env.config()));
      const auto problems = check_episode_table(t);
      EXPECT_TRUE(problems.empty()) << to_string(mode) << ": " << (problems.empty() ? "" : problems[0]);
    }
  }
  auto penv = random_portfolio_episode(4);
  const auto pt = round_trip(episode_table(penv.state(), penv.config()));
  EXPECT_EQ(pt.size(), penv.state().history.size());
  const auto problems = check_episode_table(pt);
  EXPECT_TRUE(problems.empty()) << (problems.empty() ? "" : problems[0]);
}

TEST(EpisodeCsv, CheckerCatchesTampering) {
  auto env = random_episode(EnvMode::kSingle, 2);
  auto t = episode_table(env.state(), env.config());
  t.rows[5][*t.column_index("net_pnl")] += 1.0;
  EXPECT_FALSE(check_episode_table(t).empty());

  auto t2 = episode_table(env.state(), env.config());
  t2.rows[3][*t2.column_index("hedge_pos")] += 1.0;
  EXPECT_FALSE(check_episode_table(t2).empty());

  auto t3 = episode_table(env.state(), env.config());
  t3.rows[3][*t3.column_index("done")] = 1.0;
  EXPECT_FALSE(check_episode_table(t3).empty());
}

TEST(EpisodeCsv, EmptyCellsRoundTripAsNaN) {
  auto env = random_episode(EnvMode::kPriceOfRisk, 7);
  const auto t = episode_table(env.state(), env.config());
  std::stringstream ss;
  write_episode_csv(t, ss);
  const auto back = read_episode_csv(ss);
  ASSERT_EQ(back.columns, t.columns);
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      if (std::isnan(t.rows[r][c])) {
        EXPECT_TRUE(std::isnan(back.rows[r][c]));
      } else {
        EXPECT_EQ(back.rows[r][c], t.rows[r][c]) << t.columns[c];  // shortest round-trip text
      }
    }
  }
  auto penv = random_portfolio_episode(1);
  const auto skew = round_trip(episode_table(penv.state(), penv.config())).column("action_skew");
  for (double v : skew) EXPECT_TRUE(std::isnan(v));
}

TEST(EpisodeCsv, MalformedInputIsDataError) {
  std::stringstream empty;
  EXPECT_THROW(read_episode_csv(empty), DataError);
  std::stringstream ragged("step,mid\n0,1,2\n");
  EXPECT_THROW(read_episode_csv(ragged), DataError);
  std::stringstream text("step,mid\n0,abc\n");
  EXPECT_THROW(read_episode_csv(text), DataError);
  EpisodeTable t;
  EXPECT_THROW(t.column("mid"), DataError);
}

TEST(Dashboard, WritesFourPanels) {
  auto env = random_episode(EnvMode::kSingle, 5);
  const auto t = episode_table(env.state(), env.config());
  const auto svg = render_dashboard_svg(t, "single");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  for (const char* panel : {"Prices", "Positions", "PNL", "Reward"}) {
    EXPECT_NE(svg.find(panel), std::string::npos) << panel;
  }
  const auto dir = std::filesystem::temp_directory_path() / "autohedge_dash_test";
  std::filesystem::create_directories(dir);
  write_dashboard_svg(t, dir / "dashboard.svg", "single");
  EXPECT_GT(std::filesystem::file_size(dir / "dashboard.svg"), 1000u);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(write_dashboard_svg(t, "/nonexistent/dir/d.svg", "x"), IoError);
}

TEST(Dashboard, PortfolioShowsBothAssets) {
  auto env = random_portfolio_episode(6);
  const auto svg = render_dashboard_svg(episode_table(env.state(), env.config()), "portfolio");
  EXPECT_NE(svg.find("mid1"), std::string::npos);
  EXPECT_NE(svg.find("mid2"), std::string::npos);
}
