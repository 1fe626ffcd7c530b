#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "autohedge/environment.hpp"
#include "autohedge/flow.hpp"
#include "autohedge/market.hpp"

namespace autohedge {

struct PortfolioConfig {
  double w = 0.5;
  double rho = 0.0;
  double phi = 1.0;
  double gamma_penalty = 0.1;
  double max_pos_limit = 50.0;
  double max_hedge_size = 10.0;
  double termination_multiple = 2.0;
  std::optional<double> terminal_extra_penalty;
  // true: actions are (w_action in [0,1], amount); false: raw per-asset hedges
  bool convex_parametrization = false;
  MarketConfig market1;
  MarketConfig market2;
  FlowConfig flow1;
  FlowConfig flow2;

  void validate() const;
  // Reference price for penalty and observation scaling (blend of the s0s).
  double s0() const { return w * market1.s0 + (1.0 - w) * market2.s0; }
  double value_scale() const { return s0() * max_pos_limit; }
  double terminal_penalty() const;
};

double blend_prices(double s1, double s2, double w);
double blend_sizes(double f1, double f2, double w);

// Positive when the hedge leverages (same sign) or overshoots the client value.
double overhedge(double hedge_value, double client_pos_value);

double portfolio_penalty(double portfolio_value, double overhedge_total, const PortfolioConfig& cfg);

struct ConvexHedges {
  double hedge1 = 0.0;
  double hedge2 = 0.0;
  bool clipped = false;
};
ConvexHedges convex_action_map(double w_action, double amount, double max_hedge_size);

double reward_portfolio(double client_pnl, double hedge1_pnl, double hedge2_pnl, double penalty);

struct PortfolioScenario {
  MarketPath market1;
  MarketPath market2;
  FlowPath flow1;
  FlowPath flow2;
  std::uint64_t seed = 0;
};

PortfolioScenario make_portfolio_scenario(const PortfolioConfig& cfg, std::uint64_t seed);

struct PositionPnl {
  double spread = 0.0;
  double reval = 0.0;

  double total() const { return spread + reval; }
};

struct PortfolioStepRecord {
  std::size_t step = 0;
  double mid1 = 0.0;
  double mid2 = 0.0;
  double blended_mid = 0.0;
  double client_bid = 0.0;
  double client_ask = 0.0;
  double hedge_bid = 0.0;  // w-blend of the two hedge venues, informational
  double hedge_ask = 0.0;
  double client_bid_size = 0.0;
  double client_ask_size = 0.0;
  double hedge1_size = 0.0;
  double hedge2_size = 0.0;
  double client_position = 0.0;
  double hedge1_position = 0.0;
  double hedge2_position = 0.0;
  PositionPnl client_step;
  PositionPnl hedge1_step;
  PositionPnl hedge2_step;
  double cum_client_spread = 0.0;
  double cum_hedge_spread = 0.0;
  double cum_market = 0.0;
  double cum_net = 0.0;
  double cum_hedge1 = 0.0;
  double cum_hedge2 = 0.0;
  double portfolio_value = 0.0;
  double overhedge = 0.0;
  double penalty = 0.0;
  double reward = 0.0;
  bool done = false;
  bool action_clipped = false;
};

struct PortfolioState {
  std::size_t t = 0;
  double client_position = 0.0;
  double hedge1_position = 0.0;
  double hedge2_position = 0.0;
  PositionPnl client_pnl;
  PositionPnl hedge1_pnl;
  PositionPnl hedge2_pnl;
  bool done = false;
  std::vector<PortfolioStepRecord> history;

  double net_pnl() const { return client_pnl.total() + hedge1_pnl.total() + hedge2_pnl.total(); }
};

double portfolio_value(const PortfolioState& state, double mid1, double mid2, double blended_mid);

class PortfolioEnv final : public Environment {
 public:
  explicit PortfolioEnv(PortfolioConfig cfg);

  std::size_t observation_dim() const override { return 3; }
  std::size_t action_dim() const override { return 2; }
  std::vector<double> action_low() const override;
  std::vector<double> action_high() const override;

  Observation reset(std::uint64_t seed) override;
  Observation reset(PortfolioScenario scenario);
  StepResult step(std::span<const double> action) override;
  // Raw per-asset hedge sizes, independent of the action parametrisation.
  StepResult step_hedges(double hedge1, double hedge2, bool clipped = false);

  const PortfolioConfig& config() const { return cfg_; }
  const PortfolioState& state() const { return state_; }
  const PortfolioScenario& scenario() const { return scenario_; }
  Observation observe() const;

 private:
  PortfolioConfig cfg_;
  PortfolioScenario scenario_;
  PortfolioState state_;
  bool ready_ = false;
};

}  // namespace autohedge
