#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autohedge/environment.hpp"
#include "autohedge/flow.hpp"
#include "autohedge/market.hpp"
#include "autohedge/rng.hpp"

namespace autohedge {

enum class EnvMode { kSingle, kSkew, kPriceOfRisk };

std::string to_string(EnvMode mode);
EnvMode env_mode_from_string(const std::string& name);

struct EnvConfig {
  EnvMode mode = EnvMode::kSingle;
  double max_hedge_size = 10.0;
  double max_pos_limit = 50.0;
  double gamma_penalty = 0.1;
  double termination_multiple = 2.0;
  // Defaults to position_penalty(termination_multiple * max_pos_limit).
  std::optional<double> terminal_extra_penalty;
  // Price-of-risk reward: false uses -|client + hedge|, true the literal
  // max(-|client + hedge|, 0) form whose first term is always zero.
  bool literal_price_of_risk = false;
  int maker_taker_window = 20;
  MarketConfig market;
  FlowConfig flow;

  void validate() const;
  bool has_skew() const { return mode != EnvMode::kSingle; }
  // Flow config as seen by the environment: hedge bound shared with the
  // action space, and inelastic flow in price-of-risk mode.
  FlowConfig effective_flow() const;
  double terminal_penalty() const;
};

struct PnlBreakdown {
  double client_spread_pnl = 0.0;
  double hedge_spread_pnl = 0.0;
  double market_reval_pnl = 0.0;

  double total() const { return client_spread_pnl + hedge_spread_pnl + market_reval_pnl; }
};

struct AgentAction {
  double hedge_size = 0.0;
  double skew = 0.0;
};

// Everything that happened during one step, in booking order.
struct StepRecord {
  std::size_t step = 0;
  double mid = 0.0;
  double next_mid = 0.0;
  double client_bid = 0.0;  // skew-adjusted quotes actually dealt on
  double client_ask = 0.0;
  double hedge_bid = 0.0;
  double hedge_ask = 0.0;
  std::int64_t client_bid_size = 0;
  std::int64_t client_ask_size = 0;
  double hedge_size = 0.0;
  double skew = 0.0;
  double client_position = 0.0;
  double hedge_position = 0.0;
  double net_position = 0.0;
  PnlBreakdown pnl;
  double cum_client_pnl = 0.0;
  double cum_hedge_pnl = 0.0;
  double cum_market_pnl = 0.0;
  double cum_net_pnl = 0.0;
  double penalty = 0.0;
  double reward = 0.0;
  bool done = false;
  bool action_clipped = false;
};

struct HedgerState {
  std::size_t t = 0;
  double client_position = 0.0;
  double hedge_position = 0.0;
  double client_pnl = 0.0;
  double hedge_pnl = 0.0;
  double market_pnl = 0.0;
  double net_pnl = 0.0;
  bool done = false;
  std::vector<StepRecord> history;

  double net_position() const { return client_position + hedge_position; }
};

// Pre-generated data for one episode. Two agents fed the same scenario see
// bit-identical market and base client flow.
struct Scenario {
  MarketPath market;
  FlowPath flow;
  std::uint64_t seed = 0;
};

Scenario make_scenario(const EnvConfig& cfg, std::uint64_t seed);

double position_penalty(double position, const EnvConfig& cfg);
double reward_single(const PnlBreakdown& pnl, double penalty);
double reward_price_of_risk(const PnlBreakdown& pnl, double penalty, bool literal = false);

struct ClippedAction {
  AgentAction action;
  bool clipped = false;
};
ClippedAction clip_action(const AgentAction& action, const EnvConfig& cfg);

// Offsets the whole outstanding position, within the hedge bound.
AgentAction heuristic_action(const HedgerState& state, const EnvConfig& cfg);

Observation observation(const HedgerState& state, const EnvConfig& cfg);

struct MakerTakerSpreads {
  std::optional<double> maker;
  std::optional<double> taker;
};

// Size-weighted per-unit half-spreads over the trailing `window` steps of the
// history ending at `end` (exclusive; defaults to the whole history).
MakerTakerSpreads maker_taker_spreads(const HedgerState& state, int window,
                                      std::optional<std::size_t> end = std::nullopt);

class HedgeEnv final : public Environment {
 public:
  explicit HedgeEnv(EnvConfig cfg);

  std::size_t observation_dim() const override { return 1; }
  std::size_t action_dim() const override { return cfg_.has_skew() ? 2 : 1; }
  std::vector<double> action_low() const override;
  std::vector<double> action_high() const override;

  Observation reset(std::uint64_t seed) override;
  Observation reset(Scenario scenario);
  StepResult step(std::span<const double> action) override;
  StepResult step(const AgentAction& action);

  const EnvConfig& config() const { return cfg_; }
  const HedgerState& state() const { return state_; }
  const Scenario& scenario() const { return scenario_; }
  // Number of steps in a full episode (one fewer than market points).
  std::size_t episode_length() const { return scenario_.market.size() - 1; }

 private:
  EnvConfig cfg_;
  FlowConfig flow_;
  Scenario scenario_;
  HedgerState state_;
  Rng skew_rng_{0};
  bool ready_ = false;
};

}  // namespace autohedge
