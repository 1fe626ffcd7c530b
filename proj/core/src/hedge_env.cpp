#include "autohedge/hedge_env.hpp"

#include <algorithm>
#include <cmath>

#include "autohedge/error.hpp"

namespace autohedge {

namespace {

constexpr std::uint64_t kSkewStream = 30;

double clip_value(double value, double bound, bool& clipped) {
  if (!std::isfinite(value)) {
    clipped = true;
    return 0.0;
  }
  if (value > bound || value < -bound) {
    clipped = true;
    return std::clamp(value, -bound, bound);
  }
  return value;
}

}  // namespace

std::string to_string(EnvMode mode) {
  switch (mode) {
    case EnvMode::kSingle: return "single";
    case EnvMode::kSkew: return "skew";
    case EnvMode::kPriceOfRisk: return "price_of_risk";
  }
  return "single";
}

EnvMode env_mode_from_string(const std::string& name) {
  if (name == "single") return EnvMode::kSingle;
  if (name == "skew") return EnvMode::kSkew;
  if (name == "price_of_risk") return EnvMode::kPriceOfRisk;
  throw ConfigError("unknown environment mode '" + name + "'");
}

void EnvConfig::validate() const {
  if (!(max_hedge_size > 0.0)) throw ConfigError("env: max_hedge_size must be > 0");
  if (!(max_pos_limit > 0.0)) throw ConfigError("env: max_pos_limit must be > 0");
  if (!(gamma_penalty >= 0.0)) throw ConfigError("env: gamma_penalty must be >= 0");
  if (!(termination_multiple > 1.0)) throw ConfigError("env: termination_multiple must be > 1");
  if (terminal_extra_penalty && !(*terminal_extra_penalty >= 0.0)) {
    throw ConfigError("env: terminal_extra_penalty must be >= 0");
  }
  if (maker_taker_window < 1) throw ConfigError("env: maker_taker_window must be >= 1");
  market.validate();
  effective_flow().validate();
}

FlowConfig EnvConfig::effective_flow() const {
  FlowConfig f = flow;
  f.max_hedge_size = max_hedge_size;
  if (mode == EnvMode::kPriceOfRisk) f.beta_skew = 0.0;
  return f;
}

double EnvConfig::terminal_penalty() const {
  if (terminal_extra_penalty) return *terminal_extra_penalty;
  return position_penalty(termination_multiple * max_pos_limit, *this);
}

Scenario make_scenario(const EnvConfig& cfg, std::uint64_t seed) {
  MarketConfig market = cfg.market;
  market.seed = seed;
  Scenario s;
  s.market = std::move(generate_market(market, 0.0, 1).front());
  s.flow = generate_flow(market, cfg.effective_flow(), s.market, seed);
  s.seed = seed;
  return s;
}

double position_penalty(double position, const EnvConfig& cfg) {
  const double limit = cfg.max_pos_limit;
  return cfg.gamma_penalty * cfg.market.s0 * std::expm1(std::abs(position) / limit) * limit;
}

double reward_single(const PnlBreakdown& pnl, double penalty) {
  return pnl.client_spread_pnl + pnl.hedge_spread_pnl + pnl.market_reval_pnl - penalty;
}

double reward_price_of_risk(const PnlBreakdown& pnl, double penalty, bool literal) {
  const double spread = -std::abs(pnl.client_spread_pnl + pnl.hedge_spread_pnl);
  const double first = literal ? std::max(spread, 0.0) : spread;
  return first + pnl.market_reval_pnl - penalty;
}

ClippedAction clip_action(const AgentAction& action, const EnvConfig& cfg) {
  ClippedAction out;
  out.action.hedge_size = clip_value(action.hedge_size, cfg.max_hedge_size, out.clipped);
  if (cfg.has_skew()) {
    out.action.skew = clip_value(action.skew, 1.0, out.clipped);
  } else if (action.skew != 0.0) {
    out.clipped = true;
  }
  return out;
}

AgentAction heuristic_action(const HedgerState& state, const EnvConfig& cfg) {
  return {std::clamp(-state.net_position(), -cfg.max_hedge_size, cfg.max_hedge_size), 0.0};
}

Observation observation(const HedgerState& state, const EnvConfig& cfg) {
  return {state.net_position() / cfg.max_pos_limit};
}

MakerTakerSpreads maker_taker_spreads(const HedgerState& state, int window,
                                      std::optional<std::size_t> end) {
  const std::size_t stop = std::min(end.value_or(state.history.size()), state.history.size());
  const std::size_t start = stop > static_cast<std::size_t>(window) ? stop - window : 0;
  double client_size = 0.0, client_spread = 0.0;
  double hedge_size = 0.0, hedge_spread = 0.0;
  for (std::size_t i = start; i < stop; ++i) {
    const auto& r = state.history[i];
    const double bid_n = static_cast<double>(r.client_bid_size);
    const double ask_n = static_cast<double>(r.client_ask_size);
    client_size += bid_n + ask_n;
    client_spread += bid_n * (r.mid - r.client_bid) + ask_n * (r.client_ask - r.mid);
    const double h = std::abs(r.hedge_size);
    hedge_size += h;
    hedge_spread += r.hedge_size > 0.0 ? h * (r.hedge_ask - r.mid) : h * (r.mid - r.hedge_bid);
  }
  MakerTakerSpreads out;
  if (client_size > 0.0) out.maker = client_spread / client_size;
  if (hedge_size > 0.0) out.taker = hedge_spread / hedge_size;
  return out;
}

HedgeEnv::HedgeEnv(EnvConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  flow_ = cfg_.effective_flow();
}

std::vector<double> HedgeEnv::action_low() const {
  if (cfg_.has_skew()) return {-cfg_.max_hedge_size, -1.0};
  return {-cfg_.max_hedge_size};
}

std::vector<double> HedgeEnv::action_high() const {
  if (cfg_.has_skew()) return {cfg_.max_hedge_size, 1.0};
  return {cfg_.max_hedge_size};
}

Observation HedgeEnv::reset(std::uint64_t seed) { return reset(make_scenario(cfg_, seed)); }

Observation HedgeEnv::reset(Scenario scenario) {
  const std::size_t n = scenario.market.size();
  if (n < 2 || scenario.flow.size() < n - 1) {
    throw DataError("HedgeEnv::reset: scenario too short or flow/market misaligned");
  }
  scenario_ = std::move(scenario);
  state_ = HedgerState{};
  state_.history.reserve(n - 1);
  skew_rng_ = Rng(derive_seed(scenario_.seed, kSkewStream));
  ready_ = true;
  return observation(state_, cfg_);
}

StepResult HedgeEnv::step(std::span<const double> action) {
  if (action.size() != action_dim()) throw ParameterError("HedgeEnv::step: wrong action dimension");
  AgentAction a{action[0], action.size() > 1 ? action[1] : 0.0};
  return step(a);
}

StepResult HedgeEnv::step(const AgentAction& raw_action) {
  if (!ready_) throw StateError("HedgeEnv::step: reset() has not been called");
  if (state_.done) throw StateError("HedgeEnv::step: episode is done");

  const auto [action, clipped] = clip_action(raw_action, cfg_);
  const auto& m = scenario_.market;
  const auto& f = scenario_.flow;
  const std::size_t t = state_.t;
  const double mid = m.mid[t];

  StepRecord rec;
  rec.step = t;
  rec.mid = mid;
  rec.next_mid = m.mid[t + 1];
  rec.hedge_bid = m.hedge_bid[t];
  rec.hedge_ask = m.hedge_ask[t];
  rec.hedge_size = action.hedge_size;
  rec.skew = action.skew;
  rec.action_clipped = clipped;

  // (1) skew the client quotes and, if flow is elastic, the attracted side
  const auto quotes = skew_adjusted_prices(m.client_bid[t], m.client_ask[t], mid, action.skew);
  rec.client_bid = quotes.bid;
  rec.client_ask = quotes.ask;
  std::int64_t bid_n = f.bid_size[t];
  std::int64_t ask_n = f.ask_size[t];
  const double boost = skew_flow_delta(action.skew, flow_, f.trade_rate[t]);
  if (boost > 0.0) bid_n += skew_rng_.poisson(boost);
  if (boost < 0.0) ask_n += skew_rng_.poisson(-boost);
  rec.client_bid_size = bid_n;
  rec.client_ask_size = ask_n;

  // (2) client fills at t
  rec.pnl.client_spread_pnl = static_cast<double>(bid_n) * (mid - quotes.bid) +
                              static_cast<double>(ask_n) * (quotes.ask - mid);
  state_.client_position += static_cast<double>(bid_n - ask_n);

  // (3) hedge at t: buy at hedge ask, sell at hedge bid
  const double h = action.hedge_size;
  rec.pnl.hedge_spread_pnl = h > 0.0 ? -h * (m.hedge_ask[t] - mid) : h * (mid - m.hedge_bid[t]);
  state_.hedge_position += h;

  // (4) market moves to t + 1
  const double net = state_.net_position();
  rec.pnl.market_reval_pnl = net * (m.mid[t + 1] - mid);
  state_.t = t + 1;

  state_.client_pnl += rec.pnl.client_spread_pnl;
  state_.hedge_pnl += rec.pnl.hedge_spread_pnl;
  state_.market_pnl += rec.pnl.market_reval_pnl;
  state_.net_pnl = state_.client_pnl + state_.hedge_pnl + state_.market_pnl;

  // (5) penalty, reward, termination
  const double penalty = position_penalty(net, cfg_);
  double reward = cfg_.mode == EnvMode::kPriceOfRisk
                      ? reward_price_of_risk(rec.pnl, penalty, cfg_.literal_price_of_risk)
                      : reward_single(rec.pnl, penalty);
  const bool breached = std::abs(net) > cfg_.termination_multiple * cfg_.max_pos_limit;
  if (breached) reward -= cfg_.terminal_penalty();
  state_.done = breached || state_.t + 1 >= m.size();

  rec.client_position = state_.client_position;
  rec.hedge_position = state_.hedge_position;
  rec.net_position = net;
  rec.cum_client_pnl = state_.client_pnl;
  rec.cum_hedge_pnl = state_.hedge_pnl;
  rec.cum_market_pnl = state_.market_pnl;
  rec.cum_net_pnl = state_.net_pnl;
  rec.penalty = penalty;
  rec.reward = reward;
  rec.done = state_.done;
  state_.history.push_back(rec);

  StepResult out;
  out.observation = observation(state_, cfg_);
  out.reward = reward;
  out.done = state_.done;
  out.info.risk = std::abs(net);
  out.info.action_clipped = clipped;
  out.info.limit_breached = breached;
  return out;
}

}  // namespace autohedge
