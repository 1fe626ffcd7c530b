#include "autohedge/portfolio_env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "autohedge/error.hpp"

namespace autohedge {

namespace {

void check_weight(double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw ParameterError("blend weight must lie in [0, 1]");
}

double clip_to(double value, double lo, double hi, bool& clipped) {
  if (!std::isfinite(value)) {
    clipped = true;
    return std::clamp(0.0, lo, hi);
  }
  if (value < lo || value > hi) clipped = true;
  return std::clamp(value, lo, hi);
}

}  // namespace

void PortfolioConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("portfolio config: ") + what);
  };
  require(w >= 0.0 && w <= 1.0, "w must lie in [0, 1]");
  require(std::abs(rho) <= 1.0, "|rho| must be <= 1");
  require(phi >= 0.0, "phi must be >= 0");
  require(gamma_penalty >= 0.0, "gamma_penalty must be >= 0");
  require(max_pos_limit > 0.0, "max_pos_limit must be > 0");
  require(max_hedge_size > 0.0, "max_hedge_size must be > 0");
  require(termination_multiple > 1.0, "termination_multiple must be > 1");
  require(!terminal_extra_penalty || *terminal_extra_penalty >= 0.0,
          "terminal_extra_penalty must be >= 0");
  require(market1.n_steps == market2.n_steps, "assets must share n_steps");
  market1.validate();
  market2.validate();
  flow1.validate();
  flow2.validate();
}

double PortfolioConfig::terminal_penalty() const {
  if (terminal_extra_penalty) return *terminal_extra_penalty;
  return portfolio_penalty(termination_multiple * value_scale(), 0.0, *this);
}

double blend_prices(double s1, double s2, double w) {
  check_weight(w);
  return w * s1 + (1.0 - w) * s2;
}

double blend_sizes(double f1, double f2, double w) {
  check_weight(w);
  return w * f1 + (1.0 - w) * f2;
}

double overhedge(double hedge_value, double client_pos_value) {
  const bool same_sign = hedge_value * client_pos_value > 0.0;
  const bool overshoot = std::abs(hedge_value) > std::abs(client_pos_value);
  if (same_sign || overshoot) return std::abs(hedge_value + client_pos_value);
  return 0.0;
}

double portfolio_penalty(double portfolio_value, double overhedge_total, const PortfolioConfig& cfg) {
  const double s0 = cfg.s0();
  const double exponent =
      (std::abs(portfolio_value) + cfg.phi * std::abs(overhedge_total)) / (s0 * cfg.max_pos_limit);
  return cfg.gamma_penalty * s0 * std::expm1(exponent) * cfg.max_pos_limit;
}

ConvexHedges convex_action_map(double w_action, double amount, double max_hedge_size) {
  ConvexHedges out;
  const double w = clip_to(w_action, 0.0, 1.0, out.clipped);
  const double a = clip_to(amount, -max_hedge_size, max_hedge_size, out.clipped);
  out.hedge1 = w * a;
  out.hedge2 = (1.0 - w) * a;
  return out;
}

double reward_portfolio(double client_pnl, double hedge1_pnl, double hedge2_pnl, double penalty) {
  return client_pnl + hedge1_pnl + hedge2_pnl - penalty;
}

PortfolioScenario make_portfolio_scenario(const PortfolioConfig& cfg, std::uint64_t seed) {
  MarketConfig m1 = cfg.market1;
  MarketConfig m2 = cfg.market2;
  m1.seed = seed;
  m2.seed = seed;
  auto paths = generate_market_pair(m1, m2, cfg.rho);
  PortfolioScenario s;
  s.market1 = std::move(paths[0]);
  s.market2 = std::move(paths[1]);
  s.flow1 = generate_flow(m1, cfg.flow1, s.market1, derive_seed(seed, 101));
  s.flow2 = generate_flow(m2, cfg.flow2, s.market2, derive_seed(seed, 102));
  s.seed = seed;
  return s;
}

double portfolio_value(const PortfolioState& state, double mid1, double mid2, double blended_mid) {
  return blended_mid * state.client_position + mid1 * state.hedge1_position +
         mid2 * state.hedge2_position;
}

PortfolioEnv::PortfolioEnv(PortfolioConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::vector<double> PortfolioEnv::action_low() const {
  if (cfg_.convex_parametrization) return {0.0, -cfg_.max_hedge_size};
  return {-cfg_.max_hedge_size, -cfg_.max_hedge_size};
}

std::vector<double> PortfolioEnv::action_high() const {
  if (cfg_.convex_parametrization) return {1.0, cfg_.max_hedge_size};
  return {cfg_.max_hedge_size, cfg_.max_hedge_size};
}

Observation PortfolioEnv::reset(std::uint64_t seed) {
  return reset(make_portfolio_scenario(cfg_, seed));
}

Observation PortfolioEnv::reset(PortfolioScenario scenario) {
  const std::size_t n = scenario.market1.size();
  if (n < 2 || scenario.market2.size() != n || scenario.flow1.size() < n - 1 ||
      scenario.flow2.size() < n - 1) {
    throw DataError("PortfolioEnv::reset: scenario arrays misaligned");
  }
  scenario_ = std::move(scenario);
  state_ = PortfolioState{};
  state_.history.reserve(n - 1);
  ready_ = true;
  return observe();
}

Observation PortfolioEnv::observe() const {
  const std::size_t t = state_.t;
  const double mid1 = scenario_.market1.mid[t];
  const double mid2 = scenario_.market2.mid[t];
  const double blended = blend_prices(mid1, mid2, cfg_.w);
  const double scale = cfg_.value_scale();
  return {mid1 * state_.hedge1_position / scale, mid2 * state_.hedge2_position / scale,
          portfolio_value(state_, mid1, mid2, blended) / scale};
}

StepResult PortfolioEnv::step(std::span<const double> action) {
  if (action.size() != 2) throw ParameterError("PortfolioEnv::step: wrong action dimension");
  if (cfg_.convex_parametrization) {
    const auto h = convex_action_map(action[0], action[1], cfg_.max_hedge_size);
    return step_hedges(h.hedge1, h.hedge2, h.clipped);
  }
  bool clipped = false;
  const double h1 = clip_to(action[0], -cfg_.max_hedge_size, cfg_.max_hedge_size, clipped);
  const double h2 = clip_to(action[1], -cfg_.max_hedge_size, cfg_.max_hedge_size, clipped);
  return step_hedges(h1, h2, clipped);
}

StepResult PortfolioEnv::step_hedges(double hedge1, double hedge2, bool clipped) {
  if (!ready_) throw StateError("PortfolioEnv::step: reset() has not been called");
  if (state_.done) throw StateError("PortfolioEnv::step: episode is done");

  const auto& m1 = scenario_.market1;
  const auto& m2 = scenario_.market2;
  const auto& f1 = scenario_.flow1;
  const auto& f2 = scenario_.flow2;
  const double w = cfg_.w;
  const std::size_t t = state_.t;

  PortfolioStepRecord rec;
  rec.step = t;
  rec.mid1 = m1.mid[t];
  rec.mid2 = m2.mid[t];
  rec.blended_mid = blend_prices(rec.mid1, rec.mid2, w);
  rec.client_bid = blend_prices(m1.client_bid[t], m2.client_bid[t], w);
  rec.client_ask = blend_prices(m1.client_ask[t], m2.client_ask[t], w);
  rec.hedge_bid = blend_prices(m1.hedge_bid[t], m2.hedge_bid[t], w);
  rec.hedge_ask = blend_prices(m1.hedge_ask[t], m2.hedge_ask[t], w);
  rec.client_bid_size = blend_sizes(static_cast<double>(f1.bid_size[t]),
                                    static_cast<double>(f2.bid_size[t]), w);
  rec.client_ask_size = blend_sizes(static_cast<double>(f1.ask_size[t]),
                                    static_cast<double>(f2.ask_size[t]), w);
  rec.hedge1_size = hedge1;
  rec.hedge2_size = hedge2;
  rec.action_clipped = clipped;

  // client fills at blended quotes
  rec.client_step.spread = rec.client_bid_size * (rec.blended_mid - rec.client_bid) +
                           rec.client_ask_size * (rec.client_ask - rec.blended_mid);
  state_.client_position += rec.client_bid_size - rec.client_ask_size;

  // hedges at each asset's own venue
  auto hedge_spread = [t](const MarketPath& m, double h) {
    return h > 0.0 ? -h * (m.hedge_ask[t] - m.mid[t]) : h * (m.mid[t] - m.hedge_bid[t]);
  };
  rec.hedge1_step.spread = hedge_spread(m1, hedge1);
  rec.hedge2_step.spread = hedge_spread(m2, hedge2);
  state_.hedge1_position += hedge1;
  state_.hedge2_position += hedge2;

  // market move
  const double next1 = m1.mid[t + 1];
  const double next2 = m2.mid[t + 1];
  const double next_blended = blend_prices(next1, next2, w);
  rec.client_step.reval = state_.client_position * (next_blended - rec.blended_mid);
  rec.hedge1_step.reval = state_.hedge1_position * (next1 - rec.mid1);
  rec.hedge2_step.reval = state_.hedge2_position * (next2 - rec.mid2);
  state_.t = t + 1;

  auto accumulate = [](PositionPnl& cum, const PositionPnl& step) {
    cum.spread += step.spread;
    cum.reval += step.reval;
  };
  accumulate(state_.client_pnl, rec.client_step);
  accumulate(state_.hedge1_pnl, rec.hedge1_step);
  accumulate(state_.hedge2_pnl, rec.hedge2_step);

  const double value = portfolio_value(state_, next1, next2, next_blended);
  const double client_value = next_blended * state_.client_position;
  const double over = overhedge(next1 * state_.hedge1_position, client_value) +
                      overhedge(next2 * state_.hedge2_position, client_value);
  const double penalty = portfolio_penalty(value, over, cfg_);
  double reward = reward_portfolio(rec.client_step.total(), rec.hedge1_step.total(),
                                   rec.hedge2_step.total(), penalty);
  const bool breached = std::abs(value) > cfg_.termination_multiple * cfg_.value_scale();
  if (breached) reward -= cfg_.terminal_penalty();
  state_.done = breached || state_.t + 1 >= m1.size();

  rec.client_position = state_.client_position;
  rec.hedge1_position = state_.hedge1_position;
  rec.hedge2_position = state_.hedge2_position;
  rec.cum_client_spread = state_.client_pnl.spread;
  rec.cum_hedge_spread = state_.hedge1_pnl.spread + state_.hedge2_pnl.spread;
  rec.cum_market = state_.client_pnl.reval + state_.hedge1_pnl.reval + state_.hedge2_pnl.reval;
  rec.cum_net = rec.cum_client_spread + rec.cum_hedge_spread + rec.cum_market;
  rec.cum_hedge1 = state_.hedge1_pnl.total();
  rec.cum_hedge2 = state_.hedge2_pnl.total();
  rec.portfolio_value = value;
  rec.overhedge = over;
  rec.penalty = penalty;
  rec.reward = reward;
  rec.done = state_.done;
  state_.history.push_back(rec);

  StepResult out;
  out.observation = observe();
  out.reward = reward;
  out.done = state_.done;
  out.info.risk = std::abs(value) / cfg_.s0();
  out.info.action_clipped = clipped;
  out.info.limit_breached = breached;
  return out;
}

}  // namespace autohedge
