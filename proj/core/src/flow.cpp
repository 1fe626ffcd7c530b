#include "autohedge/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "autohedge/error.hpp"

namespace autohedge {

namespace {

enum Stream : std::uint64_t {
  kIntensityNoise = 20,
  kSizes = 21,
};

}  // namespace

void FlowConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("flow config: ") + what);
  };
  require(c_scale > 0.0, "c_scale must be > 0");
  require(alpha_flow >= 0.0, "alpha_flow must be >= 0");
  require(std::isfinite(beta_flow), "beta_flow must be finite");
  require(std::abs(rho_flow) <= 1.0, "|rho_flow| must be <= 1");
  require(beta_skew >= 0.0, "beta_skew must be >= 0");
  require(max_hedge_size > 0.0, "max_hedge_size must be > 0");
  require(intensity_smoothing_window >= 1, "intensity_smoothing_window must be >= 1");
}

double client_trade_rate(const FlowConfig& cfg, double rolling_vol, double mean_vol) {
  if (!(mean_vol > 0.0)) throw DataError("client_trade_rate: degenerate market (mean_vol = 0)");
  return cfg.c_scale * (cfg.alpha_flow + rolling_vol / mean_vol);
}

IntensityMultipliers intensity_multipliers(double lambda_net) {
  return {std::max(1.0 - lambda_net, 0.0), std::max(1.0 + lambda_net, 0.0)};
}

std::vector<double> log_price_signal(std::span<const double> log_mid, const MarketConfig& market,
                                     int smoothing_window) {
  std::vector<double> out(log_mid.size(), 0.0);
  if (market.sigma == 0.0) return out;
  const double dt = market.dt();
  const double drift = (market.mu - 0.5 * market.sigma * market.sigma) * dt;
  for (std::size_t t = 1; t < log_mid.size(); ++t) {
    const std::size_t k = std::min<std::size_t>(t, static_cast<std::size_t>(smoothing_window));
    const double change = log_mid[t] - log_mid[t - k] - drift * static_cast<double>(k);
    out[t] = change / (market.sigma * std::sqrt(dt * static_cast<double>(k)));
  }
  return out;
}

std::vector<double> net_intensity(std::span<const double> log_mid, const MarketConfig& market,
                                  const FlowConfig& cfg, std::span<const double> indep_draws) {
  if (indep_draws.size() != log_mid.size()) throw DataError("net_intensity: arrays not aligned");
  const auto signal = log_price_signal(log_mid, market, cfg.intensity_smoothing_window);
  std::vector<double> lambda(log_mid.size());
  for (std::size_t t = 0; t < lambda.size(); ++t) {
    lambda[t] = cfg.beta_flow * correlate(signal[t], indep_draws[t], cfg.rho_flow);
  }
  return lambda;
}

ClientSizes draw_client_sizes(double rate, IntensityMultipliers multipliers, Rng& rng) {
  if (!(rate >= 0.0)) throw ParameterError("draw_client_sizes: rate must be >= 0");
  ClientSizes s;
  s.bid = rng.poisson(rate * multipliers.bid);
  s.ask = rng.poisson(rate * multipliers.ask);
  s.net = s.bid - s.ask;
  return s;
}

double skew_flow_delta(double skew, const FlowConfig& cfg, double client_trade_rate) {
  if (!(std::abs(skew) <= 1.0)) throw ParameterError("skew_flow_delta: |skew| must be <= 1");
  if (skew == 0.0 || cfg.beta_skew == 0.0) return 0.0;
  if (!(client_trade_rate > 0.0)) throw ParameterError("skew_flow_delta: rate must be > 0");
  return -skew * cfg.beta_skew * cfg.max_hedge_size / client_trade_rate;
}

QuotePair skew_adjusted_prices(double bid, double ask, double mid, double skew) {
  if (skew <= 0.0) return {bid - skew * (mid - bid), ask};
  return {bid, ask - skew * (ask - mid)};
}

FlowPath generate_flow(const MarketConfig& market, const FlowConfig& cfg, const MarketPath& path,
                       std::uint64_t seed) {
  cfg.validate();
  const std::size_t n = path.size();
  if (!(path.mean_vol > 0.0)) throw DataError("generate_flow: degenerate market (mean_vol = 0)");

  std::vector<double> log_mid(n);
  for (std::size_t t = 0; t < n; ++t) log_mid[t] = std::log(path.mid[t]);

  Rng noise_rng(derive_seed(seed, kIntensityNoise));
  std::vector<double> indep(n);
  for (auto& e : indep) e = noise_rng.normal();

  FlowPath flow;
  flow.signal = log_price_signal(log_mid, market, cfg.intensity_smoothing_window);
  flow.net_intensity = net_intensity(log_mid, market, cfg, indep);
  flow.trade_rate.resize(n);
  flow.bid_size.resize(n);
  flow.ask_size.resize(n);
  flow.net_size.resize(n);

  Rng size_rng(derive_seed(seed, kSizes));
  for (std::size_t t = 0; t < n; ++t) {
    const double rate = client_trade_rate(cfg, path.rolling_vol[t], path.mean_vol);
    const auto sizes = draw_client_sizes(rate, intensity_multipliers(flow.net_intensity[t]), size_rng);
    flow.trade_rate[t] = rate;
    flow.bid_size[t] = sizes.bid;
    flow.ask_size[t] = sizes.ask;
    flow.net_size[t] = sizes.net;
  }
  return flow;
}

}  // namespace autohedge
