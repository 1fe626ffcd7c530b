#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "autohedge/market.hpp"
#include "autohedge/rng.hpp"

namespace autohedge {

struct FlowConfig {
  double c_scale = 2.0;
  double alpha_flow = 1.0;
  double beta_flow = 0.8;
  double rho_flow = 0.7;
  double beta_skew = 4.0;
  double max_hedge_size = 10.0;
  int intensity_smoothing_window = 10;

  void validate() const;
};

// Per-step client flow. Sizes are Poisson draws before any skew boost;
// bid-side trades are clients selling to us (position increases).
struct FlowPath {
  std::vector<std::int64_t> bid_size;
  std::vector<std::int64_t> ask_size;
  std::vector<std::int64_t> net_size;
  std::vector<double> net_intensity;
  std::vector<double> trade_rate;
  std::vector<double> signal;

  std::size_t size() const { return bid_size.size(); }
};

struct ClientSizes {
  std::int64_t bid = 0;
  std::int64_t ask = 0;
  std::int64_t net = 0;
};

struct IntensityMultipliers {
  double bid = 1.0;
  double ask = 1.0;
};

// C * (alpha + rolling_vol / mean_vol)
double client_trade_rate(const FlowConfig& cfg, double rolling_vol, double mean_vol);

IntensityMultipliers intensity_multipliers(double lambda_net);

// Standardised log-price signal: the drift-free log change over the trailing
// smoothing window divided by its stdev, so each value is a unit-variance
// rolling average of the increment noise. Zero at t = 0 or when sigma = 0.
std::vector<double> log_price_signal(std::span<const double> log_mid, const MarketConfig& market,
                                     int smoothing_window);

// lambda_t = beta * correlate(signal_t, indep_t, rho)
std::vector<double> net_intensity(std::span<const double> log_mid, const MarketConfig& market,
                                  const FlowConfig& cfg, std::span<const double> indep_draws);

ClientSizes draw_client_sizes(double rate, IntensityMultipliers multipliers, Rng& rng);

// Signed extra Poisson rate from a skew action: positive values boost the bid
// side (negative skew), negative values boost the ask side (positive skew).
double skew_flow_delta(double skew, const FlowConfig& cfg, double client_trade_rate);

struct QuotePair {
  double bid;
  double ask;
};

// Moves the bid (skew <= 0) or the ask (skew > 0) toward mid.
QuotePair skew_adjusted_prices(double bid, double ask, double mid, double skew);

// Seeded per-episode flow for one market path.
FlowPath generate_flow(const MarketConfig& market, const FlowConfig& cfg, const MarketPath& path,
                       std::uint64_t seed);

}  // namespace autohedge
