#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "autohedge/rng.hpp"

namespace autohedge {

struct MarketConfig {
  double s0 = 100.0;
  double mu = 0.0;
  double sigma = 0.02;
  int n_steps = 128;
  int window = 20;
  // Spread multipliers per venue; client quotes are wider than hedge quotes.
  double nu_client = 1.5;
  double nu_hedge = 1.0;
  double gamma_spread = 0.5;
  double spread_clamp_lo = 0.1;
  double spread_clamp_hi = 2.5;
  std::uint64_t seed = 0;

  double dt() const { return 1.0 / static_cast<double>(n_steps); }
  // Throws ConfigError on the first violated invariant.
  void validate() const;
};

// Row-major matrix of standard-normal draws.
struct NoiseDraws {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  static NoiseDraws standard_normal(std::size_t rows, std::size_t cols, Rng& rng);

  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

// One venue/side spread series before and after clamping.
struct SpreadSeries {
  std::vector<double> raw;
  std::vector<double> clamped;
};

struct MarketPath {
  std::vector<double> mid;
  std::vector<double> client_bid;
  std::vector<double> client_ask;
  std::vector<double> hedge_bid;
  std::vector<double> hedge_ask;
  std::vector<double> rolling_vol;
  double mean_vol = 0.0;

  // Half-spreads before the nu multiplier, in the order client bid, client
  // ask, hedge bid, hedge ask.
  SpreadSeries client_bid_delta;
  SpreadSeries client_ask_delta;
  SpreadSeries hedge_bid_delta;
  SpreadSeries hedge_ask_delta;

  std::size_t size() const { return mid.size(); }
};

// Euler discretisation of the log-normal mid process. Returns
// draws.size() + 1 prices starting at s0.
std::vector<double> generate_mid_path(double s0, double mu, double sigma, double dt,
                                      std::span<const double> draws);

// Config overload: expects exactly n_steps - 1 draws (one per increment).
std::vector<double> generate_mid_path(const MarketConfig& cfg, std::span<const double> draws);

// rho * eps1 + sqrt(1 - rho^2) * eps_indep
double correlate(double eps1, double eps_indep, double rho);

// Sample stdev of the trailing min(t + 1, window) prices, scaled by
// 1/sqrt(n_steps). Element 0 is always zero.
std::vector<double> rolling_volatility(std::span<const double> mid, int window, int n_steps);

double clamp_spread(double raw, double lo, double hi);

// Builds client and hedge quotes around a mid path. spread_noise must be a
// 4 x n matrix of standard normals; rows are consumed in the SpreadSeries order.
MarketPath generate_spreads(const MarketConfig& cfg, std::span<const double> mid,
                            std::span<const double> rolling_vol, const NoiseDraws& spread_noise);

// Seeded end-to-end generation for one asset or a correlated pair. Asset 0
// is identical whether one or two assets are requested.
std::vector<MarketPath> generate_market(const MarketConfig& cfg, double rho, int n_assets);

// Variant with separate configs per asset; both must share n_steps.
std::vector<MarketPath> generate_market_pair(const MarketConfig& first, const MarketConfig& second,
                                             double rho);

}  // namespace autohedge
