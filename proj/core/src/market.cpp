#include "autohedge/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "autohedge/error.hpp"

namespace autohedge {

namespace {

enum Stream : std::uint64_t {
  kIncrements = 1,
  kIndependent = 2,
  kSpreadFirst = 10,
  kSpreadSecond = 11,
};

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("market config: ") + what);
}

MarketPath build_asset(const MarketConfig& cfg, std::span<const double> increments,
                       std::uint64_t spread_stream) {
  const auto mid = generate_mid_path(cfg, increments);
  const auto vol = rolling_volatility(mid, cfg.window, cfg.n_steps);
  Rng spread_rng(derive_seed(cfg.seed, spread_stream));
  const auto noise = NoiseDraws::standard_normal(4, mid.size(), spread_rng);
  return generate_spreads(cfg, mid, vol, noise);
}

}  // namespace

void MarketConfig::validate() const {
  require(std::isfinite(s0) && s0 > 0.0, "s0 must be > 0");
  require(std::isfinite(mu), "mu must be finite");
  require(std::isfinite(sigma) && sigma >= 0.0, "sigma must be >= 0");
  require(n_steps >= 2, "n_steps must be >= 2");
  require(window >= 1 && window <= n_steps, "window must lie in [1, n_steps]");
  require(nu_client >= 0.0 && nu_hedge >= 0.0, "spread multipliers must be >= 0");
  require(gamma_spread >= 0.0, "gamma_spread must be >= 0");
  require(spread_clamp_lo > 0.0 && spread_clamp_lo < spread_clamp_hi,
          "clamp bounds must satisfy 0 < lo < hi");
}

NoiseDraws NoiseDraws::standard_normal(std::size_t rows, std::size_t cols, Rng& rng) {
  NoiseDraws out;
  out.rows = rows;
  out.cols = cols;
  out.values.resize(rows * cols);
  for (auto& v : out.values) v = rng.normal();
  return out;
}

std::vector<double> generate_mid_path(double s0, double mu, double sigma, double dt,
                                      std::span<const double> draws) {
  if (!(s0 > 0.0) || !(dt > 0.0) || sigma < 0.0) {
    throw ParameterError("generate_mid_path: require s0 > 0, dt > 0, sigma >= 0");
  }
  const double drift = (mu - 0.5 * sigma * sigma) * dt;
  const double diffusion = sigma * std::sqrt(dt);
  std::vector<double> mid(draws.size() + 1);
  mid[0] = s0;
  double log_change = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    if (!std::isfinite(draws[i])) {
      throw DataError("generate_mid_path: non-finite draw at index " + std::to_string(i));
    }
    log_change += drift + diffusion * draws[i];
    mid[i + 1] = s0 * std::exp(log_change);
  }
  return mid;
}

std::vector<double> generate_mid_path(const MarketConfig& cfg, std::span<const double> draws) {
  if (draws.size() + 1 != static_cast<std::size_t>(cfg.n_steps)) {
    throw DataError("generate_mid_path: expected n_steps - 1 draws");
  }
  return generate_mid_path(cfg.s0, cfg.mu, cfg.sigma, cfg.dt(), draws);
}

double correlate(double eps1, double eps_indep, double rho) {
  if (!(std::abs(rho) <= 1.0)) throw ParameterError("correlate: |rho| must be <= 1");
  return rho * eps1 + std::sqrt(1.0 - rho * rho) * eps_indep;
}

std::vector<double> rolling_volatility(std::span<const double> mid, int window, int n_steps) {
  if (window < 1) throw ParameterError("rolling_volatility: window must be >= 1");
  if (n_steps < 1) throw ParameterError("rolling_volatility: n_steps must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_steps));
  std::vector<double> out(mid.size(), 0.0);
  for (std::size_t t = 0; t < mid.size(); ++t) {
    const std::size_t count = std::min<std::size_t>(t + 1, static_cast<std::size_t>(window));
    if (count < 2) continue;
    const auto first = mid.begin() + static_cast<std::ptrdiff_t>(t + 1 - count);
    const auto last = mid.begin() + static_cast<std::ptrdiff_t>(t + 1);
    const double mean = std::accumulate(first, last, 0.0) / static_cast<double>(count);
    double ss = 0.0;
    for (auto it = first; it != last; ++it) ss += (*it - mean) * (*it - mean);
    out[t] = std::sqrt(ss / static_cast<double>(count - 1)) * scale;
  }
  return out;
}

double clamp_spread(double raw, double lo, double hi) { return std::clamp(raw, lo, hi); }

MarketPath generate_spreads(const MarketConfig& cfg, std::span<const double> mid,
                            std::span<const double> rolling_vol, const NoiseDraws& spread_noise) {
  const std::size_t n = mid.size();
  if (rolling_vol.size() != n || spread_noise.rows != 4 || spread_noise.cols != n) {
    throw DataError("generate_spreads: inconsistent input lengths");
  }
  MarketPath path;
  path.mid.assign(mid.begin(), mid.end());
  path.rolling_vol.assign(rolling_vol.begin(), rolling_vol.end());
  path.mean_vol = n == 0 ? 0.0
                         : std::accumulate(rolling_vol.begin(), rolling_vol.end(), 0.0) /
                               static_cast<double>(n);

  // Log-normal add-on: exp(s * N(0,1)) with s the underlying normal's stdev.
  const double addon_sd =
      cfg.gamma_spread * cfg.s0 * cfg.sigma / std::sqrt(static_cast<double>(cfg.n_steps));
  const double lo = cfg.spread_clamp_lo * path.mean_vol;
  const double hi = cfg.spread_clamp_hi * path.mean_vol;

  SpreadSeries* series[4] = {&path.client_bid_delta, &path.client_ask_delta,
                             &path.hedge_bid_delta, &path.hedge_ask_delta};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto noise = spread_noise.row(k);
    series[k]->raw.resize(n);
    series[k]->clamped.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      if (!std::isfinite(noise[t])) throw DataError("generate_spreads: non-finite draw");
      const double raw = rolling_vol[t] + std::exp(addon_sd * noise[t]);
      series[k]->raw[t] = raw;
      series[k]->clamped[t] = clamp_spread(raw, lo, hi);
    }
  }

  path.client_bid.resize(n);
  path.client_ask.resize(n);
  path.hedge_bid.resize(n);
  path.hedge_ask.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    path.client_bid[t] = mid[t] - cfg.nu_client * path.client_bid_delta.clamped[t];
    path.client_ask[t] = mid[t] + cfg.nu_client * path.client_ask_delta.clamped[t];
    path.hedge_bid[t] = mid[t] - cfg.nu_hedge * path.hedge_bid_delta.clamped[t];
    path.hedge_ask[t] = mid[t] + cfg.nu_hedge * path.hedge_ask_delta.clamped[t];
    if (!(path.client_bid[t] > 0.0) || !(path.hedge_bid[t] > 0.0)) {
      throw ConfigError("generate_spreads: non-positive bid at step " + std::to_string(t) +
                        "; reduce spread multipliers or clamp ceiling");
    }
  }
  return path;
}

std::vector<MarketPath> generate_market_pair(const MarketConfig& first, const MarketConfig& second,
                                             double rho) {
  first.validate();
  second.validate();
  if (first.n_steps != second.n_steps) {
    throw ConfigError("generate_market_pair: assets must share n_steps");
  }
  if (!(std::abs(rho) <= 1.0)) throw ParameterError("generate_market: |rho| must be <= 1");
  const auto n_inc = static_cast<std::size_t>(first.n_steps - 1);

  Rng inc_rng(derive_seed(first.seed, kIncrements));
  Rng indep_rng(derive_seed(first.seed, kIndependent));
  std::vector<double> eps1(n_inc), eps2(n_inc);
  for (auto& e : eps1) e = inc_rng.normal();
  for (std::size_t i = 0; i < n_inc; ++i) eps2[i] = correlate(eps1[i], indep_rng.normal(), rho);

  std::vector<MarketPath> out;
  out.push_back(build_asset(first, eps1, kSpreadFirst));
  out.push_back(build_asset(second, eps2, kSpreadSecond));
  return out;
}

std::vector<MarketPath> generate_market(const MarketConfig& cfg, double rho, int n_assets) {
  if (n_assets != 1 && n_assets != 2) throw ParameterError("generate_market: n_assets must be 1 or 2");
  if (n_assets == 2) return generate_market_pair(cfg, cfg, rho);
  cfg.validate();
  if (!(std::abs(rho) <= 1.0)) throw ParameterError("generate_market: |rho| must be <= 1");
  Rng inc_rng(derive_seed(cfg.seed, kIncrements));
  std::vector<double> eps1(static_cast<std::size_t>(cfg.n_steps - 1));
  for (auto& e : eps1) e = inc_rng.normal();
  std::vector<MarketPath> out;
  out.push_back(build_asset(cfg, eps1, kSpreadFirst));
  return out;
}

}  // namespace autohedge
