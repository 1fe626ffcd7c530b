#include "autohedge/metrics.hpp"

#include <cmath>
#include <vector>

#include "autohedge/error.hpp"

namespace autohedge {

double SampleStats::standard_error() const {
  return count > 0 ? stdev / std::sqrt(static_cast<double>(count)) : 0.0;
}

SampleStats sample_stats(std::span<const double> values) {
  SampleStats s;
  s.count = values.size();
  if (s.count == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stdev = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

std::optional<double> sharpe_ratio(std::span<const double> pnl_series) {
  if (pnl_series.size() < 3) throw ParameterError("sharpe_ratio: need at least 3 PNL points");
  std::vector<double> returns(pnl_series.size() - 1);
  for (std::size_t i = 1; i < pnl_series.size(); ++i) returns[i - 1] = pnl_series[i] - pnl_series[i - 1];
  const auto s = sample_stats(returns);
  if (!(s.stdev > 0.0)) return std::nullopt;
  return s.mean / s.stdev;
}

std::optional<double> correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("correlation: length mismatch");
  const auto sx = sample_stats(x);
  const auto sy = sample_stats(y);
  if (!(sx.stdev > 0.0) || !(sy.stdev > 0.0)) return std::nullopt;
  double cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - sx.mean) * (y[i] - sy.mean);
  cov /= static_cast<double>(x.size() - 1);
  return cov / (sx.stdev * sy.stdev);
}

}  // namespace autohedge
