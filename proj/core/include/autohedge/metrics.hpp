#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace autohedge {

// Mean over sample stdev of per-step differences of a cumulative PNL series.
// Throws ParameterError for fewer than 3 points; nullopt for zero dispersion.
std::optional<double> sharpe_ratio(std::span<const double> pnl_series);

struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double stdev = 0.0;  // sample (n - 1)

  double standard_error() const;
  // Normal-approximation 95% interval half-width.
  double ci95_half_width() const { return 1.96 * standard_error(); }
};

SampleStats sample_stats(std::span<const double> values);

// Pearson correlation; nullopt when either side has zero variance.
std::optional<double> correlation(std::span<const double> x, std::span<const double> y);

}  // namespace autohedge
