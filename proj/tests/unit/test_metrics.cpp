#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "autohedge/error.hpp"
#include "autohedge/metrics.hpp"

using namespace autohedge;

TEST(Sharpe, HandExample) {
  // increments 1, 2, -1: mean 2/3, sample stdev sqrt(7/3)
  const std::vector<double> pnl{0.0, 1.0, 3.0, 2.0};
  const auto s = sharpe_ratio(pnl);
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(*s, (2.0 / 3.0) / std::sqrt(7.0 / 3.0), 1e-12);
  EXPECT_NEAR(*s, 0.43644, 1e-5);
}

TEST(Sharpe, ConstantIncrementsHaveNoRatio) {
  const std::vector<double> flat{5.0, 5.0, 5.0, 5.0};
  EXPECT_FALSE(sharpe_ratio(flat).has_value());
  const std::vector<double> line{0.0, 2.0, 4.0, 6.0};
  EXPECT_FALSE(sharpe_ratio(line).has_value());
}

TEST(Sharpe, ScaleAndShiftInvariant) {
  const std::vector<double> pnl{0.0, 1.5, 0.5, 2.0, 4.0, 3.0};
  std::vector<double> scaled, shifted;
  for (double v : pnl) {
    scaled.push_back(250.0 * v);
    shifted.push_back(v + 1000.0);
  }
  EXPECT_NEAR(*sharpe_ratio(scaled), *sharpe_ratio(pnl), 1e-12);
  EXPECT_NEAR(*sharpe_ratio(shifted), *sharpe_ratio(pnl), 1e-12);
  std::vector<double> negated;
  for (double v : pnl) negated.push_back(-v);
  EXPECT_NEAR(*sharpe_ratio(negated), -*sharpe_ratio(pnl), 1e-12);
}

TEST(Sharpe, TooShortIsParameterError) {
  const std::vector<double> two{0.0, 1.0};
  EXPECT_THROW(sharpe_ratio(two), ParameterError);
  EXPECT_THROW(sharpe_ratio({}), ParameterError);
}

TEST(SampleStats, KnownValues) {
  const std::vector<double> v{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  const auto s = sample_stats(v);
  EXPECT_EQ(s.count, 8u);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_NEAR(s.stdev, std::sqrt(32.0 / 7.0), 1e-12);
  EXPECT_NEAR(s.standard_error(), std::sqrt(32.0 / 7.0) / std::sqrt(8.0), 1e-12);
  EXPECT_NEAR(s.ci95_half_width(), 1.96 * s.standard_error(), 1e-15);
}

TEST(SampleStats, SingleValueHasNoSpread) {
  const std::vector<double> one{3.0};
  const auto s = sample_stats(one);
  EXPECT_EQ(s.count, 1u);
  EXPECT_EQ(s.mean, 3.0);
  EXPECT_EQ(s.stdev, 0.0);
}

TEST(Correlation, KnownValues) {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> y{2.0, 4.0, 6.0, 8.0};
  const std::vector<double> z{4.0, 3.0, 2.0, 1.0};
  const std::vector<double> c{1.0, 1.0, 1.0, 1.0};
  EXPECT_NEAR(*correlation(x, y), 1.0, 1e-12);
  EXPECT_NEAR(*correlation(x, z), -1.0, 1e-12);
  EXPECT_FALSE(correlation(x, c).has_value());
  const std::vector<double> shorter{1.0, 2.0};
  EXPECT_THROW(correlation(x, shorter), ParameterError);
}
