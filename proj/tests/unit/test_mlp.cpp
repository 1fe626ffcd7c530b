#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "autohedge/adam.hpp"
#include "autohedge/error.hpp"
#include "autohedge/mlp.hpp"
#include "oracles.hpp"

using namespace autohedge;

namespace {

std::vector<int> random_dims(Rng& rng) {
  const int layers = 2 + static_cast<int>(rng.index(3));  // 2..4 transitions
  std::vector<int> dims;
  for (int i = 0; i <= layers; ++i) dims.push_back(1 + static_cast<int>(rng.index(8)));
  return dims;
}

}  // namespace

TEST(Mlp, ZeroNetworkGivesZeroOutput) {
  Mlp net({3, 4, 2});
  const std::vector<double> x{1.0, -2.0, 0.5};
  for (double v : net.forward(x)) EXPECT_EQ(v, 0.0);
}

TEST(Mlp, SingleAffineLayer) {
  Mlp net({1, 1});
  net.layers()[0].weight(0, 0) = 2.0;
  net.layers()[0].bias(0) = 1.0;
  const std::vector<double> x{3.0};
  EXPECT_DOUBLE_EQ(net.forward(x)[0], 7.0);
}

TEST(Mlp, RectifierBlocksNegativePreActivation) {
  // 1 -> 1 (relu) -> 1
  Mlp net({1, 1, 1});
  net.layers()[0].weight(0, 0) = 1.0;
  net.layers()[0].bias(0) = -8.0;  // input 3 -> pre-activation -5
  net.layers()[1].weight(0, 0) = 10.0;
  net.layers()[1].bias(0) = 0.25;
  const std::vector<double> x{3.0};
  EXPECT_DOUBLE_EQ(net.forward(x)[0], 0.25);
  const std::vector<double> x2{10.0};
  EXPECT_DOUBLE_EQ(net.forward(x2)[0], 20.25);
}

TEST(Mlp, ForwardRejectsWrongInputLength) {
  Mlp net({2, 3, 1});
  const std::vector<double> x{1.0};
  EXPECT_ANY_THROW(net.forward(x));
}

TEST(Mlp, BatchedForwardMatchesPerSample) {
  Rng rng(4);
  Mlp net({3, 5, 5, 2}, rng);
  Matrix x(3, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const Matrix y = net.forward(x);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const std::vector<double> col(x.col(c).data(), x.col(c).data() + 3);
    const auto single = net.forward(col);
    EXPECT_NEAR(single[0], y(0, c), 1e-14);
    EXPECT_NEAR(single[1], y(1, c), 1e-14);
  }
}

TEST(Mlp, GradientsMatchCentralDifferences) {
  Rng rng(2024);
  std::size_t checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto dims = random_dims(rng);
    Mlp net(dims, rng);
    const int batch = 1 + static_cast<int>(rng.index(4));
    Matrix x(dims.front(), batch);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    Matrix w(dims.back(), batch);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(0.5, 1.5);

    const auto check = oracle::check_gradients(net, x, w);
    EXPECT_LE(check.max_rel_error, 1e-4) << "trial " << trial;
    checked += check.checked;
  }
  EXPECT_GT(checked, 500u);
}

TEST(Mlp, ConstantLossHasZeroGradient) {
  Rng rng(9);
  Mlp net({3, 6, 2}, rng);
  Matrix x = Matrix::Random(3, 5);
  Mlp::Cache cache;
  net.forward(x, cache);
  auto grads = net.zero_gradients();
  net.backward(cache, Matrix::Zero(2, 5), &grads);
  for (const auto& l : grads.layers) {
    EXPECT_EQ(l.weight.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(l.bias.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Mlp, GradientIsLinearInLossScale) {
  Rng rng(10);
  Mlp net({2, 5, 5, 1}, rng);
  Matrix x(2, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Mlp::Cache cache;
  const Matrix y = net.forward(x, cache);
  auto g1 = net.zero_gradients();
  auto g3 = net.zero_gradients();
  net.backward(cache, y, &g1);
  net.backward(cache, 3.0 * y, &g3);
  for (std::size_t i = 0; i < g1.layers.size(); ++i) {
    EXPECT_LE((g3.layers[i].weight - 3.0 * g1.layers[i].weight).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((g3.layers[i].bias - 3.0 * g1.layers[i].bias).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Mlp, BackwardAccumulates) {
  Rng rng(11);
  Mlp net({2, 4, 1}, rng);
  Matrix x = Matrix::Ones(2, 2);
  Mlp::Cache cache;
  const Matrix y = net.forward(x, cache);
  auto once = net.zero_gradients();
  auto twice = net.zero_gradients();
  net.backward(cache, y, &once);
  net.backward(cache, y, &twice);
  net.backward(cache, y, &twice);
  EXPECT_LE((twice.layers[0].weight - 2.0 * once.layers[0].weight).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mlp, FlatParameterRoundTrip) {
  Rng rng(12);
  Mlp net({3, 7, 2}, rng);
  const auto p = net.flat_parameters();
  EXPECT_EQ(p.size(), net.parameter_count());
  EXPECT_EQ(p.size(), 3u * 7 + 7 + 7 * 2 + 2);
  Mlp other({3, 7, 2});
  other.set_flat_parameters(p);
  EXPECT_EQ(other.flat_parameters(), p);
  std::vector<double> short_p(p.begin(), p.end() - 1);
  EXPECT_ANY_THROW(other.set_flat_parameters(short_p));
}

TEST(Mlp, InitialisationWithinFanInBound) {
  Rng rng(13);
  Mlp net({16, 32, 4}, rng);
  EXPECT_LE(net.layers()[0].weight.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(16.0));
  EXPECT_LE(net.layers()[1].weight.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(32.0));
  EXPECT_TRUE(net.all_finite());
}

TEST(Polyak, TauOneCopiesSource) {
  Rng rng(20);
  Mlp target({2, 3, 1}, rng), source({2, 3, 1}, rng);
  polyak_update(target, source, 1.0);
  EXPECT_EQ(target.flat_parameters(), source.flat_parameters());
}

TEST(Polyak, TauZeroLeavesTarget) {
  Rng rng(21);
  Mlp target({2, 3, 1}, rng), source({2, 3, 1}, rng);
  const auto before = target.flat_parameters();
  polyak_update(target, source, 0.0);
  EXPECT_EQ(target.flat_parameters(), before);
}

TEST(Polyak, HalfwayArithmetic) {
  Mlp target({1, 1});
  Mlp source({1, 1});
  source.layers()[0].weight(0, 0) = 2.0;
  source.layers()[0].bias(0) = 2.0;
  polyak_update(target, source, 0.5);
  EXPECT_EQ(target.layers()[0].weight(0, 0), 1.0);
  EXPECT_EQ(target.layers()[0].bias(0), 1.0);
}

TEST(Polyak, ExactConvexCombination) {
  Rng rng(22);
  Mlp target({4, 9, 9, 2}, rng), source({4, 9, 9, 2}, rng);
  const double tau = 0.005;
  const auto t0 = target.flat_parameters();
  const auto s0 = source.flat_parameters();
  polyak_update(target, source, tau);
  const auto t1 = target.flat_parameters();
  for (std::size_t i = 0; i < t0.size(); ++i) {
    volatile double a = (1.0 - tau) * t0[i];
    volatile double b = tau * s0[i];
    EXPECT_EQ(t1[i], a + b) << i;
  }
}

TEST(Polyak, RejectsShapeMismatch) {
  Mlp a({2, 3, 1}), b({2, 4, 1});
  EXPECT_THROW(polyak_update(a, b, 0.5), ParameterError);
}

TEST(Adam, ZeroLearningRateLeavesParameters) {
  Rng rng(30);
  Mlp net({3, 5, 1}, rng);
  Adam adam(net, {.learning_rate = 0.0});
  const auto before = net.flat_parameters();
  Matrix x = Matrix::Ones(3, 2);
  for (int i = 0; i < 5; ++i) {
    Mlp::Cache cache;
    const Matrix y = net.forward(x, cache);
    auto g = net.zero_gradients();
    net.backward(cache, y, &g);
    adam.step(net, g);
  }
  EXPECT_EQ(net.flat_parameters(), before);
  EXPECT_EQ(adam.steps(), 5);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // bias-corrected first step is lr * g / (|g| + eps) ~ lr * sign(g)
  Mlp net({1, 1});
  net.layers()[0].weight(0, 0) = 1.0;
  Adam adam(net, {.learning_rate = 0.1});
  auto g = net.zero_gradients();
  g.layers[0].weight(0, 0) = 4.0;
  g.layers[0].bias(0) = -0.5;
  adam.step(net, g);
  EXPECT_NEAR(net.layers()[0].weight(0, 0), 0.9, 1e-8);
  EXPECT_NEAR(net.layers()[0].bias(0), 0.1, 1e-7);
}

TEST(Adam, MinimisesQuadratic) {
  ScalarAdam adam({.learning_rate = 0.05});
  double x = 3.0;
  for (int i = 0; i < 2000; ++i) adam.step(x, 2.0 * (x - 1.0));
  EXPECT_NEAR(x, 1.0, 1e-2);
}
