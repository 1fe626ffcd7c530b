#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "autohedge/hedge_env.hpp"
#include "autohedge/mlp.hpp"
#include "autohedge/portfolio_env.hpp"

namespace autohedge::oracle {

// Penalties by direct evaluation with exp(x) - 1.
inline double position_penalty(double position, double gamma, double s0, double limit) {
  return gamma * s0 * (std::exp(std::abs(position) / limit) - 1.0) * limit;
}

inline double portfolio_penalty(double value, double over, const PortfolioConfig& c) {
  const double s0 = c.w * c.market1.s0 + (1 - c.w) * c.market2.s0;
  return c.gamma_penalty * s0 *
         (std::exp((std::abs(value) + c.phi * std::abs(over)) / (s0 * c.max_pos_limit)) - 1.0) *
         c.max_pos_limit;
}

// Density of tanh(Z) for Z ~ N(m, s), on (-1, 1).
inline double squashed_pdf(double a, double m, double s) {
  const double z = (std::atanh(a) - m) / s;
  return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi)) / (1.0 - a * a);
}

// Simpson's rule over [lo, hi]; both ends must lie strictly inside (-1, 1).
inline double squashed_probability(double lo, double hi, double m, double s) {
  const int n = 64;
  const double h = (hi - lo) / n;
  double acc = squashed_pdf(lo, m, s) + squashed_pdf(hi, m, s);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * squashed_pdf(lo + i * h, m, s);
  return acc * h / 3.0;
}

struct GradientCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Compares reverse-mode gradients of L = sum(w * y^2) / 2 against central
// differences, for every parameter and every input entry.
inline GradientCheck check_gradients(Mlp net, const Matrix& x, const Matrix& w, double h = 1e-6) {
  auto loss = [&](const Mlp& n, const Matrix& in) {
    const Matrix y = n.forward(in);
    return 0.5 * (w.array() * y.array().square()).sum();
  };
  Mlp::Cache cache;
  const Matrix y = net.forward(x, cache);
  auto grads = net.zero_gradients();
  const Matrix dx = net.backward(cache, (w.array() * y.array()).matrix(), &grads);

  std::vector<double> analytic;
  for (const auto& layer : grads.layers) {
    analytic.insert(analytic.end(), layer.weight.data(), layer.weight.data() + layer.weight.size());
    analytic.insert(analytic.end(), layer.bias.data(), layer.bias.data() + layer.bias.size());
  }

  GradientCheck out;
  auto record = [&](double numeric, double exact) {
    const double scale = std::max({std::abs(numeric), std::abs(exact), 1e-3});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(numeric - exact) / scale);
    ++out.checked;
  };

  auto params = net.flat_parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + h;
    net.set_flat_parameters(params);
    const double up = loss(net, x);
    params[k] = saved - h;
    net.set_flat_parameters(params);
    const double down = loss(net, x);
    params[k] = saved;
    net.set_flat_parameters(params);
    record((up - down) / (2.0 * h), analytic[k]);
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Matrix xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    record((loss(net, xp) - loss(net, xm)) / (2.0 * h), dx.data()[i]);
  }
  return out;
}

}  // namespace autohedge::oracle
