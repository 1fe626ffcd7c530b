#include "autohedge/adam.hpp"

#include <cmath>

#include "autohedge/error.hpp"

namespace autohedge {

Adam::Adam(const Mlp& net, AdamOptions options)
    : options_(options), m_(net.zero_gradients()), v_(net.zero_gradients()) {}

void Adam::step(Mlp& net, const MlpGradients& grads) {
  auto& layers = net.layers();
  if (grads.layers.size() != layers.size() || m_.layers.size() != layers.size()) {
    throw ParameterError("Adam::step: gradient/network shape mismatch");
  }
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = options_.learning_rate;
  const double eps = options_.epsilon;
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weight, m_.layers[i].weight, v_.layers[i].weight, grads.layers[i].weight);
    update(layers[i].bias, m_.layers[i].bias, v_.layers[i].bias, grads.layers[i].bias);
  }
}

void ScalarAdam::step(double& value, double grad) {
  ++t_;
  m_ = options_.beta1 * m_ + (1.0 - options_.beta1) * grad;
  v_ = options_.beta2 * v_ + (1.0 - options_.beta2) * grad * grad;
  const double m_hat = m_ / (1.0 - std::pow(options_.beta1, static_cast<double>(t_)));
  const double v_hat = v_ / (1.0 - std::pow(options_.beta2, static_cast<double>(t_)));
  value -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
}

}  // namespace autohedge
