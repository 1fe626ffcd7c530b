#pragma once

#include <cstdint>

#include "autohedge/mlp.hpp"

namespace autohedge {

struct AdamOptions {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive moment estimation with bias correction over every parameter of
// one network. Gradients are for a loss to be minimised.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, AdamOptions options);

  void step(Mlp& net, const MlpGradients& grads);
  std::int64_t steps() const { return t_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  MlpGradients m_;
  MlpGradients v_;
  std::int64_t t_ = 0;
};

class ScalarAdam {
 public:
  ScalarAdam() = default;
  explicit ScalarAdam(AdamOptions options) : options_(options) {}

  void step(double& value, double grad);

 private:
  AdamOptions options_;
  double m_ = 0.0;
  double v_ = 0.0;
  std::int64_t t_ = 0;
};

}  // namespace autohedge
