#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "autohedge/rng.hpp"

namespace autohedge {

// Column-major; one sample per column.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

struct MlpGradients {
  std::vector<DenseLayer> layers;

  void set_zero();
  void scale(double factor);
  bool all_finite() const;
};

// Affine input layer, ReLU hidden layers, affine output layer:
// dims = {in, h1, ..., hk, out} gives k ReLU stages.
class Mlp {
 public:
  // Activations recorded by a training forward pass.
  struct Cache {
    std::vector<Matrix> inputs;  // input to every layer
    std::vector<Matrix> pre;     // pre-activation of every hidden layer
  };

  Mlp() = default;
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation.
  Mlp(std::vector<int> dims, Rng& rng);
  // All-zero parameters.
  explicit Mlp(std::vector<int> dims);

  const std::vector<int>& dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  std::size_t parameter_count() const;

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Cache& cache) const;
  std::vector<double> forward(std::span<const double> x) const;

  // Reverse pass for dL/d(output). Adds parameter gradients into `grads`
  // when non-null and returns dL/d(input).
  Matrix backward(const Cache& cache, const Matrix& grad_output, MlpGradients* grads) const;

  MlpGradients zero_gradients() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  // Flattened parameters, layer by layer, weight (column-major) then bias.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> values);

  bool all_finite() const;

 private:
  std::vector<int> dims_;
  std::vector<DenseLayer> layers_;
};

// target <- (1 - tau) * target + tau * source
void polyak_update(Mlp& target, const Mlp& source, double tau);

}  // namespace autohedge
