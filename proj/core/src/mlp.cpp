#include "autohedge/mlp.hpp"

#include <cmath>
#include <string>

#include "autohedge/error.hpp"

namespace autohedge {

namespace {

void check_dims(const std::vector<int>& dims) {
  if (dims.size() < 2) throw ParameterError("Mlp: need at least input and output dims");
  for (int d : dims) {
    if (d < 1) throw ParameterError("Mlp: layer dims must be >= 1");
  }
}

}  // namespace

void MlpGradients::set_zero() {
  for (auto& l : layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
}

void MlpGradients::scale(double factor) {
  for (auto& l : layers) {
    l.weight *= factor;
    l.bias *= factor;
  }
}

bool MlpGradients::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

Mlp::Mlp(std::vector<int> dims, Rng& rng) : dims_(std::move(dims)) {
  check_dims(dims_);
  layers_.resize(dims_.size() - 1);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const int in = dims_[i], out = dims_[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    auto& l = layers_[i];
    l.weight.resize(out, in);
    l.bias.resize(out);
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) l.weight(r, c) = rng.uniform(-bound, bound);
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = rng.uniform(-bound, bound);
  }
}

Mlp::Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
  check_dims(dims_);
  layers_.resize(dims_.size() - 1);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].weight = Matrix::Zero(dims_[i + 1], dims_[i]);
    layers_[i].bias = Vector::Zero(dims_[i + 1]);
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Matrix Mlp::forward(const Matrix& x) const {
  if (x.rows() != input_dim()) throw DataError("Mlp::forward: input dimension mismatch");
  Matrix a = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix z = layers_[i].weight * a;
    z.colwise() += layers_[i].bias;
    a = i + 1 < layers_.size() ? Matrix(z.cwiseMax(0.0)) : std::move(z);
  }
  return a;
}

Matrix Mlp::forward(const Matrix& x, Cache& cache) const {
  if (x.rows() != input_dim()) throw DataError("Mlp::forward: input dimension mismatch");
  cache.inputs.resize(layers_.size());
  cache.pre.resize(layers_.size() - 1);
  Matrix a = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    cache.inputs[i] = a;
    Matrix z = layers_[i].weight * a;
    z.colwise() += layers_[i].bias;
    if (i + 1 < layers_.size()) {
      a = z.cwiseMax(0.0);
      cache.pre[i] = std::move(z);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  const Matrix in = Eigen::Map<const Matrix>(x.data(), static_cast<Eigen::Index>(x.size()), 1);
  const Matrix out = forward(in);
  return {out.data(), out.data() + out.size()};
}

Matrix Mlp::backward(const Cache& cache, const Matrix& grad_output, MlpGradients* grads) const {
  if (cache.inputs.size() != layers_.size()) throw DataError("Mlp::backward: cache mismatch");
  Matrix delta = grad_output;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (k + 1 < layers_.size()) {
      delta = delta.cwiseProduct((cache.pre[k].array() > 0.0).cast<double>().matrix());
    }
    if (grads != nullptr) {
      grads->layers[k].weight.noalias() += delta * cache.inputs[k].transpose();
      grads->layers[k].bias += delta.rowwise().sum();
    }
    delta = layers_[k].weight.transpose() * delta;
  }
  return delta;
}

MlpGradients Mlp::zero_gradients() const {
  MlpGradients g;
  g.layers.resize(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    g.layers[i].weight = Matrix::Zero(layers_[i].weight.rows(), layers_[i].weight.cols());
    g.layers[i].bias = Vector::Zero(layers_[i].bias.size());
  }
  return g;
}

std::vector<double> Mlp::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

void Mlp::set_flat_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw DataError("Mlp::set_flat_parameters: expected " + std::to_string(parameter_count()) +
                    " values");
  }
  std::size_t pos = 0;
  for (auto& l : layers_) {
    std::copy_n(values.data() + pos, l.weight.size(), l.weight.data());
    pos += static_cast<std::size_t>(l.weight.size());
    std::copy_n(values.data() + pos, l.bias.size(), l.bias.data());
    pos += static_cast<std::size_t>(l.bias.size());
  }
}

bool Mlp::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

void polyak_update(Mlp& target, const Mlp& source, double tau) {
  if (target.dims() != source.dims()) throw ParameterError("polyak_update: shape mismatch");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ParameterError("polyak_update: tau must lie in [0, 1]");
  auto& t = target.layers();
  const auto& s = source.layers();
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i].weight = (1.0 - tau) * t[i].weight + tau * s[i].weight;
    t[i].bias = (1.0 - tau) * t[i].bias + tau * s[i].bias;
  }
}

}  // namespace autohedge
