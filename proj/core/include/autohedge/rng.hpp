#pragma once

#include <cstdint>
#include <random>

namespace autohedge {

// Mixes a base seed with a stream id so that independent consumers
// (market noise, flow noise, skew draws, replay sampling) never share state.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Thin seeded wrapper over mt19937_64. Distribution objects are created per
// call so a draw never depends on cached state from an earlier distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  // Poisson draw; a mean of exactly zero returns zero without consuming state.
  std::int64_t poisson(double mean);
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace autohedge
