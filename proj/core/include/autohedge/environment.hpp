#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace autohedge {

using Observation = std::vector<double>;

struct StepInfo {
  // Magnitude of the quantity the environment keeps in check (|net position|
  // for single-asset modes, |portfolio value| / S0 for the portfolio).
  double risk = 0.0;
  bool action_clipped = false;
  bool limit_breached = false;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Gym-style interface consumed by the trainer and the evaluation runners.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t observation_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual std::vector<double> action_low() const = 0;
  virtual std::vector<double> action_high() const = 0;

  virtual Observation reset(std::uint64_t seed) = 0;
  virtual StepResult step(std::span<const double> action) = 0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

}  // namespace autohedge
