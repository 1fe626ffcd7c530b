#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autohedge/adam.hpp"
#include "autohedge/environment.hpp"
#include "autohedge/mlp.hpp"
#include "autohedge/rng.hpp"

namespace autohedge {

struct SacHyper {
  double gamma = 0.99;
  double tau = 0.005;  // weight on the new (source) parameters
  double alpha = 0.2;
  bool auto_alpha = false;
  std::optional<double> target_entropy;  // defaults to -action_dim
  double lr_policy = 3e-4;
  double lr_q = 3e-4;
  double lr_alpha = 3e-4;
  int batch_size = 256;
  int replay_capacity = 100000;
  int warmup_steps = 1000;
  int updates_per_step = 1;
  int epochs = 50;
  int steps_per_epoch = 1000;
  std::vector<int> hidden{256, 256};
  // Multiplies environment rewards inside the Bellman target.
  double reward_scale = 1.0;

  void validate() const;
};

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// Transitions in normalised action space ([-1, 1] per dimension).
struct Batch {
  Matrix obs;
  Matrix action;
  Vector reward;
  Matrix next_obs;
  Vector done;

  Eigen::Index size() const { return obs.cols(); }
};

class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim);

  void add(std::span<const double> obs, std::span<const double> action, double reward,
           std::span<const double> next_obs, bool done);
  Batch sample(std::size_t n, Rng& rng) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  Matrix obs_;
  Matrix action_;
  Vector reward_;
  Matrix next_obs_;
  Vector done_;
};

struct SacAgent {
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<double> action_low;
  std::vector<double> action_high;
  SacHyper hyper;
  std::uint64_t seed = 0;

  Mlp policy;  // outputs [mean; log_std]
  Mlp q1;
  Mlp q2;
  Mlp q1_target;
  Mlp q2_target;
  double log_alpha = 0.0;

  double alpha() const;
  // Maps a normalised action in [-1, 1] onto the environment bounds.
  std::vector<double> scale_action(std::span<const double> normalised) const;
  // Sum of log half-ranges: log-density offset between the two action spaces.
  double log_scale() const;
};

SacAgent make_agent(int obs_dim, int act_dim, std::vector<double> action_low,
                    std::vector<double> action_high, const SacHyper& hyper, std::uint64_t seed);

struct SacOptimizers {
  Adam policy;
  Adam q1;
  Adam q2;
  ScalarAdam alpha;
};

SacOptimizers make_optimizers(const SacAgent& agent);

// Reparameterised squashed-Gaussian draw over a batch of observations, in the
// normalised action space.
struct SquashedSample {
  Matrix mean;
  Matrix log_std;  // after clamping
  Matrix std;
  Matrix noise;
  Matrix pre_tanh;
  Matrix action;
  Vector log_prob;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> log_std_clamped;
  Mlp::Cache cache;
};

SquashedSample sample_squashed(const Mlp& policy, const Matrix& obs, Rng& rng,
                               bool deterministic = false);

// log(1 - tanh(u)^2) in the softplus form.
double log_one_minus_tanh_sq(double u);

struct ActionSample {
  std::vector<double> action;  // in environment bounds
  double log_prob = 0.0;       // density of `action` in environment units
};

ActionSample sample_action(const SacAgent& agent, std::span<const double> obs, bool deterministic,
                           Rng& rng);
std::vector<double> deterministic_action(const SacAgent& agent, std::span<const double> obs);

// y = r * reward_scale + gamma * (1 - d) * (min_j Q_j^targ(s', a') - alpha * log pi(a'|s'))
Vector q_target(const Batch& batch, const SacAgent& agent, Rng& rng);

struct QLosses {
  double q1 = 0.0;
  double q2 = 0.0;
};

QLosses q_loss(const Batch& batch, const Vector& target, const SacAgent& agent);

// One gradient step on both critics towards the detached targets.
QLosses update_critics(SacAgent& agent, SacOptimizers& opt, const Batch& batch, const Vector& target);

// Value and d(value)/d(action) of a critic over a batch of normalised actions.
struct CriticEval {
  Eigen::RowVectorXd value;
  Matrix action_grad;
};
using Critic = std::function<CriticEval(const Matrix& obs, const Matrix& action)>;

// min(Q1, Q2) with the gradient routed through the smaller network.
Critic twin_min_critic(const SacAgent& agent);

struct PolicyStep {
  double loss = 0.0;
  double mean_log_prob = 0.0;
};

// One ascent step on mean(critic(s, a~) - alpha * log pi(a~|s)).
PolicyStep policy_update(SacAgent& agent, SacOptimizers& opt, const Batch& batch,
                         const Critic& critic, Rng& rng);

// Temperature step towards the target entropy; no-op unless auto_alpha.
void temperature_update(SacAgent& agent, SacOptimizers& opt, double mean_log_prob);

struct EpochMetrics {
  int epoch = 0;
  double mean_reward = 0.0;  // NaN when no episode finished in the epoch
  double q1_loss = 0.0;      // NaN before the first update
  double q2_loss = 0.0;
  double policy_loss = 0.0;
  double alpha = 0.0;
  double mean_abs_position = 0.0;
  int episodes = 0;
};

struct TrainResult {
  SacAgent agent;
  std::vector<EpochMetrics> metrics;
  bool diverged = false;
  std::string message;
  std::int64_t total_steps = 0;
  std::size_t replay_size = 0;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Seed used for the environment reset of the `episode`-th training episode.
std::uint64_t training_episode_seed(std::uint64_t seed, std::uint64_t episode);

TrainResult train(const EnvFactory& make_env, const SacHyper& hyper, std::uint64_t seed,
                  const EpochCallback& on_epoch = {});

}  // namespace autohedge
