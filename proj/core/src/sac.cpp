#include "autohedge/sac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "autohedge/error.hpp"

namespace autohedge {

namespace {

enum Stream : std::uint64_t {
  kInit = 1,
  kActions = 2,
  kReplay = 3,
  kUpdates = 4,
  kEpisodes = 5000,
};

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

std::vector<int> layer_dims(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

void SacHyper::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("sac: ") + what);
  };
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  require(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
  require(alpha >= 0.0, "alpha must be >= 0");
  require(!auto_alpha || alpha > 0.0, "auto_alpha needs a positive initial alpha");
  require(lr_policy >= 0.0 && lr_q >= 0.0 && lr_alpha >= 0.0, "learning rates must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(replay_capacity >= 1, "replay_capacity must be >= 1");
  require(batch_size <= replay_capacity, "batch_size must not exceed replay_capacity");
  require(warmup_steps >= 0, "warmup_steps must be >= 0");
  require(updates_per_step >= 0, "updates_per_step must be >= 0");
  require(epochs >= 0, "epochs must be >= 0");
  require(steps_per_epoch >= 1, "steps_per_epoch must be >= 1");
  require(!hidden.empty(), "hidden must list at least one layer");
  for (int h : hidden) require(h >= 1, "hidden layer widths must be >= 1");
  require(std::isfinite(reward_scale) && reward_scale > 0.0, "reward_scale must be > 0");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim)
    : capacity_(capacity),
      obs_(obs_dim, static_cast<Eigen::Index>(capacity)),
      action_(act_dim, static_cast<Eigen::Index>(capacity)),
      reward_(static_cast<Eigen::Index>(capacity)),
      next_obs_(obs_dim, static_cast<Eigen::Index>(capacity)),
      done_(static_cast<Eigen::Index>(capacity)) {
  if (capacity == 0) throw ParameterError("ReplayBuffer: capacity must be >= 1");
}

void ReplayBuffer::add(std::span<const double> obs, std::span<const double> action, double reward,
                       std::span<const double> next_obs, bool done) {
  if (obs.size() != static_cast<std::size_t>(obs_.rows()) ||
      next_obs.size() != static_cast<std::size_t>(obs_.rows()) ||
      action.size() != static_cast<std::size_t>(action_.rows())) {
    throw DataError("ReplayBuffer::add: dimension mismatch");
  }
  const auto c = static_cast<Eigen::Index>(cursor_);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    obs_(static_cast<Eigen::Index>(i), c) = obs[i];
    next_obs_(static_cast<Eigen::Index>(i), c) = next_obs[i];
  }
  for (std::size_t i = 0; i < action.size(); ++i) action_(static_cast<Eigen::Index>(i), c) = action[i];
  reward_(c) = reward;
  done_(c) = done ? 1.0 : 0.0;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (size_ == 0) throw StateError("ReplayBuffer::sample: buffer is empty");
  Batch b;
  const auto cols = static_cast<Eigen::Index>(n);
  b.obs.resize(obs_.rows(), cols);
  b.action.resize(action_.rows(), cols);
  b.reward.resize(cols);
  b.next_obs.resize(obs_.rows(), cols);
  b.done.resize(cols);
  for (Eigen::Index k = 0; k < cols; ++k) {
    const auto i = static_cast<Eigen::Index>(rng.index(size_));
    b.obs.col(k) = obs_.col(i);
    b.action.col(k) = action_.col(i);
    b.reward(k) = reward_(i);
    b.next_obs.col(k) = next_obs_.col(i);
    b.done(k) = done_(i);
  }
  return b;
}

double SacAgent::alpha() const { return std::exp(log_alpha); }

std::vector<double> SacAgent::scale_action(std::span<const double> normalised) const {
  std::vector<double> out(normalised.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double half = 0.5 * (action_high[i] - action_low[i]);
    const double centre = 0.5 * (action_high[i] + action_low[i]);
    out[i] = std::clamp(centre + half * normalised[i], action_low[i], action_high[i]);
  }
  return out;
}

double SacAgent::log_scale() const {
  double s = 0.0;
  for (std::size_t i = 0; i < action_low.size(); ++i) {
    s += std::log(0.5 * (action_high[i] - action_low[i]));
  }
  return s;
}

SacAgent make_agent(int obs_dim, int act_dim, std::vector<double> action_low,
                    std::vector<double> action_high, const SacHyper& hyper, std::uint64_t seed) {
  hyper.validate();
  if (obs_dim < 1 || act_dim < 1) throw ParameterError("make_agent: dims must be >= 1");
  if (action_low.size() != static_cast<std::size_t>(act_dim) ||
      action_high.size() != static_cast<std::size_t>(act_dim)) {
    throw ParameterError("make_agent: action bounds must match act_dim");
  }
  for (int i = 0; i < act_dim; ++i) {
    if (!(action_low[i] < action_high[i])) throw ParameterError("make_agent: empty action range");
  }
  SacAgent a;
  a.obs_dim = obs_dim;
  a.act_dim = act_dim;
  a.action_low = std::move(action_low);
  a.action_high = std::move(action_high);
  a.hyper = hyper;
  a.seed = seed;
  Rng rng(derive_seed(seed, kInit));
  a.policy = Mlp(layer_dims(obs_dim, hyper.hidden, 2 * act_dim), rng);
  a.q1 = Mlp(layer_dims(obs_dim + act_dim, hyper.hidden, 1), rng);
  a.q2 = Mlp(layer_dims(obs_dim + act_dim, hyper.hidden, 1), rng);
  a.q1_target = a.q1;
  a.q2_target = a.q2;
  a.log_alpha = std::log(hyper.alpha);
  return a;
}

SacOptimizers make_optimizers(const SacAgent& agent) {
  const auto& h = agent.hyper;
  SacOptimizers o;
  o.policy = Adam(agent.policy, {.learning_rate = h.lr_policy});
  o.q1 = Adam(agent.q1, {.learning_rate = h.lr_q});
  o.q2 = Adam(agent.q2, {.learning_rate = h.lr_q});
  o.alpha = ScalarAdam({.learning_rate = h.lr_alpha});
  return o;
}

double log_one_minus_tanh_sq(double u) {
  return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
}

SquashedSample sample_squashed(const Mlp& policy, const Matrix& obs, Rng& rng, bool deterministic) {
  SquashedSample s;
  const Matrix out = policy.forward(obs, s.cache);
  const Eigen::Index dim = out.rows() / 2;
  const Eigen::Index n = out.cols();
  s.mean = out.topRows(dim);
  const Matrix raw_log_std = out.bottomRows(dim);
  s.log_std = raw_log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  s.log_std_clamped = (raw_log_std.array() < kLogStdMin) || (raw_log_std.array() > kLogStdMax);
  s.std = s.log_std.array().exp().matrix();
  s.noise = Matrix::Zero(dim, n);
  if (!deterministic) {
    for (Eigen::Index b = 0; b < n; ++b) {
      for (Eigen::Index i = 0; i < dim; ++i) s.noise(i, b) = rng.normal();
    }
  }
  s.pre_tanh = s.mean + s.std.cwiseProduct(s.noise);
  s.action = s.pre_tanh.array().tanh().matrix();
  s.log_prob.resize(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double e = s.noise(i, b);
      lp += -0.5 * e * e - s.log_std(i, b) - kHalfLog2Pi - log_one_minus_tanh_sq(s.pre_tanh(i, b));
    }
    s.log_prob(b) = lp;
  }
  return s;
}

ActionSample sample_action(const SacAgent& agent, std::span<const double> obs, bool deterministic,
                           Rng& rng) {
  if (obs.size() != static_cast<std::size_t>(agent.obs_dim)) {
    throw DataError("sample_action: observation dimension mismatch");
  }
  const Matrix x = Eigen::Map<const Matrix>(obs.data(), agent.obs_dim, 1);
  const auto s = sample_squashed(agent.policy, x, rng, deterministic);
  ActionSample out;
  out.action = agent.scale_action({s.action.data(), static_cast<std::size_t>(s.action.size())});
  out.log_prob = s.log_prob(0) - agent.log_scale();
  return out;
}

std::vector<double> deterministic_action(const SacAgent& agent, std::span<const double> obs) {
  Rng unused(0);
  return sample_action(agent, obs, true, unused).action;
}

Vector q_target(const Batch& batch, const SacAgent& agent, Rng& rng) {
  const auto next = sample_squashed(agent.policy, batch.next_obs, rng);
  const Matrix input = stack_rows(batch.next_obs, next.action);
  const Matrix q1 = agent.q1_target.forward(input);
  const Matrix q2 = agent.q2_target.forward(input);
  const double alpha = agent.alpha();
  const double gamma = agent.hyper.gamma;
  Vector y(batch.size());
  for (Eigen::Index b = 0; b < batch.size(); ++b) {
    const double soft = std::min(q1(0, b), q2(0, b)) - alpha * next.log_prob(b);
    const double bootstrap = batch.done(b) != 0.0 ? 0.0 : gamma * soft;
    y(b) = batch.reward(b) * agent.hyper.reward_scale + bootstrap;
  }
  return y;
}

QLosses q_loss(const Batch& batch, const Vector& target, const SacAgent& agent) {
  const Matrix input = stack_rows(batch.obs, batch.action);
  const Vector r1 = agent.q1.forward(input).row(0).transpose() - target;
  const Vector r2 = agent.q2.forward(input).row(0).transpose() - target;
  const double n = static_cast<double>(batch.size());
  return {r1.squaredNorm() / n, r2.squaredNorm() / n};
}

QLosses update_critics(SacAgent& agent, SacOptimizers& opt, const Batch& batch, const Vector& target) {
  const Matrix input = stack_rows(batch.obs, batch.action);
  const double n = static_cast<double>(batch.size());
  QLosses losses;
  auto fit = [&](Mlp& q, Adam& adam) {
    Mlp::Cache cache;
    const Vector residual = q.forward(input, cache).row(0).transpose() - target;
    const double loss = residual.squaredNorm() / n;
    auto grads = q.zero_gradients();
    const Matrix grad_out = (2.0 / n) * residual.transpose();
    q.backward(cache, grad_out, &grads);
    if (!std::isfinite(loss) || !grads.all_finite()) {
      throw TrainingError("critic update produced a non-finite loss or gradient");
    }
    adam.step(q, grads);
    return loss;
  };
  losses.q1 = fit(agent.q1, opt.q1);
  losses.q2 = fit(agent.q2, opt.q2);
  return losses;
}

Critic twin_min_critic(const SacAgent& agent) {
  return [&agent](const Matrix& obs, const Matrix& action) {
    const Matrix input = stack_rows(obs, action);
    Mlp::Cache c1, c2;
    const Matrix v1 = agent.q1.forward(input, c1);
    const Matrix v2 = agent.q2.forward(input, c2);
    const Eigen::Index n = obs.cols();
    Matrix pick1 = Matrix::Zero(1, n);
    Matrix pick2 = Matrix::Zero(1, n);
    CriticEval out;
    out.value.resize(n);
    for (Eigen::Index b = 0; b < n; ++b) {
      if (v1(0, b) <= v2(0, b)) {
        out.value(b) = v1(0, b);
        pick1(0, b) = 1.0;
      } else {
        out.value(b) = v2(0, b);
        pick2(0, b) = 1.0;
      }
    }
    const Matrix g = agent.q1.backward(c1, pick1, nullptr) + agent.q2.backward(c2, pick2, nullptr);
    out.action_grad = g.bottomRows(action.rows());
    return out;
  };
}

PolicyStep policy_update(SacAgent& agent, SacOptimizers& opt, const Batch& batch,
                         const Critic& critic, Rng& rng) {
  auto s = sample_squashed(agent.policy, batch.obs, rng);
  const CriticEval q = critic(batch.obs, s.action);
  const double n = static_cast<double>(batch.size());
  const double alpha = agent.alpha();

  PolicyStep step;
  step.mean_log_prob = s.log_prob.mean();
  step.loss = alpha * step.mean_log_prob - q.value.mean();

  // d loss / d pre_tanh: entropy term (d log pi / du = 2 tanh u) plus the
  // critic term through the squashing.
  const Eigen::ArrayXXd a = s.action.array();
  const Eigen::ArrayXXd d_u = (alpha * 2.0 * a - q.action_grad.array() * (1.0 - a.square())) / n;
  Eigen::ArrayXXd d_log_std = d_u * s.std.array() * s.noise.array() - alpha / n;
  d_log_std = s.log_std_clamped.select(Eigen::ArrayXXd::Zero(d_u.rows(), d_u.cols()), d_log_std);

  Matrix grad_out(2 * d_u.rows(), d_u.cols());
  grad_out << d_u.matrix(), d_log_std.matrix();
  auto grads = agent.policy.zero_gradients();
  agent.policy.backward(s.cache, grad_out, &grads);
  if (!std::isfinite(step.loss) || !grads.all_finite()) {
    throw TrainingError("policy update produced a non-finite loss or gradient");
  }
  opt.policy.step(agent.policy, grads);
  return step;
}

void temperature_update(SacAgent& agent, SacOptimizers& opt, double mean_log_prob) {
  if (!agent.hyper.auto_alpha) return;
  const double target = agent.hyper.target_entropy.value_or(-static_cast<double>(agent.act_dim));
  // loss = -log_alpha * (log pi + target_entropy)
  opt.alpha.step(agent.log_alpha, -(mean_log_prob + target));
}

std::uint64_t training_episode_seed(std::uint64_t seed, std::uint64_t episode) {
  return derive_seed(seed, kEpisodes + episode);
}

TrainResult train(const EnvFactory& make_env, const SacHyper& hyper, std::uint64_t seed,
                  const EpochCallback& on_epoch) {
  hyper.validate();
  auto env = make_env();
  const int obs_dim = static_cast<int>(env->observation_dim());
  const int act_dim = static_cast<int>(env->action_dim());

  TrainResult result;
  result.agent = make_agent(obs_dim, act_dim, env->action_low(), env->action_high(), hyper, seed);
  SacAgent& agent = result.agent;
  SacOptimizers opt = make_optimizers(agent);
  ReplayBuffer replay(static_cast<std::size_t>(hyper.replay_capacity), obs_dim, act_dim);

  Rng action_rng(derive_seed(seed, kActions));
  Rng replay_rng(derive_seed(seed, kReplay));
  Rng update_rng(derive_seed(seed, kUpdates));
  const Critic critic = twin_min_critic(agent);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::uint64_t episode = 0;
  Observation obs = env->reset(training_episode_seed(seed, episode++));
  double episode_return = 0.0;
  std::vector<double> normalised(static_cast<std::size_t>(act_dim));

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    double return_sum = 0.0, risk_sum = 0.0;
    double q1_sum = 0.0, q2_sum = 0.0, pi_sum = 0.0;
    int episodes = 0;
    std::int64_t updates = 0;

    auto finish_epoch = [&] {
      EpochMetrics m;
      m.epoch = epoch;
      m.episodes = episodes;
      m.mean_reward = episodes > 0 ? return_sum / episodes : nan;
      m.q1_loss = updates > 0 ? q1_sum / static_cast<double>(updates) : nan;
      m.q2_loss = updates > 0 ? q2_sum / static_cast<double>(updates) : nan;
      m.policy_loss = updates > 0 ? pi_sum / static_cast<double>(updates) : nan;
      m.alpha = agent.alpha();
      m.mean_abs_position = risk_sum / hyper.steps_per_epoch;
      result.metrics.push_back(m);
      if (on_epoch) on_epoch(m);
    };

    for (int s = 0; s < hyper.steps_per_epoch; ++s) {
      if (result.total_steps < hyper.warmup_steps) {
        for (auto& a : normalised) a = action_rng.uniform(-1.0, 1.0);
      } else {
        const Matrix x = Eigen::Map<const Matrix>(obs.data(), obs_dim, 1);
        const auto sample = sample_squashed(agent.policy, x, action_rng);
        std::copy_n(sample.action.data(), act_dim, normalised.begin());
      }
      const auto step = env->step(agent.scale_action(normalised));
      episode_return += step.reward;
      risk_sum += step.info.risk;
      // Horizon ends are not terminal: the observation carries no clock.
      replay.add(obs, normalised, step.reward, step.observation, step.info.limit_breached);
      obs = step.observation;
      ++result.total_steps;
      if (step.done) {
        return_sum += episode_return;
        ++episodes;
        episode_return = 0.0;
        obs = env->reset(training_episode_seed(seed, episode++));
      }

      if (result.total_steps < hyper.warmup_steps ||
          replay.size() < static_cast<std::size_t>(hyper.batch_size)) {
        continue;
      }
      try {
        for (int u = 0; u < hyper.updates_per_step; ++u) {
          const Batch batch = replay.sample(static_cast<std::size_t>(hyper.batch_size), replay_rng);
          const Vector y = q_target(batch, agent, update_rng);
          const QLosses ql = update_critics(agent, opt, batch, y);
          const PolicyStep ps = policy_update(agent, opt, batch, critic, update_rng);
          temperature_update(agent, opt, ps.mean_log_prob);
          polyak_update(agent.q1_target, agent.q1, hyper.tau);
          polyak_update(agent.q2_target, agent.q2, hyper.tau);
          q1_sum += ql.q1;
          q2_sum += ql.q2;
          pi_sum += ps.loss;
          ++updates;
        }
      } catch (const TrainingError& e) {
        std::ostringstream msg;
        msg << "diverged in epoch " << epoch << " after " << result.total_steps
            << " environment steps: " << e.what();
        result.diverged = true;
        result.message = msg.str();
        finish_epoch();
        result.replay_size = replay.size();
        return result;
      }
    }
    finish_epoch();
  }
  result.replay_size = replay.size();
  return result;
}

}  // namespace autohedge
