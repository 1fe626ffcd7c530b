#include <benchmark/benchmark.h>

#include "autohedge/hedge_env.hpp"
#include "autohedge/market.hpp"
#include "autohedge/mlp.hpp"
#include "autohedge/sac.hpp"

using namespace autohedge;

static void BM_GenerateMarket(benchmark::State& state) {
  MarketConfig cfg;
  cfg.n_steps = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(generate_market(cfg, 0.0, 1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateMarket)->Arg(128)->Arg(4096);

static void BM_EnvEpisode(benchmark::State& state) {
  EnvConfig cfg;
  cfg.mode = EnvMode::kSkew;
  HedgeEnv env(cfg);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    env.reset(seed++);
    bool done = false;
    while (!done) {
      const auto a = heuristic_action(env.state(), cfg);
      done = env.step(a).done;
    }
  }
}
BENCHMARK(BM_EnvEpisode);

static void BM_MlpForwardBackward(benchmark::State& state) {
  Rng rng(7);
  const int batch = static_cast<int>(state.range(0));
  Mlp net({3, 256, 256, 1}, rng);
  Matrix x = Matrix::Random(3, batch);
  Matrix g = Matrix::Ones(1, batch);
  MlpGradients grads = net.zero_gradients();
  for (auto _ : state) {
    Mlp::Cache cache;
    benchmark::DoNotOptimize(net.forward(x, cache));
    benchmark::DoNotOptimize(net.backward(cache, g, &grads));
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(1)->Arg(256);

static void BM_SacUpdate(benchmark::State& state) {
  SacHyper hyper;
  hyper.batch_size = 256;
  auto agent = make_agent(1, 2, {-10.0, -1.0}, {10.0, 1.0}, hyper, 3);
  auto opt = make_optimizers(agent);
  ReplayBuffer replay(4096, 1, 2);
  Rng rng(11);
  for (int i = 0; i < 4096; ++i) {
    const double o = rng.uniform(-1, 1), n = rng.uniform(-1, 1);
    const double a[2] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    replay.add({&o, 1}, a, rng.normal(), {&n, 1}, false);
  }
  const Critic critic = twin_min_critic(agent);
  for (auto _ : state) {
    const Batch batch = replay.sample(256, rng);
    const Vector y = q_target(batch, agent, rng);
    update_critics(agent, opt, batch, y);
    const auto ps = policy_update(agent, opt, batch, critic, rng);
    temperature_update(agent, opt, ps.mean_log_prob);
    polyak_update(agent.q1_target, agent.q1, hyper.tau);
    polyak_update(agent.q2_target, agent.q2, hyper.tau);
  }
}
BENCHMARK(BM_SacUpdate);

BENCHMARK_MAIN();
