#include <benchmark/benchmark.h>

#include "sorq/exact.hpp"
#include "sorq/learn.hpp"
#include "sorq/mdp.hpp"

namespace {

sorq::Mdp benchmark_mdp(int states, int actions) {
  sorq::GeneratorConfig cfg;
  cfg.num_states = states;
  cfg.num_actions = actions;
  cfg.seed = 1;
  return sorq::generate_random_mdp(cfg);
}

void BM_QValueIteration(benchmark::State& state) {
  const sorq::Mdp mdp = benchmark_mdp(static_cast<int>(state.range(0)), 5);
  const double w = state.range(1) ? sorq::w_star(mdp) : 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sorq::q_value_iteration(mdp, w, 1e-8, 1000000));
  }
}
BENCHMARK(BM_QValueIteration)
    ->Args({10, 0})
    ->Args({10, 1})
    ->Args({50, 0})
    ->Args({50, 1});

void BM_LearnerSteps(benchmark::State& state) {
  const sorq::Mdp mdp = benchmark_mdp(10, 5);
  const sorq::QSolveResult oracle = sorq::q_value_iteration(mdp, 1.0, 1e-8, 1000000);
  sorq::ValueFunction vstar(mdp.num_states);
  for (int i = 0; i < mdp.num_states; ++i) vstar[i] = oracle.q.row_max(i);

  sorq::LearnerConfig cfg;
  cfg.algorithm = state.range(0) ? sorq::Algorithm::sor_q : sorq::Algorithm::standard_q;
  cfg.w = state.range(0) ? sorq::w_star(mdp) : 1.0;
  cfg.total_steps = 100000;
  cfg.record_every = 100000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sorq::run_learner(mdp, cfg, vstar));
  }
  state.SetItemsProcessed(state.iterations() * cfg.total_steps);
}
BENCHMARK(BM_LearnerSteps)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
