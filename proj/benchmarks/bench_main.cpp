#include <benchmark/benchmark.h>

#include <numeric>

#include "cascadia/evaluator.hpp"
#include "cascadia/harness.hpp"
#include "cascadia/policies.hpp"
#include "cascadia/solvers.hpp"
#include "cascadia/utility.hpp"

using namespace cascadia;

namespace {

Instance bench_instance(std::size_t n, std::size_t budget) {
  ExperimentConfig cfg = suite_defaults(SuiteKind::ratio_table2);
  cfg.n_questions = n;
  cfg.budget = budget;
  return generate_instance(cfg, Cell{0.5, 0.5, 0.3, 0.5}, 2024);
}

void BM_EvalExact(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const Instance inst = bench_instance(24, len);
  Sequence seq(len);
  std::iota(seq.begin(), seq.end(), QuestionId{0});
  for (auto _ : state) benchmark::DoNotOptimize(eval_exact(seq, inst).value);
}
BENCHMARK(BM_EvalExact)->DenseRange(4, 16, 4);

void BM_GreedyKnapsack(benchmark::State& state) {
  const Instance inst = bench_instance(static_cast<std::size_t>(state.range(0)), 6);
  const Utility g(inst);
  std::vector<Item> ground(inst.size());
  std::iota(ground.begin(), ground.end(), Item{0});
  ConstraintSet cons;
  for (const Question& q : inst.questions) cons.item_weights.push_back(neg_log_weight(agg_continuation(q)));
  cons.log_budget = log_budget_for(0.3);
  SetObjective obj = [&](std::span<const Item> s) {
    return g.value(std::vector<QuestionId>(s.begin(), s.end()));
  };
  const int depth = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(greedy_knapsack(obj, ground, cons, depth).objective);
}
BENCHMARK(BM_GreedyKnapsack)->ArgsProduct({{12, 24}, {0, 1, 2}});

void BM_Alg2(benchmark::State& state) {
  const Instance inst = bench_instance(static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(alg2_general(inst, 0.5).sequence.size());
}
BENCHMARK(BM_Alg2)->Arg(12)->Arg(24);

void BM_ExactOptimal(benchmark::State& state) {
  const Instance inst = bench_instance(12, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(exact_optimal(inst).sequence.size());
}
BENCHMARK(BM_ExactOptimal)->DenseRange(2, 6, 2);

}  // namespace

BENCHMARK_MAIN();
