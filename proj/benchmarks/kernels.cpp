#include <benchmark/benchmark.h>

#include <random>

#include "finelogic/eval/step_evaluator.hpp"
#include "finelogic/logic/semantics.hpp"
#include "finelogic/probe/logistic.hpp"
#include "support/gold_generator.hpp"

using namespace finelogic;

namespace {

const std::vector<proof::ProofChain>& chains() {
  static const auto out = [] {
    std::vector<proof::ProofChain> c;
    for (const auto& g : testing::gold_pool(42, bench::DatasetKind::FLD, 8, 24, 24)) c.push_back(g.proof());
    return c;
  }();
  return out;
}

void BM_EvaluateChainsSerial(benchmark::State& state) {
  eval::EvaluatorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(eval::evaluate_chains(chains(), cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(chains().size()));
}

void BM_EvaluateChainsParallel(benchmark::State& state) {
  eval::EvaluatorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(eval::evaluate_chains_parallel(chains(), cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(chains().size()));
}

/// A chain of n monadic implications; entailed, so every interpretation is visited.
std::pair<std::vector<logic::Formula>, logic::Formula> implication_chain(int n) {
  std::vector<logic::Formula> premises{logic::parse_formula("P0(a)")};
  for (int i = 1; i < n; ++i) {
    premises.push_back(logic::parse_formula("∀x (P" + std::to_string(i - 1) + "(x) → P" + std::to_string(i) + "(x))"));
  }
  return {premises, logic::parse_formula("P" + std::to_string(n - 1) + "(a)")};
}

void BM_BruteforceSerial(benchmark::State& state) {
  auto [premises, conclusion] = implication_chain(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(logic::semantic_entails_bruteforce(premises, conclusion, 3));
}

void BM_BruteforceParallel(benchmark::State& state) {
  auto [premises, conclusion] = implication_chain(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(logic::semantic_entails_bruteforce_parallel(premises, conclusion, 3));
}

struct LogisticData {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd wb;
};

LogisticData logistic_data(Eigen::Index n, Eigen::Index d) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  LogisticData out{Eigen::MatrixXd(n, d), Eigen::VectorXd(n), Eigen::VectorXd(d + 1)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out.x(i, j) = g(rng);
    out.y(i) = g(rng) > 0 ? 1.0 : 0.0;
  }
  for (Eigen::Index j = 0; j <= d; ++j) out.wb(j) = 0.1 * g(rng);
  return out;
}

void BM_LogisticSerial(benchmark::State& state) {
  auto data = logistic_data(state.range(0), 64);
  for (auto _ : state) benchmark::DoNotOptimize(probe::logistic_objective_serial(data.x, data.y, data.wb, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LogisticParallel(benchmark::State& state) {
  auto data = logistic_data(state.range(0), 64);
  for (auto _ : state) benchmark::DoNotOptimize(probe::logistic_objective_parallel(data.x, data.y, data.wb, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_EvaluateChainsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateChainsParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BruteforceSerial)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BruteforceParallel)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogisticSerial)->Arg(4096)->Arg(32768)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LogisticParallel)->Arg(4096)->Arg(32768)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
