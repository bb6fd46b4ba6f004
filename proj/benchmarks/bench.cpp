#include <benchmark/benchmark.h>

#include "couponmdp/model.hpp"
#include "couponmdp/noisy.hpp"
#include "couponmdp/simulate.hpp"
#include "couponmdp/threshold.hpp"
#include "couponmdp/value_iteration.hpp"

namespace {

using namespace couponmdp;

const TransitionModel kChain{0.1, 0.7};
const CostModel kCosts{3.0, 1.0, 12.0, 0.9};

void BM_SolveThreshold(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_threshold(kChain, kCosts).tau);
    }
}
BENCHMARK(BM_SolveThreshold);

void BM_TwoStateVi(benchmark::State& state) {
    const int grid = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_two_state(kChain, kCosts, grid).residual);
    }
}
BENCHMARK(BM_TwoStateVi)->Arg(501)->Arg(2001);

void BM_BayesFilterStep(benchmark::State& state) {
    CostDistributionSet d{CostDistribution::uniform(3.0, 9.0),
                          CostDistribution::uniform(0.25, 7.75),
                          CostDistribution::uniform(6.0, 18.0)};
    const TransitionModel m{0.2, 0.8};
    BeliefPosterior q = BeliefPosterior::uniform_prior(1001);
    for (auto _ : state) {
        q = bayes_predict(bayes_update(q, Action::HP, 7.0, d), m);
        benchmark::DoNotOptimize(q.weights.data());
    }
}
BENCHMARK(BM_BayesFilterStep);

void BM_SimulateEpisodes(benchmark::State& state) {
    SimConfig cfg;
    cfg.episodes = static_cast<int>(state.range(0));
    cfg.initial_belief = 0.1;
    cfg.seed = 42;
    PolicySpec spec{PolicyKind::Threshold, 0.3, EstimatorKind::ExactBelief};
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_policy(kChain, kCosts, spec, cfg).final_mean());
    }
}
BENCHMARK(BM_SimulateEpisodes)->Arg(100)->Arg(1000);

void BM_SolveMultistate(benchmark::State& state) {
    const MultiStateModel m = MultiStateModel::checked(
        {{0.7, 0.2, 0.1}, {0.2, 0.5, 0.3}, {0.1, 0.2, 0.7}}, {1.0, 10.0, 20.0}, 7.0, 0.9);
    const int denom = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_multistate(m, denom).residual);
    }
}
BENCHMARK(BM_SolveMultistate)->Arg(20)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
