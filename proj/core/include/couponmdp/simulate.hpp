#pragma once

#include <cstdint>
#include <vector>

#include "couponmdp/coupon_dependent.hpp"
#include "couponmdp/model.hpp"
#include "couponmdp/noisy.hpp"

namespace couponmdp {

// Deterministic counter-based generator; substream(seed, k) yields
// non-overlapping streams for episode k regardless of evaluation order.
struct SplitMix64 {
    std::uint64_t state = 0;

    static SplitMix64 substream(std::uint64_t seed, std::uint64_t episode);
    std::uint64_t next();
    double uniform();  // [0, 1)
};

enum class PolicyKind { Threshold, Greedy, Lazy, PerfectInfo };
enum class EstimatorKind { ExactBelief, MapState, BayesMean, BayesMap };

struct PolicySpec {
    PolicyKind kind = PolicyKind::Threshold;
    double tau = 0.0;
    EstimatorKind estimator = EstimatorKind::ExactBelief;
};

struct SimConfig {
    int episodes = 1000;
    int horizon = 0;  // 0 = derive from beta and the largest cost
    std::uint64_t seed = 0;
    Belief initial_belief = 0.0;
    bool belief_known = true;  // false starts the estimators uninformed
    int posterior_grid = 1001;
};

struct StepRecord {
    ConsumerState state = ConsumerState::Normal;
    Belief belief_estimate = 0.0;
    Action action = Action::LP;
    double cost = 0.0;
    double discounted_cum = 0.0;
};

struct EpisodeResult {
    std::vector<StepRecord> steps;
    std::uint64_t episode = 0;
};

// Per-step mean/standard-error of the discounted cumulative cost, aggregated
// across episodes in a fixed order so reruns are bit-identical.
struct Aggregate {
    std::vector<double> mean;
    std::vector<double> se;
    int episodes = 0;
    int horizon = 0;

    double final_mean() const { return mean.empty() ? 0.0 : mean.back(); }
    double final_se() const { return se.empty() ? 0.0 : se.back(); }
};

// Smallest H with beta^H * c_max / (1 - beta) <= eps_tail.
int default_horizon(double beta, double c_max, double eps_tail = 1e-3);

// State path of length horizon + 1 starting from `initial`.
std::vector<ConsumerState> simulate_consumer(const TransitionModel& m, ConsumerState initial,
                                             int horizon, SplitMix64& rng);

// HP iff p <= kappa (inclusive): myopic one-step comparison.
Action greedy_action(Belief p, const CostModel& c);

// Deterministic costs; the estimator must be ExactBelief.
Aggregate run_policy(const TransitionModel& m, const CostModel& c, const PolicySpec& spec,
                     const SimConfig& cfg);

// Coupon-dependent chains, deterministic costs.
Aggregate run_policy(const CouponDependentModel& m, const CostModel& c, const PolicySpec& spec,
                     const SimConfig& cfg);

// Noisy costs drawn from d; beliefs tracked by the configured estimator.
Aggregate run_policy(const TransitionModel& m, double beta, const CostDistributionSet& d,
                     const PolicySpec& spec, const SimConfig& cfg);

// Single-episode traces of the same processes, for trace exports.
EpisodeResult run_episode_trace(const TransitionModel& m, const CostModel& c,
                                const PolicySpec& spec, const SimConfig& cfg,
                                std::uint64_t episode);
EpisodeResult run_episode_trace(const TransitionModel& m, double beta,
                                const CostDistributionSet& d, const PolicySpec& spec,
                                const SimConfig& cfg, std::uint64_t episode);

}  // namespace couponmdp
