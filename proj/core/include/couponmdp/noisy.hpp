#pragma once

#include <optional>
#include <vector>

#include "couponmdp/model.hpp"

namespace couponmdp {

enum class CostFamily { Uniform, Discrete };

// Bounded cost distribution for one (state, action) pair.
struct CostDistribution {
    CostFamily family = CostFamily::Uniform;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> support;  // discrete only, sorted
    std::vector<double> mass;

    static CostDistribution uniform(double lo, double hi);
    static CostDistribution discrete(std::vector<double> support, std::vector<double> mass);

    double density(double c) const;  // point mass for the discrete family
    double mean() const;
    double min_value() const;
    double max_value() const;
    double quantile(double u) const;  // inverse CDF, u in [0,1)
};

// The LP distribution is state-independent by construction.
struct CostDistributionSet {
    CostDistribution lp;
    CostDistribution hp_normal;
    CostDistribution hp_alerted;
};

// Observation likelihood of cost c after action u at belief p.
double likelihood(double c, Action u, Belief p, const CostDistributionSet& d);

struct ThresholdVariants {
    double tau_avg = 0.0;
    double tau_max = 0.0;
    double tau_min = 0.0;
    double tau_r = 0.0;
};

// The four deterministic-threshold surrogates for interval-valued costs.
// tau_r minimizes the worst-case exact policy cost over the support-corner
// cost triples, evaluated at initial_belief.
ThresholdVariants threshold_variants(const CostDistributionSet& d, const TransitionModel& m,
                                     double beta,
                                     std::optional<Belief> initial_belief = std::nullopt);

struct MapUpdate {
    std::optional<ConsumerState> state_estimate;  // set after HP observations
    Belief p_next = 0.0;
};

// MAP detection of the previous state from the realized cost, followed by the
// corresponding anchor jump (HP) or the drift map (LP).
MapUpdate map_state_update(Belief p_hat, Action u_prev, double c_prev,
                           const TransitionModel& m, const CostDistributionSet& d);

// Discretized posterior over the belief p itself.
struct BeliefPosterior {
    std::vector<double> grid;
    std::vector<double> weights;

    static BeliefPosterior uniform_prior(int n = 1001);
    static BeliefPosterior point_mass(Belief p0, int n = 1001);
};

BeliefPosterior bayes_update(const BeliefPosterior& q, Action u_prev, double c_prev,
                             const CostDistributionSet& d);

// Pushforward through the affine drift map; exact index remapping with linear
// mass splitting. lambda_aa = lambda_na collapses to a point mass.
BeliefPosterior bayes_predict(const BeliefPosterior& q, const TransitionModel& m);

enum class PointEstimateMode { Mean, Map };

Belief point_estimate(const BeliefPosterior& q, PointEstimateMode mode);

}  // namespace couponmdp
