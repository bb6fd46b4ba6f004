#pragma once

#include <utility>

#include "couponmdp/errors.hpp"

namespace couponmdp {

// Absolute tolerance for probability validation at interval boundaries.
inline constexpr double kProbTol = 1e-12;

enum class Action { HP, LP };
enum class ConsumerState { Normal, Alerted };

// Belief = P(consumer is Alerted).
using Belief = double;

void check_belief(Belief p);

// Two-state alerted-process chain. lambda_na = P(Normal -> Alerted),
// lambda_aa = P(Alerted stays Alerted).
struct TransitionModel {
    double lambda_na = 0.0;
    double lambda_aa = 1.0;

    // Enforces the consumer-inertia constraints:
    //   lambda_na <= 0.5 <= lambda_aa and lambda_na >= 1 - lambda_aa.
    static TransitionModel checked(double lambda_na, double lambda_aa);

    // Only requires both entries to be probabilities. Used by the
    // value-iteration oracle, which does not rely on inertia.
    static TransitionModel permissive(double lambda_na, double lambda_aa);

    double contraction_rate() const { return lambda_aa - lambda_na; }
};

struct CostModel {
    double c_l = 0.0;
    double c_hn = 0.0;
    double c_ha = 0.0;
    double beta = 0.9;

    // Enforces c_hn <= c_l <= c_ha and beta in (0,1).
    static CostModel checked(double c_l, double c_hn, double c_ha, double beta);
};

// T(p) = (1-p) lambda_na + p lambda_aa.
Belief one_step_transition(Belief p, const TransitionModel& m);

// Fixed point p_F = lambda_na / (1 - lambda_aa + lambda_na).
Belief stationary_belief(const TransitionModel& m);

// C_L for LP; (1-p) C_HN + p C_HA for HP.
double instantaneous_cost(Belief p, Action u, const CostModel& c);

// One normalized Bellman backup. HP reveals the state, so its continuation
// mixes the anchor beliefs; LP continues from T(p).
template <class ValueFn>
double bellman_backup(Belief p, Action u, ValueFn&& v_next, const TransitionModel& m,
                      const CostModel& c) {
    if (u == Action::HP) {
        return instantaneous_cost(p, Action::HP, c) +
               c.beta * ((1.0 - p) * v_next(m.lambda_na) + p * v_next(m.lambda_aa));
    }
    return c.c_l + c.beta * v_next(one_step_transition(p, m));
}

}  // namespace couponmdp
