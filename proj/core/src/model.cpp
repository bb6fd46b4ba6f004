#include "couponmdp/model.hpp"

#include <string>

namespace couponmdp {

namespace {

void check_probability(double v, const char* name) {
    if (!(v >= -kProbTol && v <= 1.0 + kProbTol)) {
        throw validation_error(std::string(name) + " must lie in [0,1], got " +
                               std::to_string(v));
    }
}

}  // namespace

void check_belief(Belief p) { check_probability(p, "belief"); }

TransitionModel TransitionModel::permissive(double lambda_na, double lambda_aa) {
    check_probability(lambda_na, "lambda_na");
    check_probability(lambda_aa, "lambda_aa");
    return TransitionModel{lambda_na, lambda_aa};
}

TransitionModel TransitionModel::checked(double lambda_na, double lambda_aa) {
    TransitionModel m = permissive(lambda_na, lambda_aa);
    if (!(lambda_aa >= 0.5 - kProbTol && lambda_na <= 0.5 + kProbTol &&
          lambda_na >= 1.0 - lambda_aa - kProbTol)) {
        throw validation_error(
            "consumer-inertia constraints violated: require lambda_na <= 0.5 <= lambda_aa "
            "and lambda_na >= 1 - lambda_aa (got lambda_na=" +
            std::to_string(lambda_na) + ", lambda_aa=" + std::to_string(lambda_aa) + ")");
    }
    return m;
}

CostModel CostModel::checked(double c_l, double c_hn, double c_ha, double beta) {
    if (!(c_hn <= c_l + kProbTol && c_l <= c_ha + kProbTol)) {
        throw validation_error("cost ordering violated: require c_hn <= c_l <= c_ha (got c_hn=" +
                               std::to_string(c_hn) + ", c_l=" + std::to_string(c_l) +
                               ", c_ha=" + std::to_string(c_ha) + ")");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw validation_error("discount beta must lie in (0,1), got " + std::to_string(beta));
    }
    return CostModel{c_l, c_hn, c_ha, beta};
}

Belief one_step_transition(Belief p, const TransitionModel& m) {
    return (1.0 - p) * m.lambda_na + p * m.lambda_aa;
}

Belief stationary_belief(const TransitionModel& m) {
    const double den = 1.0 - m.lambda_aa + m.lambda_na;
    if (den <= kProbTol) {
        throw validation_error("degenerate chain: 1 - lambda_aa + lambda_na = 0, no unique "
                               "stationary belief");
    }
    return m.lambda_na / den;
}

double instantaneous_cost(Belief p, Action u, const CostModel& c) {
    if (u == Action::LP) return c.c_l;
    return (1.0 - p) * c.c_hn + p * c.c_ha;
}

}  // namespace couponmdp
