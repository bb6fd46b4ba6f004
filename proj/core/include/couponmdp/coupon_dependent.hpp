#pragma once

#include <vector>

#include "couponmdp/threshold.hpp"
#include "couponmdp/value_iteration.hpp"

namespace couponmdp {

// Action-dependent transitions: the HP chain is at least as alerting as the
// LP chain in both entries.
struct CouponDependentModel {
    TransitionModel lp_chain;
    TransitionModel hp_chain;

    // Enforces lambda'_na >= lambda_na and lambda'_aa >= lambda_aa plus
    // lambda_aa > lambda_na per chain. Equality of the chains is allowed and
    // degenerates to the action-independent model.
    static CouponDependentModel checked(const TransitionModel& lp, const TransitionModel& hp);

    bool degenerate() const {
        return lp_chain.lambda_na == hp_chain.lambda_na &&
               lp_chain.lambda_aa == hp_chain.lambda_aa;
    }
};

// Closed-form threshold via the four case formulas; cd_case records which
// fired. Throws solver_error listing all candidates when none is consistent.
ThresholdSolution solve_threshold_cd(const CouponDependentModel& m, const CostModel& c);

// Value-iteration oracle with HP anchors from the HP chain and LP drift from
// the LP chain.
ValueTable vi_oracle_cd(const CouponDependentModel& m, const CostModel& c, int grid_size = 2001,
                        double tol = 1e-9);

// Exact discounted cost of the fixed policy "HP iff p <= tau" under the
// coupon-dependent model.
double threshold_policy_cost_cd(double tau, const CouponDependentModel& m, const CostModel& c,
                                Belief p0);

struct RegionCell {
    double c_l = 0.0;
    double c_ha = 0.0;
    bool lp_only = false;
    double tau = 0.0;
    bool closed_form = true;  // false when the oracle supplied tau
};

struct RegionMask {
    std::vector<RegionCell> cells;  // only cost pairs with c_hn <= c_l <= c_ha, c_ha > c_hn
};

// LP-only mask (tau = 0 cells) over a (C_L, C_HA) grid at fixed C_HN and beta.
RegionMask lp_only_region(const TransitionModel& m, const CostModel& base,
                          const std::vector<double>& cl_values,
                          const std::vector<double>& cha_values);
RegionMask lp_only_region(const CouponDependentModel& m, const CostModel& base,
                          const std::vector<double>& cl_values,
                          const std::vector<double>& cha_values);

}  // namespace couponmdp
