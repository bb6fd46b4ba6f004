#pragma once

#include <optional>

#include "couponmdp/model.hpp"

namespace couponmdp {

// Which side of the indifference point the LP drift lands on.
enum class Branch { TtauGE, TtauLT };

// Whether the post-HP Normal anchor itself sits in the HP region.
enum class LambdaCase { LambdaNaAboveTau, LambdaNaBelowTau };

struct ThresholdSolution {
    double tau = 0.0;
    Branch branch = Branch::TtauGE;
    LambdaCase lambda_case = LambdaCase::LambdaNaAboveTau;
    double v_lambda_na = 0.0;
    double v_lambda_aa = 0.0;
    std::optional<int> n_star;
    double kappa = 0.0;
    double p_f = 0.0;
    // |V_LP(tau) - V_HP(tau)| of the winning candidate.
    double residual = 0.0;
    // Set when more than one candidate was self-consistent.
    bool tie_break = false;
    // 1..4 when produced by the coupon-dependent solver, 0 otherwise.
    int cd_case = 0;
};

struct AnchorValues {
    double v_lambda_na = 0.0;
    double v_lambda_aa = 0.0;
    std::optional<int> n_star;
};

struct RegimeBounds {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::optional<double> closed_form_tau;
    double tau_upper = 0.0;
};

// Instantaneous-tradeoff ratio (C_L - C_HN)/(C_HA - C_HN).
double kappa(const CostModel& c);

// Value of offering LP for n more steps from the Alerted anchor and then HP
// forever after the drift has settled; the closed form the solver minimizes.
double evaluate_G(int n, const TransitionModel& m, const CostModel& c);

// Anchor values V(lambda_na), V(lambda_aa) under the hypothesized case.
AnchorValues value_at_anchors(const TransitionModel& m, const CostModel& c,
                              double tau_hypothesis, LambdaCase lambda_case);

// Closed-form optimal threshold: enumerates the four case/branch candidates
// and returns the self-consistent one (smallest indifference residual on ties).
ThresholdSolution solve_threshold(const TransitionModel& m, const CostModel& c);

// True iff HP is optimal at p for any transition chain: p <= kappa (inclusive).
bool hp_always_optimal(const CostModel& c, Belief p);

// lambda1/lambda2 regime boundaries for the threshold as a function of
// lambda_na at fixed lambda_aa, plus the mid-regime closed form and the
// uniform upper bound tau_upper.
RegimeBounds regime_bounds(const TransitionModel& m, const CostModel& c);

// Exact discounted cost of the fixed policy "HP iff p <= tau" started at p0.
// Computed by following the LP drift orbit and solving the 2x2 linear system
// for the anchor values; no discretization.
double threshold_policy_cost(double tau, const TransitionModel& m, const CostModel& c,
                             Belief p0);

// Shared implementation detail: same evaluation with explicit post-HP anchor
// beliefs (the coupon-dependent model points these at its HP chain).
double threshold_policy_cost_anchored(double tau, const TransitionModel& lp_chain,
                                      const CostModel& c, Belief p0, Belief anchor_na,
                                      Belief anchor_aa);

}  // namespace couponmdp
