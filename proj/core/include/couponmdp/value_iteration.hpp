#pragma once

#include <string>
#include <vector>

#include "couponmdp/model.hpp"

namespace couponmdp {

struct BeliefGrid {
    std::vector<double> points;
    double resolution = 0.0;

    static BeliefGrid uniform(int n);
};

struct ValueTable {
    BeliefGrid grid;
    std::vector<double> values;
    std::vector<Action> actions;
    double residual = 0.0;
    int sweeps = 0;
    // Sup-norm residual after each sweep, for contraction checks.
    std::vector<double> residual_history;
};

struct StructureReport {
    bool monotone = false;
    bool concave = false;
    bool hp_prefix = false;
    double worst_monotonicity = 0.0;  // most negative forward difference
    double worst_concavity = 0.0;     // largest positive second difference
};

// Discretized-belief value iteration for the two-state model. Ties go to HP.
ValueTable solve_two_state(const TransitionModel& m, const CostModel& c, int grid_size = 2001,
                           double tol = 1e-9);

// Same sweep with explicit post-HP anchor beliefs; the coupon-dependent
// oracle points these at its HP chain.
ValueTable solve_two_state_anchored(const TransitionModel& drift_chain, Belief anchor_na,
                                    Belief anchor_aa, const CostModel& c, int grid_size,
                                    double tol);

// Midpoint between the last HP point and the first LP point; errors if the HP
// region is not a prefix of the grid.
double extract_threshold(const ValueTable& vt);

StructureReport check_structure(const ValueTable& vt);

// Exact finite-horizon value from p0 by backward recursion on the reachable
// belief set (LP drift plus the two HP anchors).
double finite_horizon_check(const TransitionModel& m, const CostModel& c, int horizon,
                            Belief p0);

void export_csv(const ValueTable& vt, const std::string& path);

// ---- multi-level Alerted states ----

struct MultiStateModel {
    std::vector<std::vector<double>> transition;  // row-stochastic, (K+1)x(K+1)
    std::vector<double> hp_costs;                 // (C_HN, C_HA1, ..., C_HAK)
    double lp_cost = 0.0;
    double beta = 0.9;

    static MultiStateModel checked(std::vector<std::vector<double>> transition,
                                   std::vector<double> hp_costs, double lp_cost, double beta);
    int num_states() const { return static_cast<int>(hp_costs.size()); }
};

struct SimplexValueTable {
    int denominator = 0;                       // grid = integer vectors / denominator
    std::vector<std::vector<int>> lattice;     // integer coordinates, sum = denominator
    std::vector<std::vector<double>> points;   // lattice / denominator
    std::vector<double> values;
    std::vector<Action> actions;
    double residual = 0.0;
    int sweeps = 0;
};

struct SimplexStructureReport {
    bool hp_grid_convex = false;
    int checked_midpoints = 0;
    int violations = 0;
};

// Value iteration on the uniform simplex lattice with simplicial (Freudenthal)
// interpolation for off-grid queries.
SimplexValueTable solve_multistate(const MultiStateModel& m, int denominator = 100,
                                   double tol = 1e-9);

// Every representable grid midpoint of two HP points must be HP.
SimplexStructureReport check_structure(const SimplexValueTable& vt);

void export_csv(const SimplexValueTable& vt, const std::string& path);

}  // namespace couponmdp
