#include "couponmdp/coupon_dependent.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace couponmdp {

namespace {

constexpr double kCaseTol = 1e-9;

struct CdCandidate {
    int case_id;
    double tau;
    double residual;
};

// Expected drift signs for (T(tau)-tau, T'(tau)-tau) per case.
constexpr int kSigns[4][2] = {{+1, +1}, {-1, +1}, {-1, -1}, {+1, -1}};

std::array<double, 4> cd_case_taus(const CouponDependentModel& m, const CostModel& c) {
    const double g = c.beta / (1.0 - c.beta);
    const double d = m.lp_chain.contraction_rate();
    const double d2 = m.hp_chain.contraction_rate();
    const double eta = c.beta * d / (1.0 - c.beta * d);
    const double eta2 = c.beta * d2 / (1.0 - c.beta * d2);
    const double p_f = stationary_belief(m.lp_chain);
    const double p_f2 = stationary_belief(m.hp_chain);
    const double r = c.c_ha - c.c_hn;
    const double cl_hn = c.c_l - c.c_hn;
    return {
        cl_hn / r,
        (cl_hn + p_f * r * (g - eta) + g * (c.c_hn - c.c_l)) / (r * (1.0 - eta)),
        (cl_hn + r * (g * (p_f - p_f2) - (p_f * eta - p_f2 * eta2))) / (r * (eta2 - eta + 1.0)),
        (cl_hn * (1.0 + g) - p_f2 * r * (eta2 - g)) / (r * (1.0 + eta2)),
    };
}

// Indifference residual at tau under the exact fixed-policy values.
double cd_residual(double tau, const CouponDependentModel& m, const CostModel& c) {
    const auto w = [&](Belief p) { return threshold_policy_cost_cd(tau, m, c, p); };
    const double w_na = w(m.hp_chain.lambda_na);
    const double w_aa = w(m.hp_chain.lambda_aa);
    const double v_hp =
        (1.0 - tau) * c.c_hn + tau * c.c_ha + c.beta * ((1.0 - tau) * w_na + tau * w_aa);
    const double v_lp = c.c_l + c.beta * w(one_step_transition(tau, m.lp_chain));
    return std::abs(v_lp - v_hp);
}

}  // namespace

CouponDependentModel CouponDependentModel::checked(const TransitionModel& lp,
                                                   const TransitionModel& hp) {
    for (const auto* chain : {&lp, &hp}) {
        if (!(chain->lambda_aa > chain->lambda_na)) {
            throw validation_error("each chain needs lambda_aa > lambda_na");
        }
    }
    if (!(hp.lambda_na >= lp.lambda_na && hp.lambda_aa >= lp.lambda_aa)) {
        throw validation_error("HP chain must be at least as alerting as the LP chain "
                               "(lambda'_na >= lambda_na, lambda'_aa >= lambda_aa)");
    }
    return CouponDependentModel{lp, hp};
}

ThresholdSolution solve_threshold_cd(const CouponDependentModel& m, const CostModel& c) {
    if (m.degenerate()) {
        return solve_threshold(m.lp_chain, c);
    }
    if (!(c.c_ha > c.c_hn)) {
        throw validation_error("degenerate costs: c_ha must exceed c_hn");
    }

    const auto taus = cd_case_taus(m, c);
    std::vector<CdCandidate> consistent;
    std::string report;
    for (int k = 0; k < 4; ++k) {
        const double tau = taus[k];
        const double t_gap = one_step_transition(tau, m.lp_chain) - tau;
        const double t2_gap = one_step_transition(tau, m.hp_chain) - tau;
        report += " case" + std::to_string(k + 1) + ": tau=" + std::to_string(tau) +
                  " T-tau=" + std::to_string(t_gap) + " T'-tau=" + std::to_string(t2_gap) + ";";
        if (!(tau >= -kCaseTol && tau <= 1.0 + kCaseTol)) continue;
        const bool ok1 = kSigns[k][0] > 0 ? t_gap >= -kCaseTol : t_gap < kCaseTol;
        const bool ok2 = kSigns[k][1] > 0 ? t2_gap >= -kCaseTol : t2_gap < kCaseTol;
        if (!ok1 || !ok2) continue;
        // Cases 1-2 put both HP anchors in the LP-forever region; require the
        // lower anchor to actually sit there, otherwise the formula's
        // continuation values are wrong even when the drift signs match.
        if (k < 2 && !(m.hp_chain.lambda_na >= tau - kCaseTol)) continue;
        consistent.push_back({k + 1, tau, cd_residual(std::clamp(tau, 0.0, 1.0), m, c)});
    }
    if (consistent.empty()) {
        throw solver_error("no consistent coupon-dependent case; candidates:" + report);
    }
    const auto best = std::min_element(consistent.begin(), consistent.end(),
                                       [](const CdCandidate& a, const CdCandidate& b) {
                                           return a.residual < b.residual;
                                       });

    ThresholdSolution sol;
    sol.tau = std::clamp(best->tau, 0.0, 1.0);
    sol.cd_case = best->case_id;
    sol.branch = one_step_transition(sol.tau, m.lp_chain) >= sol.tau - kCaseTol
                     ? Branch::TtauGE
                     : Branch::TtauLT;
    sol.lambda_case = m.hp_chain.lambda_na >= sol.tau - kCaseTol
                          ? LambdaCase::LambdaNaAboveTau
                          : LambdaCase::LambdaNaBelowTau;
    sol.v_lambda_na = threshold_policy_cost_cd(sol.tau, m, c, m.hp_chain.lambda_na);
    sol.v_lambda_aa = threshold_policy_cost_cd(sol.tau, m, c, m.hp_chain.lambda_aa);
    sol.kappa = kappa(c);
    sol.p_f = stationary_belief(m.lp_chain);
    sol.residual = best->residual;
    sol.tie_break = consistent.size() > 1;
    return sol;
}

ValueTable vi_oracle_cd(const CouponDependentModel& m, const CostModel& c, int grid_size,
                        double tol) {
    return solve_two_state_anchored(m.lp_chain, m.hp_chain.lambda_na, m.hp_chain.lambda_aa, c,
                                    grid_size, tol);
}

double threshold_policy_cost_cd(double tau, const CouponDependentModel& m, const CostModel& c,
                                Belief p0) {
    return threshold_policy_cost_anchored(tau, m.lp_chain, c, p0, m.hp_chain.lambda_na,
                                          m.hp_chain.lambda_aa);
}

namespace {

RegionMask region_impl(const TransitionModel* ind, const CouponDependentModel* cd,
                       const CostModel& base, const std::vector<double>& cl_values,
                       const std::vector<double>& cha_values) {
    RegionMask mask;
    for (double cl : cl_values) {
        for (double cha : cha_values) {
            if (!(base.c_hn <= cl && cl <= cha && cha > base.c_hn)) continue;
            const CostModel costs{cl, base.c_hn, cha, base.beta};
            RegionCell cell;
            cell.c_l = cl;
            cell.c_ha = cha;
            if (ind) {
                cell.tau = solve_threshold(*ind, costs).tau;
            } else {
                try {
                    cell.tau = solve_threshold_cd(*cd, costs).tau;
                } catch (const solver_error&) {
                    // No consistent closed-form case; fall back to the oracle.
                    const ValueTable vt = vi_oracle_cd(*cd, costs, 2001, 1e-9);
                    cell.tau = extract_threshold(vt);
                    cell.closed_form = false;
                }
            }
            cell.lp_only = cell.tau <= (cell.closed_form ? kCaseTol : 2.5e-4);
            mask.cells.push_back(cell);
        }
    }
    return mask;
}

}  // namespace

RegionMask lp_only_region(const TransitionModel& m, const CostModel& base,
                          const std::vector<double>& cl_values,
                          const std::vector<double>& cha_values) {
    return region_impl(&m, nullptr, base, cl_values, cha_values);
}

RegionMask lp_only_region(const CouponDependentModel& m, const CostModel& base,
                          const std::vector<double>& cl_values,
                          const std::vector<double>& cha_values) {
    return region_impl(nullptr, &m, base, cl_values, cha_values);
}

}  // namespace couponmdp
