#include "couponmdp/threshold.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace couponmdp {

namespace {

constexpr double kCaseTol = 1e-9;

struct Candidate {
    LambdaCase lambda_case;
    Branch branch;
    double tau;
    double v_na;
    double v_aa;
    std::optional<int> n_star;
    double residual;
};

double tau_for_branch(Branch branch, double v_na, double v_aa, const TransitionModel& m,
                      const CostModel& c) {
    const double delta = c.c_ha - c.c_hn + c.beta * (v_aa - v_na);
    if (branch == Branch::TtauGE) {
        return (c.c_l / (1.0 - c.beta) - c.c_hn - c.beta * v_na) / delta;
    }
    const double num = c.c_l + c.beta * m.lambda_na * (c.c_ha + c.beta * v_aa) -
                       (1.0 - c.beta * (1.0 - m.lambda_na)) * (c.c_hn + c.beta * v_na);
    return num / ((1.0 - m.contraction_rate() * c.beta) * delta);
}

// Indifference residual |V_LP(tau) - V_HP(tau)| evaluated with the candidate's
// own anchor values.
double indifference_residual(const Candidate& cand, const TransitionModel& m,
                             const CostModel& c) {
    const double tau = cand.tau;
    const double v_hp = (1.0 - tau) * c.c_hn + tau * c.c_ha +
                        c.beta * ((1.0 - tau) * cand.v_na + tau * cand.v_aa);
    const double t_tau = one_step_transition(tau, m);
    double continuation;
    if (cand.branch == Branch::TtauGE) {
        continuation = c.c_l / (1.0 - c.beta);
    } else {
        continuation = (1.0 - t_tau) * c.c_hn + t_tau * c.c_ha +
                       c.beta * ((1.0 - t_tau) * cand.v_na + t_tau * cand.v_aa);
    }
    const double v_lp = c.c_l + c.beta * continuation;
    return std::abs(v_lp - v_hp);
}

}  // namespace

double kappa(const CostModel& c) {
    if (!(c.c_ha > c.c_hn)) {
        throw validation_error("degenerate costs: c_ha must exceed c_hn to define kappa");
    }
    return (c.c_l - c.c_hn) / (c.c_ha - c.c_hn);
}

double evaluate_G(int n, const TransitionModel& m, const CostModel& c) {
    const double d = m.contraction_rate();
    const double beta = c.beta;
    // n-step LP drift of the Alerted anchor.
    const double t_n = (std::pow(d, n + 1) * (1.0 - m.lambda_aa) + m.lambda_na) / (1.0 - d);
    const double t_bar = 1.0 - t_n;
    // Discounted HP-forever cost stream entered from the Normal anchor.
    const double c_lna = beta * ((1.0 - m.lambda_na) * c.c_hn + m.lambda_na * c.c_ha) /
                         (1.0 - (1.0 - m.lambda_na) * beta);
    const double num = c.c_l * (1.0 - std::pow(beta, n)) / (1.0 - beta) +
                       std::pow(beta, n) * (t_bar * (c.c_hn + c_lna) + t_n * c.c_ha);
    const double den = 1.0 - std::pow(beta, n + 1) *
                                 (t_bar * m.lambda_na * beta / (1.0 - (1.0 - m.lambda_na) * beta) +
                                  t_n);
    return num / den;
}

AnchorValues value_at_anchors(const TransitionModel& m, const CostModel& c,
                              double /*tau_hypothesis*/, LambdaCase lambda_case) {
    if (lambda_case == LambdaCase::LambdaNaAboveTau) {
        const double v = c.c_l / (1.0 - c.beta);
        return {v, v, std::nullopt};
    }
    // v_lambda_aa = min over n >= 0 of G(n). Terms beyond n_max move G by less
    // than 1e-12; also stop early once the minimum stops improving.
    const int n_max = static_cast<int>(std::ceil(std::log(1e-12) / std::log(c.beta)));
    double best = std::numeric_limits<double>::infinity();
    int best_n = 0;
    int since_improved = 0;
    for (int n = 0; n <= n_max; ++n) {
        const double g = evaluate_G(n, m, c);
        if (g < best) {
            best = g;
            best_n = n;
            since_improved = 0;
        } else if (++since_improved >= 50) {
            break;
        }
    }
    const double v_aa = best;
    const double v_na = ((1.0 - m.lambda_na) * c.c_hn + m.lambda_na * c.c_ha +
                         m.lambda_na * c.beta * v_aa) /
                        (1.0 - c.beta * (1.0 - m.lambda_na));
    return {v_na, v_aa, best_n};
}

ThresholdSolution solve_threshold(const TransitionModel& m, const CostModel& c) {
    if (!(c.c_ha > c.c_hn)) {
        throw validation_error("degenerate costs: c_ha must exceed c_hn");
    }
    if (!(m.lambda_aa >= m.lambda_na)) {
        throw validation_error("threshold structure requires lambda_aa >= lambda_na");
    }
    if (1.0 - m.lambda_aa + m.lambda_na <= kProbTol) {
        throw validation_error("degenerate chain: lambda_na=0, lambda_aa=1 has no drift "
                               "fixed point");
    }

    const double v_lp_forever = c.c_l / (1.0 - c.beta);
    const AnchorValues below = value_at_anchors(m, c, 0.0, LambdaCase::LambdaNaBelowTau);

    std::vector<Candidate> consistent;
    double best_any_residual = std::numeric_limits<double>::infinity();
    for (LambdaCase lc : {LambdaCase::LambdaNaAboveTau, LambdaCase::LambdaNaBelowTau}) {
        const double v_na = lc == LambdaCase::LambdaNaAboveTau ? v_lp_forever : below.v_lambda_na;
        const double v_aa = lc == LambdaCase::LambdaNaAboveTau ? v_lp_forever : below.v_lambda_aa;
        const std::optional<int> n_star =
            lc == LambdaCase::LambdaNaAboveTau ? std::optional<int>{} : below.n_star;
        for (Branch br : {Branch::TtauGE, Branch::TtauLT}) {
            Candidate cand{lc, br, tau_for_branch(br, v_na, v_aa, m, c), v_na, v_aa, n_star, 0.0};
            if (!(cand.tau >= -kCaseTol && cand.tau <= 1.0 + kCaseTol)) continue;
            if (lc == LambdaCase::LambdaNaAboveTau && !(m.lambda_na >= cand.tau - kCaseTol))
                continue;
            if (lc == LambdaCase::LambdaNaBelowTau && !(m.lambda_na < cand.tau + kCaseTol))
                continue;
            const double t_tau = one_step_transition(cand.tau, m);
            if (br == Branch::TtauGE && !(t_tau >= cand.tau - kCaseTol)) continue;
            if (br == Branch::TtauLT && !(t_tau < cand.tau + kCaseTol)) continue;
            cand.residual = indifference_residual(cand, m, c);
            best_any_residual = std::min(best_any_residual, cand.residual);
            consistent.push_back(cand);
        }
    }
    if (consistent.empty()) {
        throw solver_error("no self-consistent threshold case for lambda_na=" +
                           std::to_string(m.lambda_na) + ", lambda_aa=" +
                           std::to_string(m.lambda_aa) + ", c=(" + std::to_string(c.c_l) + "," +
                           std::to_string(c.c_hn) + "," + std::to_string(c.c_ha) +
                           "), beta=" + std::to_string(c.beta));
    }
    const auto best = std::min_element(consistent.begin(), consistent.end(),
                                       [](const Candidate& a, const Candidate& b) {
                                           return a.residual < b.residual;
                                       });
    if (best->residual > 1e-6) {
        throw solver_error("threshold candidate fails the indifference equation: residual " +
                           std::to_string(best->residual));
    }

    ThresholdSolution sol;
    sol.tau = std::clamp(best->tau, 0.0, 1.0);
    sol.branch = best->branch;
    sol.lambda_case = best->lambda_case;
    sol.v_lambda_na = best->v_na;
    sol.v_lambda_aa = best->v_aa;
    sol.n_star = best->n_star;
    sol.kappa = kappa(c);
    sol.p_f = stationary_belief(m);
    sol.residual = best->residual;
    sol.tie_break = consistent.size() > 1;
    return sol;
}

bool hp_always_optimal(const CostModel& c, Belief p) {
    check_belief(p);
    return p <= kappa(c) + kProbTol;
}

RegimeBounds regime_bounds(const TransitionModel& m, const CostModel& c) {
    RegimeBounds out;
    out.lambda1 = kappa(c);
    const double den = (1.0 - c.beta) * c.c_ha - c.c_hn + c.beta * c.c_l;
    const auto mid_form = [&](double lna) {
        return (c.beta * (c.c_l - c.c_ha) * lna + c.c_l - c.c_hn) / den;
    };
    const auto h = [&](double l2) {
        return l2 / (1.0 - (m.lambda_aa - l2)) - mid_form(l2);
    };
    double lo = 0.0, hi = out.lambda1;
    if (h(lo) * h(hi) > 0.0) {
        throw solver_error("no root for lambda2 in [0, lambda1]: the mid-regime boundary "
                           "equation does not change sign");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (h(lo) * h(mid) <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo < 1e-10) break;
    }
    out.lambda2 = 0.5 * (lo + hi);
    out.tau_upper = out.lambda2 / (1.0 - (m.lambda_aa - out.lambda2));
    if (m.lambda_na > out.lambda1) {
        out.closed_form_tau = out.lambda1;
    } else if (m.lambda_na > out.lambda2 && m.lambda_na < out.lambda1) {
        out.closed_form_tau = mid_form(m.lambda_na);
    }
    return out;
}

double threshold_policy_cost_anchored(double tau, const TransitionModel& lp_chain,
                                      const CostModel& c, Belief p0, Belief anchor_na,
                                      Belief anchor_aa) {
    check_belief(p0);
    // W(p) is affine in the anchor values: W(p) = A + B W(anchor_na) + C W(anchor_aa).
    // Follow the LP drift until the policy switches to HP (cap the orbit; past
    // it the discounted tail is indistinguishable from LP forever).
    const auto coeffs = [&](Belief p) {
        double a = 0.0, b = 0.0, cc = 0.0;
        double disc = 1.0;
        for (int step = 0; step < 5000; ++step) {
            if (p <= tau + kProbTol) {
                a += disc * ((1.0 - p) * c.c_hn + p * c.c_ha);
                b += disc * c.beta * (1.0 - p);
                cc += disc * c.beta * p;
                return std::array<double, 3>{a, b, cc};
            }
            a += disc * c.c_l;
            disc *= c.beta;
            p = one_step_transition(p, lp_chain);
        }
        a += disc * c.c_l / (1.0 - c.beta);
        return std::array<double, 3>{a, b, cc};
    };
    const auto [a1, b1, c1] = coeffs(anchor_na);
    const auto [a2, b2, c2] = coeffs(anchor_aa);
    const double det = (1.0 - b1) * (1.0 - c2) - c1 * b2;
    const double w_na = (a1 * (1.0 - c2) + c1 * a2) / det;
    const double w_aa = ((1.0 - b1) * a2 + b2 * a1) / det;
    const auto [a0, b0, c0] = coeffs(p0);
    return a0 + b0 * w_na + c0 * w_aa;
}

double threshold_policy_cost(double tau, const TransitionModel& m, const CostModel& c,
                             Belief p0) {
    return threshold_policy_cost_anchored(tau, m, c, p0, m.lambda_na, m.lambda_aa);
}

}  // namespace couponmdp
