#include "couponmdp/noisy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "couponmdp/errors.hpp"
#include "couponmdp/threshold.hpp"

namespace couponmdp {

namespace {

// Matching tolerance for discrete support lookups.
constexpr double kSupportTol = 1e-9;

}  // namespace

CostDistribution CostDistribution::uniform(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo >= hi) {
        std::ostringstream os;
        os << "uniform cost distribution requires lo < hi (got [" << lo << ", " << hi << "])";
        throw validation_error(os.str());
    }
    CostDistribution d;
    d.family = CostFamily::Uniform;
    d.lo = lo;
    d.hi = hi;
    return d;
}

CostDistribution CostDistribution::discrete(std::vector<double> support,
                                            std::vector<double> mass) {
    if (support.empty() || support.size() != mass.size()) {
        throw validation_error("discrete cost distribution needs matching nonempty support/mass");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (!std::isfinite(support[i]) || !std::isfinite(mass[i]) || mass[i] < -kProbTol) {
            throw validation_error("discrete cost distribution has an invalid entry");
        }
        total += mass[i];
    }
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "discrete cost masses must sum to 1 (got " << total << ")";
        throw validation_error(os.str());
    }
    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
    CostDistribution d;
    d.family = CostFamily::Discrete;
    for (std::size_t i : order) {
        d.support.push_back(support[i]);
        d.mass.push_back(std::max(mass[i], 0.0));
    }
    d.lo = d.support.front();
    d.hi = d.support.back();
    return d;
}

double CostDistribution::density(double c) const {
    if (family == CostFamily::Uniform) {
        return (c >= lo - kSupportTol && c <= hi + kSupportTol) ? 1.0 / (hi - lo) : 0.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (std::abs(c - support[i]) <= kSupportTol) total += mass[i];
    }
    return total;
}

double CostDistribution::mean() const {
    if (family == CostFamily::Uniform) return 0.5 * (lo + hi);
    double m = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) m += support[i] * mass[i];
    return m;
}

double CostDistribution::min_value() const { return lo; }

double CostDistribution::max_value() const { return hi; }

double CostDistribution::quantile(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    if (family == CostFamily::Uniform) return lo + u * (hi - lo);
    double cum = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        cum += mass[i];
        if (u < cum) return support[i];
    }
    return support.back();
}

double likelihood(double c, Action u, Belief p, const CostDistributionSet& d) {
    check_belief(p);
    if (u == Action::LP) return d.lp.density(c);
    return (1.0 - p) * d.hp_normal.density(c) + p * d.hp_alerted.density(c);
}

namespace {

double solved_tau(const TransitionModel& m, double c_l, double c_hn, double c_ha, double beta) {
    return solve_threshold(m, CostModel::checked(c_l, c_hn, c_ha, beta)).tau;
}

}  // namespace

ThresholdVariants threshold_variants(const CostDistributionSet& d, const TransitionModel& m,
                                     double beta, std::optional<Belief> initial_belief) {
    ThresholdVariants out;
    out.tau_avg = solved_tau(m, d.lp.mean(), d.hp_normal.mean(), d.hp_alerted.mean(), beta);
    out.tau_max =
        solved_tau(m, d.lp.max_value(), d.hp_normal.max_value(), d.hp_alerted.max_value(), beta);
    out.tau_min =
        solved_tau(m, d.lp.min_value(), d.hp_normal.max_value(), d.hp_alerted.min_value(), beta);

    // Robust variant: max-over-corners exact policy cost, minimized over the
    // thresholds obtained from the ordering-consistent corner triples.
    const Belief p0 = initial_belief.value_or(stationary_belief(m));
    const double cls[2] = {d.lp.min_value(), d.lp.max_value()};
    const double chns[2] = {d.hp_normal.min_value(), d.hp_normal.max_value()};
    const double chas[2] = {d.hp_alerted.min_value(), d.hp_alerted.max_value()};

    std::vector<double> candidates;
    for (double chn : chns)
        for (double cl : cls)
            for (double cha : chas) {
                if (!(chn <= cl && cl <= cha && cha > chn)) continue;
                candidates.push_back(solved_tau(m, cl, chn, cha, beta));
            }
    if (candidates.empty()) {
        throw validation_error("cost supports admit no ordered corner triple for the robust threshold");
    }
    std::sort(candidates.begin(), candidates.end());

    double best_tau = candidates.front();
    double best_worst = std::numeric_limits<double>::infinity();
    for (double tau : candidates) {
        double worst = 0.0;
        for (double chn : chns)
            for (double cl : cls)
                for (double cha : chas) {
                    CostModel corner{cl, chn, cha, beta};
                    worst = std::max(worst, threshold_policy_cost(tau, m, corner, p0));
                }
        if (worst < best_worst) {
            best_worst = worst;
            best_tau = tau;
        }
    }
    out.tau_r = best_tau;
    return out;
}

MapUpdate map_state_update(Belief p_hat, Action u_prev, double c_prev, const TransitionModel& m,
                           const CostDistributionSet& d) {
    check_belief(p_hat);
    MapUpdate out;
    if (u_prev == Action::LP) {
        out.p_next = one_step_transition(p_hat, m);
        return out;
    }
    const double score_normal = d.hp_normal.density(c_prev) * (1.0 - p_hat);
    const double score_alerted = d.hp_alerted.density(c_prev) * p_hat;
    if (score_normal <= 0.0 && score_alerted <= 0.0) {
        std::ostringstream os;
        os << "observed cost " << c_prev << " has zero likelihood under both post-HP states";
        throw solver_error(os.str());
    }
    if (score_normal > score_alerted) {
        out.state_estimate = ConsumerState::Normal;
        out.p_next = m.lambda_na;
    } else {
        out.state_estimate = ConsumerState::Alerted;
        out.p_next = m.lambda_aa;
    }
    return out;
}

BeliefPosterior BeliefPosterior::uniform_prior(int n) {
    if (n < 2) throw validation_error("belief posterior needs at least 2 grid points");
    BeliefPosterior q;
    q.grid.resize(n);
    q.weights.assign(n, 1.0 / n);
    for (int i = 0; i < n; ++i) q.grid[i] = double(i) / double(n - 1);
    return q;
}

BeliefPosterior BeliefPosterior::point_mass(Belief p0, int n) {
    check_belief(p0);
    BeliefPosterior q = uniform_prior(n);
    std::fill(q.weights.begin(), q.weights.end(), 0.0);
    const auto idx = static_cast<std::size_t>(std::lround(p0 * (n - 1)));
    q.weights[idx] = 1.0;
    return q;
}

BeliefPosterior bayes_update(const BeliefPosterior& q, Action u_prev, double c_prev,
                             const CostDistributionSet& d) {
    if (u_prev == Action::LP) return q;  // the LP cost carries no state information
    BeliefPosterior out = q;
    double total = 0.0;
    for (std::size_t i = 0; i < out.grid.size(); ++i) {
        out.weights[i] *= likelihood(c_prev, Action::HP, out.grid[i], d);
        total += out.weights[i];
    }
    if (total <= 0.0) {
        std::ostringstream os;
        os << "posterior update has zero evidence for observed cost " << c_prev;
        throw solver_error(os.str());
    }
    for (double& w : out.weights) w /= total;
    return out;
}

BeliefPosterior bayes_predict(const BeliefPosterior& q, const TransitionModel& m) {
    BeliefPosterior out = q;
    std::fill(out.weights.begin(), out.weights.end(), 0.0);
    const auto n = q.grid.size();
    const double scale = double(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = q.weights[i];
        if (w == 0.0) continue;
        const double x = std::clamp(one_step_transition(q.grid[i], m), 0.0, 1.0) * scale;
        const auto i0 = std::min(static_cast<std::size_t>(x), n - 1);
        const auto i1 = std::min(i0 + 1, n - 1);
        const double frac = x - double(i0);
        out.weights[i0] += w * (1.0 - frac);
        out.weights[i1] += w * frac;
    }
    double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
    if (total <= 0.0) throw solver_error("posterior prediction lost all mass");
    for (double& w : out.weights) w /= total;
    return out;
}

Belief point_estimate(const BeliefPosterior& q, PointEstimateMode mode) {
    if (q.grid.empty() || q.grid.size() != q.weights.size()) {
        throw validation_error("malformed belief posterior");
    }
    if (mode == PointEstimateMode::Mean) {
        double acc = 0.0;
        for (std::size_t i = 0; i < q.grid.size(); ++i) acc += q.grid[i] * q.weights[i];
        return std::clamp(acc, 0.0, 1.0);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < q.grid.size(); ++i) {
        if (q.weights[i] > q.weights[best]) best = i;
    }
    return q.grid[best];
}

}  // namespace couponmdp
