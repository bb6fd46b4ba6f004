#include "couponmdp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "couponmdp/errors.hpp"
#include "couponmdp/threshold.hpp"

namespace couponmdp {

SplitMix64 SplitMix64::substream(std::uint64_t seed, std::uint64_t episode) {
    return SplitMix64{seed + episode * 0xD1B54A32D192ED03ULL};
}

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() { return double(next() >> 11) * 0x1.0p-53; }

int default_horizon(double beta, double c_max, double eps_tail) {
    if (!(beta > 0.0 && beta < 1.0)) throw validation_error("discount factor must be in (0,1)");
    if (!(c_max > 0.0) || !(eps_tail > 0.0)) {
        throw validation_error("horizon derivation needs positive cost bound and tail tolerance");
    }
    const double h = std::log(eps_tail * (1.0 - beta) / c_max) / std::log(beta);
    return std::max(1, static_cast<int>(std::ceil(h)));
}

std::vector<ConsumerState> simulate_consumer(const TransitionModel& m, ConsumerState initial,
                                             int horizon, SplitMix64& rng) {
    if (horizon < 0) throw validation_error("horizon must be nonnegative");
    std::vector<ConsumerState> path;
    path.reserve(horizon + 1);
    path.push_back(initial);
    for (int t = 0; t < horizon; ++t) {
        const double to_alerted =
            path.back() == ConsumerState::Normal ? m.lambda_na : m.lambda_aa;
        path.push_back(rng.uniform() < to_alerted ? ConsumerState::Alerted
                                                  : ConsumerState::Normal);
    }
    return path;
}

Action greedy_action(Belief p, const CostModel& c) {
    return p <= kappa(c) ? Action::HP : Action::LP;
}

namespace {

struct EngineSetup {
    TransitionModel lp_chain;
    TransitionModel hp_chain;
    const CostModel* det_costs = nullptr;          // deterministic mode
    const CostDistributionSet* dists = nullptr;    // noisy mode
    double beta = 0.9;
    double kappa_value = 0.0;
};

void check_config(const SimConfig& cfg) {
    if (cfg.episodes < 1) throw validation_error("episodes must be >= 1");
    if (cfg.horizon < 0) throw validation_error("horizon must be >= 0");
    if (cfg.posterior_grid < 2) throw validation_error("posterior grid needs >= 2 points");
    check_belief(cfg.initial_belief);
}

int resolved_horizon(const EngineSetup& eng, const SimConfig& cfg) {
    if (cfg.horizon > 0) return cfg.horizon;
    double c_max;
    if (eng.det_costs != nullptr) {
        c_max = std::max({eng.det_costs->c_l, eng.det_costs->c_hn, eng.det_costs->c_ha});
    } else {
        c_max = std::max({eng.dists->lp.max_value(), eng.dists->hp_normal.max_value(),
                          eng.dists->hp_alerted.max_value()});
    }
    return default_horizon(eng.beta, c_max);
}

// Belief tracker for one episode. PerfectInfo policies always use the exact
// tracker; the others follow spec.estimator.
struct Tracker {
    EstimatorKind kind = EstimatorKind::ExactBelief;
    Belief p_hat = 0.0;
    std::optional<BeliefPosterior> posterior;

    Belief current() const { return p_hat; }

    void observe(Action u, double cost, ConsumerState prev_state, const EngineSetup& eng) {
        switch (kind) {
            case EstimatorKind::ExactBelief:
                p_hat = u == Action::HP
                            ? (prev_state == ConsumerState::Normal ? eng.hp_chain.lambda_na
                                                                   : eng.hp_chain.lambda_aa)
                            : one_step_transition(p_hat, eng.lp_chain);
                break;
            case EstimatorKind::MapState:
                p_hat = map_state_update(p_hat, u, cost, eng.lp_chain, *eng.dists).p_next;
                break;
            case EstimatorKind::BayesMean:
            case EstimatorKind::BayesMap: {
                *posterior = bayes_update(*posterior, u, cost, *eng.dists);
                *posterior = bayes_predict(*posterior, eng.lp_chain);
                const auto mode = kind == EstimatorKind::BayesMean ? PointEstimateMode::Mean
                                                                   : PointEstimateMode::Map;
                p_hat = point_estimate(*posterior, mode);
                break;
            }
        }
    }
};

Tracker make_tracker(const PolicySpec& spec, const SimConfig& cfg, const EngineSetup& eng) {
    Tracker tr;
    tr.kind = spec.kind == PolicyKind::PerfectInfo ? EstimatorKind::ExactBelief : spec.estimator;
    if (eng.det_costs != nullptr && tr.kind != EstimatorKind::ExactBelief) {
        throw validation_error(
            "deterministic costs reveal the state exactly; use the exact-belief estimator");
    }
    if (tr.kind == EstimatorKind::BayesMean || tr.kind == EstimatorKind::BayesMap) {
        tr.posterior = cfg.belief_known
                           ? BeliefPosterior::point_mass(cfg.initial_belief, cfg.posterior_grid)
                           : BeliefPosterior::uniform_prior(cfg.posterior_grid);
        const auto mode = tr.kind == EstimatorKind::BayesMean ? PointEstimateMode::Mean
                                                              : PointEstimateMode::Map;
        tr.p_hat = point_estimate(*tr.posterior, mode);
    } else {
        tr.p_hat = cfg.belief_known ? cfg.initial_belief : 0.5;
    }
    return tr;
}

Action pick_action(const PolicySpec& spec, Belief p_hat, const EngineSetup& eng) {
    switch (spec.kind) {
        case PolicyKind::Lazy:
            return Action::LP;
        case PolicyKind::Greedy:
            return p_hat <= eng.kappa_value ? Action::HP : Action::LP;
        case PolicyKind::Threshold:
        case PolicyKind::PerfectInfo:
            return p_hat <= spec.tau ? Action::HP : Action::LP;
    }
    throw solver_error("unreachable policy kind");
}

double realized_cost(Action u, ConsumerState s, const EngineSetup& eng, SplitMix64& rng) {
    if (eng.det_costs != nullptr) {
        if (u == Action::LP) return eng.det_costs->c_l;
        return s == ConsumerState::Normal ? eng.det_costs->c_hn : eng.det_costs->c_ha;
    }
    const double u_cost = rng.uniform();  // drawn before the transition uniform
    const CostDistribution& d = u == Action::LP
                                    ? eng.dists->lp
                                    : (s == ConsumerState::Normal ? eng.dists->hp_normal
                                                                  : eng.dists->hp_alerted);
    return d.quantile(u_cost);
}

EpisodeResult run_one(const EngineSetup& eng, const PolicySpec& spec, const SimConfig& cfg,
                      int horizon, std::uint64_t episode) {
    SplitMix64 rng = SplitMix64::substream(cfg.seed, episode);
    ConsumerState state = rng.uniform() < cfg.initial_belief ? ConsumerState::Alerted
                                                             : ConsumerState::Normal;
    Tracker tracker = make_tracker(spec, cfg, eng);

    EpisodeResult out;
    out.episode = episode;
    out.steps.reserve(horizon);
    double disc = 1.0;
    double cum = 0.0;
    for (int t = 0; t < horizon; ++t) {
        StepRecord rec;
        rec.state = state;
        rec.belief_estimate = tracker.current();
        rec.action = pick_action(spec, rec.belief_estimate, eng);
        rec.cost = realized_cost(rec.action, state, eng, rng);
        cum += disc * rec.cost;
        disc *= eng.beta;
        rec.discounted_cum = cum;
        out.steps.push_back(rec);

        tracker.observe(rec.action, rec.cost, state, eng);
        const TransitionModel& chain = rec.action == Action::HP ? eng.hp_chain : eng.lp_chain;
        const double to_alerted =
            state == ConsumerState::Normal ? chain.lambda_na : chain.lambda_aa;
        state = rng.uniform() < to_alerted ? ConsumerState::Alerted : ConsumerState::Normal;
    }
    return out;
}

Aggregate aggregate_runs(const EngineSetup& eng, const PolicySpec& spec, const SimConfig& cfg) {
    check_config(cfg);
    const int horizon = resolved_horizon(eng, cfg);
    std::vector<double> mean(horizon, 0.0);
    std::vector<double> m2(horizon, 0.0);
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const EpisodeResult r = run_one(eng, spec, cfg, horizon, std::uint64_t(ep));
        const double n = ep + 1;
        for (int t = 0; t < horizon; ++t) {
            const double x = r.steps[t].discounted_cum;
            const double delta = x - mean[t];
            mean[t] += delta / n;
            m2[t] += delta * (x - mean[t]);
        }
    }
    Aggregate agg;
    agg.mean = std::move(mean);
    agg.se.assign(horizon, 0.0);
    agg.episodes = cfg.episodes;
    agg.horizon = horizon;
    if (cfg.episodes > 1) {
        const double n = cfg.episodes;
        for (int t = 0; t < horizon; ++t) agg.se[t] = std::sqrt(m2[t] / (n - 1.0) / n);
    }
    return agg;
}

EngineSetup det_setup(const TransitionModel& lp, const TransitionModel& hp, const CostModel& c) {
    EngineSetup eng;
    eng.lp_chain = lp;
    eng.hp_chain = hp;
    eng.det_costs = &c;
    eng.beta = c.beta;
    eng.kappa_value = kappa(c);
    return eng;
}

EngineSetup noisy_setup(const TransitionModel& m, double beta, const CostDistributionSet& d) {
    EngineSetup eng;
    eng.lp_chain = m;
    eng.hp_chain = m;
    eng.dists = &d;
    eng.beta = beta;
    eng.kappa_value =
        kappa(CostModel{d.lp.mean(), d.hp_normal.mean(), d.hp_alerted.mean(), beta});
    return eng;
}

}  // namespace

Aggregate run_policy(const TransitionModel& m, const CostModel& c, const PolicySpec& spec,
                     const SimConfig& cfg) {
    return aggregate_runs(det_setup(m, m, c), spec, cfg);
}

Aggregate run_policy(const CouponDependentModel& m, const CostModel& c, const PolicySpec& spec,
                     const SimConfig& cfg) {
    return aggregate_runs(det_setup(m.lp_chain, m.hp_chain, c), spec, cfg);
}

Aggregate run_policy(const TransitionModel& m, double beta, const CostDistributionSet& d,
                     const PolicySpec& spec, const SimConfig& cfg) {
    if (!(beta > 0.0 && beta < 1.0)) throw validation_error("discount factor must be in (0,1)");
    return aggregate_runs(noisy_setup(m, beta, d), spec, cfg);
}

EpisodeResult run_episode_trace(const TransitionModel& m, const CostModel& c,
                                const PolicySpec& spec, const SimConfig& cfg,
                                std::uint64_t episode) {
    check_config(cfg);
    const EngineSetup eng = det_setup(m, m, c);
    return run_one(eng, spec, cfg, resolved_horizon(eng, cfg), episode);
}

EpisodeResult run_episode_trace(const TransitionModel& m, double beta,
                                const CostDistributionSet& d, const PolicySpec& spec,
                                const SimConfig& cfg, std::uint64_t episode) {
    check_config(cfg);
    if (!(beta > 0.0 && beta < 1.0)) throw validation_error("discount factor must be in (0,1)");
    const EngineSetup eng = noisy_setup(m, beta, d);
    return run_one(eng, spec, cfg, resolved_horizon(eng, cfg), episode);
}

}  // namespace couponmdp
