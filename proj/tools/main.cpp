// Command-line front end: threshold | sweep | simulate | region | estimate.
// Exit codes: 0 success, 2 validation, 3 solver, 4 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "couponmdp/coupon_dependent.hpp"
#include "couponmdp/csv.hpp"
#include "couponmdp/errors.hpp"
#include "couponmdp/model.hpp"
#include "couponmdp/noisy.hpp"
#include "couponmdp/simulate.hpp"
#include "couponmdp/threshold.hpp"
#include "couponmdp/value_iteration.hpp"

using json = nlohmann::json;
using namespace couponmdp;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    bool oracle = false;
    int grid = 2001;
    double tol = 1e-9;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw validation_error(std::string("config is not valid JSON: ") + e.what());
    }
}

const json& require_object(const json& cfg, const char* key) {
    if (!cfg.contains(key) || !cfg[key].is_object()) {
        throw validation_error(std::string("config needs object field '") + key + "'");
    }
    return cfg[key];
}

double require_num(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw validation_error(std::string("config needs numeric field '") + key + "'");
    }
    return j[key].get<double>();
}

double num_or(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) {
        throw validation_error(std::string("config field '") + key + "' must be numeric");
    }
    return j[key].get<double>();
}

TransitionModel parse_chain(const json& j) {
    const double lna = require_num(j, "lambda_na");
    const double laa = require_num(j, "lambda_aa");
    // Weak ordering only: sweeps legitimately visit chains outside the strict
    // consumer-inertia region, and the solvers validate what they rely on.
    if (lna > laa) {
        throw validation_error(
            "consumer-inertia constraints violated: require lambda_na <= lambda_aa");
    }
    return TransitionModel::permissive(lna, laa);
}

CostModel parse_costs(const json& cfg) {
    const json& j = require_object(cfg, "costs");
    return CostModel::checked(require_num(j, "c_l"), require_num(j, "c_hn"),
                              require_num(j, "c_ha"), require_num(j, "beta"));
}

CostDistribution parse_distribution(const json& j) {
    const std::string family = j.value("family", "uniform");
    if (family == "uniform") {
        return CostDistribution::uniform(require_num(j, "lo"), require_num(j, "hi"));
    }
    if (family == "discrete") {
        if (!j.contains("support") || !j.contains("mass")) {
            throw validation_error("discrete distribution needs 'support' and 'mass' arrays");
        }
        return CostDistribution::discrete(j["support"].get<std::vector<double>>(),
                                          j["mass"].get<std::vector<double>>());
    }
    throw validation_error("unknown distribution family: " + family);
}

std::optional<CostDistributionSet> parse_distributions(const json& cfg) {
    if (!cfg.contains("distributions")) return std::nullopt;
    const json& j = require_object(cfg, "distributions");
    CostDistributionSet d;
    d.lp = parse_distribution(require_object(j, "lp"));
    d.hp_normal = parse_distribution(require_object(j, "hp_normal"));
    d.hp_alerted = parse_distribution(require_object(j, "hp_alerted"));
    return d;
}

std::optional<CouponDependentModel> parse_cd(const json& cfg, const TransitionModel& lp) {
    if (!cfg.contains("hp_model")) return std::nullopt;
    return CouponDependentModel::checked(lp, parse_chain(require_object(cfg, "hp_model")));
}

const char* branch_name(Branch b) { return b == Branch::TtauGE ? "drift_ge_tau" : "drift_lt_tau"; }

const char* case_name(LambdaCase c) {
    return c == LambdaCase::LambdaNaAboveTau ? "lambda_na_above_tau" : "lambda_na_below_tau";
}

const char* action_name(Action a) { return a == Action::HP ? "hp" : "lp"; }

const char* state_name(ConsumerState s) {
    return s == ConsumerState::Normal ? "normal" : "alerted";
}

json solution_json(const ThresholdSolution& s) {
    json out;
    out["tau"] = s.tau;
    out["kappa"] = s.kappa;
    out["p_f"] = s.p_f;
    out["branch"] = branch_name(s.branch);
    out["lambda_case"] = case_name(s.lambda_case);
    out["v_lambda_na"] = s.v_lambda_na;
    out["v_lambda_aa"] = s.v_lambda_aa;
    out["residual"] = s.residual;
    out["tie_break"] = s.tie_break;
    if (s.n_star) out["n_star"] = *s.n_star;
    if (s.cd_case != 0) out["cd_case"] = s.cd_case;
    return out;
}

void emit_json(const json& out, const CliOptions& opt) {
    const std::string text = out.dump(2) + "\n";
    if (opt.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(opt.out_path, std::ios::binary);
    if (!f || !(f << text)) throw io_error("cannot write output file: " + opt.out_path);
}

std::vector<double> linspace(double lo, double hi, int steps) {
    if (steps < 1) throw validation_error("sweep axis needs at least 1 step");
    std::vector<double> v(steps);
    for (int i = 0; i < steps; ++i) {
        v[i] = steps == 1 ? lo : lo + (hi - lo) * double(i) / double(steps - 1);
    }
    return v;
}

// ---- threshold ----

int cmd_threshold(const CliOptions& opt) {
    const json cfg = load_config(opt.config_path);
    const TransitionModel model = parse_chain(require_object(cfg, "model"));
    const CostModel costs = parse_costs(cfg);
    const auto cd = parse_cd(cfg, model);

    ThresholdSolution sol = cd ? solve_threshold_cd(*cd, costs) : solve_threshold(model, costs);
    json out = solution_json(sol);

    if (!cd) {
        try {
            const RegimeBounds b = regime_bounds(model, costs);
            json jb;
            jb["lambda1"] = b.lambda1;
            jb["lambda2"] = b.lambda2;
            jb["tau_upper"] = b.tau_upper;
            if (b.closed_form_tau) jb["closed_form_tau"] = *b.closed_form_tau;
            out["bounds"] = jb;
        } catch (const solver_error&) {
            // bounds are informational; skip when the regime boundary has no root
        }
    }

    if (const auto dists = parse_distributions(cfg)) {
        std::optional<Belief> p0;
        if (cfg.contains("initial_belief")) p0 = require_num(cfg, "initial_belief");
        const ThresholdVariants v = threshold_variants(*dists, model, costs.beta, p0);
        out["variants"] = {{"tau_avg", v.tau_avg},
                           {"tau_max", v.tau_max},
                           {"tau_min", v.tau_min},
                           {"tau_r", v.tau_r}};
    }

    if (opt.oracle) {
        const ValueTable vt = cd ? vi_oracle_cd(*cd, costs, opt.grid, opt.tol)
                                 : solve_two_state(model, costs, opt.grid, opt.tol);
        out["tau_oracle"] = extract_threshold(vt);
        out["oracle"] = {{"grid", opt.grid}, {"residual", vt.residual}, {"sweeps", vt.sweeps}};
    }

    emit_json(out, opt);
    return 0;
}

// ---- sweep ----

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

SweepAxis parse_axis(const json& j) {
    SweepAxis ax;
    if (!j.contains("axis") || !j["axis"].is_string()) {
        throw validation_error("sweep needs string field 'axis'");
    }
    ax.name = j["axis"].get<std::string>();
    if (ax.name.empty()) throw validation_error("sweep axis name is empty");
    static const char* known[] = {"lambda_na", "lambda_aa", "c_l", "c_hn", "c_ha", "beta"};
    bool ok = false;
    for (const char* k : known) ok = ok || ax.name == k;
    if (!ok) throw validation_error("unknown sweep axis: " + ax.name);
    ax.values = linspace(require_num(j, "lo"), require_num(j, "hi"),
                         static_cast<int>(require_num(j, "steps")));
    return ax;
}

void apply_axis(const std::string& name, double v, double& lambda_na, double& lambda_aa,
                double& c_l, double& c_hn, double& c_ha, double& beta) {
    if (name == "lambda_na") lambda_na = v;
    else if (name == "lambda_aa") lambda_aa = v;
    else if (name == "c_l") c_l = v;
    else if (name == "c_hn") c_hn = v;
    else if (name == "c_ha") c_ha = v;
    else beta = v;
}

int cmd_sweep(const CliOptions& opt) {
    const json cfg = load_config(opt.config_path);
    if (cfg.contains("hp_model")) {
        throw validation_error("sweep supports the action-independent model only");
    }
    const TransitionModel model = parse_chain(require_object(cfg, "model"));
    const CostModel costs = parse_costs(cfg);
    if (opt.out_path.empty()) throw validation_error("sweep requires --out");

    const json& sj = require_object(cfg, "sweep");
    const SweepAxis ax1 = parse_axis(sj);
    std::optional<SweepAxis> ax2;
    if (sj.contains("axis2")) ax2 = parse_axis(require_object(sj, "axis2"));

    CsvWriter w(opt.out_path);
    std::vector<std::string> header{ax1.name};
    if (ax2) header.push_back(ax2->name);
    for (const char* c : {"tau", "kappa", "p_f", "lambda_case", "branch", "residual"}) {
        header.push_back(c);
    }
    if (opt.oracle) header.push_back("tau_oracle");
    w.row(header);

    const std::vector<double> inner = ax2 ? ax2->values : std::vector<double>{0.0};
    for (double v1 : ax1.values) {
        for (std::size_t i2 = 0; i2 < inner.size(); ++i2) {
            double lna = model.lambda_na, laa = model.lambda_aa;
            double cl = costs.c_l, chn = costs.c_hn, cha = costs.c_ha, beta = costs.beta;
            apply_axis(ax1.name, v1, lna, laa, cl, chn, cha, beta);
            if (ax2) apply_axis(ax2->name, inner[i2], lna, laa, cl, chn, cha, beta);
            if (lna > laa) {
                throw validation_error(
                    "consumer-inertia constraints violated: require lambda_na <= lambda_aa");
            }
            const TransitionModel m = TransitionModel::permissive(lna, laa);
            const CostModel c = CostModel::checked(cl, chn, cha, beta);
            const ThresholdSolution s = solve_threshold(m, c);
            std::vector<std::string> row{csv_num(v1)};
            if (ax2) row.push_back(csv_num(inner[i2]));
            row.push_back(csv_num(s.tau));
            row.push_back(csv_num(s.kappa));
            row.push_back(csv_num(s.p_f));
            row.push_back(case_name(s.lambda_case));
            row.push_back(branch_name(s.branch));
            row.push_back(csv_num(s.residual));
            if (opt.oracle) {
                row.push_back(csv_num(extract_threshold(solve_two_state(m, c, opt.grid, opt.tol))));
            }
            w.row(row);
        }
    }
    return 0;
}

// ---- simulate ----

PolicySpec parse_policy(const json& j, const TransitionModel& model, const CostModel& costs,
                        const std::optional<CouponDependentModel>& cd) {
    PolicySpec spec;
    const std::string kind = j.value("kind", "threshold");
    if (kind == "threshold") spec.kind = PolicyKind::Threshold;
    else if (kind == "greedy") spec.kind = PolicyKind::Greedy;
    else if (kind == "lazy") spec.kind = PolicyKind::Lazy;
    else if (kind == "perfect") spec.kind = PolicyKind::PerfectInfo;
    else throw validation_error("unknown policy kind: " + kind);

    const std::string est = j.value("estimator", "exact");
    if (est == "exact") spec.estimator = EstimatorKind::ExactBelief;
    else if (est == "map_state") spec.estimator = EstimatorKind::MapState;
    else if (est == "bayes_mean") spec.estimator = EstimatorKind::BayesMean;
    else if (est == "bayes_map") spec.estimator = EstimatorKind::BayesMap;
    else throw validation_error("unknown estimator: " + est);

    if (spec.kind == PolicyKind::Threshold || spec.kind == PolicyKind::PerfectInfo) {
        if (j.contains("tau")) {
            spec.tau = require_num(j, "tau");
        } else {
            spec.tau = cd ? solve_threshold_cd(*cd, costs).tau : solve_threshold(model, costs).tau;
        }
    }
    return spec;
}

std::string policy_column(const json& j, const PolicySpec& spec) {
    if (j.contains("name") && j["name"].is_string()) return j["name"].get<std::string>();
    std::string base;
    switch (spec.kind) {
        case PolicyKind::Threshold: base = "threshold"; break;
        case PolicyKind::Greedy: base = "greedy"; break;
        case PolicyKind::Lazy: base = "lazy"; break;
        case PolicyKind::PerfectInfo: base = "perfect"; break;
    }
    if (spec.kind == PolicyKind::Threshold && spec.estimator != EstimatorKind::ExactBelief) {
        switch (spec.estimator) {
            case EstimatorKind::MapState: base += "_map_state"; break;
            case EstimatorKind::BayesMean: base += "_bayes_mean"; break;
            case EstimatorKind::BayesMap: base += "_bayes_map"; break;
            default: break;
        }
    }
    return base;
}

SimConfig parse_sim(const json& cfg, const CliOptions& opt, const TransitionModel& model) {
    const json& sj = require_object(cfg, "sim");
    SimConfig sc;
    sc.episodes = static_cast<int>(num_or(sj, "episodes", 1000));
    sc.horizon = static_cast<int>(num_or(sj, "horizon", 0));
    sc.seed = static_cast<std::uint64_t>(num_or(sj, "seed", 0));
    if (opt.seed) sc.seed = *opt.seed;
    if (sj.contains("belief_known")) {
        if (!sj["belief_known"].is_boolean()) {
            throw validation_error("sim.belief_known must be boolean");
        }
        sc.belief_known = sj["belief_known"].get<bool>();
    }
    sc.posterior_grid = static_cast<int>(num_or(sj, "posterior_grid", 1001));
    sc.initial_belief = num_or(cfg, "initial_belief", stationary_belief(model));
    return sc;
}

int cmd_simulate(const CliOptions& opt) {
    const json cfg = load_config(opt.config_path);
    const TransitionModel model = parse_chain(require_object(cfg, "model"));
    const CostModel costs = parse_costs(cfg);
    const auto cd = parse_cd(cfg, model);
    const auto dists = parse_distributions(cfg);
    if (opt.out_path.empty()) throw validation_error("simulate requires --out");
    if (cd && dists) {
        throw validation_error("coupon-dependent simulation supports deterministic costs only");
    }

    const json& sj = require_object(cfg, "sim");
    if (!sj.contains("policies") || !sj["policies"].is_array() || sj["policies"].empty()) {
        throw validation_error("sim needs a nonempty 'policies' array");
    }
    SimConfig sc = parse_sim(cfg, opt, model);
    if (sc.horizon == 0) {
        const double c_max =
            dists ? std::max({dists->lp.max_value(), dists->hp_normal.max_value(),
                              dists->hp_alerted.max_value()})
                  : std::max({costs.c_l, costs.c_hn, costs.c_ha});
        sc.horizon = default_horizon(costs.beta, c_max);
    }

    std::vector<std::string> names;
    std::vector<Aggregate> results;
    for (const json& pj : sj["policies"]) {
        const PolicySpec spec = parse_policy(pj, model, costs, cd);
        std::string name = policy_column(pj, spec);
        for (std::size_t k = 0; k < names.size(); ++k) {
            if (names[k] == name) name += "_" + std::to_string(results.size());
        }
        names.push_back(name);
        if (dists) {
            results.push_back(run_policy(model, costs.beta, *dists, spec, sc));
        } else if (cd) {
            results.push_back(run_policy(*cd, costs, spec, sc));
        } else {
            results.push_back(run_policy(model, costs, spec, sc));
        }
    }

    CsvWriter w(opt.out_path);
    std::vector<std::string> header{"step"};
    for (const std::string& n : names) {
        header.push_back("mean_" + n);
        header.push_back("se_" + n);
    }
    w.row(header);
    for (int t = 0; t < sc.horizon; ++t) {
        std::vector<std::string> row{std::to_string(t)};
        for (const Aggregate& a : results) {
            row.push_back(csv_num(a.mean[t]));
            row.push_back(csv_num(a.se[t]));
        }
        w.row(row);
    }
    return 0;
}

// ---- region ----

int cmd_region(const CliOptions& opt) {
    const json cfg = load_config(opt.config_path);
    if (opt.out_path.empty()) throw validation_error("region requires --out");

    if (cfg.contains("multistate")) {
        const json& mj = require_object(cfg, "multistate");
        if (!mj.contains("transition") || !mj.contains("hp_costs")) {
            throw validation_error("multistate needs 'transition' and 'hp_costs'");
        }
        const MultiStateModel m = MultiStateModel::checked(
            mj["transition"].get<std::vector<std::vector<double>>>(),
            mj["hp_costs"].get<std::vector<double>>(), require_num(mj, "lp_cost"),
            require_num(mj, "beta"));
        const int denom = static_cast<int>(num_or(mj, "resolution", 50));
        export_csv(solve_multistate(m, denom, opt.tol), opt.out_path);
        return 0;
    }

    const TransitionModel model = parse_chain(require_object(cfg, "model"));
    const CostModel costs = parse_costs(cfg);
    const auto cd = parse_cd(cfg, model);
    const json& rj = require_object(cfg, "region");
    const json& clj = require_object(rj, "c_l");
    const json& chaj = require_object(rj, "c_ha");
    const auto cl_values = linspace(require_num(clj, "lo"), require_num(clj, "hi"),
                                    static_cast<int>(require_num(clj, "steps")));
    const auto cha_values = linspace(require_num(chaj, "lo"), require_num(chaj, "hi"),
                                     static_cast<int>(require_num(chaj, "steps")));
    if (cl_values.size() * cha_values.size() > 1000000) {
        throw validation_error("region grid exceeds 1e6 cells");
    }

    const RegionMask mask = cd ? lp_only_region(*cd, costs, cl_values, cha_values)
                               : lp_only_region(model, costs, cl_values, cha_values);
    CsvWriter w(opt.out_path);
    w.row({"c_l", "c_ha", "lp_only", "tau", "closed_form"});
    for (const RegionCell& cell : mask.cells) {
        w.row({csv_num(cell.c_l), csv_num(cell.c_ha), cell.lp_only ? "1" : "0",
               csv_num(cell.tau), cell.closed_form ? "1" : "0"});
    }
    return 0;
}

// ---- estimate ----

int cmd_estimate(const CliOptions& opt) {
    const json cfg = load_config(opt.config_path);
    const TransitionModel model = parse_chain(require_object(cfg, "model"));
    const CostModel costs = parse_costs(cfg);
    const auto dists = parse_distributions(cfg);
    if (opt.out_path.empty()) throw validation_error("estimate requires --out");
    if (cfg.contains("hp_model")) {
        throw validation_error("estimate supports the action-independent model only");
    }

    const json& sj = require_object(cfg, "sim");
    if (!sj.contains("policies") || !sj["policies"].is_array() || sj["policies"].empty()) {
        throw validation_error("sim needs a nonempty 'policies' array");
    }
    const PolicySpec spec = parse_policy(sj["policies"][0], model, costs, std::nullopt);
    SimConfig sc = parse_sim(cfg, opt, model);
    const auto episode = static_cast<std::uint64_t>(num_or(sj, "episode", 0));

    const EpisodeResult r =
        dists ? run_episode_trace(model, costs.beta, *dists, spec, sc, episode)
              : run_episode_trace(model, costs, spec, sc, episode);

    CsvWriter w(opt.out_path);
    w.row({"step", "state", "belief_estimate", "action", "cost", "discounted_cum"});
    for (std::size_t t = 0; t < r.steps.size(); ++t) {
        const StepRecord& s = r.steps[t];
        w.row({std::to_string(t), state_name(s.state), csv_num(s.belief_estimate),
               action_name(s.action), csv_num(s.cost), csv_num(s.discounted_cum)});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"threshold-policy toolkit for the coupon POMDP"};
    app.require_subcommand(1);

    CliOptions opt;
    std::uint64_t seed_value = 0;

    auto add_common = [&](CLI::App* sub, bool with_out, bool with_oracle, bool with_seed) {
        sub->add_option("--config", opt.config_path, "JSON configuration file")->required();
        if (with_out) sub->add_option("--out", opt.out_path, "output file path");
        if (with_oracle) {
            sub->add_flag("--oracle", opt.oracle, "cross-check with value iteration");
        }
        sub->add_option("--grid", opt.grid, "value-iteration grid size")
            ->check(CLI::PositiveNumber);
        sub->add_option("--tol", opt.tol, "solver tolerance")->check(CLI::PositiveNumber);
        if (with_seed) {
            sub->add_option("--seed", seed_value, "override the simulation seed");
        }
    };

    CLI::App* c_threshold = app.add_subcommand("threshold", "solve the optimal threshold");
    add_common(c_threshold, true, true, false);
    CLI::App* c_sweep = app.add_subcommand("sweep", "threshold curves over a parameter axis");
    add_common(c_sweep, true, true, false);
    CLI::App* c_simulate = app.add_subcommand("simulate", "Monte Carlo policy comparison");
    add_common(c_simulate, true, false, true);
    CLI::App* c_region = app.add_subcommand("region", "LP-only region or simplex value map");
    add_common(c_region, true, false, false);
    CLI::App* c_estimate = app.add_subcommand("estimate", "single-episode belief trace");
    add_common(c_estimate, true, false, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (c_simulate->count("--seed") > 0 || c_estimate->count("--seed") > 0) {
        opt.seed = seed_value;
    }

    try {
        if (app.got_subcommand(c_threshold)) return cmd_threshold(opt);
        if (app.got_subcommand(c_sweep)) return cmd_sweep(opt);
        if (app.got_subcommand(c_simulate)) return cmd_simulate(opt);
        if (app.got_subcommand(c_region)) return cmd_region(opt);
        return cmd_estimate(opt);
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const solver_error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const json::exception& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    }
}
