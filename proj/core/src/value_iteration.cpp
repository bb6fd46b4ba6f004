#include "couponmdp/value_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <utility>

#include "couponmdp/csv.hpp"

namespace couponmdp {

namespace {

struct Lerp {
    int i0;
    double w1;  // weight of point i0+1
};

Lerp locate(double x, int n) {
    const double pos = x * (n - 1);
    int i0 = static_cast<int>(pos);
    if (i0 >= n - 1) i0 = n - 2;
    if (i0 < 0) i0 = 0;
    return {i0, pos - i0};
}

double lerp(const std::vector<double>& v, const Lerp& l) {
    return v[l.i0] * (1.0 - l.w1) + v[l.i0 + 1] * l.w1;
}

int max_sweeps_for(double tol, double beta, double c_max) {
    const double target = tol * (1.0 - beta) / std::max(c_max, 1e-300);
    if (target >= 1.0) return 8;
    return static_cast<int>(std::ceil(std::log(target) / std::log(beta))) + 100;
}

}  // namespace

BeliefGrid BeliefGrid::uniform(int n) {
    if (n < 2) throw validation_error("belief grid needs at least 2 points");
    BeliefGrid g;
    g.points.resize(n);
    for (int i = 0; i < n; ++i) g.points[i] = static_cast<double>(i) / (n - 1);
    g.resolution = 1.0 / (n - 1);
    return g;
}

ValueTable solve_two_state_anchored(const TransitionModel& m, Belief anchor_na,
                                    Belief anchor_aa, const CostModel& c, int grid_size,
                                    double tol) {
    if (grid_size < 101) throw validation_error("two-state oracle grid must have >= 101 points");
    if (tol <= 0.0) throw validation_error("tolerance must be positive");
    check_belief(anchor_na);
    check_belief(anchor_aa);

    ValueTable vt;
    vt.grid = BeliefGrid::uniform(grid_size);
    const int n = grid_size;
    const auto& p = vt.grid.points;

    std::vector<Lerp> drift(n);
    for (int i = 0; i < n; ++i) drift[i] = locate(one_step_transition(p[i], m), n);
    const Lerp at_na = locate(anchor_na, n);
    const Lerp at_aa = locate(anchor_aa, n);

    const double c_max = std::max({c.c_l, c.c_hn, c.c_ha});
    const int max_sweeps = max_sweeps_for(tol, c.beta, c_max);

    std::vector<double> v(n, 0.0), next(n, 0.0);
    bool converged = false;
    while (vt.sweeps < max_sweeps) {
        const double a_na = lerp(v, at_na);
        const double a_aa = lerp(v, at_aa);
        double residual = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v_lp = c.c_l + c.beta * lerp(v, drift[i]);
            const double v_hp = (1.0 - p[i]) * c.c_hn + p[i] * c.c_ha +
                                c.beta * ((1.0 - p[i]) * a_na + p[i] * a_aa);
            next[i] = std::min(v_lp, v_hp);
            residual = std::max(residual, std::abs(next[i] - v[i]));
        }
        v.swap(next);
        ++vt.sweeps;
        vt.residual = residual;
        vt.residual_history.push_back(residual);
        if (residual <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw solver_error("two-state value iteration did not converge in " +
                           std::to_string(max_sweeps) + " sweeps");
    }

    vt.values = v;
    vt.actions.resize(n);
    const double a_na = lerp(v, at_na);
    const double a_aa = lerp(v, at_aa);
    for (int i = 0; i < n; ++i) {
        const double v_lp = c.c_l + c.beta * lerp(v, drift[i]);
        const double v_hp = (1.0 - p[i]) * c.c_hn + p[i] * c.c_ha +
                            c.beta * ((1.0 - p[i]) * a_na + p[i] * a_aa);
        vt.actions[i] = v_hp <= v_lp ? Action::HP : Action::LP;
    }
    return vt;
}

ValueTable solve_two_state(const TransitionModel& m, const CostModel& c, int grid_size,
                           double tol) {
    return solve_two_state_anchored(m, m.lambda_na, m.lambda_aa, c, grid_size, tol);
}

double extract_threshold(const ValueTable& vt) {
    const auto& a = vt.actions;
    const int n = static_cast<int>(a.size());
    int last_hp = -1;
    for (int i = 0; i < n; ++i) {
        if (a[i] == Action::HP) last_hp = i;
    }
    if (last_hp < 0) return 0.0;
    for (int i = 0; i < last_hp; ++i) {
        if (a[i] != Action::HP) {
            throw solver_error("threshold structure violated: HP region is not a prefix "
                               "interval of the belief grid");
        }
    }
    if (last_hp == n - 1) return 1.0;
    return 0.5 * (vt.grid.points[last_hp] + vt.grid.points[last_hp + 1]);
}

StructureReport check_structure(const ValueTable& vt) {
    StructureReport rep;
    const auto& v = vt.values;
    const int n = static_cast<int>(v.size());
    double worst_mono = 0.0;
    for (int i = 0; i + 1 < n; ++i) worst_mono = std::min(worst_mono, v[i + 1] - v[i]);
    double worst_conc = 0.0;
    for (int i = 1; i + 1 < n; ++i)
        worst_conc = std::max(worst_conc, v[i + 1] - 2.0 * v[i] + v[i - 1]);
    rep.worst_monotonicity = worst_mono;
    rep.worst_concavity = worst_conc;
    rep.monotone = worst_mono >= -1e-9;
    rep.concave = worst_conc <= 1e-9;
    rep.hp_prefix = true;
    bool seen_lp = false;
    for (const Action a : vt.actions) {
        if (a == Action::LP) {
            seen_lp = true;
        } else if (seen_lp) {
            rep.hp_prefix = false;
            break;
        }
    }
    return rep;
}

double finite_horizon_check(const TransitionModel& m, const CostModel& c, int horizon,
                            Belief p0) {
    if (horizon < 0 || horizon > 20) {
        throw validation_error("finite-horizon check supports horizons in [0, 20]");
    }
    check_belief(p0);
    // Exact recursion; the reachable set branches only through the two anchors.
    const std::function<double(double, int)> value = [&](double p, int h) -> double {
        if (h == 0) return 0.0;
        const double v_lp = c.c_l + c.beta * value(one_step_transition(p, m), h - 1);
        const double v_hp = (1.0 - p) * c.c_hn + p * c.c_ha +
                            c.beta * ((1.0 - p) * value(m.lambda_na, h - 1) +
                                      p * value(m.lambda_aa, h - 1));
        return std::min(v_lp, v_hp);
    };
    return value(p0, horizon);
}

void export_csv(const ValueTable& vt, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"p", "value", "action"});
    for (size_t i = 0; i < vt.values.size(); ++i) {
        csv.row({csv_num(vt.grid.points[i]), csv_num(vt.values[i]),
                 vt.actions[i] == Action::HP ? "HP" : "LP"});
    }
}

// ---- multi-state ----

MultiStateModel MultiStateModel::checked(std::vector<std::vector<double>> transition,
                                         std::vector<double> hp_costs, double lp_cost,
                                         double beta) {
    const size_t s = hp_costs.size();
    if (s < 2) throw validation_error("multi-state model needs at least 2 states");
    if (transition.size() != s) {
        throw validation_error("transition matrix row count must match the cost vector");
    }
    for (const auto& row : transition) {
        if (row.size() != s) throw validation_error("transition matrix must be square");
        double sum = 0.0;
        for (double q : row) {
            if (!(q >= -kProbTol && q <= 1.0 + kProbTol)) {
                throw validation_error("transition entries must be probabilities");
            }
            sum += q;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw validation_error("transition matrix rows must sum to 1");
        }
    }
    for (size_t i = 1; i + 1 < s; ++i) {
        if (hp_costs[i] > hp_costs[i + 1] + kProbTol) {
            throw validation_error("alerted HP costs must be nondecreasing across levels");
        }
    }
    if (!(hp_costs[0] <= lp_cost + kProbTol &&
          (s < 2 || lp_cost <= hp_costs[1] + kProbTol))) {
        throw validation_error("cost ordering violated: require c_hn <= c_l <= c_ha1");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw validation_error("discount beta must lie in (0,1)");
    }
    return MultiStateModel{std::move(transition), std::move(hp_costs), lp_cost, beta};
}

namespace {

// Sparse interpolation stencil: (point index, weight) pairs.
using Stencil = std::vector<std::pair<int, double>>;

struct SimplexGrid {
    int m;                                   // denominator
    int s;                                   // number of states
    std::vector<std::vector<int>> lattice;
    std::map<std::vector<int>, int> index;

    // Freudenthal interpolation in cumulative coordinates: locate the cell,
    // sort fractional parts descending (ties toward the higher coordinate),
    // and walk the vertex chain.
    Stencil weights(const std::vector<double>& y) const {
        const int k = s - 1;  // cumulative coordinates
        std::vector<double> cum(k);
        double acc = 0.0;
        for (int i = 0; i < k; ++i) {
            acc += y[i];
            cum[i] = std::clamp(acc * m, 0.0, static_cast<double>(m));
            if (i > 0) cum[i] = std::max(cum[i], cum[i - 1]);
        }
        std::vector<int> base(k);
        std::vector<double> frac(k);
        for (int i = 0; i < k; ++i) {
            base[i] = std::min(static_cast<int>(std::floor(cum[i])), m);
            frac[i] = cum[i] - base[i];
        }
        std::vector<int> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (frac[a] != frac[b]) return frac[a] > frac[b];
            return a > b;
        });
        std::vector<double> w(k + 1);
        w[0] = 1.0 - frac[order[0]];
        for (int j = 1; j < k; ++j) w[j] = frac[order[j - 1]] - frac[order[j]];
        w[k] = frac[order[k - 1]];

        Stencil out;
        std::vector<int> vert = base;
        for (int j = 0; j <= k; ++j) {
            if (j > 0) vert[order[j - 1]] += 1;
            if (w[j] > 1e-15) {
                std::vector<int> clamped = vert;
                for (int i = 0; i < k; ++i) {
                    clamped[i] = std::min(clamped[i], m);
                    if (i > 0) clamped[i] = std::max(clamped[i], clamped[i - 1]);
                }
                std::vector<int> x(s);
                x[0] = clamped[0];
                for (int i = 1; i < k; ++i) x[i] = clamped[i] - clamped[i - 1];
                x[k] = m - clamped[k - 1];
                out.emplace_back(index.at(x), w[j]);
            }
        }
        return out;
    }
};

SimplexGrid build_simplex_grid(int s, int m) {
    SimplexGrid g;
    g.m = m;
    g.s = s;
    std::vector<int> x(s, 0);
    const std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == s - 1) {
            x[pos] = left;
            g.index.emplace(x, static_cast<int>(g.lattice.size()));
            g.lattice.push_back(x);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            x[pos] = v;
            rec(pos + 1, left - v);
        }
    };
    rec(0, m);
    return g;
}

double stencil_dot(const Stencil& st, const std::vector<double>& v) {
    double out = 0.0;
    for (const auto& [j, w] : st) out += w * v[j];
    return out;
}

}  // namespace

SimplexValueTable solve_multistate(const MultiStateModel& mm, int denominator, double tol) {
    const int s = mm.num_states();
    if (s > 4) throw validation_error("multi-state solver supports at most 4 states");
    if (denominator < 2) throw validation_error("simplex resolution denominator must be >= 2");
    if (tol <= 0.0) throw validation_error("tolerance must be positive");

    SimplexGrid grid = build_simplex_grid(s, denominator);
    const int n = static_cast<int>(grid.lattice.size());
    if (n > 2000000) throw validation_error("simplex grid too fine: > 2e6 points");

    SimplexValueTable vt;
    vt.denominator = denominator;
    vt.lattice = grid.lattice;
    vt.points.resize(n);
    for (int i = 0; i < n; ++i) {
        vt.points[i].resize(s);
        for (int d = 0; d < s; ++d)
            vt.points[i][d] = static_cast<double>(grid.lattice[i][d]) / denominator;
    }

    // LP drift stencils (T(p) = p^T Lambda) and the per-state anchor stencils
    // (HP reveals the state; belief jumps to that state's transition row).
    std::vector<Stencil> drift(n);
    std::vector<double> hp_inst(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> t(s, 0.0);
        double inst = 0.0;
        for (int d = 0; d < s; ++d) {
            inst += vt.points[i][d] * mm.hp_costs[d];
            for (int e = 0; e < s; ++e) t[e] += vt.points[i][d] * mm.transition[d][e];
        }
        hp_inst[i] = inst;
        drift[i] = grid.weights(t);
    }
    std::vector<Stencil> anchors(s);
    for (int d = 0; d < s; ++d) anchors[d] = grid.weights(mm.transition[d]);

    const double c_max =
        std::max(mm.lp_cost, *std::max_element(mm.hp_costs.begin(), mm.hp_costs.end()));
    const int max_sweeps = max_sweeps_for(tol, mm.beta, c_max);

    std::vector<double> v(n, 0.0), next(n, 0.0), anchor_vals(s);
    bool converged = false;
    while (vt.sweeps < max_sweeps) {
        for (int d = 0; d < s; ++d) anchor_vals[d] = stencil_dot(anchors[d], v);
        double residual = 0.0;
        for (int i = 0; i < n; ++i) {
            double cont_hp = 0.0;
            for (int d = 0; d < s; ++d) cont_hp += vt.points[i][d] * anchor_vals[d];
            const double v_hp = hp_inst[i] + mm.beta * cont_hp;
            const double v_lp = mm.lp_cost + mm.beta * stencil_dot(drift[i], v);
            next[i] = std::min(v_lp, v_hp);
            residual = std::max(residual, std::abs(next[i] - v[i]));
        }
        v.swap(next);
        ++vt.sweeps;
        vt.residual = residual;
        if (residual <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw solver_error("multi-state value iteration did not converge in " +
                           std::to_string(max_sweeps) + " sweeps");
    }

    vt.values = v;
    vt.actions.resize(n);
    for (int d = 0; d < s; ++d) anchor_vals[d] = stencil_dot(anchors[d], v);
    for (int i = 0; i < n; ++i) {
        double cont_hp = 0.0;
        for (int d = 0; d < s; ++d) cont_hp += vt.points[i][d] * anchor_vals[d];
        const double v_hp = hp_inst[i] + mm.beta * cont_hp;
        const double v_lp = mm.lp_cost + mm.beta * stencil_dot(drift[i], v);
        vt.actions[i] = v_hp <= v_lp ? Action::HP : Action::LP;
    }
    return vt;
}

SimplexStructureReport check_structure(const SimplexValueTable& vt) {
    SimplexStructureReport rep;
    const int n = static_cast<int>(vt.lattice.size());
    std::map<std::vector<int>, int> index;
    for (int i = 0; i < n; ++i) index.emplace(vt.lattice[i], i);

    std::vector<int> hp;
    for (int i = 0; i < n; ++i)
        if (vt.actions[i] == Action::HP) hp.push_back(i);

    const int s = vt.lattice.empty() ? 0 : static_cast<int>(vt.lattice[0].size());
    std::vector<int> mid(s);
    for (size_t a = 0; a < hp.size(); ++a) {
        for (size_t b = a + 1; b < hp.size(); ++b) {
            bool representable = true;
            for (int d = 0; d < s; ++d) {
                const int sum = vt.lattice[hp[a]][d] + vt.lattice[hp[b]][d];
                if (sum % 2 != 0) {
                    representable = false;
                    break;
                }
                mid[d] = sum / 2;
            }
            if (!representable) continue;
            ++rep.checked_midpoints;
            if (vt.actions[index.at(mid)] != Action::HP) ++rep.violations;
        }
    }
    rep.hp_grid_convex = rep.violations == 0;
    return rep;
}

void export_csv(const SimplexValueTable& vt, const std::string& path) {
    CsvWriter csv(path);
    const int s = vt.points.empty() ? 0 : static_cast<int>(vt.points[0].size());
    std::vector<std::string> header;
    for (int d = 0; d < s; ++d) header.push_back("b" + std::to_string(d));
    header.push_back("value");
    header.push_back("action");
    csv.row(header);
    for (size_t i = 0; i < vt.values.size(); ++i) {
        std::vector<std::string> row;
        for (int d = 0; d < s; ++d) row.push_back(csv_num(vt.points[i][d]));
        row.push_back(csv_num(vt.values[i]));
        row.push_back(vt.actions[i] == Action::HP ? "HP" : "LP");
        csv.row(row);
    }
}

}  // namespace couponmdp
