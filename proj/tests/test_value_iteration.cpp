#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "couponmdp/errors.hpp"
#include "couponmdp/threshold.hpp"
#include "couponmdp/value_iteration.hpp"

using namespace couponmdp;

namespace {
const CostModel kCosts{3.0, 1.0, 12.0, 0.9};

double value_at(const ValueTable& vt, double p) {
    const auto& g = vt.grid.points;
    const auto it = std::lower_bound(g.begin(), g.end(), p - 1e-12);
    REQUIRE(it != g.end());
    REQUIRE(*it == doctest::Approx(p).epsilon(1e-9));
    return vt.values[static_cast<size_t>(it - g.begin())];
}
}  // namespace

TEST_CASE("BeliefGrid::uniform") {
    const auto g = BeliefGrid::uniform(5);
    REQUIRE(g.points.size() == 5);
    CHECK(g.points.front() == 0.0);
    CHECK(g.points.back() == 1.0);
    CHECK(g.resolution == doctest::Approx(0.25));
    CHECK_THROWS_AS(BeliefGrid::uniform(1), validation_error);
}

TEST_CASE("two-state value iteration matches the closed form") {
    const TransitionModel m{0.1, 0.7};
    const auto vt = solve_two_state(m, kCosts, 2001, 1e-9);
    CHECK(vt.residual <= 1e-9);
    CHECK(vt.sweeps == 207);
    CHECK(value_at(vt, 0.1) == doctest::Approx(24.46268703).epsilon(1e-8));
    CHECK(value_at(vt, 0.7) == doctest::Approx(28.31011707).epsilon(1e-8));
    CHECK(value_at(vt, 0.0) == doctest::Approx(23.01641833).epsilon(1e-8));
    CHECK(value_at(vt, 1.0) == doctest::Approx(28.47910536).epsilon(1e-8));

    const double tau_hat = extract_threshold(vt);
    CHECK(tau_hat == doctest::Approx(0.300750).epsilon(1e-9));
    CHECK(std::abs(tau_hat - solve_threshold(m, kCosts).tau) <= vt.grid.resolution);

    const auto rep = check_structure(vt);
    CHECK(rep.monotone);
    CHECK(rep.concave);
    CHECK(rep.hp_prefix);
}

TEST_CASE("value iteration on a kappa-clamped chain") {
    const TransitionModel m{0.25, 0.7};
    const auto vt = solve_two_state(m, kCosts, 2001, 1e-9);
    CHECK(extract_threshold(vt) == doctest::Approx(0.181750).epsilon(1e-9));
    CHECK(value_at(vt, 0.0) == doctest::Approx(28.0).epsilon(1e-7));
}

TEST_CASE("anchored sweep with the model's own anchors is the plain sweep") {
    const TransitionModel m{0.1, 0.7};
    const auto a = solve_two_state(m, kCosts, 501, 1e-9);
    const auto b = solve_two_state_anchored(m, m.lambda_na, m.lambda_aa, kCosts, 501, 1e-9);
    REQUIRE(a.values.size() == b.values.size());
    for (size_t i = 0; i < a.values.size(); ++i) {
        CHECK(a.values[i] == b.values[i]);
        CHECK(a.actions[i] == b.actions[i]);
    }
}

TEST_CASE("table values satisfy the Bellman equation off-grid") {
    const TransitionModel m{0.1, 0.7};
    const auto vt = solve_two_state(m, kCosts, 2001, 1e-9);
    auto interp = [&](Belief p) {
        const double x = p * (vt.grid.points.size() - 1);
        const size_t i0 = std::min(static_cast<size_t>(x), vt.grid.points.size() - 1);
        const size_t i1 = std::min(i0 + 1, vt.grid.points.size() - 1);
        const double f = x - static_cast<double>(i0);
        return (1.0 - f) * vt.values[i0] + f * vt.values[i1];
    };
    for (double p : {0.05, 0.33333, 0.5, 0.87}) {
        const double lhs = interp(p);
        const double rhs = std::min(bellman_backup(p, Action::HP, interp, m, kCosts),
                                    bellman_backup(p, Action::LP, interp, m, kCosts));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    }
}

TEST_CASE("sweep residuals contract at rate beta") {
    const auto vt = solve_two_state({0.1, 0.7}, kCosts, 501, 1e-9);
    REQUIRE(vt.residual_history.size() >= 10);
    for (size_t i = 1; i < vt.residual_history.size(); ++i) {
        if (vt.residual_history[i - 1] < 1e-10) break;
        CHECK(vt.residual_history[i] <=
              kCosts.beta * vt.residual_history[i - 1] + 1e-12);
    }
}

TEST_CASE("extract_threshold on hand-built tables") {
    ValueTable vt;
    vt.grid = BeliefGrid::uniform(5);
    vt.values.assign(5, 0.0);

    vt.actions = {Action::LP, Action::LP, Action::LP, Action::LP, Action::LP};
    CHECK(extract_threshold(vt) == 0.0);

    vt.actions = {Action::HP, Action::HP, Action::HP, Action::HP, Action::HP};
    CHECK(extract_threshold(vt) == 1.0);

    vt.actions = {Action::HP, Action::HP, Action::LP, Action::LP, Action::LP};
    CHECK(extract_threshold(vt) == doctest::Approx(0.375));

    vt.actions = {Action::HP, Action::LP, Action::HP, Action::LP, Action::LP};
    CHECK_THROWS_AS(extract_threshold(vt), solver_error);
}

TEST_CASE("finite_horizon_check") {
    const TransitionModel m{0.1, 0.7};
    CHECK(finite_horizon_check(m, kCosts, 0, 0.4) == 0.0);
    for (double p : {0.0, 0.15, 0.5, 1.0}) {
        const double expect = std::min(kCosts.c_l, instantaneous_cost(p, Action::HP, kCosts));
        CHECK(finite_horizon_check(m, kCosts, 1, p) == doctest::Approx(expect));
    }
    // Horizon values increase toward the infinite-horizon value.
    const auto vt = solve_two_state(m, kCosts, 2001, 1e-9);
    double prev = 0.0;
    for (int h = 1; h <= 20; ++h) {
        const double vh = finite_horizon_check(m, kCosts, h, 0.1);
        CHECK(vh >= prev - 1e-12);
        CHECK(vh <= value_at(vt, 0.1) + 1e-9);
        prev = vh;
    }
    CHECK(value_at(vt, 0.1) - prev <= std::pow(kCosts.beta, 20) * 30.0 + 1e-6);
    CHECK_THROWS_AS(finite_horizon_check(m, kCosts, 21, 0.1), validation_error);
}

TEST_CASE("MultiStateModel::checked validation") {
    const std::vector<std::vector<double>> good{{0.8, 0.2}, {0.3, 0.7}};
    CHECK_NOTHROW(MultiStateModel::checked(good, {1.0, 12.0}, 3.0, 0.9));
    CHECK_THROWS_AS(MultiStateModel::checked({{0.8, 0.3}, {0.3, 0.7}}, {1.0, 12.0}, 3.0, 0.9),
                    validation_error);  // row sum != 1
    CHECK_THROWS_AS(MultiStateModel::checked(good, {1.0}, 3.0, 0.9), validation_error);
    CHECK_THROWS_AS(MultiStateModel::checked(good, {1.0, 12.0}, 3.0, 1.0), validation_error);
    CHECK_THROWS_AS(MultiStateModel::checked({{1.1, -0.1}, {0.3, 0.7}}, {1.0, 12.0}, 3.0, 0.9),
                    validation_error);
}

TEST_CASE("two-level lattice solver agrees with the belief-grid solver") {
    const auto model = MultiStateModel::checked({{0.8, 0.2}, {0.3, 0.7}}, {1.0, 12.0}, 3.0, 0.9);
    const auto svt = solve_multistate(model, 1000, 1e-9);
    REQUIRE(svt.points.size() == 1001);

    // points[i][1] is the alerted-state probability; find the HP/LP breakpoint.
    std::vector<std::pair<double, Action>> by_p;
    for (size_t i = 0; i < svt.points.size(); ++i) {
        by_p.emplace_back(svt.points[i][1], svt.actions[i]);
    }
    std::sort(by_p.begin(), by_p.end());
    int last_hp = -1;
    for (size_t i = 0; i < by_p.size(); ++i) {
        if (by_p[i].second == Action::HP) last_hp = static_cast<int>(i);
    }
    REQUIRE(last_hp >= 0);
    REQUIRE(last_hp + 1 < static_cast<int>(by_p.size()));
    for (int i = 0; i < last_hp; ++i) CHECK(by_p[i].second == Action::HP);
    const double mid = 0.5 * (by_p[last_hp].first + by_p[last_hp + 1].first);

    const auto vt = solve_two_state(TransitionModel::permissive(0.2, 0.7), kCosts, 2001, 1e-9);
    CHECK(mid == doctest::Approx(extract_threshold(vt)).epsilon(2e-3));
    CHECK(extract_threshold(vt) == doctest::Approx(0.18175).epsilon(1e-9));
}

TEST_CASE("three-state lattice solution structure") {
    const auto model = MultiStateModel::checked(
        {{0.7, 0.2, 0.1}, {0.2, 0.5, 0.3}, {0.1, 0.2, 0.7}}, {1.0, 10.0, 20.0}, 7.0, 0.9);
    const auto svt = solve_multistate(model, 50, 1e-9);
    REQUIRE(svt.points.size() == 1326);
    CHECK(svt.residual <= 1e-9);

    int hp_count = 0;
    double hp_pn_min = 1.0, hp_pn_sum = 0.0, lp_pn_max = 0.0, lp_pn_sum = 0.0;
    size_t e_n = 0, e_a1 = 0, e_a2 = 0;
    for (size_t i = 0; i < svt.points.size(); ++i) {
        const double pn = svt.points[i][0];
        if (pn == 1.0) e_n = i;
        if (svt.points[i][1] == 1.0) e_a1 = i;
        if (svt.points[i][2] == 1.0) e_a2 = i;
        if (svt.actions[i] == Action::HP) {
            ++hp_count;
            hp_pn_min = std::min(hp_pn_min, pn);
            hp_pn_sum += pn;
        } else {
            lp_pn_max = std::max(lp_pn_max, pn);
            lp_pn_sum += pn;
        }
    }
    CHECK(hp_count == 500);
    CHECK(svt.actions[e_n] == Action::HP);
    CHECK(svt.actions[e_a1] == Action::LP);
    CHECK(svt.actions[e_a2] == Action::LP);
    CHECK(hp_pn_min == doctest::Approx(0.22).epsilon(1e-9));
    CHECK(lp_pn_max == doctest::Approx(0.52).epsilon(1e-9));
    CHECK(hp_pn_sum / hp_count == doctest::Approx(0.584).epsilon(1e-3));
    CHECK(lp_pn_sum / (1326 - hp_count) == doctest::Approx(0.182).epsilon(1e-2));
    // HP cells separate from LP cells in mean normal-state mass.
    CHECK(hp_pn_sum / hp_count > lp_pn_sum / (1326 - hp_count) + 0.2);

    const auto rep = check_structure(svt);
    CHECK(rep.hp_grid_convex);
    CHECK(rep.violations == 0);
    CHECK(rep.checked_midpoints > 0);
}
