#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "couponmdp/errors.hpp"
#include "couponmdp/simulate.hpp"
#include "couponmdp/threshold.hpp"

using namespace couponmdp;

namespace {
const CostModel kCosts{3.0, 1.0, 12.0, 0.9};
}

TEST_CASE("kappa") {
    CHECK(kappa(kCosts) == doctest::Approx(2.0 / 11.0).epsilon(1e-12));
    CHECK(kappa({1.0, 1.0, 5.0, 0.9}) == doctest::Approx(0.0));
    CHECK(kappa({5.0, 1.0, 5.0, 0.9}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(kappa({1.0, 1.0, 1.0, 0.9}), validation_error);
}

TEST_CASE("evaluate_G against independently computed values") {
    const TransitionModel m{0.1, 0.7};
    CHECK(evaluate_G(0, m, kCosts) == doctest::Approx(48.2608695652).epsilon(1e-9));
    CHECK(evaluate_G(1, m, kCosts) == doctest::Approx(33.8170178714).epsilon(1e-9));
    CHECK(evaluate_G(2, m, kCosts) == doctest::Approx(30.0412059961).epsilon(1e-9));
    CHECK(evaluate_G(3, m, kCosts) == doctest::Approx(28.7658963742).epsilon(1e-9));
    CHECK(evaluate_G(5, m, kCosts) == doctest::Approx(28.3101170818).epsilon(1e-9));
    // Large n recovers the LP-forever value C_L / (1 - beta).
    CHECK(evaluate_G(400, m, kCosts) == doctest::Approx(30.0).epsilon(1e-9));
}

TEST_CASE("value_at_anchors") {
    SUBCASE("anchor above threshold: LP forever at both anchors") {
        const TransitionModel m{0.25, 0.7};
        const auto av = value_at_anchors(m, kCosts, 2.0 / 11.0, LambdaCase::LambdaNaAboveTau);
        CHECK(av.v_lambda_na == doctest::Approx(30.0).epsilon(1e-12));
        CHECK(av.v_lambda_aa == doctest::Approx(30.0).epsilon(1e-12));
        CHECK_FALSE(av.n_star.has_value());
    }
    SUBCASE("anchor below threshold: G-minimizing wait from the Alerted anchor") {
        const TransitionModel m{0.1, 0.7};
        const auto av =
            value_at_anchors(m, kCosts, 0.3006236721647712, LambdaCase::LambdaNaBelowTau);
        CHECK(av.v_lambda_na == doctest::Approx(24.462687038742217).epsilon(1e-12));
        CHECK(av.v_lambda_aa == doctest::Approx(28.31011708178911).epsilon(1e-12));
        REQUIRE(av.n_star.has_value());
        CHECK(*av.n_star == 5);
    }
}

TEST_CASE("solve_threshold reference fixtures") {
    SUBCASE("lambda_na below tau, drift below tau") {
        const auto s = solve_threshold({0.1, 0.7}, kCosts);
        CHECK(s.tau == doctest::Approx(0.3006236721647712).epsilon(1e-12));
        CHECK(s.branch == Branch::TtauLT);
        CHECK(s.lambda_case == LambdaCase::LambdaNaBelowTau);
        CHECK(s.v_lambda_na == doctest::Approx(24.462687038742217).epsilon(1e-12));
        CHECK(s.v_lambda_aa == doctest::Approx(28.31011708178911).epsilon(1e-12));
        REQUIRE(s.n_star.has_value());
        CHECK(*s.n_star == 5);
        CHECK(s.residual <= 1e-9);
        CHECK(s.kappa == doctest::Approx(2.0 / 11.0));
        CHECK(s.p_f == doctest::Approx(0.25));
    }
    SUBCASE("lambda_na below tau, drift above tau") {
        const auto s = solve_threshold({0.15, 0.7}, kCosts);
        CHECK(s.tau == doctest::Approx(0.270689655172).epsilon(1e-9));
        CHECK(s.branch == Branch::TtauGE);
        CHECK(s.lambda_case == LambdaCase::LambdaNaBelowTau);
        CHECK(s.v_lambda_na == doctest::Approx(28.5106382979).epsilon(1e-9));
        CHECK(s.v_lambda_aa == doctest::Approx(30.0).epsilon(1e-9));
    }
    SUBCASE("lambda_na above tau collapses to kappa") {
        const auto s = solve_threshold({0.25, 0.7}, kCosts);
        CHECK(s.tau == doctest::Approx(2.0 / 11.0).epsilon(1e-12));
        CHECK(s.lambda_case == LambdaCase::LambdaNaAboveTau);
        CHECK(s.v_lambda_na == doctest::Approx(30.0).epsilon(1e-10));
        CHECK(s.v_lambda_aa == doctest::Approx(30.0).epsilon(1e-10));
    }
    SUBCASE("zero lambda_na") {
        const auto s = solve_threshold({0.0, 0.5}, kCosts);
        CHECK(s.tau == doctest::Approx(0.229195561720).epsilon(1e-9));
        CHECK(s.v_lambda_na == doctest::Approx(10.0).epsilon(1e-9));
        CHECK(s.v_lambda_aa == doctest::Approx(15.4064090221).epsilon(1e-9));
        REQUIRE(s.n_star.has_value());
        CHECK(*s.n_star == 2);
    }
    SUBCASE("sticky alerted state") {
        const auto s = solve_threshold({0.05, 0.9}, kCosts);
        CHECK(s.tau == doctest::Approx(0.438073281576).epsilon(1e-9));
        CHECK(s.v_lambda_na == doctest::Approx(19.7137153255).epsilon(1e-9));
        CHECK(s.v_lambda_aa == doctest::Approx(29.0775271599).epsilon(1e-9));
        REQUIRE(s.n_star.has_value());
        CHECK(*s.n_star == 11);
    }
    SUBCASE("another kappa-clamped chain") {
        const auto s = solve_threshold({0.3, 0.6}, kCosts);
        CHECK(s.tau == doctest::Approx(2.0 / 11.0).epsilon(1e-12));
        CHECK(s.lambda_case == LambdaCase::LambdaNaAboveTau);
    }
}

TEST_CASE("solve_threshold structural invariants on random chains") {
    SplitMix64 rng(2024);
    for (int i = 0; i < 200; ++i) {
        const double laa = 0.5 + 0.5 * rng.uniform() * 0.999;
        const double lo = std::max(0.0, 1.0 - laa);
        const double lna = lo + (0.5 - lo) * rng.uniform();
        const double chn = 5.0 * rng.uniform();
        const double cl = chn + 5.0 * rng.uniform();
        const double cha = cl + 0.5 + 10.0 * rng.uniform();
        const double beta = 0.5 + 0.49 * rng.uniform();
        const CostModel c = CostModel::checked(cl, chn, cha, beta);
        const TransitionModel m = TransitionModel::checked(lna, laa);
        const auto s = solve_threshold(m, c);
        CAPTURE(lna);
        CAPTURE(laa);
        CAPTURE(cl);
        CAPTURE(chn);
        CAPTURE(cha);
        CAPTURE(beta);
        CHECK(s.tau >= s.kappa - 1e-9);
        CHECK(s.tau <= 1.0 + 1e-9);
        CHECK(s.residual <= 1e-6);
        // Reported case labels must describe the returned threshold.
        if (s.lambda_case == LambdaCase::LambdaNaAboveTau) {
            CHECK(m.lambda_na >= s.tau - 1e-6);
        } else {
            CHECK(m.lambda_na <= s.tau + 1e-6);
        }
        const double drift = one_step_transition(s.tau, m);
        if (s.branch == Branch::TtauGE) {
            CHECK(drift >= s.tau - 1e-6);
        } else {
            CHECK(drift <= s.tau + 1e-6);
        }
    }
}

TEST_CASE("myopic discounting recovers the instantaneous tradeoff") {
    const auto s = solve_threshold({0.1, 0.7}, CostModel::checked(3.0, 1.0, 12.0, 1e-6));
    CHECK(s.tau == doctest::Approx(2.0 / 11.0).epsilon(1e-4));
}

TEST_CASE("threshold is monotone in C_L, beta, and lambda_aa") {
    SUBCASE("nondecreasing in C_L") {
        double prev = -1.0;
        for (double cl : {1.5, 2.0, 2.5, 3.0, 3.5, 4.0}) {
            const double tau = solve_threshold({0.1, 0.7}, CostModel::checked(cl, 1.0, 12.0, 0.9)).tau;
            CHECK(tau >= prev - 1e-9);
            prev = tau;
        }
    }
    SUBCASE("nondecreasing in beta") {
        double prev = -1.0;
        for (double beta : {0.5, 0.6, 0.7, 0.8, 0.9, 0.95}) {
            const double tau = solve_threshold({0.1, 0.7}, CostModel::checked(3.0, 1.0, 12.0, beta)).tau;
            CHECK(tau >= prev - 1e-9);
            prev = tau;
        }
    }
    SUBCASE("nondecreasing in lambda_aa") {
        for (double lna : {0.05, 0.1, 0.15}) {
            double prev = -1.0;
            for (double laa : {0.5, 0.6, 0.7, 0.8, 0.9}) {
                const double tau = solve_threshold({lna, laa}, kCosts).tau;
                CHECK(tau >= prev - 1e-9);
                prev = tau;
            }
        }
    }
}

TEST_CASE("hp_always_optimal is inclusive at kappa") {
    CHECK(hp_always_optimal(kCosts, 0.0));
    CHECK(hp_always_optimal(kCosts, 2.0 / 11.0));
    CHECK_FALSE(hp_always_optimal(kCosts, 2.0 / 11.0 + 1e-9));
    CHECK_FALSE(hp_always_optimal(kCosts, 0.9));
}

TEST_CASE("regime_bounds regime boundaries and closed forms") {
    SUBCASE("lambda_aa = 0.7") {
        const auto b = regime_bounds({0.1, 0.7}, kCosts);
        CHECK(b.lambda1 == doctest::Approx(2.0 / 11.0).epsilon(1e-12));
        CHECK(b.lambda2 == doctest::Approx(0.13551212174140592).epsilon(1e-9));
        CHECK(b.tau_upper == doctest::Approx(0.3111557979134022).epsilon(1e-9));
        // Below lambda2 there is no closed form, only the bound.
        CHECK_FALSE(b.closed_form_tau.has_value());
        CHECK(solve_threshold({0.1, 0.7}, kCosts).tau <= b.tau_upper + 1e-9);
    }
    SUBCASE("lambda_aa = 0.9") {
        const auto b = regime_bounds({0.05, 0.9}, kCosts);
        CHECK(b.lambda2 == doctest::Approx(0.0837413893).epsilon(1e-8));
        CHECK(b.tau_upper == doctest::Approx(0.4557568092).epsilon(1e-8));
        CHECK(solve_threshold({0.05, 0.9}, kCosts).tau <= b.tau_upper + 1e-9);
    }
    SUBCASE("mid regime closed form matches the solver") {
        for (double lna : {0.14, 0.15, 0.16, 0.17}) {
            const auto b = regime_bounds({lna, 0.7}, kCosts);
            REQUIRE(b.closed_form_tau.has_value());
            CHECK(*b.closed_form_tau ==
                  doctest::Approx(solve_threshold({lna, 0.7}, kCosts).tau).epsilon(1e-6));
        }
    }
    SUBCASE("above lambda1 the threshold is kappa") {
        const auto b = regime_bounds({0.25, 0.7}, kCosts);
        REQUIRE(b.closed_form_tau.has_value());
        CHECK(*b.closed_form_tau == doctest::Approx(2.0 / 11.0).epsilon(1e-12));
    }
}

TEST_CASE("threshold_policy_cost at the optimum reproduces the anchor values") {
    const TransitionModel m{0.1, 0.7};
    const auto s = solve_threshold(m, kCosts);
    CHECK(threshold_policy_cost(s.tau, m, kCosts, m.lambda_na) ==
          doctest::Approx(s.v_lambda_na).epsilon(1e-10));
    CHECK(threshold_policy_cost(s.tau, m, kCosts, m.lambda_aa) ==
          doctest::Approx(s.v_lambda_aa).epsilon(1e-10));
    // The optimal threshold is no worse than neighbors at the anchors.
    for (double tau : {0.1, 0.2, 0.25, 0.35, 0.5, 0.9}) {
        CHECK(threshold_policy_cost(tau, m, kCosts, m.lambda_na) >= s.v_lambda_na - 1e-9);
    }
}

TEST_CASE("threshold_policy_cost with unreachable HP region is the LP-forever value") {
    CHECK(threshold_policy_cost(-0.5, {0.1, 0.7}, kCosts, 0.3) == doctest::Approx(30.0));
    CHECK(threshold_policy_cost(-0.5, {0.1, 0.7}, kCosts, 0.0) == doctest::Approx(30.0));
}

TEST_CASE("threshold_policy_cost reference values on a slower chain") {
    const TransitionModel m{0.2, 0.8};
    const CostModel c{8.0, 3.0, 16.0, 0.95};
    CHECK(threshold_policy_cost(0.5478132391, m, c, 0.2) ==
          doctest::Approx(144.904169).epsilon(1e-7));
    CHECK(threshold_policy_cost(0.4893617021, m, c, 0.2) ==
          doctest::Approx(150.0).epsilon(1e-7));
    CHECK(threshold_policy_cost(0.0322580645, m, c, 0.2) ==
          doctest::Approx(160.0).epsilon(1e-7));
}
