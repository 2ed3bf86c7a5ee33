#include <cmath>

#include "doctest.h"
#include "drljrm/pa_agents.hpp"
#include "toy.hpp"

using namespace drljrm;

namespace {

MultiAgentCritic make_agents(const Scenario& s, uint64_t seed) {
    Rng rng(seed);
    return MultiAgentCritic(s.num_users, s.num_subcarriers, pa_actor_spec(s.num_subcarriers, 8, 1),
                            pa_critic_spec(s.num_users, s.num_subcarriers, 8, 1),
                            state_cnn_spec(s.num_users, s.num_subcarriers, 8), 0.01, 0.01, 0.01, 0.9,
                            0.01, rng);
}

}  // namespace

TEST_SUITE("pa") {

TEST_CASE("self observation concatenates weight, qos, gains, assignment, indicator") {
    Scenario s = toy::scenario(2, 2);
    s.weights = {0.4, 1.0};
    s.qos_min = {3.0, 7.0};
    s.gains(0, 1) = 5.0;
    s.gains(1, 1) = 6.0;
    Assignment a(2, 2);
    a.set(1, 1, true);
    Mat v(2, 2);
    v(1, 1) = 0.8;
    const auto self = encode_pa_self(s, a, v, 1);
    CHECK(self == std::vector<double>{1.0, 7.0, 5.0, 6.0, 0.0, 1.0, 0.0, 0.8});
}

TEST_CASE("scaling touches qos and gains, passes flags and indicators") {
    Scenario s = toy::scenario(1, 1);
    s.qos_min = {2e5};
    s.gains(0, 0) = 1e-10;
    Assignment a(1, 1);
    a.set(0, 0, true);
    Mat v(1, 1);
    v(0, 0) = 0.6;
    FeatureScale fs;
    const auto scaled = scale_pa_self(s, encode_pa_self(s, a, v, 0), fs);
    CHECK(scaled[0] == 1.0);
    CHECK(scaled[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(scaled[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(scaled[3] == 1.0);
    CHECK(scaled[4] == 0.6);
}

TEST_CASE("pa state masks other agents row by row") {
    Scenario s = toy::scenario(1, 3);
    s.weights = {0.1, 0.2, 0.3};
    Assignment a(1, 3);
    Mat v(1, 3);
    IpdMask mask(2, 5);
    mask.entries(0, 0) = 0.0;  // first other agent's weight hidden
    const PaState st = encode_pa_state(s, a, v, 1, mask);
    CHECK(st.self[0] == 0.2);
    CHECK(st.others.rows == 2);
    CHECK(st.others(0, 0) == 0.0);  // agent 0 masked
    CHECK(st.others(1, 0) == 0.3);  // agent 2 visible
    CHECK_THROWS_AS(encode_pa_state(s, a, v, 1, IpdMask(1, 5)), std::invalid_argument);
}

TEST_CASE("category masks cover the five observation groups") {
    const IpdMask all = mask_from_categories(2, 3, {true, true, true, true, true});
    CHECK(all.zeta() == 1.0);
    const IpdMask no_gains = mask_from_categories(2, 3, {true, true, false, true, true});
    CHECK(no_gains.zeta() == doctest::Approx(1.0 - 3.0 / 11.0).epsilon(1e-12));
    // Gains occupy columns 2..4 for N_F = 3.
    CHECK(no_gains.entries(0, 1) == 1.0);
    CHECK(no_gains.entries(0, 2) == 0.0);
    CHECK(no_gains.entries(0, 4) == 0.0);
    CHECK(no_gains.entries(0, 5) == 1.0);
    const IpdMask none = mask_from_categories(1, 2, {false, false, false, false, false});
    CHECK(none.zeta() == 0.0);
}

TEST_CASE("indicator updates step by theta and clamp at zero off-assignment") {
    const std::vector<double> v = {1.0, 0.005, 0.7};
    const std::vector<int> rho = {1, -1, -1};
    const std::vector<char> assigned = {1, 1, 0};
    const auto out = apply_pa_action(v, rho, 0.01, assigned);
    CHECK(out[0] == doctest::Approx(1.01).epsilon(1e-12));
    CHECK(out[1] == 0.0);  // 0.005 - 0.01 clamps
    CHECK(out[2] == 0.0);  // not assigned: forced to zero
}

TEST_CASE("raw actions discretize at the third boundaries") {
    const auto rho = discretize_pa_action({-0.9, -1.0 / 3.0, 0.0, 1.0 / 3.0, 0.34, -0.34});
    CHECK(rho == std::vector<int>{-1, 0, 0, 0, 1, -1});
}

TEST_CASE("internal reward mixes pdsc violations with the qos margin") {
    Scenario s = toy::scenario(1, 2);
    s.gains(0, 0) = 4.0;
    s.gains(0, 1) = 1.0;
    s.bandwidth = 1.0;
    Assignment a(1, 2);
    a.set(0, 0, true);
    a.set(0, 1, true);
    Mat p(1, 2);
    p(0, 0) = 1.0;
    p(0, 1) = 3.0;
    const SicOrder order = sic_order(s, a);
    RewardCoeffs c;

    RateReport rep = evaluate(s, a, p);
    REQUIRE(rep.c2);
    const double r0 = pa_internal_reward(s, order, p, 0, rep, c);
    CHECK(r0 == doctest::Approx(3.0 * rep.user_totals[0]).epsilon(1e-9));  // qos_min = 0

    s.pdsc_threshold = 5.0;  // now the shared subcarrier violates for both users
    rep = evaluate(s, a, p);
    REQUIRE_FALSE(rep.c2);
    const double r1 = pa_internal_reward(s, order, p, 1, rep, c);
    CHECK(r1 == doctest::Approx(-8.0 + 3.0 * rep.user_totals[1]).epsilon(1e-9));
}

TEST_CASE("agents off the violating subcarrier escape the pdsc penalty") {
    Scenario s = toy::scenario(2, 3);
    s.gains(0, 0) = 4.0;
    s.gains(0, 1) = 1.0;
    s.bandwidth = 2.0;
    Assignment a(2, 3);
    a.set(0, 0, true);
    a.set(0, 1, true);
    a.set(1, 2, true);  // user 2 sits alone on subcarrier 1
    Mat p(2, 3);
    p(0, 0) = 2.0;
    p(0, 1) = 2.0;  // equal powers violate any positive threshold
    p(1, 2) = 2.0;
    s.pdsc_threshold = 0.5;
    const SicOrder order = sic_order(s, a);
    const RateReport rep = evaluate(s, a, p);
    RewardCoeffs c;
    CHECK(pa_internal_reward(s, order, p, 0, rep, c) ==
          doctest::Approx(-8.0 + 3.0 * rep.user_totals[0] / s.bandwidth).epsilon(1e-9));
    CHECK(pa_internal_reward(s, order, p, 2, rep, c) ==
          doctest::Approx(3.0 * rep.user_totals[2] / s.bandwidth).epsilon(1e-9));
}

TEST_CASE("joint reward splits by weighted-rate share") {
    Scenario s = toy::scenario(1, 2);
    s.bandwidth = 1.0;
    s.weights = {1.0, 1.0};
    RewardCoeffs c;
    RateReport rep;
    rep.user_totals = {2.0, 2.0};
    rep.objective = 4.0;
    const double each = pa_joint_reward(rep, s, 0, c);
    CHECK(each == doctest::Approx(0.5 * 16.0 * std::exp(0.45 * 4.0)).epsilon(1e-12));
    CHECK(pa_joint_reward(rep, s, 1, c) == doctest::Approx(each).epsilon(1e-12));

    rep.user_totals = {4.0, 0.0};
    CHECK(pa_joint_reward(rep, s, 0, c) == doctest::Approx(16.0 * std::exp(0.45 * 4.0)).epsilon(1e-12));
    CHECK(pa_joint_reward(rep, s, 1, c) == 0.0);

    RateReport silent;
    silent.user_totals = {0.0, 0.0};
    silent.objective = 0.0;
    CHECK(pa_joint_reward(silent, s, 0, c) == 0.0);
}

TEST_CASE("cnn padding produces pool-compatible dimensions") {
    CHECK(cnn_padded_dim(1) == 10);
    CHECK(cnn_padded_dim(10) == 10);
    CHECK(cnn_padded_dim(11) == 14);
    CHECK(cnn_padded_dim(14) == 14);
    CHECK(cnn_padded_dim(15) == 18);
    for (int n = 1; n < 40; ++n) {
        const int x = cnn_padded_dim(n);
        CHECK(x >= n);
        CHECK(x >= 10);
        CHECK(x % 4 == 2);  // survives two conv(3)+pool(2) stages exactly
    }
}

TEST_CASE("pa network specs validate at reference sizes") {
    CHECK_NOTHROW(pa_actor_spec(3, 128, 3).validate());
    CHECK(pa_actor_spec(3, 128, 3).output_len() == 3);
    CHECK(pa_actor_spec(3, 128, 3).input.len() == 2 * 11);
    CHECK_NOTHROW(pa_critic_spec(4, 3, 128, 3).validate());
    CHECK(pa_critic_spec(4, 3, 128, 3).input.len() == 2 * 11 + 12);
    CHECK(pa_critic_spec(4, 3, 128, 3).output_len() == 1);
    const NetworkSpec cnn = state_cnn_spec(4, 3, 128);
    CHECK_NOTHROW(cnn.validate());
    CHECK(cnn.input == TensorShape{1, 10, 14});
    CHECK(cnn.output_len() == 11);
}

TEST_CASE("zero-step rollouts report the equal-power start") {
    Scenario s = toy::scenario(2, 2);
    Assignment a(2, 2);
    a.set(0, 0, true);
    a.set(1, 1, true);
    MultiAgentCritic agents = make_agents(s, 31);
    FeatureScale fs;
    RewardCoeffs coeffs;
    Rng noise(1);
    const PaRollout roll = pa_rollout(s, a, agents, 0, 0.01, fs, coeffs, false, 0.0, noise);
    CHECK(roll.transitions.empty());
    CHECK(roll.power.powers(0, 0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(roll.power.powers(1, 1) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(roll.power.powers(0, 1) == 0.0);
}

TEST_CASE("greedy rollouts are reproducible and stay inside the budget") {
    ScenarioConfig c;
    c.num_users = 3;
    c.num_subcarriers = 2;
    c.max_per_subcarrier = 2;
    c.rng_seed = 13;
    const Scenario s = generate(c);
    Assignment a(2, 3);
    a.set(0, 0, true);
    a.set(0, 1, true);
    a.set(1, 2, true);
    MultiAgentCritic agents = make_agents(s, 7);
    FeatureScale fs;
    RewardCoeffs coeffs;
    Rng n1(1), n2(2);
    const PaRollout r1 = pa_rollout(s, a, agents, 4, 0.01, fs, coeffs, false, 0.3, n1);
    const PaRollout r2 = pa_rollout(s, a, agents, 4, 0.01, fs, coeffs, false, 0.3, n2);
    CHECK(r1.power.powers.a == r2.power.powers.a);
    CHECK(r1.transitions.size() == 4);
    double total = 0.0;
    for (double p : r1.power.powers.a) {
        CHECK(p >= 0.0);
        total += p;
    }
    CHECK(total == doctest::Approx(s.total_power).epsilon(1e-9));
    // Off-assignment slots never receive power.
    CHECK(r1.power.powers(1, 0) == 0.0);
    CHECK(r1.power.powers(1, 1) == 0.0);
    CHECK(r1.power.powers(0, 2) == 0.0);
}

TEST_CASE("rollout transitions chain states and keep raw actions bounded") {
    ScenarioConfig c;
    c.num_users = 2;
    c.num_subcarriers = 2;
    c.max_per_subcarrier = 2;
    c.rng_seed = 17;
    const Scenario s = generate(c);
    Assignment a(2, 2);
    a.set(0, 0, true);
    a.set(1, 1, true);
    MultiAgentCritic agents = make_agents(s, 23);
    FeatureScale fs;
    RewardCoeffs coeffs;
    Rng noise(3);
    const PaRollout roll = pa_rollout(s, a, agents, 3, 0.01, fs, coeffs, true, 0.4, noise);
    REQUIRE(roll.transitions.size() == 3);
    for (size_t t = 0; t + 1 < roll.transitions.size(); ++t)
        CHECK(roll.transitions[t].next_self_states == roll.transitions[t + 1].self_states);
    for (const JointTransition& t : roll.transitions) {
        REQUIRE(t.actions.size() == 2);
        for (const auto& act : t.actions)
            for (double v : act) {
                CHECK(v >= -1.0);
                CHECK(v <= 1.0);
            }
        for (double r : t.rewards) CHECK(std::isfinite(r));
    }
}

TEST_CASE("a lone full-band user always ends at full power") {
    Scenario s = toy::scenario(1, 1);
    Assignment a(1, 1);
    a.set(0, 0, true);
    MultiAgentCritic agents = make_agents(s, 41);
    FeatureScale fs;
    RewardCoeffs coeffs;
    Rng noise(5);
    const PaRollout roll = pa_rollout(s, a, agents, 5, 0.01, fs, coeffs, false, 0.0, noise);
    // Any positive indicator normalizes to the whole budget.
    CHECK(roll.power.powers(0, 0) == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(roll.report.all_feasible());
}

}  // TEST_SUITE
