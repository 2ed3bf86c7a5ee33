#include <cmath>

#include "doctest.h"
#include "drljrm/sa_agent.hpp"
#include "toy.hpp"

using namespace drljrm;

TEST_SUITE("sa") {

TEST_CASE("feature scaling maps physical ranges near the unit box") {
    FeatureScale fs;
    CHECK(fs.gain(1e-12) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fs.gain(1e-8) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fs.gain(0.0) == 0.0);   // zero stays zero so masking commutes
    CHECK(fs.gain(-1.0) == 0.0);
    CHECK(fs.rate(1e5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sa state lays out per-user blocks with a one-hot cursor") {
    Scenario s = toy::scenario(2, 2);
    s.weights = {0.4, 1.0};
    s.qos_min = {3.0, 7.0};
    s.gains(0, 0) = 1.0;
    s.gains(1, 0) = 2.0;
    s.gains(0, 1) = 3.0;
    s.gains(1, 1) = 4.0;
    Mat occ(2, 2);
    occ(1, 0) = 1.0;
    const auto st = encode_sa_state(s, occ, 1);
    REQUIRE(st.size() == 2u * 7);
    CHECK(st[0] == 0.4);   // user 0: weight
    CHECK(st[1] == 3.0);   // qos
    CHECK(st[2] == 1.0);   // gains column
    CHECK(st[3] == 2.0);
    CHECK(st[4] == 0.0);   // occupancy column
    CHECK(st[5] == 1.0);
    CHECK(st[6] == 0.0);   // not the acting user
    CHECK(st[7] == 1.0);   // user 1: weight
    CHECK(st[13] == 1.0);  // acting user one-hot
    // Moving the cursor only moves the one-hot.
    const auto st0 = encode_sa_state(s, occ, 0);
    CHECK(st0[6] == 1.0);
    CHECK(st0[13] == 0.0);
    CHECK(std::vector<double>(st0.begin(), st0.begin() + 6) ==
          std::vector<double>(st.begin(), st.begin() + 6));
}

TEST_CASE("scaled states transform qos and gains only") {
    Scenario s = toy::scenario(1, 1);
    s.weights = {0.8};
    s.qos_min = {2e5};
    s.gains(0, 0) = 1e-10;
    Mat occ(1, 1);
    occ(0, 0) = 1.0;
    FeatureScale fs;
    const auto scaled = scale_sa_state(s, encode_sa_state(s, occ, 0), fs);
    CHECK(scaled[0] == 0.8);
    CHECK(scaled[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(scaled[2] == doctest::Approx(1.0).epsilon(1e-12));  // (log10(1e-10)+12)*0.5
    CHECK(scaled[3] == 1.0);
    CHECK(scaled[4] == 1.0);
}

TEST_CASE("action decoding clamps k and picks top subcarriers") {
    SUBCASE("k from the scalar head") {
        CHECK(decode_sa_action(0.0, {0.5, 0.1, 0.2, 0.9}).k == 1);   // round(0)=0 clamps up
        CHECK(decode_sa_action(0.5, {0.5, 0.1, 0.2, 0.9}).k == 2);
        CHECK(decode_sa_action(1.0, {0.5, 0.1, 0.2, 0.9}).k == 4);
    }
    SUBCASE("top-k selection, ascending output") {
        const SaAction a = decode_sa_action(0.5, {0.1, 0.9, 0.3, 0.8});
        CHECK(a.k == 2);
        CHECK(a.chosen == std::vector<int>{1, 3});
    }
    SUBCASE("score ties break toward the lower subcarrier") {
        const SaAction a = decode_sa_action(0.25, {0.5, 0.5, 0.2});  // k = round(0.75) = 1
        CHECK(a.chosen == std::vector<int>{0});
    }
}

TEST_CASE("internal reward penalizes only over-multiplexed subcarriers") {
    Scenario s = toy::scenario(2, 3);
    s.max_per_subcarrier = 2;
    RewardCoeffs c;
    Mat occ(2, 3);
    occ(0, 0) = 1.0;
    occ(0, 1) = 1.0;
    CHECK(sa_internal_reward(occ, s, c) == 0.0);
    occ(0, 2) = 1.0;  // three users on subcarrier 0
    CHECK(sa_internal_reward(occ, s, c) == -5.0);
}

TEST_CASE("joint reward grows with the objective and saturates at the cap") {
    Scenario s = toy::scenario(1, 1);
    s.bandwidth = 10.0;
    RewardCoeffs c;
    RateReport r;
    r.objective = 0.0;
    CHECK(sa_joint_reward(r, s, c) == doctest::Approx(1.5).epsilon(1e-12));
    r.objective = 40.0;  // 0.25 * 4 b/s/Hz
    CHECK(sa_joint_reward(r, s, c) == doctest::Approx(1.5 * std::exp(1.0)).epsilon(1e-12));
    RateReport big;
    big.objective = 1e9;
    CHECK(sa_joint_reward(big, s, c) == doctest::Approx(1.5 * std::exp(50.0)).epsilon(1e-9));
}

TEST_CASE("users act in descending weight order with stable ties") {
    Scenario s = toy::scenario(1, 4);
    s.weights = {0.2, 0.9, 0.9, 0.5};
    CHECK(sa_user_order(s) == std::vector<int>{1, 2, 3, 0});
}

TEST_CASE("network specs compose and expose the right heads") {
    const NetworkSpec actor = SaAgent::actor_spec(3, 2, 8, 1, 4);
    CHECK_NOTHROW(actor.validate());
    CHECK(actor.input.len() == 3 * 7);
    CHECK(actor.output_len() == 1 + 2);  // [a_out, b_out]
    const NetworkSpec critic = SaAgent::critic_spec(3, 2, 8, 1, 4);
    CHECK_NOTHROW(critic.validate());
    CHECK(critic.input.len() == 3 * 7 + 2 + 1);  // state ++ action
    CHECK(critic.output_len() == 1);
}

TEST_CASE("the policy is deterministic without noise and clipped with it") {
    ScenarioConfig c;
    c.num_users = 3;
    c.num_subcarriers = 2;
    c.max_per_subcarrier = 2;
    c.rng_seed = 2;
    const Scenario s = generate(c);
    Rng init(1);
    SaAgent agent(s, 8, 1, 4, 0.001, 0.003, 0.99, 0.01, init);
    const auto st = scale_sa_state(s, encode_sa_state(s, Mat(2, 3), 0), agent.fs);
    const auto p1 = agent.policy(st, 0.0, nullptr);
    const auto p2 = agent.policy(st, 0.0, nullptr);
    CHECK(p1 == p2);
    REQUIRE(p1.size() == 3);  // 1 + N_F
    Rng noise(9);
    for (int i = 0; i < 20; ++i) {
        const auto pn = agent.policy(st, 0.5, &noise);
        for (double v : pn) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("rollouts visit every user once and record chained transitions") {
    ScenarioConfig c;
    c.num_users = 3;
    c.num_subcarriers = 2;
    c.max_per_subcarrier = 3;
    c.rng_seed = 4;
    const Scenario s = generate(c);
    Rng init(2);
    SaAgent agent(s, 8, 1, 4, 0.001, 0.003, 0.99, 0.01, init);
    Rng noise(3);
    const SaRollout roll = sa_rollout(s, agent, false, 0.3, noise);
    CHECK(roll.transitions.size() == 3);
    // Everyone picked at least one subcarrier.
    for (int m = 0; m < 3; ++m) {
        int cnt = 0;
        for (int i = 0; i < 2; ++i) cnt += roll.assignment.assigned(i, m) ? 1 : 0;
        CHECK(cnt >= 1);
    }
    // N_max = M, so the internal reward can never fire.
    for (const Transition& t : roll.transitions) CHECK(t.reward == 0.0);
    // Greedy rollouts ignore the noise stream entirely.
    Rng noise2(999);
    const SaRollout again = sa_rollout(s, agent, false, 0.3, noise2);
    CHECK(again.assignment.occupancy.a == roll.assignment.occupancy.a);
    // The terminal transition points back at the first user in the order.
    const int first = sa_user_order(s)[0];
    const int block = 2 * 2 + 3;
    CHECK(roll.transitions.back().next_state[first * block + block - 1] == 1.0);
}

TEST_CASE("the internal penalty appears inside constrained rollouts") {
    // One subcarrier, one slot: the second and third users must overfill it.
    ScenarioConfig c;
    c.num_users = 3;
    c.num_subcarriers = 1;
    c.max_per_subcarrier = 1;
    c.rng_seed = 6;
    const Scenario s = generate(c);
    Rng init(5);
    SaAgent agent(s, 8, 1, 4, 0.001, 0.003, 0.99, 0.01, init);
    Rng noise(7);
    const SaRollout roll = sa_rollout(s, agent, false, 0.0, noise);
    CHECK(roll.transitions[0].reward == 0.0);
    CHECK(roll.transitions[1].reward == agent.coeffs.sa_int);
    CHECK(roll.transitions[2].reward == agent.coeffs.sa_int);
}

}  // TEST_SUITE
