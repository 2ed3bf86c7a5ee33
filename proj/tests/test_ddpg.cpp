#include <cmath>
#include <numeric>

#include "doctest.h"
#include "drljrm/ddpg.hpp"
#include "drljrm/pa_agents.hpp"

using namespace drljrm;

namespace {

NetworkSpec tiny_actor() {
    NetworkSpec spec;
    spec.input = {1, 1, 2};
    spec.layers.push_back(Layer::fc(2, 2, Act::kSigmoid));
    return spec;
}

NetworkSpec tiny_critic() {
    NetworkSpec spec;
    spec.input = {1, 1, 4};  // state(2) ++ action(2)
    spec.layers.push_back(Layer::fc(4, 1, Act::kIdentity));
    return spec;
}

Transition make_transition(std::vector<double> s, std::vector<double> a, double r, std::vector<double> s2) {
    Transition t;
    t.state = std::move(s);
    t.action = std::move(a);
    t.reward = r;
    t.next_state = std::move(s2);
    return t;
}

void zero_params(Network& n) { std::fill(n.params().data.begin(), n.params().data.end(), 0.0); }

}  // namespace

TEST_SUITE("ddpg") {

TEST_CASE("noise schedule anneals linearly and clamps") {
    NoiseSchedule n;
    n.start = 0.3;
    n.end = 0.1;
    CHECK(n.at(0.0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(n.at(0.5) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(n.at(1.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(n.at(-1.0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(n.at(2.0) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("ipd masks report the observed fraction") {
    IpdMask full(3, 8);
    CHECK(full.zeta() == 1.0);
    for (int r = 0; r < 3; ++r) full.entries(r, 0) = 0.0;
    CHECK(full.zeta() == doctest::Approx(7.0 / 8.0).epsilon(1e-12));
    CHECK(IpdMask(0, 8).zeta() == 1.0);  // no other agents: fully observed
}

TEST_CASE("targets start as copies of the online networks") {
    Rng rng(1);
    ActorCritic ac(tiny_actor(), tiny_critic(), 0.01, 0.01, rng);
    CHECK(ac.actor.params().data == ac.actor_target.params().data);
    CHECK(ac.critic.params().data == ac.critic_target.params().data);
}

TEST_CASE("critic loss is the mean squared td error") {
    Rng rng(2);
    ActorCritic ac(tiny_actor(), tiny_critic(), 0.01, 0.01, rng);
    zero_params(ac.critic);
    zero_params(ac.critic_target);
    ac.gamma = 0.5;
    // Q == 0 everywhere and the target critic contributes nothing, so
    // y = r and loss = mean r^2.
    const Transition t1 = make_transition({0.1, 0.2}, {0.5, 0.5}, 1.0, {0.3, 0.4});
    const Transition t2 = make_transition({0.7, 0.1}, {0.2, 0.9}, 3.0, {0.0, 0.0});
    const double loss = ac.critic_update({&t1, &t2});
    CHECK(loss == doctest::Approx(5.0).epsilon(1e-12));
    CHECK_THROWS_AS(ac.critic_update({}), std::invalid_argument);
}

TEST_CASE("zero reward and zero targets give zero loss") {
    Rng rng(3);
    ActorCritic ac(tiny_actor(), tiny_critic(), 0.01, 0.01, rng);
    zero_params(ac.critic);
    zero_params(ac.critic_target);
    const Transition t = make_transition({0.1, 0.2}, {0.4, 0.6}, 0.0, {0.1, 0.2});
    CHECK(ac.critic_update({&t}) == 0.0);
}

TEST_CASE("repeated critic updates shrink the td error") {
    Rng rng(4);
    ActorCritic ac(tiny_actor(), tiny_critic(), 0.01, 0.01, rng);
    ac.gamma = 0.0;  // y = r = s0, a target a linear critic can fit
    std::vector<Transition> data;
    Rng gen(5);
    for (int i = 0; i < 16; ++i) {
        const double s0 = gen.uniform(-1, 1), s1 = gen.uniform(-1, 1);
        data.push_back(make_transition({s0, s1}, {0.5, 0.5}, s0, {s0, s1}));
    }
    std::vector<const Transition*> batch;
    for (const auto& t : data) batch.push_back(&t);
    const double first = ac.critic_update(batch);
    double last = first;
    for (int it = 0; it < 200; ++it) last = ac.critic_update(batch);
    CHECK(last < 0.5 * first);
}

TEST_CASE("a constant critic leaves the actor untouched") {
    Rng rng(6);
    ActorCritic ac(tiny_actor(), tiny_critic(), 0.05, 0.01, rng);
    zero_params(ac.critic);
    const std::vector<double> before = ac.actor.params().data;
    const Transition t = make_transition({0.2, 0.8}, {0.5, 0.5}, 0.0, {0.2, 0.8});
    const double norm = ac.actor_update({&t});
    CHECK(norm == 0.0);
    CHECK(ac.actor.params().data == before);
    CHECK_THROWS_AS(ac.actor_update({}), std::invalid_argument);
}

TEST_CASE("the actor climbs a critic that pays for large actions") {
    Rng rng(7);
    ActorCritic ac(tiny_actor(), tiny_critic(), 0.05, 0.01, rng);
    // Q = a0 + a1: weights select the action block of [state, action].
    zero_params(ac.critic);
    ac.critic.params().data[2] = 1.0;
    ac.critic.params().data[3] = 1.0;
    const std::vector<double> critic_before = ac.critic.params().data;
    const Transition t = make_transition({0.3, 0.7}, {0.5, 0.5}, 0.0, {0.3, 0.7});
    const auto out0 = ac.actor.forward(t.state);
    for (int i = 0; i < 40; ++i) CHECK(ac.actor_update({&t}) > 0.0);
    const auto out1 = ac.actor.forward(t.state);
    CHECK(out1[0] > out0[0]);
    CHECK(out1[1] > out0[1]);
    CHECK(ac.critic.params().data == critic_before);  // actor step must not move the critic
}

TEST_CASE("soft target updates move a fixed fraction toward online") {
    Rng rng(8);
    ActorCritic ac(tiny_actor(), tiny_critic(), 0.01, 0.01, rng);
    ac.tau = 0.25;
    const double t0 = ac.actor_target.params().data[0];
    ac.actor.params().data[0] = t0 + 1.0;
    ac.update_targets();
    CHECK(ac.actor_target.params().data[0] == doctest::Approx(t0 + 0.25).epsilon(1e-12));
}

TEST_CASE("actor-critic checkpoints restore the full pair") {
    Rng rng(9);
    ActorCritic ac(tiny_actor(), tiny_critic(), 0.01, 0.01, rng);
    const Transition t = make_transition({0.2, 0.4}, {0.5, 0.5}, 1.0, {0.2, 0.4});
    ac.critic_update({&t});
    ac.actor_update({&t});
    const auto blocks = actor_critic_blocks(ac, "sa");
    CHECK(blocks.size() == 6);
    CHECK(blocks[0].name == "sa.actor");

    Rng rng2(10);
    ActorCritic fresh(tiny_actor(), tiny_critic(), 0.01, 0.01, rng2);
    restore_actor_critic(fresh, blocks, "sa");
    CHECK(fresh.actor.params().data == ac.actor.params().data);
    CHECK(fresh.critic_target.params().data == ac.critic_target.params().data);
    CHECK(fresh.critic_opt.acc == ac.critic_opt.acc);
}

// --- multi-agent stack -----------------------------------------------------

namespace {

MultiAgentCritic make_ma(int m, int nf, double gamma, Rng& rng) {
    return MultiAgentCritic(m, nf, pa_actor_spec(nf, 8, 1), pa_critic_spec(m, nf, 8, 1),
                            state_cnn_spec(m, nf, 8), 0.01, 0.01, 0.01, gamma, 0.01, rng);
}

JointTransition random_joint(int m, int nf, Rng& gen) {
    JointTransition t;
    const int self_len = 3 * nf + 2;
    t.self_states.resize(m);
    t.actions.resize(m);
    t.rewards.resize(m);
    t.next_self_states.resize(m);
    for (int k = 0; k < m; ++k) {
        for (int i = 0; i < self_len; ++i) {
            t.self_states[k].push_back(gen.uniform());
            t.next_self_states[k].push_back(gen.uniform());
        }
        for (int i = 0; i < nf; ++i) t.actions[k].push_back(gen.uniform(-1, 1));
        t.rewards[k] = gen.uniform(-1, 1);
    }
    return t;
}

}  // namespace

TEST_CASE("a single agent needs no compression cnn") {
    Rng rng(11);
    MultiAgentCritic ma = make_ma(1, 2, 0.9, rng);
    CHECK_FALSE(ma.has_cnn());
    CHECK(ma.self_len() == 8);
    const std::vector<std::vector<double>> ss = {{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}};
    const auto compressed = ma.compress(ss, 0, false);
    CHECK(compressed == std::vector<double>(8, 0.0));
    const auto a = ma.act(ss, 0, false);
    REQUIRE(a.size() == 2);
    for (double v : a) {
        CHECK(v > -1.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("the cnn input is zero-padded and masked") {
    Rng rng(12);
    MultiAgentCritic ma = make_ma(2, 2, 0.9, rng);
    REQUIRE(ma.has_cnn());
    CHECK(ma.cnn().spec().output_len() == ma.self_len());
    ma.masks()[0].entries(0, 2) = 0.0;  // agent 0 cannot see feature 2 of agent 1

    std::vector<std::vector<double>> ss = {std::vector<double>(8, 0.5), std::vector<double>(8, 0.0)};
    for (int i = 0; i < 8; ++i) ss[1][i] = 0.1 * (i + 1);
    const auto padded = ma.cnn_input(ss, 0);
    const TensorShape in = ma.cnn().spec().input;
    REQUIRE(static_cast<int>(padded.size()) == in.len());
    CHECK(padded[0] == doctest::Approx(0.1).epsilon(1e-12));   // agent 1 feature 0
    CHECK(padded[2] == 0.0);                                   // masked entry
    CHECK(padded[3] == doctest::Approx(0.4).epsilon(1e-12));
    // Rows past the single other agent stay zero.
    for (int i = in.w; i < in.len(); ++i) CHECK(padded[static_cast<size_t>(i)] == 0.0);
}

TEST_CASE("ma critic loss reduces to mean squared reward with zeroed nets") {
    Rng rng(13);
    MultiAgentCritic ma = make_ma(2, 2, 0.0, rng);
    for (int m = 0; m < 2; ++m) {
        zero_params(ma.critic(m));
    }
    zero_params(ma.cnn());
    Rng gen(14);
    JointTransition t = random_joint(2, 2, gen);
    t.rewards = {2.0, -1.0};
    // gamma = 0 kills the bootstrap even though the target critic is nonzero.
    CHECK(ma.ma_critic_update(0, {&t}) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(ma.ma_critic_update(1, {&t}) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(ma.ma_critic_update(0, {}), std::invalid_argument);
    CHECK_THROWS_AS(ma.ma_actor_update(0, {}), std::invalid_argument);
}

TEST_CASE("ma updates run and keep everything finite") {
    Rng rng(15);
    MultiAgentCritic ma = make_ma(3, 2, 0.9, rng);
    Rng gen(16);
    std::vector<JointTransition> data;
    for (int i = 0; i < 8; ++i) data.push_back(random_joint(3, 2, gen));
    std::vector<const JointTransition*> batch;
    for (const auto& t : data) batch.push_back(&t);
    for (int m = 0; m < 3; ++m) {
        const double loss = ma.ma_critic_update(m, batch);
        const double norm = ma.ma_actor_update(m, batch);
        CHECK(std::isfinite(loss));
        CHECK(std::isfinite(norm));
        CHECK(norm >= 0.0);
    }
    ma.update_targets();
    CHECK(ma.forward_macs() > 0);
    CHECK(ma.backward_macs() > 0);
    ma.reset_mac_counters();
    CHECK(ma.forward_macs() == 0);
}

TEST_CASE("agents chase rewards that pay for larger actions") {
    // Fresh actors sit near zero output (Glorot weights, sigmoid head), so a
    // reward linear in the agent's own action gives an unambiguous direction
    // to climb.  gamma = 0 keeps the critic target free of bootstrap noise.
    Rng rng(17);
    MultiAgentCritic ma = make_ma(2, 2, 0.0, rng);
    Rng gen(18);
    std::vector<JointTransition> data;
    for (int i = 0; i < 16; ++i) {
        JointTransition t = random_joint(2, 2, gen);
        for (int m = 0; m < 2; ++m) {
            double sum = 0.0;
            for (double a : t.actions[m]) sum += a;
            t.rewards[m] = sum;
        }
        data.push_back(std::move(t));
    }
    std::vector<const JointTransition*> batch;
    for (const auto& t : data) batch.push_back(&t);

    auto mean_action = [&]() {
        double acc = 0.0;
        int n = 0;
        for (const auto& t : data)
            for (int m = 0; m < 2; ++m)
                for (double v : ma.act(t.self_states, m, false)) {
                    acc += v;
                    ++n;
                }
        return acc / n;
    };

    const double before = mean_action();
    for (int it = 0; it < 60; ++it) {
        for (int m = 0; m < 2; ++m) {
            ma.ma_critic_update(m, batch);
            ma.ma_actor_update(m, batch);
        }
        ma.update_targets();
    }
    CHECK(mean_action() > before + 0.1);
}

TEST_CASE("multi-agent checkpoints restore behaviour exactly") {
    Rng rng(19);
    MultiAgentCritic ma = make_ma(2, 2, 0.9, rng);
    Rng gen(20);
    const JointTransition t = random_joint(2, 2, gen);
    ma.ma_critic_update(0, {&t});
    ma.ma_actor_update(1, {&t});
    const auto blocks = ma.checkpoint_blocks("pa");
    CHECK(blocks.size() == 2 * 6 + 3);  // per-agent nets + shared cnn

    Rng rng2(21);
    MultiAgentCritic fresh = make_ma(2, 2, 0.9, rng2);
    fresh.restore(blocks, "pa");
    for (int m = 0; m < 2; ++m) CHECK(fresh.act(t.self_states, m, false) == ma.act(t.self_states, m, false));
}

}  // TEST_SUITE
