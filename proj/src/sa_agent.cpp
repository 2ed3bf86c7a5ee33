#include "drljrm/sa_agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace drljrm {

double FeatureScale::gain(double g) const { return g > 0.0 ? (std::log10(g) + gain_offset) * gain_scale : 0.0; }

std::vector<double> encode_sa_state(const Scenario& s, const Mat& occupancy, int user) {
    const int M = s.num_users, NF = s.num_subcarriers;
    std::vector<double> out;
    out.reserve(static_cast<size_t>(M) * (2 * NF + 3));
    for (int u = 0; u < M; ++u) {
        out.push_back(s.weights[u]);
        out.push_back(s.qos_min[u]);
        for (int i = 0; i < NF; ++i) out.push_back(s.gain(i, u));
        for (int i = 0; i < NF; ++i) out.push_back(occupancy(i, u));
        out.push_back(u == user ? 1.0 : 0.0);
    }
    return out;
}

std::vector<double> scale_sa_state(const Scenario& s, const std::vector<double>& raw, const FeatureScale& fs) {
    const int M = s.num_users, NF = s.num_subcarriers;
    const int block = 2 * NF + 3;
    std::vector<double> out(raw.size());
    for (int u = 0; u < M; ++u) {
        const int b = u * block;
        out[b] = raw[b];
        out[b + 1] = fs.rate(raw[b + 1]);
        for (int i = 0; i < NF; ++i) out[b + 2 + i] = fs.gain(raw[b + 2 + i]);
        for (int i = 0; i < NF; ++i) out[b + 2 + NF + i] = raw[b + 2 + NF + i];
        out[b + 2 + 2 * NF] = raw[b + 2 + 2 * NF];
    }
    return out;
}

SaAction decode_sa_action(double a_out, const std::vector<double>& b_out) {
    const int nf = static_cast<int>(b_out.size());
    SaAction act;
    act.k = static_cast<int>(std::lround(a_out * nf));
    act.k = std::clamp(act.k, 1, nf);
    std::vector<int> idx(nf);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return b_out[x] > b_out[y]; });
    act.chosen.assign(idx.begin(), idx.begin() + act.k);
    std::sort(act.chosen.begin(), act.chosen.end());
    return act;
}

double sa_internal_reward(const Mat& occupancy, const Scenario& s, const RewardCoeffs& c) {
    for (int i = 0; i < s.num_subcarriers; ++i) {
        int count = 0;
        for (int m = 0; m < s.num_users; ++m) count += occupancy(i, m) != 0.0 ? 1 : 0;
        if (count > s.max_per_subcarrier) return c.sa_int;
    }
    return 0.0;
}

double sa_joint_reward(const RateReport& report, const Scenario& s, const RewardCoeffs& c) {
    const double arg = std::min(c.sa_jo_exp * report.objective / s.bandwidth, kRewardExpCap);
    return c.sa_jo * std::exp(arg);
}

NetworkSpec SaAgent::actor_spec(int M, int NF, int n_full, int d_res, int group_out) {
    NetworkSpec spec;
    const int block = 2 * NF + 3;
    const int pen = std::max(n_full / 2, 1);  // 64 at the reference width 128
    spec.input = {1, 1, M * block};
    spec.layers.push_back(Layer::grouped_fc(std::vector<int>(M, block), group_out, Act::kRelu));
    spec.layers.push_back(Layer::fc(M * group_out, n_full, Act::kRelu));
    for (int d = 0; d < d_res; ++d) spec.layers.push_back(Layer::resblock(n_full));
    spec.layers.push_back(Layer::fc(n_full, pen, Act::kRelu));
    spec.layers.push_back(Layer::fc(pen, 1 + NF, Act::kSigmoid));  // [a_out, b_out]
    return spec;
}

NetworkSpec SaAgent::critic_spec(int M, int NF, int n_full, int d_res, int group_out) {
    NetworkSpec spec;
    const int block = 2 * NF + 3;
    const int pen = std::max(n_full / 2, 1);
    spec.input = {1, 1, M * block + NF + 1};  // state ++ action
    std::vector<int> groups(M, block);
    groups.push_back(NF + 1);
    spec.layers.push_back(Layer::grouped_fc(groups, group_out, Act::kRelu));
    spec.layers.push_back(Layer::fc((M + 1) * group_out, n_full, Act::kRelu));
    for (int d = 0; d < d_res; ++d) spec.layers.push_back(Layer::resblock(n_full));
    spec.layers.push_back(Layer::fc(n_full, pen, Act::kRelu));
    spec.layers.push_back(Layer::fc(pen, 1, Act::kIdentity));
    return spec;
}

SaAgent::SaAgent(const Scenario& s, int n_full, int d_res, int group_out, double actor_lr, double critic_lr,
                 double gamma, double tau, Rng& init_rng)
    : num_users(s.num_users),
      nf(s.num_subcarriers),
      ac(actor_spec(s.num_users, s.num_subcarriers, n_full, d_res, group_out),
         critic_spec(s.num_users, s.num_subcarriers, n_full, d_res, group_out), actor_lr, critic_lr, init_rng) {
    ac.gamma = gamma;
    ac.tau = tau;
}

std::vector<double> SaAgent::policy(const std::vector<double>& scaled_state, double noise_std,
                                    Rng* noise_rng) const {
    std::vector<double> out = ac.actor.forward(scaled_state);
    if (noise_rng && noise_std > 0.0)
        for (double& v : out) v = std::clamp(v + noise_rng->normal(0.0, noise_std), 0.0, 1.0);
    return out;
}

std::vector<int> sa_user_order(const Scenario& s) {
    std::vector<int> order(s.num_users);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return s.weights[x] > s.weights[y]; });
    return order;
}

bool distill_sa_actor(const Scenario& s, SaAgent& agent, const Assignment& target, int max_iters) {
    const int M = s.num_users, NF = s.num_subcarriers;
    const std::vector<int> order = sa_user_order(s);

    // Teacher-forced inputs: the state at each step assumes all earlier users
    // already picked their target subcarriers, which is exactly what a greedy
    // rollout sees once the actor reproduces the target.
    std::vector<std::vector<double>> states(M);
    std::vector<std::vector<double>> targets(M);
    std::vector<SaAction> wanted(M);
    Mat occ(NF, M);
    for (int step = 0; step < M; ++step) {
        const int user = order[step];
        states[step] = scale_sa_state(s, encode_sa_state(s, occ, user), agent.fs);
        std::vector<double> t(1 + NF, 0.1);
        SaAction& w = wanted[step];
        for (int i = 0; i < NF; ++i)
            if (target.occupancy(i, user) != 0.0) {
                t[1 + i] = 0.9;
                w.chosen.push_back(i);
                occ(i, user) = 1.0;
            }
        w.k = static_cast<int>(w.chosen.size());
        if (w.k < 1) return false;  // decode always picks at least one subcarrier
        t[0] = static_cast<double>(w.k) / NF;
        targets[step] = std::move(t);
    }

    Network& actor = agent.ac.actor;
    RmsProp opt(0.05);
    for (int it = 0; it < max_iters; ++it) {
        bool match = true;
        actor.params().zero_grad();
        ForwardCache cache;
        for (int step = 0; step < M; ++step) {
            const std::vector<double> out = actor.forward(states[step], cache);
            const SaAction got =
                decode_sa_action(out[0], std::vector<double>(out.begin() + 1, out.end()));
            if (got.k != wanted[step].k || got.chosen != wanted[step].chosen) match = false;
            std::vector<double> g(out.size());
            for (size_t j = 0; j < out.size(); ++j)
                g[j] = 2.0 * (out[j] - targets[step][j]) / static_cast<double>(out.size());
            actor.backward(cache, g);
        }
        if (match) {
            agent.ac.actor_target.params().data = actor.params().data;
            return true;
        }
        opt.step(actor.params());
    }
    return false;
}

SaRollout sa_rollout(const Scenario& s, const SaAgent& agent, bool explore, double noise_std, Rng& noise_rng) {
    const int M = s.num_users, NF = s.num_subcarriers;
    const std::vector<int> order = sa_user_order(s);

    SaRollout roll;
    roll.assignment = Assignment(NF, M);
    Mat& occ = roll.assignment.occupancy;
    for (int step = 0; step < M; ++step) {
        const int user = order[step];
        Transition tr;
        tr.state = scale_sa_state(s, encode_sa_state(s, occ, user), agent.fs);
        tr.action = agent.policy(tr.state, explore ? noise_std : 0.0, explore ? &noise_rng : nullptr);
        const SaAction act =
            decode_sa_action(tr.action[0], std::vector<double>(tr.action.begin() + 1, tr.action.end()));
        for (int i : act.chosen) occ(i, user) = 1.0;
        tr.reward = sa_internal_reward(occ, s, agent.coeffs);
        // The terminal next state points at the user who would act next in a
        // fresh episode; the TD target bootstraps uniformly (no done flag is stored).
        const int next_user = step + 1 < M ? order[step + 1] : order[0];
        tr.next_state = scale_sa_state(s, encode_sa_state(s, occ, next_user), agent.fs);
        roll.transitions.push_back(std::move(tr));
    }
    return roll;
}

}  // namespace drljrm
