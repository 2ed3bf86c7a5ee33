#include "drljrm/pa_agents.hpp"

#include <algorithm>
#include <cmath>

namespace drljrm {

std::vector<double> encode_pa_self(const Scenario& s, const Assignment& a, const Mat& v, int m) {
    const int NF = s.num_subcarriers;
    std::vector<double> out;
    out.reserve(3 * NF + 2);
    out.push_back(s.weights[m]);
    out.push_back(s.qos_min[m]);
    for (int i = 0; i < NF; ++i) out.push_back(s.gain(i, m));
    for (int i = 0; i < NF; ++i) out.push_back(a.occupancy(i, m));
    for (int i = 0; i < NF; ++i) out.push_back(v(i, m));
    return out;
}

std::vector<double> scale_pa_self(const Scenario& s, const std::vector<double>& raw, const FeatureScale& fs) {
    const int NF = s.num_subcarriers;
    std::vector<double> out(raw.size());
    out[0] = raw[0];
    out[1] = fs.rate(raw[1]);
    for (int i = 0; i < NF; ++i) out[2 + i] = fs.gain(raw[2 + i]);
    for (int i = 0; i < 2 * NF; ++i) out[2 + NF + i] = raw[2 + NF + i];
    return out;
}

PaState encode_pa_state(const Scenario& s, const Assignment& a, const Mat& v, int m, const IpdMask& mask) {
    const int M = s.num_users;
    const int self_len = 3 * s.num_subcarriers + 2;
    if (mask.entries.rows != M - 1 || mask.entries.cols != self_len)
        throw std::invalid_argument("encode_pa_state: mask shape mismatch");
    PaState st;
    st.self = encode_pa_self(s, a, v, m);
    st.others = Mat(M - 1, self_len);
    int row = 0;
    for (int k = 0; k < M; ++k) {
        if (k == m) continue;
        const std::vector<double> other = encode_pa_self(s, a, v, k);
        for (int c = 0; c < self_len; ++c) st.others(row, c) = mask.entries(row, c) * other[c];
        ++row;
    }
    return st;
}

IpdMask mask_from_categories(int others, int nf, const std::array<bool, 5>& observed) {
    IpdMask mask(others, 3 * nf + 2);
    const int lens[5] = {1, 1, nf, nf, nf};
    for (int r = 0; r < others; ++r) {
        int c = 0;
        for (int cat = 0; cat < 5; ++cat)
            for (int k = 0; k < lens[cat]; ++k, ++c) mask.entries(r, c) = observed[cat] ? 1.0 : 0.0;
    }
    return mask;
}

std::vector<double> apply_pa_action(const std::vector<double>& v, const std::vector<int>& rho, double theta,
                                    const std::vector<char>& assigned) {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        if (!assigned[i]) {
            out[i] = 0.0;
            continue;
        }
        out[i] = v[i] + theta * rho[i];
        if (out[i] < 0.0) out[i] = 0.0;
    }
    return out;
}

std::vector<int> discretize_pa_action(const std::vector<double>& raw) {
    std::vector<int> rho(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) rho[i] = raw[i] < -1.0 / 3.0 ? -1 : (raw[i] > 1.0 / 3.0 ? 1 : 0);
    return rho;
}

double pa_internal_reward(const Scenario& s, const SicOrder& order, const Mat& powers, int m,
                          const RateReport& report, const RewardCoeffs& c) {
    bool violated = false;
    for (int i = 0; i < s.num_subcarriers && !violated; ++i) {
        bool involves_m = false;
        for (int u : order.users[i]) involves_m = involves_m || u == m;
        if (!involves_m) continue;
        for (int j = 0; j < order.multiplexed(i) && !violated; ++j)
            violated = !pdsc_satisfied(s, order, powers, i, j);
    }
    const double margin = (report.user_totals[m] - s.qos_min[m]) / s.bandwidth;
    return (violated ? c.pa_int_1 : 0.0) + c.pa_int_2 * margin;
}

double pa_joint_reward(const RateReport& report, const Scenario& s, int m, const RewardCoeffs& c) {
    double total = 0.0;
    for (int k = 0; k < s.num_users; ++k) total += s.weights[k] * report.user_totals[k];
    if (total <= 0.0) return 0.0;
    const double share = s.weights[m] * report.user_totals[m] / total;
    const double arg = std::min(c.pa_jo_exp * report.objective / s.bandwidth, kRewardExpCap);
    return share * c.pa_jo * std::exp(arg);
}

NetworkSpec pa_actor_spec(int NF, int n_full, int d_res) {
    NetworkSpec spec;
    const int self_len = 3 * NF + 2;
    const int pen = std::max(n_full / 2, 1);
    spec.input = {1, 1, 2 * self_len};
    spec.layers.push_back(Layer::fc(2 * self_len, n_full, Act::kRelu));
    for (int d = 0; d < d_res; ++d) spec.layers.push_back(Layer::resblock(n_full));
    spec.layers.push_back(Layer::fc(n_full, pen, Act::kRelu));
    spec.layers.push_back(Layer::fc(pen, NF, Act::kSigmoid));
    return spec;
}

NetworkSpec pa_critic_spec(int M, int NF, int n_full, int d_res) {
    NetworkSpec spec;
    const int self_len = 3 * NF + 2;
    const int pen = std::max(n_full / 2, 1);
    const int in = 2 * self_len + M * NF;  // self obs ++ compressed others ++ all actions
    spec.input = {1, 1, in};
    spec.layers.push_back(Layer::fc(in, n_full, Act::kRelu));
    for (int d = 0; d < d_res; ++d) spec.layers.push_back(Layer::resblock(n_full));
    spec.layers.push_back(Layer::fc(n_full, pen, Act::kRelu));
    spec.layers.push_back(Layer::fc(pen, 1, Act::kIdentity));
    return spec;
}

int cnn_padded_dim(int n) {
    int x = std::max(n, 10);
    while (x % 4 != 2) ++x;
    return x;
}

NetworkSpec state_cnn_spec(int M, int NF, int fc_width) {
    NetworkSpec spec;
    const int self_len = 3 * NF + 2;
    const int h = cnn_padded_dim(M - 1), w = cnn_padded_dim(self_len);
    spec.input = {1, h, w};
    spec.layers.push_back(Layer::conv(1, 8, 3, Act::kRelu));
    spec.layers.push_back(Layer::maxpool(2));
    spec.layers.push_back(Layer::conv(8, 16, 3, Act::kRelu));
    spec.layers.push_back(Layer::maxpool(2));
    spec.layers.push_back(Layer::flatten());
    const int flat = 16 * (((h - 2) / 2 - 2) / 2) * (((w - 2) / 2 - 2) / 2);
    spec.layers.push_back(Layer::fc(flat, fc_width, Act::kRelu));
    spec.layers.push_back(Layer::fc(fc_width, fc_width, Act::kRelu));
    spec.layers.push_back(Layer::fc(fc_width, self_len, Act::kSigmoid));
    return spec;
}

PaRollout pa_rollout(const Scenario& s, const Assignment& a, const MultiAgentCritic& agents, int t_max, double theta,
                     const FeatureScale& fs, const RewardCoeffs& coeffs, bool explore, double noise_std,
                     Rng& noise_rng) {
    const int M = s.num_users, NF = s.num_subcarriers;
    const SicOrder order = sic_order(s, a);

    Mat v(NF, M);
    for (int i = 0; i < NF; ++i)
        for (int m = 0; m < M; ++m) v(i, m) = a.assigned(i, m) ? 1.0 : 0.0;

    std::vector<std::vector<char>> assigned(M, std::vector<char>(NF));
    for (int m = 0; m < M; ++m)
        for (int i = 0; i < NF; ++i) assigned[m][i] = a.assigned(i, m) ? 1 : 0;

    auto scaled_states = [&](const Mat& vv) {
        std::vector<std::vector<double>> out(M);
        for (int m = 0; m < M; ++m) out[m] = scale_pa_self(s, encode_pa_self(s, a, vv, m), fs);
        return out;
    };

    PaRollout roll;
    std::vector<std::vector<double>> states = scaled_states(v);
    for (int t = 0; t < t_max; ++t) {
        JointTransition tr;
        tr.self_states = states;
        tr.actions.resize(M);
        tr.rewards.resize(M);

        // All agents act from the same snapshot, then v merges in one barrier.
        for (int m = 0; m < M; ++m) {
            std::vector<double> raw = agents.act(states, m, false);
            if (explore && noise_std > 0.0)
                for (double& x : raw) x = std::clamp(x + noise_rng.normal(0.0, noise_std), -1.0, 1.0);
            tr.actions[m] = std::move(raw);
        }
        for (int m = 0; m < M; ++m) {
            std::vector<double> col(NF);
            for (int i = 0; i < NF; ++i) col[i] = v(i, m);
            col = apply_pa_action(col, discretize_pa_action(tr.actions[m]), theta, assigned[m]);
            for (int i = 0; i < NF; ++i) v(i, m) = col[i];
        }

        const Mat powers = normalize_power(v, s.total_power);
        const RateReport report = evaluate(s, a, powers);
        for (int m = 0; m < M; ++m) tr.rewards[m] = pa_internal_reward(s, order, powers, m, report, coeffs);

        tr.next_self_states = scaled_states(v);
        states = tr.next_self_states;
        roll.transitions.push_back(std::move(tr));
    }

    roll.power.indicator = v;
    roll.power.powers = normalize_power(v, s.total_power);
    roll.report = evaluate(s, a, roll.power.powers);
    return roll;
}

}  // namespace drljrm
