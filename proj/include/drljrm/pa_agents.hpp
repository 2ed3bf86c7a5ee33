#pragma once

#include <array>
#include <vector>

#include "drljrm/ddpg.hpp"
#include "drljrm/noma.hpp"
#include "drljrm/sa_agent.hpp"
#include "drljrm/scenario.hpp"

namespace drljrm {

// Raw per-agent observation [w_m, R_m^min, gains column, assigned column,
// indicator column], length 3*N_F+2.
std::vector<double> encode_pa_self(const Scenario& s, const Assignment& a, const Mat& v, int m);

std::vector<double> scale_pa_self(const Scenario& s, const std::vector<double>& raw, const FeatureScale& fs);

struct PaState {
    std::vector<double> self;
    Mat others;  // (M-1) x (3N_F+2), masked rows in ascending other-agent id
};

PaState encode_pa_state(const Scenario& s, const Assignment& a, const Mat& v, int m, const IpdMask& mask);

// Information-perception mask over the N_cate = 5 observation categories
// [weight, qos, gains, assignment, indicator].
IpdMask mask_from_categories(int others, int nf, const std::array<bool, 5>& observed);

// v' = max(0, v + theta*rho), zeroed off-assignment.
std::vector<double> apply_pa_action(const std::vector<double>& v, const std::vector<int>& rho, double theta,
                                    const std::vector<char>& assigned);

// raw < -1/3 -> -1, raw > 1/3 -> +1, else 0.
std::vector<int> discretize_pa_action(const std::vector<double>& raw);

// PA internal reward: PDSC penalty on the agent's subcarriers plus the QoS
// rate margin
// in bit/s/Hz.
double pa_internal_reward(const Scenario& s, const SicOrder& order, const Mat& powers, int m,
                          const RateReport& report, const RewardCoeffs& c);

// PA joint difference reward: each agent's share of the exponential joint
// payout, proportional to its weighted-rate contribution.
double pa_joint_reward(const RateReport& report, const Scenario& s, int m, const RewardCoeffs& c);

// Network specs for the PA stack.
NetworkSpec pa_actor_spec(int NF, int n_full, int d_res);
NetworkSpec pa_critic_spec(int M, int NF, int n_full, int d_res);
NetworkSpec state_cnn_spec(int M, int NF, int fc_width);

// Zero-padded state-CNN input dims: smallest x >= max(n, 10) with x % 4 == 2,
// so two conv(3)+pool(2) stages divide exactly.
int cnn_padded_dim(int n);

struct PaRollout {
    PowerAllocation power;
    RateReport report;
    std::vector<JointTransition> transitions;  // scaled states; internal rewards
};

// T synchronized steps from the equal-power start (v = 1 on assigned slots).
PaRollout pa_rollout(const Scenario& s, const Assignment& a, const MultiAgentCritic& agents, int t_max, double theta,
                     const FeatureScale& fs, const RewardCoeffs& coeffs, bool explore, double noise_std,
                     Rng& noise_rng);

}  // namespace drljrm
