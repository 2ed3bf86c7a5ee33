#pragma once

#include <vector>

#include "drljrm/ddpg.hpp"
#include "drljrm/noma.hpp"
#include "drljrm/scenario.hpp"

namespace drljrm {

// Reward-shaping coefficients for both agent kinds, internal and joint.
struct RewardCoeffs {
    double sa_int = -5.0;     // omega^{u,int}
    double sa_jo = 1.5;       // omega^{u,jo}
    double sa_jo_exp = 0.25;  // omega^{jo}
    double pa_int_1 = -8.0;   // omega_I^{p,int}
    double pa_int_2 = 3.0;    // omega_II^{p,int}
    double pa_jo = 16.0;      // omega_m^{p,jo}
    double pa_jo_exp = 0.45;  // omega_m^{jo}
};

inline constexpr double kRewardExpCap = 50.0;  // exp() overflow guard

// Maps raw physical features into network-friendly ranges. Zero inputs stay
// zero, so masking commutes with scaling.
struct FeatureScale {
    double gain_offset = 12.0;
    double gain_scale = 0.5;
    double rate_scale = 1e-5;

    double gain(double g) const;   // (log10(g)+offset)*scale, 0 for g <= 0
    double rate(double r) const { return r * rate_scale; }
};

// Raw SA state: M contiguous per-user blocks of [w_m, R_m^min, gains column,
// occupancy column, current-user one-hot], each 2*N_F+3 long.
std::vector<double> encode_sa_state(const Scenario& s, const Mat& occupancy, int user);

// Network-facing version of the same layout.
std::vector<double> scale_sa_state(const Scenario& s, const std::vector<double>& raw, const FeatureScale& fs);

struct SaAction {
    std::vector<int> chosen;  // subcarrier indices, ascending
    int k = 0;
};

// k = clamp(round(a_out * N_F), 1, N_F); top-k of b_out, ties to lower index.
SaAction decode_sa_action(double a_out, const std::vector<double>& b_out);

// SA internal reward: penalty iff any subcarrier exceeds N_max.
double sa_internal_reward(const Mat& occupancy, const Scenario& s, const RewardCoeffs& c);

// SA joint reward, exponential in the W-normalized objective (bit/s/Hz).
double sa_joint_reward(const RateReport& report, const Scenario& s, const RewardCoeffs& c);

struct SaAgent {
    int num_users, nf;
    FeatureScale fs;
    RewardCoeffs coeffs;
    ActorCritic ac;

    SaAgent(const Scenario& s, int n_full, int d_res, int group_out, double actor_lr, double critic_lr, double gamma,
            double tau, Rng& init_rng);

    static NetworkSpec actor_spec(int M, int NF, int n_full, int d_res, int group_out);
    static NetworkSpec critic_spec(int M, int NF, int n_full, int d_res, int group_out);

    // Actor output for a scaled state, optionally noise-perturbed, clipped to [0,1].
    std::vector<double> policy(const std::vector<double>& scaled_state, double noise_std, Rng* noise_rng) const;
};

struct SaRollout {
    Assignment assignment;
    std::vector<Transition> transitions;  // scaled states; rewards = internal only
};

// M sequential steps, users in descending priority weight order.
SaRollout sa_rollout(const Scenario& s, const SaAgent& agent, bool explore, double noise_std, Rng& noise_rng);

// Fixed per-episode user order (descending weight, ties to lower id).
std::vector<int> sa_user_order(const Scenario& s);

// Behavior-cloning fit of the actor onto a fixed assignment along its own
// teacher-forced trajectory (states built from the target's occupancy).
// Returns true once a greedy rollout decodes the target exactly; target nets
// are synced to the online actor on success.
bool distill_sa_actor(const Scenario& s, SaAgent& agent, const Assignment& target, int max_iters = 400);

}  // namespace drljrm
