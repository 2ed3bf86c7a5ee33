#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "drljrm/pa_agents.hpp"
#include "drljrm/sa_agent.hpp"

namespace drljrm {

struct TrainConfig {
    int n_ep = 2000;
    int n_max_sa = 200;
    int n_max_pa = 200;
    int t_max_pa = 30;
    double lr_sa_an = 0.001, lr_sa_cn = 0.003;
    double lr_pa_an = 0.002, lr_pa_cn = 0.005;
    double lr_cnn = 0.005;
    int buffer_sa = 5000, buffer_pa = 4000;
    int batch = 128;
    double gamma = 0.99;
    double tau = 0.01;
    double theta = 1e-2;  // indicator step; 1e-5 for full-scale fidelity
    int n_full = 48, d_res = 3, group_out = 16;
    bool broadcast_joint = true;  // joint reward to every epoch transition
    int pa_update_every = 1;      // thin the PA update cadence if > 1
    int eval_every = 25;          // greedy-eval cadence for checkpoint selection; 0 = off
    bool keep_best = true;        // return the best feasible greedy-eval weights
    int refine_ep = 0;            // post-loop self-imitation polish epochs; 0 = off
    NoiseSchedule noise;
    RewardCoeffs coeffs;
    FeatureScale fs;
    uint64_t seed = 1;

    void validate() const;
};

TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv);

struct EpochLog {
    int epoch = 0;
    bool ssar = false, spar = false;
    int sa_tries = 0, pa_tries = 0;
    double objective = 0.0;  // weighted sum rate when ssar && spar, else 0
    int violations = 0;      // false C-flags at the final evaluation
    double sa_critic_loss = 0.0, sa_actor_norm = 0.0;
    double pa_critic_loss = 0.0, pa_actor_norm = 0.0;  // means over agents
    uint64_t fwd_macs = 0, bwd_macs = 0;
    double wall_ms = 0.0;
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    bool aborted = false;

    void to_csv(const std::string& path) const;
    // Field-wise equality ignoring wall time (and MACs trivially equal).
    bool same_trajectory(const TrainLog& other) const;
};

// The full agent stack plus the knobs rollouts need.
struct Agents {
    SaAgent sa;
    MultiAgentCritic pa;
    FeatureScale fs;
    RewardCoeffs coeffs;
    int t_max_pa;
    double theta;

    Agents(const Scenario& s, const TrainConfig& cfg);

    void save(const std::string& path) const;
    void load(const std::string& path);
    std::vector<CheckpointBlock> blocks() const;
    void restore_blocks(const std::vector<CheckpointBlock>& b);
};

struct TrainResult {
    std::unique_ptr<Agents> agents;
    TrainLog log;
};

TrainResult train(const Scenario& s, const TrainConfig& cfg);

struct PolicyEval {
    double objective_mean = 0.0, objective_std = 0.0;
    double at_mean = 0.0;      // bit/s/Hz
    double q_eff_mean = 0.0;   // bit/s
    double qos_rate_mean = 0.0;
    int episodes = 0;
    Assignment assignment;  // from the last episode
    PowerAllocation power;
    RateReport report;
};

PolicyEval evaluate_policy(const Scenario& s, const Agents& agents, int episodes);

struct ComplexityAudit {
    uint64_t measured_sa_fwd = 0, measured_sa_bwd = 0;
    double predicted_sa = 0.0, ratio_sa = 0.0;
    uint64_t measured_pa_fwd = 0, measured_pa_bwd = 0;
    double predicted_pa = 0.0, ratio_pa = 0.0;
};

// Closed-form per-epoch MAC predictions with the implemented hyper-parameters.
double predicted_sa_macs(int n_max_sa, int M, int n_full, int d_res, int nf);
double predicted_pa_macs(int n_max_pa, int t_max_pa, int M, int NF, int n_full, int d_res, int d_cnn);

// Instruments one accounting episode of real forwards and scales by the
// episode counts; compares against the predictions above.
ComplexityAudit complexity_audit(int M, int NF, int n_full, int d_res, int group_out, int n_max_sa, int n_max_pa,
                                 int t_max_pa);

}  // namespace drljrm
