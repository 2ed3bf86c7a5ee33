#pragma once

#include <memory>
#include <string>
#include <vector>

#include "drljrm/network.hpp"
#include "drljrm/replay.hpp"
#include "drljrm/util.hpp"

namespace drljrm {

// Online/target actor-critic pair. Critic input convention: state ++ action.
struct ActorCritic {
    Network actor, actor_target;
    Network critic, critic_target;
    RmsProp actor_opt, critic_opt;
    double gamma = 0.99;
    double tau = 0.01;

    ActorCritic(const NetworkSpec& actor_spec, const NetworkSpec& critic_spec, double actor_lr, double critic_lr,
                Rng& init_rng);

    // TD regression on y = r + gamma * Q_target(s', mu_target(s')); one RMSProp
    // step on the critic; returns the pre-step mean squared TD error.
    double critic_update(const std::vector<const Transition*>& batch);

    // Deterministic policy gradient: ascend E[Q(s, mu(s))]; returns the actor
    // gradient L2 norm.
    double actor_update(const std::vector<const Transition*>& batch);

    void update_targets();
};

// Per-agent observation mask over the (M-1) x self_len other-agent matrix
// zeta() is the observed fraction.
struct IpdMask {
    Mat entries;  // binary, (M-1) x self_len

    IpdMask() = default;
    IpdMask(int others, int self_len) : entries(others, self_len, 1.0) {}
    double zeta() const {
        if (entries.size() == 0) return 1.0;
        return entries.sum() / static_cast<double>(entries.size());
    }
};

// The PA stack: M actor-critic pairs with centralized critics fed by
// a shared state-compression CNN. Actor nets output sigmoids; the action seen
// by critics and the environment is 2*sigma - 1 in (-1, 1).
class MultiAgentCritic {
  public:
    MultiAgentCritic(int num_agents, int nf, const NetworkSpec& actor_spec, const NetworkSpec& critic_spec,
                     const NetworkSpec& cnn_spec, double actor_lr, double critic_lr, double cnn_lr, double gamma,
                     double tau, Rng& init_rng);

    int num_agents() const { return num_agents_; }
    int self_len() const { return self_len_; }

    std::vector<IpdMask>& masks() { return masks_; }
    const std::vector<IpdMask>& masks() const { return masks_; }

    // Zero-padded CNN input for agent m built from all agents' self states,
    // with agent m's mask applied. Empty when M == 1.
    std::vector<double> cnn_input(const std::vector<std::vector<double>>& self_states, int m) const;

    // I_m: compressed other-agent observation (zeros when M == 1).
    std::vector<double> compress(const std::vector<std::vector<double>>& self_states, int m, bool use_target) const;

    // Actor-facing state [self_m, I_m] using the online CNN.
    std::vector<double> actor_state(const std::vector<std::vector<double>>& self_states, int m) const;

    // Raw action in (-1,1) from the online (or target) actor, no noise.
    std::vector<double> act(const std::vector<std::vector<double>>& self_states, int m, bool use_target) const;

    // TD step on agent m's centralized critic; gradients also flow into the
    // shared CNN. Returns the pre-step loss.
    double ma_critic_update(int m, const std::vector<const JointTransition*>& batch);

    // Policy gradient w.r.t. agent m's own action only; other agents'
    // actions stay at their batch values. Returns the actor gradient norm.
    double ma_actor_update(int m, const std::vector<const JointTransition*>& batch);

    void update_targets();

    Network& actor(int m) { return agents_[m].actor; }
    Network& critic(int m) { return agents_[m].critic; }
    Network& cnn() { return *cnn_; }
    bool has_cnn() const { return cnn_ != nullptr; }

    uint64_t forward_macs() const;
    uint64_t backward_macs() const;
    void reset_mac_counters();

    std::vector<CheckpointBlock> checkpoint_blocks(const std::string& prefix) const;
    void restore(const std::vector<CheckpointBlock>& blocks, const std::string& prefix);

  private:
    struct AgentNets {
        Network actor, actor_target;
        Network critic, critic_target;
        RmsProp actor_opt, critic_opt;
    };

    std::vector<double> critic_input(const std::vector<double>& self, const std::vector<double>& compressed,
                                     const std::vector<std::vector<double>>& actions) const;

    int num_agents_;
    int nf_;
    int self_len_;
    std::vector<AgentNets> agents_;
    std::unique_ptr<Network> cnn_, cnn_target_;
    std::unique_ptr<RmsProp> cnn_opt_;
    std::vector<IpdMask> masks_;
    double gamma_, tau_;
};

// Exploration noise std, linearly annealed over training progress in [0,1].
struct NoiseSchedule {
    double start = 0.3;
    double end = 0.02;
    double at(double progress) const {
        if (progress < 0.0) progress = 0.0;
        if (progress > 1.0) progress = 1.0;
        return start + (end - start) * progress;
    }
};

// Checkpoint helpers for a single actor-critic pair.
std::vector<CheckpointBlock> actor_critic_blocks(const ActorCritic& ac, const std::string& prefix);
void restore_actor_critic(ActorCritic& ac, const std::vector<CheckpointBlock>& blocks, const std::string& prefix);

}  // namespace drljrm
