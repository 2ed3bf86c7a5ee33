#include "drljrm/ddpg.hpp"

#include <cmath>
#include <stdexcept>

namespace drljrm {

namespace {

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

ActorCritic::ActorCritic(const NetworkSpec& actor_spec, const NetworkSpec& critic_spec, double actor_lr,
                         double critic_lr, Rng& init_rng)
    : actor(actor_spec),
      actor_target(actor_spec),
      critic(critic_spec),
      critic_target(critic_spec),
      actor_opt(actor_lr),
      critic_opt(critic_lr) {
    actor.init(init_rng);
    critic.init(init_rng);
    actor_target.params().data = actor.params().data;
    critic_target.params().data = critic.params().data;
}

double ActorCritic::critic_update(const std::vector<const Transition*>& batch) {
    if (batch.empty()) throw std::invalid_argument("critic_update: empty batch");
    const double inv_b = 1.0 / batch.size();
    critic.params().zero_grad();
    double loss = 0.0;
    for (const Transition* t : batch) {
        const std::vector<double> a_next = actor_target.forward(t->next_state);
        const double q_next = critic_target.forward(concat(t->next_state, a_next))[0];
        const double y = t->reward + gamma * q_next;
        ForwardCache cache;
        const double q = critic.forward(concat(t->state, t->action), cache)[0];
        const double diff = q - y;
        loss += diff * diff * inv_b;
        critic.backward(cache, {2.0 * diff * inv_b});
    }
    if (!std::isfinite(loss)) throw std::runtime_error("critic_update: non-finite loss");
    critic_opt.step(critic.params());
    return loss;
}

double ActorCritic::actor_update(const std::vector<const Transition*>& batch) {
    if (batch.empty()) throw std::invalid_argument("actor_update: empty batch");
    const double inv_b = 1.0 / batch.size();
    actor.params().zero_grad();
    critic.params().zero_grad();  // scratch; cleared again below
    for (const Transition* t : batch) {
        ForwardCache acache, ccache;
        const std::vector<double> a = actor.forward(t->state, acache);
        critic.forward(concat(t->state, a), ccache);
        const std::vector<double> gin = critic.backward(ccache, {-inv_b});  // descend -E[Q]
        const std::vector<double> da(gin.end() - static_cast<long>(a.size()), gin.end());
        actor.backward(acache, da);
    }
    const double norm = l2_norm(actor.params().grad);
    if (!std::isfinite(norm)) throw std::runtime_error("actor_update: non-finite gradient");
    actor_opt.step(actor.params());
    critic.params().zero_grad();
    return norm;
}

void ActorCritic::update_targets() {
    soft_update(actor_target.params(), actor.params(), tau);
    soft_update(critic_target.params(), critic.params(), tau);
}

MultiAgentCritic::MultiAgentCritic(int num_agents, int nf, const NetworkSpec& actor_spec,
                                   const NetworkSpec& critic_spec, const NetworkSpec& cnn_spec, double actor_lr,
                                   double critic_lr, double cnn_lr, double gamma, double tau, Rng& init_rng)
    : num_agents_(num_agents), nf_(nf), gamma_(gamma), tau_(tau) {
    if (num_agents < 1) throw std::invalid_argument("MultiAgentCritic: need at least one agent");
    self_len_ = 3 * nf + 2;
    for (int m = 0; m < num_agents; ++m) {
        AgentNets a{Network(actor_spec), Network(actor_spec), Network(critic_spec), Network(critic_spec),
                    RmsProp(actor_lr), RmsProp(critic_lr)};
        a.actor.init(init_rng);
        a.critic.init(init_rng);
        a.actor_target.params().data = a.actor.params().data;
        a.critic_target.params().data = a.critic.params().data;
        agents_.push_back(std::move(a));
        masks_.emplace_back(num_agents - 1, self_len_);
    }
    if (num_agents > 1) {
        cnn_ = std::make_unique<Network>(cnn_spec);
        cnn_target_ = std::make_unique<Network>(cnn_spec);
        cnn_->init(init_rng);
        cnn_target_->params().data = cnn_->params().data;
        cnn_opt_ = std::make_unique<RmsProp>(cnn_lr);
        if (cnn_->spec().output_len() != self_len_)
            throw std::invalid_argument("MultiAgentCritic: cnn output must be 3*N_F+2");
    }
}

std::vector<double> MultiAgentCritic::cnn_input(const std::vector<std::vector<double>>& self_states, int m) const {
    if (!cnn_) return {};
    const TensorShape in = cnn_->spec().input;
    std::vector<double> padded(static_cast<size_t>(in.len()), 0.0);
    int row = 0;
    for (int k = 0; k < num_agents_; ++k) {
        if (k == m) continue;
        const std::vector<double>& s = self_states[k];
        for (int c = 0; c < self_len_; ++c)
            padded[static_cast<size_t>(row) * in.w + c] = masks_[m].entries(row, c) * s[c];
        ++row;
    }
    return padded;
}

std::vector<double> MultiAgentCritic::compress(const std::vector<std::vector<double>>& self_states, int m,
                                               bool use_target) const {
    if (!cnn_) return std::vector<double>(self_len_, 0.0);
    const Network& net = use_target ? *cnn_target_ : *cnn_;
    return net.forward(cnn_input(self_states, m));
}

std::vector<double> MultiAgentCritic::actor_state(const std::vector<std::vector<double>>& self_states, int m) const {
    return concat(self_states[m], compress(self_states, m, false));
}

std::vector<double> MultiAgentCritic::act(const std::vector<std::vector<double>>& self_states, int m,
                                          bool use_target) const {
    const std::vector<double> st = concat(self_states[m], compress(self_states, m, use_target));
    const Network& net = use_target ? agents_[m].actor_target : agents_[m].actor;
    std::vector<double> out = net.forward(st);
    for (double& v : out) v = 2.0 * v - 1.0;  // sigmoid -> raw action in (-1,1)
    return out;
}

std::vector<double> MultiAgentCritic::critic_input(const std::vector<double>& self,
                                                   const std::vector<double>& compressed,
                                                   const std::vector<std::vector<double>>& actions) const {
    std::vector<double> in;
    in.reserve(self.size() + compressed.size() + static_cast<size_t>(num_agents_) * nf_);
    in.insert(in.end(), self.begin(), self.end());
    in.insert(in.end(), compressed.begin(), compressed.end());
    for (const auto& a : actions) in.insert(in.end(), a.begin(), a.end());
    return in;
}

double MultiAgentCritic::ma_critic_update(int m, const std::vector<const JointTransition*>& batch) {
    if (batch.empty()) throw std::invalid_argument("ma_critic_update: empty batch");
    AgentNets& ag = agents_[m];
    const double inv_b = 1.0 / batch.size();
    ag.critic.params().zero_grad();
    if (cnn_) cnn_->params().zero_grad();
    double loss = 0.0;
    for (const JointTransition* t : batch) {
        std::vector<std::vector<double>> a_next(num_agents_);
        for (int k = 0; k < num_agents_; ++k) a_next[k] = act(t->next_self_states, k, true);
        const std::vector<double> i_next = compress(t->next_self_states, m, true);
        const double q_next =
            ag.critic_target.forward(critic_input(t->next_self_states[m], i_next, a_next))[0];
        const double y = t->rewards[m] + gamma_ * q_next;

        ForwardCache cnn_cache, crit_cache;
        std::vector<double> i_m;
        if (cnn_) {
            i_m = cnn_->forward(cnn_input(t->self_states, m), cnn_cache);
        } else {
            i_m.assign(self_len_, 0.0);
        }
        const double q = ag.critic.forward(critic_input(t->self_states[m], i_m, t->actions), crit_cache)[0];
        const double diff = q - y;
        loss += diff * diff * inv_b;
        const std::vector<double> gin = ag.critic.backward(crit_cache, {2.0 * diff * inv_b});
        if (cnn_) {
            const std::vector<double> gi(gin.begin() + self_len_, gin.begin() + 2 * self_len_);
            cnn_->backward(cnn_cache, gi);
        }
    }
    if (!std::isfinite(loss)) throw std::runtime_error("ma_critic_update: non-finite loss");
    ag.critic_opt.step(ag.critic.params());
    if (cnn_) cnn_opt_->step(cnn_->params());
    return loss;
}

double MultiAgentCritic::ma_actor_update(int m, const std::vector<const JointTransition*>& batch) {
    if (batch.empty()) throw std::invalid_argument("ma_actor_update: empty batch");
    AgentNets& ag = agents_[m];
    const double inv_b = 1.0 / batch.size();
    ag.actor.params().zero_grad();
    ag.critic.params().zero_grad();  // scratch
    const int off = 2 * self_len_ + m * nf_;
    for (const JointTransition* t : batch) {
        const std::vector<double> i_m = compress(t->self_states, m, false);
        ForwardCache acache, ccache;
        const std::vector<double> sig = ag.actor.forward(concat(t->self_states[m], i_m), acache);
        std::vector<std::vector<double>> actions = t->actions;
        actions[m].resize(nf_);
        for (int i = 0; i < nf_; ++i) actions[m][i] = 2.0 * sig[i] - 1.0;
        ag.critic.forward(critic_input(t->self_states[m], i_m, actions), ccache);
        const std::vector<double> gin = ag.critic.backward(ccache, {-inv_b});
        std::vector<double> da(nf_);
        for (int i = 0; i < nf_; ++i) da[i] = 2.0 * gin[off + i];  // d(raw)/d(sigmoid) = 2
        ag.actor.backward(acache, da);
    }
    const double norm = l2_norm(ag.actor.params().grad);
    if (!std::isfinite(norm)) throw std::runtime_error("ma_actor_update: non-finite gradient");
    ag.actor_opt.step(ag.actor.params());
    ag.critic.params().zero_grad();
    return norm;
}

void MultiAgentCritic::update_targets() {
    for (AgentNets& a : agents_) {
        soft_update(a.actor_target.params(), a.actor.params(), tau_);
        soft_update(a.critic_target.params(), a.critic.params(), tau_);
    }
    if (cnn_) soft_update(cnn_target_->params(), cnn_->params(), tau_);
}

uint64_t MultiAgentCritic::forward_macs() const {
    uint64_t n = 0;
    for (const AgentNets& a : agents_)
        n += a.actor.forward_macs() + a.actor_target.forward_macs() + a.critic.forward_macs() +
             a.critic_target.forward_macs();
    if (cnn_) n += cnn_->forward_macs() + cnn_target_->forward_macs();
    return n;
}

uint64_t MultiAgentCritic::backward_macs() const {
    uint64_t n = 0;
    for (const AgentNets& a : agents_) n += a.actor.backward_macs() + a.critic.backward_macs();
    if (cnn_) n += cnn_->backward_macs();
    return n;
}

void MultiAgentCritic::reset_mac_counters() {
    for (AgentNets& a : agents_) {
        a.actor.reset_mac_counters();
        a.actor_target.reset_mac_counters();
        a.critic.reset_mac_counters();
        a.critic_target.reset_mac_counters();
    }
    if (cnn_) {
        cnn_->reset_mac_counters();
        cnn_target_->reset_mac_counters();
    }
}

namespace {

CheckpointBlock net_block(const Network& n, const std::string& name) {
    return {name, n.spec().hash(), n.params().data};
}

CheckpointBlock opt_block(const RmsProp& o, const Network& owner, const std::string& name) {
    std::vector<double> acc = o.acc;
    if (acc.empty()) acc.assign(owner.params().size(), 0.0);
    return {name, owner.spec().hash(), acc};
}

void restore_net(Network& n, const std::vector<CheckpointBlock>& blocks, const std::string& name) {
    const CheckpointBlock& b = checkpoint_block(blocks, name, n.spec().hash());
    if (b.values.size() != n.params().size())
        throw std::invalid_argument("checkpoint block '" + name + "' has wrong length");
    n.params().data = b.values;
}

void restore_opt(RmsProp& o, const Network& owner, const std::vector<CheckpointBlock>& blocks,
                 const std::string& name) {
    const CheckpointBlock& b = checkpoint_block(blocks, name, owner.spec().hash());
    if (b.values.size() != owner.params().size())
        throw std::invalid_argument("checkpoint block '" + name + "' has wrong length");
    o.acc = b.values;
}

}  // namespace

std::vector<CheckpointBlock> actor_critic_blocks(const ActorCritic& ac, const std::string& prefix) {
    return {net_block(ac.actor, prefix + ".actor"),
            net_block(ac.actor_target, prefix + ".actor_target"),
            net_block(ac.critic, prefix + ".critic"),
            net_block(ac.critic_target, prefix + ".critic_target"),
            opt_block(ac.actor_opt, ac.actor, prefix + ".actor_opt"),
            opt_block(ac.critic_opt, ac.critic, prefix + ".critic_opt")};
}

void restore_actor_critic(ActorCritic& ac, const std::vector<CheckpointBlock>& blocks, const std::string& prefix) {
    restore_net(ac.actor, blocks, prefix + ".actor");
    restore_net(ac.actor_target, blocks, prefix + ".actor_target");
    restore_net(ac.critic, blocks, prefix + ".critic");
    restore_net(ac.critic_target, blocks, prefix + ".critic_target");
    restore_opt(ac.actor_opt, ac.actor, blocks, prefix + ".actor_opt");
    restore_opt(ac.critic_opt, ac.critic, blocks, prefix + ".critic_opt");
}

std::vector<CheckpointBlock> MultiAgentCritic::checkpoint_blocks(const std::string& prefix) const {
    std::vector<CheckpointBlock> out;
    for (int m = 0; m < num_agents_; ++m) {
        const AgentNets& a = agents_[m];
        const std::string p = prefix + ".agent" + std::to_string(m);
        out.push_back(net_block(a.actor, p + ".actor"));
        out.push_back(net_block(a.actor_target, p + ".actor_target"));
        out.push_back(net_block(a.critic, p + ".critic"));
        out.push_back(net_block(a.critic_target, p + ".critic_target"));
        out.push_back(opt_block(a.actor_opt, a.actor, p + ".actor_opt"));
        out.push_back(opt_block(a.critic_opt, a.critic, p + ".critic_opt"));
    }
    if (cnn_) {
        out.push_back(net_block(*cnn_, prefix + ".cnn"));
        out.push_back(net_block(*cnn_target_, prefix + ".cnn_target"));
        out.push_back(opt_block(*cnn_opt_, *cnn_, prefix + ".cnn_opt"));
    }
    return out;
}

void MultiAgentCritic::restore(const std::vector<CheckpointBlock>& blocks, const std::string& prefix) {
    for (int m = 0; m < num_agents_; ++m) {
        AgentNets& a = agents_[m];
        const std::string p = prefix + ".agent" + std::to_string(m);
        restore_net(a.actor, blocks, p + ".actor");
        restore_net(a.actor_target, blocks, p + ".actor_target");
        restore_net(a.critic, blocks, p + ".critic");
        restore_net(a.critic_target, blocks, p + ".critic_target");
        restore_opt(a.actor_opt, a.actor, blocks, p + ".actor_opt");
        restore_opt(a.critic_opt, a.critic, blocks, p + ".critic_opt");
    }
    if (cnn_) {
        restore_net(*cnn_, blocks, prefix + ".cnn");
        restore_net(*cnn_target_, blocks, prefix + ".cnn_target");
        restore_opt(*cnn_opt_, *cnn_, blocks, prefix + ".cnn_opt");
    }
}

}  // namespace drljrm
