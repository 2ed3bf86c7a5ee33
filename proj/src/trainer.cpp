#include "drljrm/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "drljrm/baselines.hpp"

namespace drljrm {

void TrainConfig::validate() const {
    if (n_ep < 1 || n_max_sa < 1 || n_max_pa < 1 || t_max_pa < 1) throw std::invalid_argument("counts must be >= 1");
    if (lr_sa_an <= 0 || lr_sa_cn <= 0 || lr_pa_an <= 0 || lr_pa_cn <= 0 || lr_cnn <= 0)
        throw std::invalid_argument("learning rates must be positive");
    if (batch < 1) throw std::invalid_argument("batch must be >= 1");
    if (buffer_sa < batch || buffer_pa < batch) throw std::invalid_argument("buffers must hold at least one batch");
    if (!(gamma > 0.0) || !(gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("tau must lie in [0,1]");
    if (n_full < 2 || d_res < 1 || group_out < 1) throw std::invalid_argument("bad network dimensions");
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (pa_update_every < 1) throw std::invalid_argument("pa_update_every must be >= 1");
    if (eval_every < 0) throw std::invalid_argument("eval_every must be >= 0");
    if (refine_ep < 0) throw std::invalid_argument("refine_ep must be >= 0");
}

TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv) {
    TrainConfig c;
    c.n_ep = static_cast<int>(kv_get_int(kv, "n_ep", c.n_ep));
    c.n_max_sa = static_cast<int>(kv_get_int(kv, "n_max_sa", c.n_max_sa));
    c.n_max_pa = static_cast<int>(kv_get_int(kv, "n_max_pa", c.n_max_pa));
    c.t_max_pa = static_cast<int>(kv_get_int(kv, "t_max_pa", c.t_max_pa));
    c.lr_sa_an = kv_get_double(kv, "lr_sa_an", c.lr_sa_an);
    c.lr_sa_cn = kv_get_double(kv, "lr_sa_cn", c.lr_sa_cn);
    c.lr_pa_an = kv_get_double(kv, "lr_pa_an", c.lr_pa_an);
    c.lr_pa_cn = kv_get_double(kv, "lr_pa_cn", c.lr_pa_cn);
    c.lr_cnn = kv_get_double(kv, "lr_cnn", c.lr_cnn);
    c.buffer_sa = static_cast<int>(kv_get_int(kv, "buffer_sa", c.buffer_sa));
    c.buffer_pa = static_cast<int>(kv_get_int(kv, "buffer_pa", c.buffer_pa));
    c.batch = static_cast<int>(kv_get_int(kv, "batch", c.batch));
    c.gamma = kv_get_double(kv, "gamma", c.gamma);
    c.tau = kv_get_double(kv, "tau", c.tau);
    c.theta = kv_get_double(kv, "theta", c.theta);
    c.n_full = static_cast<int>(kv_get_int(kv, "n_full", c.n_full));
    c.d_res = static_cast<int>(kv_get_int(kv, "d_res", c.d_res));
    c.group_out = static_cast<int>(kv_get_int(kv, "group_out", c.group_out));
    c.broadcast_joint = kv_get_int(kv, "broadcast_joint", c.broadcast_joint ? 1 : 0) != 0;
    c.pa_update_every = static_cast<int>(kv_get_int(kv, "pa_update_every", c.pa_update_every));
    c.eval_every = static_cast<int>(kv_get_int(kv, "eval_every", c.eval_every));
    c.keep_best = kv_get_int(kv, "keep_best", c.keep_best ? 1 : 0) != 0;
    c.refine_ep = static_cast<int>(kv_get_int(kv, "refine_ep", c.refine_ep));
    c.noise.start = kv_get_double(kv, "noise_start", c.noise.start);
    c.noise.end = kv_get_double(kv, "noise_end", c.noise.end);
    c.coeffs.sa_int = kv_get_double(kv, "omega_u_int", c.coeffs.sa_int);
    c.coeffs.sa_jo = kv_get_double(kv, "omega_u_jo", c.coeffs.sa_jo);
    c.coeffs.sa_jo_exp = kv_get_double(kv, "omega_jo", c.coeffs.sa_jo_exp);
    c.coeffs.pa_int_1 = kv_get_double(kv, "omega_p_int_1", c.coeffs.pa_int_1);
    c.coeffs.pa_int_2 = kv_get_double(kv, "omega_p_int_2", c.coeffs.pa_int_2);
    c.coeffs.pa_jo = kv_get_double(kv, "omega_p_jo", c.coeffs.pa_jo);
    c.coeffs.pa_jo_exp = kv_get_double(kv, "omega_m_jo", c.coeffs.pa_jo_exp);
    c.seed = static_cast<uint64_t>(kv_get_int(kv, "train_seed", static_cast<long long>(c.seed)));
    c.validate();
    return c;
}

void TrainLog::to_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for write: " + path);
    out << "epoch,ssar,spar,sa_tries,pa_tries,objective,violations,sa_critic_loss,sa_actor_norm,"
           "pa_critic_loss,pa_actor_norm,fwd_macs,bwd_macs,wall_ms\n";
    for (const EpochLog& e : epochs) {
        out << e.epoch << ',' << e.ssar << ',' << e.spar << ',' << e.sa_tries << ',' << e.pa_tries << ','
            << fmt_double(e.objective) << ',' << e.violations << ',' << fmt_double(e.sa_critic_loss) << ','
            << fmt_double(e.sa_actor_norm) << ',' << fmt_double(e.pa_critic_loss) << ','
            << fmt_double(e.pa_actor_norm) << ',' << e.fwd_macs << ',' << e.bwd_macs << ','
            << fmt_double(e.wall_ms) << '\n';
    }
}

bool TrainLog::same_trajectory(const TrainLog& other) const {
    if (epochs.size() != other.epochs.size() || aborted != other.aborted) return false;
    for (size_t i = 0; i < epochs.size(); ++i) {
        const EpochLog& a = epochs[i];
        const EpochLog& b = other.epochs[i];
        if (a.epoch != b.epoch || a.ssar != b.ssar || a.spar != b.spar || a.sa_tries != b.sa_tries ||
            a.pa_tries != b.pa_tries || a.objective != b.objective || a.violations != b.violations ||
            a.sa_critic_loss != b.sa_critic_loss || a.sa_actor_norm != b.sa_actor_norm ||
            a.pa_critic_loss != b.pa_critic_loss || a.pa_actor_norm != b.pa_actor_norm)
            return false;
    }
    return true;
}

namespace {

SaAgent make_sa(const Scenario& s, const TrainConfig& cfg) {
    Rng init(derive_seed(cfg.seed, kSeedInitSA));
    return SaAgent(s, cfg.n_full, cfg.d_res, cfg.group_out, cfg.lr_sa_an, cfg.lr_sa_cn, cfg.gamma, cfg.tau, init);
}

MultiAgentCritic make_pa(const Scenario& s, const TrainConfig& cfg) {
    Rng init(derive_seed(cfg.seed, kSeedInitPA));
    return MultiAgentCritic(s.num_users, s.num_subcarriers,
                            pa_actor_spec(s.num_subcarriers, cfg.n_full, cfg.d_res),
                            pa_critic_spec(s.num_users, s.num_subcarriers, cfg.n_full, cfg.d_res),
                            state_cnn_spec(s.num_users, s.num_subcarriers, cfg.n_full), cfg.lr_pa_an, cfg.lr_pa_cn,
                            cfg.lr_cnn, cfg.gamma, cfg.tau, init);
}

bool assignment_suitable(const Scenario& s, const Assignment& a) {
    for (int i = 0; i < s.num_subcarriers; ++i)
        if (a.count_on(i) > s.max_per_subcarrier) return false;
    return true;  // occupancy is binary by construction (C6)
}

}  // namespace

Agents::Agents(const Scenario& s, const TrainConfig& cfg)
    : sa(make_sa(s, cfg)),
      pa(make_pa(s, cfg)),
      fs(cfg.fs),
      coeffs(cfg.coeffs),
      t_max_pa(cfg.t_max_pa),
      theta(cfg.theta) {
    sa.fs = cfg.fs;
    sa.coeffs = cfg.coeffs;
}

std::vector<CheckpointBlock> Agents::blocks() const {
    std::vector<CheckpointBlock> out = actor_critic_blocks(sa.ac, "sa");
    std::vector<CheckpointBlock> pa_blocks = pa.checkpoint_blocks("pa");
    out.insert(out.end(), pa_blocks.begin(), pa_blocks.end());
    return out;
}

void Agents::restore_blocks(const std::vector<CheckpointBlock>& b) {
    restore_actor_critic(sa.ac, b, "sa");
    pa.restore(b, "pa");
}

void Agents::save(const std::string& path) const { save_checkpoint(path, blocks()); }

void Agents::load(const std::string& path) { restore_blocks(load_checkpoint(path)); }

TrainResult train(const Scenario& s, const TrainConfig& cfg) {
    cfg.validate();
    TrainResult result;
    result.agents = std::make_unique<Agents>(s, cfg);
    Agents& ag = *result.agents;
    const int M = s.num_users;

    ReplayBuffer em_u(static_cast<size_t>(cfg.buffer_sa));
    JointReplayBuffer em_p(static_cast<size_t>(cfg.buffer_pa));
    Rng sa_noise(derive_seed(cfg.seed, kSeedExploreSA));
    Rng pa_noise(derive_seed(cfg.seed, kSeedExplorePA));
    Rng sa_replay(derive_seed(cfg.seed, kSeedReplaySA));
    Rng pa_replay(derive_seed(cfg.seed, kSeedReplayPA));

    std::vector<CheckpointBlock> last_good = ag.blocks();
    double best_obj = -std::numeric_limits<double>::infinity();
    std::vector<CheckpointBlock> best_blocks;
    double seen_obj = -std::numeric_limits<double>::infinity();
    Assignment seen_assign;  // best fully feasible training rollout, for refine_ep

    auto sa_update = [&](EpochLog& el) {
        if (!em_u.full()) return;
        const auto batch = em_u.sample(static_cast<size_t>(cfg.batch), sa_replay);
        el.sa_critic_loss = ag.sa.ac.critic_update(batch);
        el.sa_actor_norm = ag.sa.ac.actor_update(batch);
        ag.sa.ac.update_targets();
    };
    auto pa_update = [&](EpochLog& el, int epoch) {
        if (!em_p.full() || epoch % cfg.pa_update_every != 0) return;
        double closs = 0.0, anorm = 0.0;
        for (int m = 0; m < M; ++m) {
            const auto batch = em_p.sample(static_cast<size_t>(cfg.batch), pa_replay);
            closs += ag.pa.ma_critic_update(m, batch);
            anorm += ag.pa.ma_actor_update(m, batch);
        }
        ag.pa.update_targets();
        el.pa_critic_loss = closs / M;
        el.pa_actor_norm = anorm / M;
    };

    for (int epoch = 0; epoch < cfg.n_ep; ++epoch) {
        EpochLog el;
        el.epoch = epoch;
        const auto t0 = std::chrono::steady_clock::now();
        const double progress = cfg.n_ep > 1 ? static_cast<double>(epoch) / (cfg.n_ep - 1) : 1.0;
        const double noise_std = cfg.noise.at(progress);

        try {
            SaRollout sa_roll = sa_rollout(s, ag.sa, true, noise_std, sa_noise);
            el.ssar = assignment_suitable(s, sa_roll.assignment);
            el.sa_tries = 1;
            while (!el.ssar && el.sa_tries <= cfg.n_max_sa) {
                for (Transition& tr : sa_roll.transitions) em_u.store(std::move(tr));
                sa_update(el);
                sa_roll = sa_rollout(s, ag.sa, true, noise_std, sa_noise);
                ++el.sa_tries;
                el.ssar = assignment_suitable(s, sa_roll.assignment);
            }

            if (el.ssar) {
                PaRollout pa_roll = pa_rollout(s, sa_roll.assignment, ag.pa, cfg.t_max_pa, cfg.theta, ag.fs,
                                               ag.coeffs, true, noise_std, pa_noise);
                el.spar = pa_roll.report.pa_feasible();
                el.pa_tries = 1;
                while (!el.spar && el.pa_tries <= cfg.n_max_pa) {
                    for (JointTransition& tr : pa_roll.transitions) em_p.store(std::move(tr));
                    pa_update(el, epoch);
                    pa_roll = pa_rollout(s, sa_roll.assignment, ag.pa, cfg.t_max_pa, cfg.theta, ag.fs, ag.coeffs,
                                         true, noise_std, pa_noise);
                    ++el.pa_tries;
                    el.spar = pa_roll.report.pa_feasible();
                }

                if (el.spar) {
                    const RateReport& report = pa_roll.report;
                    el.objective = report.objective;
                    el.violations = (report.c1 ? 0 : 1) + (report.c2 ? 0 : 1) + (report.c3 ? 0 : 1) +
                                    (report.c4 ? 0 : 1) + (report.c5 ? 0 : 1) + (report.c6 ? 0 : 1);

                    const double r_jo_sa = sa_joint_reward(report, s, ag.coeffs);
                    for (size_t t = 0; t < sa_roll.transitions.size(); ++t) {
                        Transition& tr = sa_roll.transitions[t];
                        if (cfg.broadcast_joint || t + 1 == sa_roll.transitions.size()) tr.reward += r_jo_sa;
                        em_u.store(std::move(tr));
                    }
                    std::vector<double> r_jo_pa(M);
                    for (int m = 0; m < M; ++m) r_jo_pa[m] = pa_joint_reward(report, s, m, ag.coeffs);
                    for (size_t t = 0; t < pa_roll.transitions.size(); ++t) {
                        JointTransition& tr = pa_roll.transitions[t];
                        if (cfg.broadcast_joint || t + 1 == pa_roll.transitions.size())
                            for (int m = 0; m < M; ++m) tr.rewards[m] += r_jo_pa[m];
                        em_p.store(std::move(tr));
                    }
                    sa_update(el);
                    pa_update(el, epoch);
                }
            }

            // Checkpoint selection: keep the weights of the best feasible
            // greedy (noise-free) evaluation seen so far.
            if (cfg.eval_every > 0 && (epoch % cfg.eval_every == 0 || epoch + 1 == cfg.n_ep)) {
                Rng dummy(0);
                SaRollout er = sa_rollout(s, ag.sa, false, 0.0, dummy);
                if (assignment_suitable(s, er.assignment)) {
                    PaRollout pr = pa_rollout(s, er.assignment, ag.pa, cfg.t_max_pa, cfg.theta, ag.fs, ag.coeffs,
                                              false, 0.0, dummy);
                    if (pr.report.all_feasible() && pr.report.objective > best_obj) {
                        best_obj = pr.report.objective;
                        best_blocks = ag.blocks();
                    }
                }
            }
        } catch (const std::runtime_error& e) {
            // Non-finite training signal: roll back to the last good state.
            ag.restore_blocks(last_good);
            result.log.aborted = true;
            if (log_level() > 0) std::fprintf(stderr, "[train] aborted at epoch %d: %s\n", epoch, e.what());
            result.log.epochs.push_back(el);
            break;
        }

        el.fwd_macs = ag.sa.ac.actor.forward_macs() + ag.sa.ac.critic.forward_macs() + ag.pa.forward_macs();
        el.bwd_macs = ag.sa.ac.actor.backward_macs() + ag.sa.ac.critic.backward_macs() + ag.pa.backward_macs();
        el.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        result.log.epochs.push_back(el);
        last_good = ag.blocks();

        if (log_level() > 0 && (epoch % 100 == 0 || epoch + 1 == cfg.n_ep))
            std::fprintf(stderr, "[train] epoch %d ssar=%d spar=%d obj=%.6g tries=%d/%d\n", epoch, el.ssar ? 1 : 0,
                         el.spar ? 1 : 0, el.objective, el.sa_tries, el.pa_tries);
    }
    if (cfg.keep_best && !best_blocks.empty()) ag.restore_blocks(best_blocks);
    return result;
}

PolicyEval evaluate_policy(const Scenario& s, const Agents& agents, int episodes) {
    if (episodes < 1) throw std::invalid_argument("evaluate_policy: episodes must be >= 1");
    PolicyEval ev;
    ev.episodes = episodes;
    Rng dummy(0);
    std::vector<double> objectives;
    for (int e = 0; e < episodes; ++e) {
        SaRollout sa_roll = sa_rollout(s, agents.sa, false, 0.0, dummy);
        PaRollout pa_roll = pa_rollout(s, sa_roll.assignment, agents.pa, agents.t_max_pa, agents.theta, agents.fs,
                                       agents.coeffs, false, 0.0, dummy);
        const RateReport& r = pa_roll.report;
        objectives.push_back(r.objective);
        double total = 0.0;
        for (double t : r.user_totals) total += t;
        ev.at_mean += total / s.bandwidth;
        ev.q_eff_mean += r.q_eff;
        ev.qos_rate_mean += r.qos_rate;
        if (e + 1 == episodes) {
            ev.assignment = sa_roll.assignment;
            ev.power = pa_roll.power;
            ev.report = r;
        }
    }
    double mean = 0.0;
    for (double o : objectives) mean += o;
    mean /= episodes;
    double var = 0.0;
    for (double o : objectives) var += (o - mean) * (o - mean);
    ev.objective_mean = mean;
    ev.objective_std = episodes > 1 ? std::sqrt(var / (episodes - 1)) : 0.0;
    ev.at_mean /= episodes;
    ev.q_eff_mean /= episodes;
    ev.qos_rate_mean /= episodes;
    return ev;
}

double predicted_sa_macs(int n_max_sa, int M, int n_full, int d_res, int nf) {
    return static_cast<double>(n_max_sa) * M * n_full *
           (4.0 * d_res * n_full + n_full + 4.0 * nf);
}

double predicted_pa_macs(int n_max_pa, int t_max_pa, int M, int NF, int n_full, int d_res, int d_cnn) {
    const NetworkSpec cnn = state_cnn_spec(M, NF, n_full);
    double conv_sum = 0.0;  // sum over conv layers of H_l*W_l*K_l^2*C_{l-1}*C_l
    TensorShape shape = cnn.input;
    for (const Layer& l : cnn.layers) {
        if (l.kind == Layer::Kind::kConv) {
            const int oh = shape.h - l.kernel + 1, ow = shape.w - l.kernel + 1;
            conv_sum += static_cast<double>(oh) * ow * l.kernel * l.kernel * l.in_c * l.out_c;
            shape = {l.out_c, oh, ow};
        } else if (l.kind == Layer::Kind::kMaxPool) {
            shape = {shape.c, shape.h / l.window, shape.w / l.window};
        } else {
            break;
        }
    }
    const double d_net = 4.0 * d_res + 1.0 + d_cnn;
    return static_cast<double>(n_max_pa) * t_max_pa * (conv_sum + (d_net * n_full + 14.0 * NF) * n_full);
}

ComplexityAudit complexity_audit(int M, int NF, int n_full, int d_res, int group_out, int n_max_sa, int n_max_pa,
                                 int t_max_pa) {
    ComplexityAudit audit;

    // SA accounting episode: one AN + one CN forward per user step.
    {
        Network an(SaAgent::actor_spec(M, NF, n_full, d_res, group_out));
        Network cn(SaAgent::critic_spec(M, NF, n_full, d_res, group_out));
        const std::vector<double> an_in(an.spec().input.len(), 0.0);
        const std::vector<double> cn_in(cn.spec().input.len(), 0.0);
        ForwardCache ac, cc;
        for (int step = 0; step < M; ++step) {
            an.forward(an_in, ac);
            an.backward(ac, std::vector<double>(an.spec().output_len(), 0.0));
            cn.forward(cn_in, cc);
            cn.backward(cc, std::vector<double>(1, 0.0));
        }
        audit.measured_sa_fwd = (an.forward_macs() + cn.forward_macs()) * n_max_sa;
        audit.measured_sa_bwd = (an.backward_macs() + cn.backward_macs()) * n_max_sa;
        audit.predicted_sa = predicted_sa_macs(n_max_sa, M, n_full, d_res, NF);
        audit.ratio_sa = static_cast<double>(audit.measured_sa_fwd) / audit.predicted_sa;
    }

    // PA accounting episode (per agent, agents run in parallel): one state-CNN
    // + one AN + one CN forward per step.
    {
        Network cnn(state_cnn_spec(M, NF, n_full));
        Network an(pa_actor_spec(NF, n_full, d_res));
        Network cn(pa_critic_spec(M, NF, n_full, d_res));
        const std::vector<double> cnn_in(cnn.spec().input.len(), 0.0);
        const std::vector<double> an_in(an.spec().input.len(), 0.0);
        const std::vector<double> cn_in(cn.spec().input.len(), 0.0);
        ForwardCache xc, ac, cc;
        for (int t = 0; t < t_max_pa; ++t) {
            cnn.forward(cnn_in, xc);
            cnn.backward(xc, std::vector<double>(cnn.spec().output_len(), 0.0));
            an.forward(an_in, ac);
            an.backward(ac, std::vector<double>(an.spec().output_len(), 0.0));
            cn.forward(cn_in, cc);
            cn.backward(cc, std::vector<double>(1, 0.0));
        }
        audit.measured_pa_fwd = (cnn.forward_macs() + an.forward_macs() + cn.forward_macs()) * n_max_pa;
        audit.measured_pa_bwd = (cnn.backward_macs() + an.backward_macs() + cn.backward_macs()) * n_max_pa;
        audit.predicted_pa = predicted_pa_macs(n_max_pa, t_max_pa, M, NF, n_full, d_res, 2);
        audit.ratio_pa = static_cast<double>(audit.measured_pa_fwd) / audit.predicted_pa;
    }
    return audit;
}

}  // namespace drljrm
