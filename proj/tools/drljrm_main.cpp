#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "drljrm/experiment.hpp"
#include "drljrm/verify.hpp"

namespace {

// Self-describing checkpoint: a meta block carries what Agents needs for
// reconstruction (dims + architecture + rollout knobs).
constexpr const char* kMetaBlock = "meta";

std::vector<drljrm::CheckpointBlock> with_meta(const drljrm::Agents& agents, const drljrm::TrainConfig& cfg, int m,
                                               int nf) {
    std::vector<drljrm::CheckpointBlock> blocks = agents.blocks();
    drljrm::CheckpointBlock meta;
    meta.name = kMetaBlock;
    meta.hash = 0;
    meta.values = {static_cast<double>(m),
                   static_cast<double>(nf),
                   static_cast<double>(cfg.n_full),
                   static_cast<double>(cfg.d_res),
                   static_cast<double>(cfg.group_out),
                   static_cast<double>(cfg.t_max_pa),
                   cfg.theta,
                   cfg.gamma,
                   cfg.tau};
    blocks.insert(blocks.begin(), meta);
    return blocks;
}

drljrm::Scenario scenario_from_file(const std::string& path) {
    try {
        return drljrm::generate(drljrm::load_scenario_config(path));
    } catch (const std::invalid_argument&) {
        return drljrm::load_scenario_csv(path);  // fall back to a dumped instance
    }
}

int cmd_train(const std::string& config_path, const std::string& checkpoint, const std::string& log_path) {
    try {
        const auto kv = drljrm::parse_kv_file(config_path);
        const drljrm::ScenarioConfig sc = drljrm::scenario_config_from_kv(kv);
        const drljrm::TrainConfig tc = drljrm::train_config_from_kv(kv);
        const drljrm::Scenario s = drljrm::generate(sc);
        drljrm::TrainResult result = drljrm::train(s, tc);
        result.log.to_csv(log_path.empty() ? checkpoint + ".log.csv" : log_path);
        drljrm::save_checkpoint(checkpoint, with_meta(*result.agents, tc, s.num_users, s.num_subcarriers));
        const drljrm::PolicyEval ev = drljrm::evaluate_policy(s, *result.agents, 1);
        std::printf("epochs=%zu aborted=%d objective=%s at=%s q_eff=%s qos_rate=%s feasible=%d\n",
                    result.log.epochs.size(), result.log.aborted ? 1 : 0,
                    drljrm::fmt_double(ev.report.objective / s.bandwidth).c_str(),
                    drljrm::fmt_double(ev.at_mean).c_str(), drljrm::fmt_double(ev.q_eff_mean).c_str(),
                    drljrm::fmt_double(ev.qos_rate_mean).c_str(), ev.report.all_feasible() ? 1 : 0);
        return result.log.aborted ? 2 : 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

int cmd_eval(const std::string& checkpoint, const std::string& scenario_path, int episodes) {
    try {
        const auto blocks = drljrm::load_checkpoint(checkpoint);
        const auto& meta = drljrm::checkpoint_block(blocks, kMetaBlock, 0);
        if (meta.values.size() != 9) throw std::runtime_error("malformed meta block in " + checkpoint);
        const drljrm::Scenario s = scenario_from_file(scenario_path);
        if (s.num_users != static_cast<int>(meta.values[0]) || s.num_subcarriers != static_cast<int>(meta.values[1]))
            throw std::runtime_error("checkpoint was trained for a different scenario shape");
        drljrm::TrainConfig tc;
        tc.n_full = static_cast<int>(meta.values[2]);
        tc.d_res = static_cast<int>(meta.values[3]);
        tc.group_out = static_cast<int>(meta.values[4]);
        tc.t_max_pa = static_cast<int>(meta.values[5]);
        tc.theta = meta.values[6];
        tc.gamma = meta.values[7];
        tc.tau = meta.values[8];
        drljrm::Agents agents(s, tc);
        agents.restore_blocks(blocks);
        const drljrm::PolicyEval ev = drljrm::evaluate_policy(s, agents, episodes);
        std::printf("objective_mean=%s objective_std=%s at=%s q_eff=%s qos_rate=%s feasible=%d episodes=%d\n",
                    drljrm::fmt_double(ev.objective_mean / s.bandwidth).c_str(),
                    drljrm::fmt_double(ev.objective_std / s.bandwidth).c_str(), drljrm::fmt_double(ev.at_mean).c_str(),
                    drljrm::fmt_double(ev.q_eff_mean).c_str(), drljrm::fmt_double(ev.qos_rate_mean).c_str(),
                    ev.report.all_feasible() ? 1 : 0, ev.episodes);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DRL-JRM: joint subcarrier assignment and power allocation for MC-NOMA"};
    app.require_subcommand(1);

    std::string config_path, out_dir, suite, checkpoint, scenario_path, log_path, work_dir;
    uint64_t seed = 0;
    int threads = 0, episodes = 1;

    CLI::App* run = app.add_subcommand("run", "Execute a sweep config and emit per-metric CSVs");
    run->add_option("config", config_path, "sweep config file")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--seed", seed, "override the sweep seed");
    run->add_option("--threads", threads, "worker pool size");

    CLI::App* verify = app.add_subcommand("verify", "Run an acceptance suite");
    verify->add_option("suite", suite, "core-math | gradients | oracle | training | complexity | determinism | all")
        ->required();
    verify->add_option("--work", work_dir, "scratch directory for pipeline artifacts");

    CLI::App* train = app.add_subcommand("train", "Train agents on the configured scenario");
    train->add_option("config", config_path, "scenario + training config file")->required();
    train->add_option("--checkpoint", checkpoint, "checkpoint output path")->required();
    train->add_option("--log", log_path, "training log CSV (default: <checkpoint>.log.csv)");

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a scenario");
    eval->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
    eval->add_option("--scenario", scenario_path, "scenario config or dumped instance CSV")->required();
    eval->add_option("--episodes", episodes, "evaluation episodes");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return drljrm::run_experiment(config_path, out_dir, seed, threads);
    if (verify->parsed()) {
        if (work_dir.empty())
            work_dir = (std::filesystem::temp_directory_path() / "drljrm-verify").string();
        try {
            return drljrm::run_suite(suite, work_dir) == 0 ? 0 : 1;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 1;
        }
    }
    if (train->parsed()) return cmd_train(config_path, checkpoint, log_path);
    if (eval->parsed()) return cmd_eval(checkpoint, scenario_path, episodes);
    return 1;
}
