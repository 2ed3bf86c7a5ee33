#pragma once

#include <map>
#include <string>
#include <vector>

#include "drljrm/baselines.hpp"
#include "drljrm/trainer.hpp"

namespace drljrm {

// Sweep axes mirror the figure families: user count, transmit power, multiplex
// cap, demanded rate, SIC error, and PDSC threshold.
enum class SweepAxis { kUsers, kTotalPower, kMaxPerSubcarrier, kQosMean, kSicErrorSq, kPdscThreshold };

SweepAxis sweep_axis_from_string(const std::string& name);  // throws on unknown
std::string sweep_axis_name(SweepAxis axis);

enum class Solver { kExhaustive, kGreedyGrid, kRandomGrid, kOma, kDrlJrm };

Solver solver_from_string(const std::string& name);  // throws on unknown
std::string solver_name(Solver s);

struct ExperimentConfig {
    SweepAxis axis = SweepAxis::kUsers;
    std::vector<double> values;
    std::vector<Solver> solvers;
    int episodes = 5;        // independent scenario draws per sweep point
    int power_levels = 4;    // L for the exhaustive / grid solvers
    double enum_budget = kDefaultEnumBudget;
    ScenarioConfig base;
    TrainConfig train;       // used by the drl-jrm solver
    uint64_t seed = 1;
    int threads = 1;

    void validate() const;
};

ExperimentConfig experiment_config_from_kv(const std::map<std::string, std::string>& kv);
ExperimentConfig load_experiment_config(const std::string& path);

// Per-episode result of one solver on one sweep point, all re-validated
// through evaluate() before aggregation.
struct PointResult {
    double objective = 0.0;  // weighted sum rate, bit/s/Hz
    double at = 0.0;         // aggregate throughput, bit/s/Hz
    double q_eff = 0.0;      // bit/s
    double qos_rate = 0.0;
    bool feasible = false;
};

struct SweepCell {
    double axis_value = 0.0;
    Solver solver = Solver::kExhaustive;
    std::vector<PointResult> episodes;
};

struct SweepResult {
    ExperimentConfig config;
    std::vector<SweepCell> cells;  // point-major, then solver order
};

ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value);

PointResult solve_point(const Scenario& s, Solver solver, const ExperimentConfig& cfg, uint64_t episode_seed);

SweepResult run_sweep(const ExperimentConfig& cfg);

// One CSV per metric with rows (axis value, solver, mean, std, episodes).
void write_sweep_csv(const SweepResult& result, const std::string& out_dir);

// run_experiment drives parse -> sweep -> CSVs and maps failures to exit codes.
int run_experiment(const std::string& config_path, const std::string& out_dir, uint64_t seed_override,
                   int threads_override);

}  // namespace drljrm
