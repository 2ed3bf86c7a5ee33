#include "drljrm/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace drljrm {

namespace {

std::string trim_copy(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= s.size()) {
        size_t comma = s.find(',', start);
        if (comma == std::string::npos) comma = s.size();
        std::string piece = trim_copy(s.substr(start, comma - start));
        if (!piece.empty()) out.push_back(piece);
        start = comma + 1;
    }
    return out;
}

double parse_double(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw std::invalid_argument("bad number in list: " + s);
    return v;
}

int axis_int(double value, const char* what) {
    double r = std::round(value);
    if (std::abs(value - r) > 1e-9 || r < 1) throw std::invalid_argument(std::string(what) + " must be a positive integer");
    return static_cast<int>(r);
}

}  // namespace

SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "M") return SweepAxis::kUsers;
    if (name == "P_total") return SweepAxis::kTotalPower;
    if (name == "N_max") return SweepAxis::kMaxPerSubcarrier;
    if (name == "R_min") return SweepAxis::kQosMean;
    if (name == "eps2") return SweepAxis::kSicErrorSq;
    if (name == "p_delta") return SweepAxis::kPdscThreshold;
    throw std::invalid_argument("unknown sweep axis: " + name);
}

std::string sweep_axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::kUsers: return "M";
        case SweepAxis::kTotalPower: return "P_total";
        case SweepAxis::kMaxPerSubcarrier: return "N_max";
        case SweepAxis::kQosMean: return "R_min";
        case SweepAxis::kSicErrorSq: return "eps2";
        case SweepAxis::kPdscThreshold: return "p_delta";
    }
    throw std::logic_error("unreachable");
}

Solver solver_from_string(const std::string& name) {
    if (name == "exhaustive") return Solver::kExhaustive;
    if (name == "greedy+grid") return Solver::kGreedyGrid;
    if (name == "random+grid") return Solver::kRandomGrid;
    if (name == "oma") return Solver::kOma;
    if (name == "drl-jrm") return Solver::kDrlJrm;
    throw std::invalid_argument("unknown solver: " + name);
}

std::string solver_name(Solver s) {
    switch (s) {
        case Solver::kExhaustive: return "exhaustive";
        case Solver::kGreedyGrid: return "greedy+grid";
        case Solver::kRandomGrid: return "random+grid";
        case Solver::kOma: return "oma";
        case Solver::kDrlJrm: return "drl-jrm";
    }
    throw std::logic_error("unreachable");
}

void ExperimentConfig::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep needs at least one axis value");
    if (solvers.empty()) throw std::invalid_argument("sweep needs at least one solver");
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    if (power_levels < 1) throw std::invalid_argument("power_levels must be >= 1");
    if (!(enum_budget > 0)) throw std::invalid_argument("enum_budget must be positive");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    base.validate();
    train.validate();
    for (double v : values) apply_axis(base, axis, v).validate();
}

ExperimentConfig experiment_config_from_kv(const std::map<std::string, std::string>& kv) {
    ExperimentConfig c;
    c.axis = sweep_axis_from_string(kv_get_string(kv, "axis", "M"));
    for (const std::string& piece : split_list(kv_get_string(kv, "values", "")))
        c.values.push_back(parse_double(piece));
    for (const std::string& piece : split_list(kv_get_string(kv, "solvers", "exhaustive")))
        c.solvers.push_back(solver_from_string(piece));
    c.episodes = static_cast<int>(kv_get_int(kv, "episodes", c.episodes));
    c.power_levels = static_cast<int>(kv_get_int(kv, "power_levels", c.power_levels));
    c.enum_budget = kv_get_double(kv, "enum_budget", c.enum_budget);
    c.base = scenario_config_from_kv(kv);
    c.train = train_config_from_kv(kv);
    c.seed = static_cast<uint64_t>(kv_get_int(kv, "sweep_seed", static_cast<long long>(c.seed)));
    c.threads = static_cast<int>(kv_get_int(kv, "threads", c.threads));
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_config_from_kv(parse_kv_file(path));
}

ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value) {
    ScenarioConfig c = base;
    switch (axis) {
        case SweepAxis::kUsers: c.num_users = axis_int(value, "M"); break;
        case SweepAxis::kTotalPower: c.total_power_dbm = value; break;
        case SweepAxis::kMaxPerSubcarrier: c.max_per_subcarrier = axis_int(value, "N_max"); break;
        case SweepAxis::kQosMean: c.qos_mean = value; break;
        case SweepAxis::kSicErrorSq: c.sic_error_sq = value; break;
        case SweepAxis::kPdscThreshold: c.pdsc_threshold_dbm = value; break;
    }
    return c;
}

namespace {

PointResult from_report(const Scenario& s, const RateReport& r) {
    PointResult p;
    p.objective = r.objective / s.bandwidth;
    double total = 0.0;
    for (double t : r.user_totals) total += t;
    p.at = total / s.bandwidth;
    p.q_eff = r.q_eff;
    p.qos_rate = r.qos_rate;
    p.feasible = r.all_feasible();
    return p;
}

}  // namespace

PointResult solve_point(const Scenario& s, Solver solver, const ExperimentConfig& cfg, uint64_t episode_seed) {
    Assignment a(s.num_subcarriers, s.num_users);
    Mat powers(s.num_subcarriers, s.num_users);
    switch (solver) {
        case Solver::kExhaustive: {
            SolveResult r = exhaustive_solve(s, cfg.power_levels, cfg.enum_budget);
            a = r.assignment;
            powers = r.power.powers;
            break;
        }
        case Solver::kGreedyGrid: {
            a = greedy_sa(s);
            powers = grid_pa(s, a, cfg.power_levels, cfg.enum_budget).power.powers;
            break;
        }
        case Solver::kRandomGrid: {
            a = random_sa(s, derive_seed(episode_seed, kSeedBaseline));
            powers = grid_pa(s, a, cfg.power_levels, cfg.enum_budget).power.powers;
            break;
        }
        case Solver::kOma: {
            SolveResult r = oma_solve(s, cfg.power_levels, cfg.enum_budget);
            a = r.assignment;
            powers = r.power.powers;
            break;
        }
        case Solver::kDrlJrm: {
            TrainConfig tc = cfg.train;
            tc.seed = episode_seed;
            TrainResult tr = train(s, tc);
            if (tr.log.aborted) throw std::runtime_error("training divergence (non-finite update)");
            PolicyEval ev = evaluate_policy(s, *tr.agents, 1);
            a = ev.assignment;
            powers = ev.power.powers;
            break;
        }
    }
    // Every emitted row re-validates through evaluate() regardless of what the
    // solver itself reported.
    return from_report(s, evaluate(s, a, powers));
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    SweepResult result;
    result.config = cfg;
    const int np = static_cast<int>(cfg.values.size());
    const int ns = static_cast<int>(cfg.solvers.size());
    result.cells.resize(static_cast<size_t>(np) * ns);
    for (int p = 0; p < np; ++p)
        for (int si = 0; si < ns; ++si) {
            SweepCell& cell = result.cells[static_cast<size_t>(p) * ns + si];
            cell.axis_value = cfg.values[p];
            cell.solver = cfg.solvers[si];
            cell.episodes.resize(cfg.episodes);
        }

    struct Task {
        int p, si, e;
    };
    std::vector<Task> tasks;
    tasks.reserve(result.cells.size() * cfg.episodes);
    for (int p = 0; p < np; ++p)
        for (int si = 0; si < ns; ++si)
            for (int e = 0; e < cfg.episodes; ++e) tasks.push_back({p, si, e});

    std::atomic<size_t> cursor{0};
    std::mutex err_mu;
    std::string first_error;
    auto worker = [&]() {
        for (;;) {
            const size_t i = cursor.fetch_add(1);
            if (i >= tasks.size()) return;
            {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error.empty()) return;
            }
            const Task& t = tasks[i];
            try {
                // The scenario seed depends on (point, episode) only, so all
                // solvers face identical channel realizations.
                const uint64_t scen_seed =
                    derive_seed(cfg.seed, (static_cast<uint64_t>(t.p) << 32) | static_cast<uint64_t>(t.e) | (1ull << 62));
                ScenarioConfig sc = apply_axis(cfg.base, cfg.axis, cfg.values[t.p]);
                sc.rng_seed = scen_seed;
                const Scenario s = generate(sc);
                const uint64_t solver_seed = derive_seed(scen_seed, 17 + static_cast<uint64_t>(t.si));
                result.cells[static_cast<size_t>(t.p) * ns + t.si].episodes[t.e] =
                    solve_point(s, cfg.solvers[t.si], cfg, solver_seed);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (first_error.empty())
                    first_error = sweep_axis_name(cfg.axis) + "=" + fmt_double(cfg.values[t.p]) + " " +
                                  solver_name(cfg.solvers[t.si]) + ": " + e.what();
            }
        }
    };

    const int k = std::min<int>(cfg.threads, static_cast<int>(tasks.size()));
    if (k <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < k; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (!first_error.empty()) throw std::runtime_error(first_error);
    return result;
}

void write_sweep_csv(const SweepResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const struct {
        const char* name;
        double PointResult::*field;
    } metrics[] = {{"objective", &PointResult::objective},
                   {"at", &PointResult::at},
                   {"q_eff", &PointResult::q_eff},
                   {"qos_rate", &PointResult::qos_rate}};

    for (const auto& metric : metrics) {
        const std::string path = out_dir + "/" + metric.name + ".csv";
        std::ofstream out(path);
        if (!out) throw std::invalid_argument("cannot open for write: " + path);
        out << "axis_value,solver,mean,std,episodes\n";
        for (const SweepCell& cell : result.cells) {
            double mean = 0.0;
            for (const PointResult& pr : cell.episodes) mean += pr.*(metric.field);
            const int n = static_cast<int>(cell.episodes.size());
            mean /= n;
            double var = 0.0;
            for (const PointResult& pr : cell.episodes) {
                const double d = pr.*(metric.field) - mean;
                var += d * d;
            }
            const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
            out << fmt_double(cell.axis_value) << ',' << solver_name(cell.solver) << ',' << fmt_double(mean) << ','
                << fmt_double(sd) << ',' << n << '\n';
        }
    }

    // Feasibility fractions in the same layout, so no infeasible mean can pass
    // as feasible silently.
    const std::string path = out_dir + "/feasible.csv";
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for write: " + path);
    out << "axis_value,solver,mean,std,episodes\n";
    for (const SweepCell& cell : result.cells) {
        double mean = 0.0;
        for (const PointResult& pr : cell.episodes) mean += pr.feasible ? 1.0 : 0.0;
        const int n = static_cast<int>(cell.episodes.size());
        mean /= n;
        double var = 0.0;
        for (const PointResult& pr : cell.episodes) {
            const double d = (pr.feasible ? 1.0 : 0.0) - mean;
            var += d * d;
        }
        const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
        out << fmt_double(cell.axis_value) << ',' << solver_name(cell.solver) << ',' << fmt_double(mean) << ','
            << fmt_double(sd) << ',' << n << '\n';
    }
}

int run_experiment(const std::string& config_path, const std::string& out_dir, uint64_t seed_override,
                   int threads_override) {
    try {
        ExperimentConfig cfg = load_experiment_config(config_path);
        if (seed_override != 0) cfg.seed = seed_override;
        if (threads_override > 0) cfg.threads = threads_override;
        const SweepResult result = run_sweep(cfg);
        write_sweep_csv(result, out_dir);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace drljrm
