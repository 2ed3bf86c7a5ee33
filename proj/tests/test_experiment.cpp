#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "drljrm/experiment.hpp"

using namespace drljrm;

namespace {

std::string tmp_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(p);
    return p.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_sweep() {
    ExperimentConfig cfg;
    cfg.axis = SweepAxis::kTotalPower;
    cfg.values = {38.0, 42.0};
    cfg.solvers = {Solver::kGreedyGrid, Solver::kOma};
    cfg.episodes = 2;
    cfg.power_levels = 3;
    cfg.base.num_users = 3;
    cfg.base.num_subcarriers = 2;
    cfg.base.max_per_subcarrier = 2;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("axis and solver names round-trip") {
    for (SweepAxis a : {SweepAxis::kUsers, SweepAxis::kTotalPower, SweepAxis::kMaxPerSubcarrier,
                        SweepAxis::kQosMean, SweepAxis::kSicErrorSq, SweepAxis::kPdscThreshold})
        CHECK(sweep_axis_from_string(sweep_axis_name(a)) == a);
    for (Solver s : {Solver::kExhaustive, Solver::kGreedyGrid, Solver::kRandomGrid, Solver::kOma,
                     Solver::kDrlJrm})
        CHECK(solver_from_string(solver_name(s)) == s);
    CHECK_THROWS_AS(sweep_axis_from_string("frequency"), std::invalid_argument);
    CHECK_THROWS_AS(solver_from_string("magic"), std::invalid_argument);
}

TEST_CASE("apply_axis touches exactly the addressed field") {
    const ScenarioConfig base;
    CHECK(apply_axis(base, SweepAxis::kUsers, 12).num_users == 12);
    CHECK(apply_axis(base, SweepAxis::kTotalPower, 38.0).total_power_dbm == 38.0);
    CHECK(apply_axis(base, SweepAxis::kMaxPerSubcarrier, 3).max_per_subcarrier == 3);
    CHECK(apply_axis(base, SweepAxis::kQosMean, 5e4).qos_mean == 5e4);
    CHECK(apply_axis(base, SweepAxis::kSicErrorSq, 1e-3).sic_error_sq == 1e-3);
    CHECK(apply_axis(base, SweepAxis::kPdscThreshold, -120.0).pdsc_threshold_dbm == -120.0);
    CHECK(apply_axis(base, SweepAxis::kQosMean, 5e4).num_users == base.num_users);
    CHECK_THROWS_AS(apply_axis(base, SweepAxis::kUsers, 2.5), std::invalid_argument);
    CHECK_THROWS_AS(apply_axis(base, SweepAxis::kUsers, 0.0), std::invalid_argument);
}

TEST_CASE("experiment config parses lists and nested sections") {
    const auto kv = parse_kv_text(
        "axis = P_total\n"
        "values = 38, 40, 42\n"
        "solvers = greedy+grid, oma\n"
        "episodes = 2\n"
        "power_levels = 3\n"
        "num_users = 3\n"
        "num_subcarriers = 2\n"
        "max_per_subcarrier = 2\n"
        "n_ep = 4\n"
        "sweep_seed = 11\n");
    const ExperimentConfig cfg = experiment_config_from_kv(kv);
    CHECK(cfg.axis == SweepAxis::kTotalPower);
    CHECK(cfg.values == std::vector<double>{38.0, 40.0, 42.0});
    REQUIRE(cfg.solvers.size() == 2);
    CHECK(cfg.solvers[0] == Solver::kGreedyGrid);
    CHECK(cfg.base.num_users == 3);
    CHECK(cfg.train.n_ep == 4);
    CHECK(cfg.seed == 11);
}

TEST_CASE("config validation requires values, solvers and sane counts") {
    ExperimentConfig cfg = small_sweep();
    CHECK_NOTHROW(cfg.validate());
    cfg.values.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_sweep();
    cfg.solvers.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_sweep();
    cfg.episodes = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_sweep();
    cfg.values = {38.0, -5.0};  // the swept scenario must stay valid
    cfg.axis = SweepAxis::kUsers;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("solve_point matches running the baseline pipeline by hand") {
    ExperimentConfig cfg = small_sweep();
    ScenarioConfig sc = cfg.base;
    sc.rng_seed = 99;
    const Scenario s = generate(sc);
    const PointResult pr = solve_point(s, Solver::kGreedyGrid, cfg, 1);
    const Assignment a = greedy_sa(s);
    const Mat powers = grid_pa(s, a, cfg.power_levels).power.powers;
    const RateReport rep = evaluate(s, a, powers);
    CHECK(pr.objective == doctest::Approx(rep.objective / s.bandwidth).epsilon(1e-12));
    CHECK(pr.q_eff == doctest::Approx(rep.q_eff).epsilon(1e-12));
    CHECK(pr.qos_rate == rep.qos_rate);
    CHECK(pr.feasible == rep.all_feasible());
}

TEST_CASE("sweeps are cell-complete and point-major") {
    const SweepResult r = run_sweep(small_sweep());
    REQUIRE(r.cells.size() == 4);
    CHECK(r.cells[0].axis_value == 38.0);
    CHECK(r.cells[0].solver == Solver::kGreedyGrid);
    CHECK(r.cells[1].axis_value == 38.0);
    CHECK(r.cells[1].solver == Solver::kOma);
    CHECK(r.cells[2].axis_value == 42.0);
    for (const SweepCell& cell : r.cells) {
        CHECK(cell.episodes.size() == 2);
        for (const PointResult& pr : cell.episodes) CHECK(std::isfinite(pr.objective));
    }
    // All solvers face the same channel draw on a given (point, episode).
    const SweepResult again = run_sweep(small_sweep());
    for (size_t i = 0; i < r.cells.size(); ++i)
        for (int e = 0; e < 2; ++e)
            CHECK(r.cells[i].episodes[e].objective == again.cells[i].episodes[e].objective);
}

TEST_CASE("metric csvs share one layout and rerun bit-identically") {
    const std::string d1 = tmp_dir("drljrm_sweep_a");
    const std::string d2 = tmp_dir("drljrm_sweep_b");
    const SweepResult r = run_sweep(small_sweep());
    write_sweep_csv(r, d1);
    write_sweep_csv(run_sweep(small_sweep()), d2);
    for (const char* name : {"objective", "at", "q_eff", "qos_rate", "feasible"}) {
        const std::string f1 = d1 + "/" + name + ".csv";
        REQUIRE(std::filesystem::exists(f1));
        const std::string text = read_file(f1);
        CHECK(text.rfind("axis_value,solver,mean,std,episodes\n", 0) == 0);
        CHECK(std::count(text.begin(), text.end(), '\n') == 5);  // header + 4 cells
        CHECK(text == read_file(d2 + "/" + name + ".csv"));
    }
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
}

TEST_CASE("csv aggregation writes sample statistics") {
    SweepResult r;
    SweepCell cell;
    cell.axis_value = 5.0;
    cell.solver = Solver::kOma;
    PointResult p1, p2;
    p1.objective = 1.0;
    p2.objective = 3.0;
    cell.episodes = {p1, p2};
    r.cells.push_back(cell);
    const std::string dir = tmp_dir("drljrm_sweep_stats");
    write_sweep_csv(r, dir);
    std::ifstream in(dir + "/objective.csv");
    std::string line;
    std::getline(in, line);  // header
    std::getline(in, line);
    CHECK(line == "5,oma,2," + fmt_double(std::sqrt(2.0)) + ",2");
    std::filesystem::remove_all(dir);
}

TEST_CASE("multi-threaded sweeps match single-threaded results") {
    ExperimentConfig cfg = small_sweep();
    const SweepResult serial = run_sweep(cfg);
    cfg.threads = 2;
    const SweepResult parallel = run_sweep(cfg);
    for (size_t i = 0; i < serial.cells.size(); ++i)
        for (int e = 0; e < cfg.episodes; ++e)
            CHECK(serial.cells[i].episodes[e].objective == parallel.cells[i].episodes[e].objective);
}

TEST_CASE("the drl solver flows through the sweep machinery") {
    ExperimentConfig cfg;
    cfg.axis = SweepAxis::kTotalPower;
    cfg.values = {42.0};
    cfg.solvers = {Solver::kDrlJrm};
    cfg.episodes = 1;
    cfg.base.num_users = 2;
    cfg.base.num_subcarriers = 2;
    cfg.base.max_per_subcarrier = 2;
    cfg.train.n_ep = 4;
    cfg.train.n_max_sa = 3;
    cfg.train.n_max_pa = 2;
    cfg.train.t_max_pa = 3;
    cfg.train.buffer_sa = 16;
    cfg.train.buffer_pa = 16;
    cfg.train.batch = 4;
    cfg.train.n_full = 8;
    cfg.train.d_res = 1;
    cfg.train.group_out = 4;
    cfg.train.eval_every = 2;
    cfg.seed = 3;
    const SweepResult r = run_sweep(cfg);
    REQUIRE(r.cells.size() == 1);
    REQUIRE(r.cells[0].episodes.size() == 1);
    CHECK(std::isfinite(r.cells[0].episodes[0].objective));
    CHECK(r.cells[0].episodes[0].objective >= 0.0);
}

TEST_CASE("run_experiment drives config to csv artifacts") {
    const std::string dir = tmp_dir("drljrm_run_exp");
    const std::string cfg_path = dir + "/sweep.cfg";
    {
        std::ofstream out(cfg_path);
        out << "axis = P_total\nvalues = 40, 42\nsolvers = greedy+grid\nepisodes = 1\n"
               "power_levels = 2\nnum_users = 3\nnum_subcarriers = 2\nmax_per_subcarrier = 2\n";
    }
    CHECK(run_experiment(cfg_path, dir + "/out", 0, 0) == 0);
    CHECK(std::filesystem::exists(dir + "/out/objective.csv"));
    CHECK(std::filesystem::exists(dir + "/out/feasible.csv"));
    CHECK(run_experiment(dir + "/missing.cfg", dir + "/out2", 0, 0) == 1);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
