#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "drljrm/scenario.hpp"

using namespace drljrm;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("default config validates and generates") {
    ScenarioConfig c;
    CHECK_NOTHROW(c.validate());
    const Scenario s = generate(c);
    CHECK(s.num_users == 60);
    CHECK(s.num_subcarriers == 64);
    CHECK(s.gains.rows == 64);
    CHECK(s.gains.cols == 60);
}

TEST_CASE("per-subcarrier noise variance matches the link budget") {
    // W = 5 MHz at -173 dBm/Hz over 64 subcarriers.
    const Scenario s = generate(ScenarioConfig{});
    CHECK(s.noise_var == doctest::Approx(3.9155e-16).epsilon(1e-3));
    CHECK(s.total_power == doctest::Approx(15.8489319246).epsilon(1e-9));
}

TEST_CASE("weights are distances normalized by the farthest user") {
    ScenarioConfig c;
    c.num_users = 12;
    c.num_subcarriers = 4;
    c.max_per_subcarrier = 3;
    c.rng_seed = 5;
    const Scenario s = generate(c);
    const double dmax = *std::max_element(s.distances.begin(), s.distances.end());
    double wmax = 0.0;
    for (int m = 0; m < s.num_users; ++m) {
        CHECK(s.weights[m] == doctest::Approx(s.distances[m] / dmax).epsilon(1e-12));
        wmax = std::max(wmax, s.weights[m]);
    }
    CHECK(wmax == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("users land inside the annulus with positive gains and demands") {
    ScenarioConfig c;
    c.num_users = 40;
    c.num_subcarriers = 8;
    c.max_per_subcarrier = 5;
    c.rng_seed = 9;
    const Scenario s = generate(c);
    for (double d : s.distances) {
        CHECK(d >= c.radius_min);
        CHECK(d <= c.radius_max);
    }
    for (double g : s.gains.a) CHECK(g > 0.0);
    for (double q : s.qos_min) CHECK(q >= 1e3);
}

TEST_CASE("equal seeds reproduce the instance bitwise") {
    ScenarioConfig c;
    c.num_users = 6;
    c.num_subcarriers = 3;
    c.max_per_subcarrier = 2;
    c.rng_seed = 31;
    const Scenario a = generate(c);
    const Scenario b = generate(c);
    CHECK(a.gains.a == b.gains.a);
    CHECK(a.distances == b.distances);
    CHECK(a.weights == b.weights);
    CHECK(a.qos_min == b.qos_min);
    c.rng_seed = 32;
    CHECK(generate(c).gains.a != a.gains.a);
}

TEST_CASE("config validation rejects bad fields") {
    ScenarioConfig c;
    c.num_users = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ScenarioConfig{};
    c.max_per_subcarrier = c.num_users + 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ScenarioConfig{};
    c.radius_min = 400.0;  // above radius_max
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ScenarioConfig{};
    c.sic_error_sq = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ScenarioConfig{};
    c.bandwidth_hz = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ScenarioConfig{};
    c.qos_mean = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("kv config overrides named fields only") {
    const auto kv = parse_kv_text("num_users = 9\nrng_seed = 123\nqos_mean = 5e4\nunrelated = x\n");
    const ScenarioConfig c = scenario_config_from_kv(kv);
    CHECK(c.num_users == 9);
    CHECK(c.rng_seed == 123);
    CHECK(c.qos_mean == 5e4);
    CHECK(c.num_subcarriers == ScenarioConfig{}.num_subcarriers);
}

TEST_CASE("csv dump and load round-trip exactly") {
    ScenarioConfig c;
    c.num_users = 5;
    c.num_subcarriers = 3;
    c.max_per_subcarrier = 2;
    c.rng_seed = 77;
    const Scenario s = generate(c);
    const std::string path = tmp_path("drljrm_scenario_rt.csv");
    dump_scenario_csv(s, path);
    const Scenario t = load_scenario_csv(path);
    CHECK(t.num_users == s.num_users);
    CHECK(t.num_subcarriers == s.num_subcarriers);
    CHECK(t.max_per_subcarrier == s.max_per_subcarrier);
    CHECK(t.total_power == s.total_power);
    CHECK(t.noise_var == s.noise_var);
    CHECK(t.pdsc_threshold == s.pdsc_threshold);
    CHECK(t.sic_error_sq == s.sic_error_sq);
    CHECK(t.bandwidth == s.bandwidth);
    CHECK(t.gains.a == s.gains.a);
    CHECK(t.distances == s.distances);
    CHECK(t.weights == s.weights);
    CHECK(t.qos_min == s.qos_min);
    std::filesystem::remove(path);
}

TEST_CASE("csv loader rejects mangled files") {
    const std::string path = tmp_path("drljrm_scenario_bad.csv");
    {
        std::ofstream out(path);
        out << "gibberish,1,2\n";
    }
    CHECK_THROWS_AS(load_scenario_csv(path), std::invalid_argument);
    CHECK_THROWS_AS(load_scenario_csv("/nonexistent/missing.csv"), std::invalid_argument);
    std::filesystem::remove(path);
}

}  // TEST_SUITE
