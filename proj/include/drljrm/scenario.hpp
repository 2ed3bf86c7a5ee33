#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "drljrm/util.hpp"

namespace drljrm {

// System setup knobs. dBm fields converted to watts once, in generate().
struct ScenarioConfig {
    int num_users = 60;                  // M
    int num_subcarriers = 64;            // N_F
    int max_per_subcarrier = 5;          // N_max
    double total_power_dbm = 42.0;       // P_total
    double bandwidth_hz = 5e6;           // W
    double noise_psd_dbm_per_hz = -173.0;
    double pdsc_threshold_dbm = -95.0;   // p_delta
    double sic_error_sq = 1e-4;          // eps^2
    double radius_min = 30.0;            // meters
    double radius_max = 300.0;
    double pathloss_exponent = 3.6;
    double pathloss_intercept_db = 38.46;
    double qos_mean = 80e3;              // bit/s
    double qos_std = 10e3;
    uint64_t rng_seed = 1;

    void validate() const;  // throws std::invalid_argument
};

// Immutable problem instance. All linear units (watts, Hz, bit/s).
struct Scenario {
    int num_users = 0;        // M
    int num_subcarriers = 0;  // N_F
    int max_per_subcarrier = 0;
    double total_power = 0.0;  // watts
    double noise_var = 0.0;    // sigma^2 per subcarrier, watts
    double pdsc_threshold = 0.0;
    double sic_error_sq = 0.0;
    double bandwidth = 0.0;
    Mat gains;                      // N_F x M, |h|^2 linear
    std::vector<double> distances;  // per user, meters
    std::vector<double> weights;    // varpi_m = d_m / max_k d_k
    std::vector<double> qos_min;    // R_m^min, bit/s

    double gain(int subcarrier, int user) const { return gains(subcarrier, user); }
};

Scenario generate(const ScenarioConfig& config);

ScenarioConfig scenario_config_from_kv(const std::map<std::string, std::string>& kv);
ScenarioConfig load_scenario_config(const std::string& path);

// CSV fixture round-trip: gains matrix block, then per-user vectors.
void dump_scenario_csv(const Scenario& s, const std::string& path);
Scenario load_scenario_csv(const std::string& path);

}  // namespace drljrm
