#include "drljrm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "drljrm/rng.hpp"

namespace drljrm {

void ScenarioConfig::validate() const {
    if (num_users < 1) throw std::invalid_argument("num_users must be >= 1");
    if (num_subcarriers < 1) throw std::invalid_argument("num_subcarriers must be >= 1");
    if (max_per_subcarrier < 1 || max_per_subcarrier > num_users)
        throw std::invalid_argument("max_per_subcarrier must lie in [1, num_users]");
    if (sic_error_sq < 0.0 || sic_error_sq > 1.0) throw std::invalid_argument("sic_error_sq must lie in [0,1]");
    if (!(radius_min > 0.0) || !(radius_min < radius_max))
        throw std::invalid_argument("need 0 < radius_min < radius_max");
    if (!std::isfinite(total_power_dbm) || !std::isfinite(noise_psd_dbm_per_hz) || !std::isfinite(pdsc_threshold_dbm))
        throw std::invalid_argument("dBm fields must be finite");
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth_hz must be positive");
    if (qos_std < 0.0) throw std::invalid_argument("qos_std must be >= 0");
    if (!(qos_mean > 0.0)) throw std::invalid_argument("qos_mean must be positive");
    if (!(pathloss_exponent > 0.0)) throw std::invalid_argument("pathloss_exponent must be positive");
}

Scenario generate(const ScenarioConfig& config) {
    config.validate();
    const int M = config.num_users;
    const int NF = config.num_subcarriers;

    Scenario s;
    s.num_users = M;
    s.num_subcarriers = NF;
    s.max_per_subcarrier = config.max_per_subcarrier;
    s.total_power = dbm_to_watts(config.total_power_dbm);
    s.noise_var = config.bandwidth_hz * dbm_to_watts(config.noise_psd_dbm_per_hz) / NF;
    s.pdsc_threshold = dbm_to_watts(config.pdsc_threshold_dbm);
    s.sic_error_sq = config.sic_error_sq;
    s.bandwidth = config.bandwidth_hz;
    s.gains = Mat(NF, M);
    s.distances.resize(M);
    s.weights.resize(M);
    s.qos_min.resize(M);

    Rng rng(derive_seed(config.rng_seed, kSeedScenario));

    // Area-uniform placement in the annulus [radius_min, radius_max].
    const double rmin2 = config.radius_min * config.radius_min;
    const double rmax2 = config.radius_max * config.radius_max;
    for (int m = 0; m < M; ++m) {
        const double d = std::sqrt(rmin2 + rng.uniform() * (rmax2 - rmin2));
        if (!(d > 0.0)) throw std::runtime_error("generate: nonpositive distance");
        s.distances[m] = d;
    }

    for (int m = 0; m < M; ++m) {
        // Log-distance path loss, linear scale.
        const double pl_db = config.pathloss_intercept_db + 10.0 * config.pathloss_exponent * std::log10(s.distances[m]);
        const double pl = std::pow(10.0, pl_db / 10.0);
        for (int i = 0; i < NF; ++i) {
            // g ~ CN(0,1): real/imag each N(0, 1/2).
            const double re = rng.normal() * M_SQRT1_2;
            const double im = rng.normal() * M_SQRT1_2;
            s.gains(i, m) = (re * re + im * im) / pl;
        }
    }

    const double dmax = *std::max_element(s.distances.begin(), s.distances.end());
    for (int m = 0; m < M; ++m) s.weights[m] = s.distances[m] / dmax;

    for (int m = 0; m < M; ++m)
        s.qos_min[m] = std::max(1e3, rng.normal(config.qos_mean, config.qos_std));

    return s;
}

ScenarioConfig scenario_config_from_kv(const std::map<std::string, std::string>& kv) {
    ScenarioConfig c;
    c.num_users = static_cast<int>(kv_get_int(kv, "num_users", c.num_users));
    c.num_subcarriers = static_cast<int>(kv_get_int(kv, "num_subcarriers", c.num_subcarriers));
    c.max_per_subcarrier = static_cast<int>(kv_get_int(kv, "max_per_subcarrier", c.max_per_subcarrier));
    c.total_power_dbm = kv_get_double(kv, "total_power_dbm", c.total_power_dbm);
    c.bandwidth_hz = kv_get_double(kv, "bandwidth_hz", c.bandwidth_hz);
    c.noise_psd_dbm_per_hz = kv_get_double(kv, "noise_psd_dbm_per_hz", c.noise_psd_dbm_per_hz);
    c.pdsc_threshold_dbm = kv_get_double(kv, "pdsc_threshold_dbm", c.pdsc_threshold_dbm);
    c.sic_error_sq = kv_get_double(kv, "sic_error_sq", c.sic_error_sq);
    c.radius_min = kv_get_double(kv, "radius_min", c.radius_min);
    c.radius_max = kv_get_double(kv, "radius_max", c.radius_max);
    c.pathloss_exponent = kv_get_double(kv, "pathloss_exponent", c.pathloss_exponent);
    c.pathloss_intercept_db = kv_get_double(kv, "pathloss_intercept_db", c.pathloss_intercept_db);
    c.qos_mean = kv_get_double(kv, "qos_mean", c.qos_mean);
    c.qos_std = kv_get_double(kv, "qos_std", c.qos_std);
    c.rng_seed = static_cast<uint64_t>(kv_get_int(kv, "rng_seed", static_cast<long long>(c.rng_seed)));
    c.validate();
    return c;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    return scenario_config_from_kv(parse_kv_file(path));
}

namespace {

void write_vector(std::ofstream& out, const std::string& name, const std::vector<double>& v) {
    out << name;
    for (double x : v) out << ',' << fmt_double(x);
    out << '\n';
}

std::vector<double> parse_row(const std::string& line, std::string* name) {
    std::vector<double> out;
    std::istringstream ss(line);
    std::string cell;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
        if (first) {
            *name = cell;
            first = false;
        } else {
            out.push_back(std::strtod(cell.c_str(), nullptr));
        }
    }
    return out;
}

}  // namespace

void dump_scenario_csv(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for write: " + path);
    out << "meta," << s.num_users << ',' << s.num_subcarriers << ',' << s.max_per_subcarrier << ','
        << fmt_double(s.total_power) << ',' << fmt_double(s.noise_var) << ',' << fmt_double(s.pdsc_threshold) << ','
        << fmt_double(s.sic_error_sq) << ',' << fmt_double(s.bandwidth) << '\n';
    for (int i = 0; i < s.num_subcarriers; ++i) {
        out << "gains_row";
        for (int m = 0; m < s.num_users; ++m) out << ',' << fmt_double(s.gains(i, m));
        out << '\n';
    }
    write_vector(out, "distances", s.distances);
    write_vector(out, "weights", s.weights);
    write_vector(out, "qos_min", s.qos_min);
}

Scenario load_scenario_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
    Scenario s;
    std::string line;
    int gain_row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string name;
        std::vector<double> vals = parse_row(line, &name);
        if (name == "meta") {
            if (vals.size() != 8) throw std::invalid_argument("scenario csv: bad meta row");
            s.num_users = static_cast<int>(vals[0]);
            s.num_subcarriers = static_cast<int>(vals[1]);
            s.max_per_subcarrier = static_cast<int>(vals[2]);
            s.total_power = vals[3];
            s.noise_var = vals[4];
            s.pdsc_threshold = vals[5];
            s.sic_error_sq = vals[6];
            s.bandwidth = vals[7];
            s.gains = Mat(s.num_subcarriers, s.num_users);
        } else if (name == "gains_row") {
            if (gain_row >= s.num_subcarriers || static_cast<int>(vals.size()) != s.num_users)
                throw std::invalid_argument("scenario csv: bad gains row");
            for (int m = 0; m < s.num_users; ++m) s.gains(gain_row, m) = vals[m];
            ++gain_row;
        } else if (name == "distances") {
            s.distances = vals;
        } else if (name == "weights") {
            s.weights = vals;
        } else if (name == "qos_min") {
            s.qos_min = vals;
        } else {
            throw std::invalid_argument("scenario csv: unknown row '" + name + "'");
        }
    }
    if (gain_row != s.num_subcarriers || static_cast<int>(s.distances.size()) != s.num_users ||
        static_cast<int>(s.weights.size()) != s.num_users || static_cast<int>(s.qos_min.size()) != s.num_users)
        throw std::invalid_argument("scenario csv: incomplete file");
    return s;
}

}  // namespace drljrm
