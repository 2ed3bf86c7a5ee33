#pragma once

#include "drljrm/scenario.hpp"

namespace toy {

// Hand-sized instance with unit bookkeeping: W / N_F = 1 Hz per subcarrier and
// sigma^2 = 1 W, so rates read directly as log2(1 + SINR). Gains, powers and
// thresholds are meant to be overwritten per test.
inline drljrm::Scenario scenario(int nf, int m) {
    drljrm::Scenario s;
    s.num_users = m;
    s.num_subcarriers = nf;
    s.max_per_subcarrier = m;
    s.total_power = 10.0;
    s.noise_var = 1.0;
    s.pdsc_threshold = 0.0;
    s.sic_error_sq = 0.0;
    s.bandwidth = nf;
    s.gains = drljrm::Mat(nf, m, 1.0);
    s.distances.assign(m, 100.0);
    s.weights.assign(m, 1.0);
    s.qos_min.assign(m, 0.0);
    return s;
}

}  // namespace toy
