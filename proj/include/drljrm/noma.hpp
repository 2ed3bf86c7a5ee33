#pragma once

#include <string>
#include <vector>

#include "drljrm/scenario.hpp"
#include "drljrm/util.hpp"

namespace drljrm {

// Binary occupancy o_{i,m}, N_F x M.
struct Assignment {
    Mat occupancy;

    Assignment() = default;
    Assignment(int nf, int m) : occupancy(nf, m) {}
    bool assigned(int i, int m) const { return occupancy(i, m) != 0.0; }
    void set(int i, int m, bool on) { occupancy(i, m) = on ? 1.0 : 0.0; }
    int count_on(int i) const {
        int c = 0;
        for (int m = 0; m < occupancy.cols; ++m) c += assigned(i, m) ? 1 : 0;
        return c;
    }
};

// Indicator v and the budget-normalized powers p, both N_F x M.
struct PowerAllocation {
    Mat indicator;
    Mat powers;

    PowerAllocation() = default;
    PowerAllocation(int nf, int m) : indicator(nf, m), powers(nf, m) {}
};

// Per-subcarrier SIC decode order: users[i] sorted by gain descending,
// index j is 0-based with j=0 the strongest channel.
struct SicOrder {
    std::vector<std::vector<int>> users;

    int multiplexed(int i) const { return static_cast<int>(users[i].size()); }  // J_i
};

struct RateReport {
    Mat rates;                      // N_F x M, R~_{i,m} in bit/s (0 where unassigned)
    std::vector<double> user_totals;  // bit/s
    double objective = 0.0;           // weighted bit/s
    bool c1 = false, c2 = false, c3 = false, c4 = false, c5 = false, c6 = false;
    double q_eff = 0.0;     // throughput over QoS-satisfied users only, bit/s
    double qos_rate = 0.0;  // fraction of users meeting their demand

    bool sa_feasible() const { return c4 && c6; }
    bool pa_feasible() const { return c2 && c5; }
    bool all_feasible() const { return c1 && c2 && c3 && c4 && c5 && c6; }
};

// Feasibility tolerances (pinned): absolute watts / relative on rate sums.
inline constexpr double kPowerTolAbs = 1e-12;
inline constexpr double kRateTolRel = 1e-9;

SicOrder sic_order(const Scenario& s, const Assignment& a);

// Residual SIC interference eps^2 * sum_{k=j+1..J_i} p_{i,k} |h_{i,k}|^2,
// j zero-based.
double residual_interference(const Scenario& s, const SicOrder& order, const Mat& powers, int i, int j);

// Achievable rate for decode slot j (zero-based) on subcarrier i.
double rate(const Scenario& s, const SicOrder& order, const Mat& powers, int i, int j);

// PDSC / C2 for decode slot j (zero-based).
bool pdsc_satisfied(const Scenario& s, const SicOrder& order, const Mat& powers, int i, int j);

// Budget normalization with the all-zero guard.
Mat normalize_power(const Mat& indicator, double p_total);

RateReport evaluate(const Scenario& s, const Assignment& a, const Mat& powers);

double effective_throughput(const RateReport& r, const Scenario& s);
double qos_satisfaction_rate(const RateReport& r, const Scenario& s);

void dump_report_csv(const RateReport& r, const Scenario& s, const std::string& path);

}  // namespace drljrm
