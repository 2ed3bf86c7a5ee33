#include "drljrm/noma.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace drljrm {

SicOrder sic_order(const Scenario& s, const Assignment& a) {
    if (a.occupancy.rows != s.num_subcarriers || a.occupancy.cols != s.num_users)
        throw std::invalid_argument("sic_order: assignment shape mismatch");
    SicOrder order;
    order.users.resize(s.num_subcarriers);
    for (int i = 0; i < s.num_subcarriers; ++i) {
        auto& u = order.users[i];
        for (int m = 0; m < s.num_users; ++m)
            if (a.assigned(i, m)) u.push_back(m);
        // Strongest gain first; equal gains break toward the lower user id.
        std::stable_sort(u.begin(), u.end(),
                         [&](int x, int y) { return s.gain(i, x) > s.gain(i, y); });
    }
    return order;
}

double residual_interference(const Scenario& s, const SicOrder& order, const Mat& powers, int i, int j) {
    const auto& u = order.users[i];
    double acc = 0.0;
    for (size_t k = j + 1; k < u.size(); ++k) acc += powers(i, u[k]) * s.gain(i, u[k]);
    return s.sic_error_sq * acc;
}

double rate(const Scenario& s, const SicOrder& order, const Mat& powers, int i, int j) {
    const auto& u = order.users[i];
    const int user = u[j];
    const double h2 = s.gain(i, user);
    const double p = powers(i, user);
    if (p <= 0.0) return 0.0;
    double intra = 0.0;  // uncancelled stronger-slot users, receiver's own gain
    for (int k = 0; k < j; ++k) intra += powers(i, u[k]) * h2;
    const double denom = intra + residual_interference(s, order, powers, i, j) + s.noise_var;
    return (s.bandwidth / s.num_subcarriers) * std::log2(1.0 + p * h2 / denom);
}

bool pdsc_satisfied(const Scenario& s, const SicOrder& order, const Mat& powers, int i, int j) {
    const auto& u = order.users[i];
    double stronger = 0.0;
    for (int k = 0; k < j; ++k) stronger += powers(i, u[k]);
    return s.gain(i, u[j]) * (powers(i, u[j]) - stronger) >= s.pdsc_threshold;
}

Mat normalize_power(const Mat& indicator, double p_total) {
    for (double v : indicator.a)
        if (v < 0.0) throw std::invalid_argument("normalize_power: negative indicator");
    Mat p(indicator.rows, indicator.cols);
    const double total = indicator.sum();
    if (total > 0.0) {
        const double scale = p_total / total;
        for (size_t k = 0; k < indicator.a.size(); ++k) p.a[k] = indicator.a[k] * scale;
    }
    return p;
}

RateReport evaluate(const Scenario& s, const Assignment& a, const Mat& powers) {
    if (a.occupancy.rows != s.num_subcarriers || a.occupancy.cols != s.num_users ||
        powers.rows != s.num_subcarriers || powers.cols != s.num_users)
        throw std::invalid_argument("evaluate: shape mismatch");

    RateReport r;
    r.rates = Mat(s.num_subcarriers, s.num_users);
    r.user_totals.assign(s.num_users, 0.0);

    r.c6 = true;
    for (double v : a.occupancy.a)
        if (v != 0.0 && v != 1.0) r.c6 = false;

    r.c3 = true;
    double p_sum = 0.0;
    for (double v : powers.a) {
        if (v < -kPowerTolAbs) r.c3 = false;
        p_sum += v;
    }
    r.c1 = p_sum <= s.total_power * (1.0 + kRateTolRel) + kPowerTolAbs;

    r.c4 = true;
    for (int i = 0; i < s.num_subcarriers; ++i)
        if (a.count_on(i) > s.max_per_subcarrier) r.c4 = false;

    const SicOrder order = sic_order(s, a);
    r.c2 = true;
    for (int i = 0; i < s.num_subcarriers; ++i) {
        for (int j = 0; j < order.multiplexed(i); ++j) {
            const int m = order.users[i][j];
            const double rij = rate(s, order, powers, i, j);
            r.rates(i, m) = rij;
            r.user_totals[m] += rij;
            if (!pdsc_satisfied(s, order, powers, i, j)) r.c2 = false;
        }
    }

    r.c5 = true;
    for (int m = 0; m < s.num_users; ++m)
        if (r.user_totals[m] < s.qos_min[m] * (1.0 - kRateTolRel)) r.c5 = false;

    r.objective = 0.0;
    for (int m = 0; m < s.num_users; ++m) r.objective += s.weights[m] * r.user_totals[m];

    r.q_eff = effective_throughput(r, s);
    r.qos_rate = qos_satisfaction_rate(r, s);
    return r;
}

double effective_throughput(const RateReport& r, const Scenario& s) {
    double q = 0.0;
    for (int m = 0; m < s.num_users; ++m) {
        // Effective throughput counts a user only when its total rate meets the
        // demand; the signum convention treats an exactly-met zero demand as met.
        const double sg = (r.user_totals[m] - s.qos_min[m] >= 0.0) ? 1.0 : -1.0;
        q += 0.5 * r.user_totals[m] * (sg + 1.0);
    }
    return q;
}

double qos_satisfaction_rate(const RateReport& r, const Scenario& s) {
    int met = 0;
    for (int m = 0; m < s.num_users; ++m)
        if (r.user_totals[m] >= s.qos_min[m]) ++met;
    return static_cast<double>(met) / s.num_users;
}

void dump_report_csv(const RateReport& r, const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for write: " + path);
    out << "subcarrier,user,rate_bps\n";
    for (int i = 0; i < s.num_subcarriers; ++i)
        for (int m = 0; m < s.num_users; ++m)
            if (r.rates(i, m) != 0.0) out << i << ',' << m << ',' << fmt_double(r.rates(i, m)) << '\n';
    out << "summary,objective," << fmt_double(r.objective) << ",q_eff," << fmt_double(r.q_eff) << ",qos_rate,"
        << fmt_double(r.qos_rate) << ",c1," << r.c1 << ",c2," << r.c2 << ",c3," << r.c3 << ",c4," << r.c4 << ",c5,"
        << r.c5 << ",c6," << r.c6 << '\n';
}

}  // namespace drljrm
