#include "drljrm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "drljrm/rng.hpp"

namespace drljrm {

namespace {

// One per-subcarrier choice: users of the subset with their indicator levels.
struct SlotOption {
    std::vector<int> users;
    std::vector<int> levels;  // in 1..L, aligned with users
};

// All subsets with size <= N_max, lexicographic order.
std::vector<std::vector<int>> all_subsets(int M, int N_max) {
    std::vector<std::vector<int>> out;
    out.push_back({});
    std::vector<std::vector<int>> frontier = {{}};
    for (int size = 1; size <= N_max; ++size) {
        std::vector<std::vector<int>> next_frontier;
        for (const auto& base : frontier) {
            int start = base.empty() ? 0 : base.back() + 1;
            for (int m = start; m < M; ++m) {
                auto ext = base;
                ext.push_back(m);
                out.push_back(ext);
                next_frontier.push_back(std::move(ext));
            }
        }
        frontier = std::move(next_frontier);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<SlotOption> build_options(int M, int N_max, int L) {
    std::vector<SlotOption> opts;
    for (const auto& subset : all_subsets(M, N_max)) {
        const int k = static_cast<int>(subset.size());
        if (k == 0) {
            opts.push_back({subset, {}});
            continue;
        }
        std::vector<int> levels(k, 1);
        while (true) {
            opts.push_back({subset, levels});
            int pos = k - 1;
            while (pos >= 0 && levels[pos] == L) {
                levels[pos] = 1;
                --pos;
            }
            if (pos < 0) break;
            ++levels[pos];
        }
    }
    return opts;
}

double pow_double(double base, int exp) {
    double r = 1.0;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

}  // namespace

SolveResult exhaustive_solve(const Scenario& s, int power_levels, double budget) {
    if (power_levels < 1) throw std::invalid_argument("exhaustive_solve: power_levels must be >= 1");
    const int M = s.num_users, NF = s.num_subcarriers, L = power_levels;

    double per_slot = 0.0;  // sum_{k<=N_max} C(M,k) L^k
    {
        double choose = 1.0;
        for (int k = 0; k <= s.max_per_subcarrier; ++k) {
            if (k > 0) choose = choose * (M - k + 1) / k;
            per_slot += choose * pow_double(L, k);
        }
    }
    const double space = pow_double(per_slot, NF);
    if (!(space <= budget)) throw BudgetExceeded(space);

    const auto opts = build_options(M, s.max_per_subcarrier, L);
    const int n_opts = static_cast<int>(opts.size());

    SolveResult best;
    best.assignment = Assignment(NF, M);
    best.power = PowerAllocation(NF, M);
    best.report = evaluate(s, best.assignment, best.power.powers);
    double best_obj = -1.0;

    std::vector<int> idx(NF, 0);
    Assignment a(NF, M);
    Mat ind(NF, M);
    while (true) {
        // Materialize the joint choice.
        for (int i = 0; i < NF; ++i) {
            for (int m = 0; m < M; ++m) {
                a.occupancy(i, m) = 0.0;
                ind(i, m) = 0.0;
            }
            const auto& o = opts[idx[i]];
            for (size_t t = 0; t < o.users.size(); ++t) {
                a.occupancy(i, o.users[t]) = 1.0;
                ind(i, o.users[t]) = o.levels[t];
            }
        }
        Mat p = normalize_power(ind, s.total_power);
        RateReport rep = evaluate(s, a, p);
        if (rep.all_feasible() && rep.objective > best_obj) {
            best_obj = rep.objective;
            best.assignment = a;
            best.power.indicator = ind;
            best.power.powers = std::move(p);
            best.report = rep;
            best.feasible = true;
        }
        int pos = NF - 1;
        while (pos >= 0 && idx[pos] == n_opts - 1) {
            idx[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++idx[pos];
    }
    return best;
}

Assignment greedy_sa(const Scenario& s) {
    const int M = s.num_users, NF = s.num_subcarriers;
    const int cap = (NF * s.max_per_subcarrier + M - 1) / M;  // ceil(N_F N_max / M)

    std::vector<int> order(M);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> key(M);
    for (int m = 0; m < M; ++m) {
        double g = 0.0;
        for (int i = 0; i < NF; ++i) g = std::max(g, s.gain(i, m));
        key[m] = s.weights[m] * g;
    }
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return key[x] > key[y]; });

    Assignment a(NF, M);
    std::vector<int> load(NF, 0);
    for (int m : order) {
        std::vector<int> subs(NF);
        std::iota(subs.begin(), subs.end(), 0);
        std::stable_sort(subs.begin(), subs.end(), [&](int x, int y) { return s.gain(x, m) > s.gain(y, m); });
        int taken = 0;
        for (int i : subs) {
            if (taken >= cap) break;
            if (load[i] >= s.max_per_subcarrier) continue;
            a.set(i, m, true);
            ++load[i];
            ++taken;
        }
    }
    return a;
}

namespace {

// Uniform subset of size <= N_max: size weighted by C(M,k) L-free counts,
// then a uniform k-subset via partial Fisher-Yates.
std::vector<int> uniform_subset(Rng& rng, int M, int N_max) {
    std::vector<double> w(N_max + 1);
    double choose = 1.0;
    for (int k = 0; k <= N_max; ++k) {
        if (k > 0) choose = choose * (M - k + 1) / k;
        w[k] = choose;
    }
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    double u = rng.uniform() * total;
    int k = 0;
    for (; k < N_max; ++k) {
        if (u < w[k]) break;
        u -= w[k];
    }
    std::vector<int> pool(M);
    std::iota(pool.begin(), pool.end(), 0);
    for (int t = 0; t < k; ++t) {
        const int j = t + static_cast<int>(rng.below(M - t));
        std::swap(pool[t], pool[j]);
    }
    std::vector<int> subset(pool.begin(), pool.begin() + k);
    std::sort(subset.begin(), subset.end());
    return subset;
}

}  // namespace

Assignment random_sa(const Scenario& s, uint64_t seed) {
    const int M = s.num_users, NF = s.num_subcarriers;
    Rng rng(derive_seed(seed, kSeedBaseline));
    const bool capacity_ok = static_cast<long long>(NF) * s.max_per_subcarrier >= M;

    for (int attempt = 0; attempt < 1000; ++attempt) {
        Assignment a(NF, M);
        for (int i = 0; i < NF; ++i)
            for (int m : uniform_subset(rng, M, s.max_per_subcarrier)) a.set(i, m, true);
        if (!capacity_ok) return a;
        bool covered = true;
        for (int m = 0; m < M && covered; ++m) {
            bool any = false;
            for (int i = 0; i < NF; ++i) any = any || a.assigned(i, m);
            covered = any;
        }
        if (covered) return a;
    }

    // Constructive fallback: place each unserved user on a random subcarrier
    // with spare capacity (capacity_ok guarantees one exists).
    Assignment a(NF, M);
    std::vector<int> load(NF, 0);
    for (int m = 0; m < M; ++m) {
        std::vector<int> open;
        for (int i = 0; i < NF; ++i)
            if (load[i] < s.max_per_subcarrier) open.push_back(i);
        const int i = open[static_cast<size_t>(rng.below(open.size()))];
        a.set(i, m, true);
        ++load[i];
    }
    return a;
}

GridPaResult grid_pa(const Scenario& s, const Assignment& a, int power_levels, double budget) {
    if (power_levels < 1) throw std::invalid_argument("grid_pa: power_levels must be >= 1");
    const int NF = s.num_subcarriers, M = s.num_users, L = power_levels;

    std::vector<std::pair<int, int>> slots;  // (subcarrier, user), row-major order
    for (int i = 0; i < NF; ++i)
        for (int m = 0; m < M; ++m)
            if (a.assigned(i, m)) slots.push_back({i, m});
    const int S = static_cast<int>(slots.size());

    const double space = pow_double(L, S);
    if (!(space <= budget)) throw BudgetExceeded(space);

    GridPaResult res;
    res.power = PowerAllocation(NF, M);
    if (S == 0) {
        res.found = true;
        return res;
    }

    double best_obj = -1.0, best_obj_noc5 = -1.0, best_obj_any = -1.0;
    Mat best_ind, best_ind_noc5, best_ind_any;

    std::vector<int> levels(S, 1);
    Mat ind(NF, M);
    while (true) {
        for (int t = 0; t < S; ++t) ind(slots[t].first, slots[t].second) = levels[t];
        Mat p = normalize_power(ind, s.total_power);
        RateReport rep = evaluate(s, a, p);
        // C1/C3 hold by construction; rank by objective within each tier.
        if (rep.c2 && rep.c5 && rep.objective > best_obj) {
            best_obj = rep.objective;
            best_ind = ind;
        }
        if (rep.c2 && rep.objective > best_obj_noc5) {
            best_obj_noc5 = rep.objective;
            best_ind_noc5 = ind;
        }
        if (rep.objective > best_obj_any) {
            best_obj_any = rep.objective;
            best_ind_any = ind;
        }
        // Odometer with the last slot fastest => lexicographic order, so the
        // first point reaching a given objective is the lexicographically
        // smallest among its ties.
        int pos = S - 1;
        while (pos >= 0 && levels[pos] == L) {
            levels[pos] = 1;
            --pos;
        }
        if (pos < 0) break;
        ++levels[pos];
    }

    if (best_obj >= 0.0) {
        res.found = true;
        res.power.indicator = best_ind;
    } else if (best_obj_noc5 >= 0.0) {
        res.c5_relaxed = true;
        res.power.indicator = best_ind_noc5;
    } else {
        res.c5_relaxed = true;
        res.c2_relaxed = true;
        res.power.indicator = best_ind_any;
    }
    res.power.powers = normalize_power(res.power.indicator, s.total_power);
    return res;
}

SolveResult oma_solve(const Scenario& s, int power_levels, double budget) {
    const int M = s.num_users, NF = s.num_subcarriers;
    Assignment a(NF, M);
    std::vector<bool> sub_used(NF, false);
    std::vector<bool> served(M, false);

    // Serve-everyone-first matching on weighted gain, then fill leftovers.
    int unserved = M, open = NF;
    while (unserved > 0 && open > 0) {
        double best = -1.0;
        int bi = -1, bm = -1;
        for (int i = 0; i < NF; ++i) {
            if (sub_used[i]) continue;
            for (int m = 0; m < M; ++m) {
                if (served[m]) continue;
                const double v = s.weights[m] * s.gain(i, m);
                if (v > best) {
                    best = v;
                    bi = i;
                    bm = m;
                }
            }
        }
        a.set(bi, bm, true);
        sub_used[bi] = true;
        served[bm] = true;
        --unserved;
        --open;
    }
    for (int i = 0; i < NF; ++i) {
        if (sub_used[i]) continue;
        double best = -1.0;
        int bm = -1;
        for (int m = 0; m < M; ++m) {
            const double v = s.weights[m] * s.gain(i, m);
            if (v > best) {
                best = v;
                bm = m;
            }
        }
        a.set(i, bm, true);
    }

    SolveResult res;
    res.assignment = a;
    GridPaResult g = grid_pa(s, a, power_levels, budget);
    res.power = g.power;
    res.report = evaluate(s, a, res.power.powers);
    res.feasible = g.found;
    return res;
}

}  // namespace drljrm
