#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "drljrm/noma.hpp"
#include "drljrm/scenario.hpp"

namespace drljrm {

struct BudgetExceeded : std::runtime_error {
    double search_space;
    explicit BudgetExceeded(double size)
        : std::runtime_error("search space " + std::to_string(size) + " exceeds evaluation budget"),
          search_space(size) {}
};

inline constexpr double kDefaultEnumBudget = 1e8;

struct SolveResult {
    Assignment assignment;
    PowerAllocation power;
    RateReport report;
    bool feasible = false;  // exhaustive: C1-C6 all hold; OMA: power search succeeded
};

struct GridPaResult {
    PowerAllocation power;
    bool found = false;        // some grid point satisfied the target constraint set
    bool c5_relaxed = false;   // fell back to ignoring C5
    bool c2_relaxed = false;   // fell back further to pure max objective
};

// Joint enumeration over per-subcarrier user subsets (size <= N_max) and
// {1..L} indicator levels per assigned slot, normalized to the power budget.
SolveResult exhaustive_solve(const Scenario& s, int power_levels, double budget = kDefaultEnumBudget);

Assignment greedy_sa(const Scenario& s);

Assignment random_sa(const Scenario& s, uint64_t seed);

// Best {1..L} grid indicator for a fixed assignment among C1-C3/C5-feasible
// points; ties resolved toward the lexicographically smallest indicator.
GridPaResult grid_pa(const Scenario& s, const Assignment& a, int power_levels,
                     double budget = kDefaultEnumBudget);

// One user per subcarrier, then grid_pa.
SolveResult oma_solve(const Scenario& s, int power_levels, double budget = kDefaultEnumBudget);

}  // namespace drljrm
