#pragma once

#include <string>
#include <vector>

namespace drljrm {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// Criterion ids behind a named suite; "all" expands to 1..10.
std::vector<int> suite_criteria(const std::string& suite);

// Runs one acceptance criterion. Scratch files go under work_dir.
CriterionResult run_criterion(int id, const std::string& work_dir);

// Prints one pass/fail line per criterion; returns the number of failures.
int run_suite(const std::string& suite, const std::string& work_dir);

}  // namespace drljrm
