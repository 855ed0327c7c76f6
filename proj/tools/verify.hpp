#pragma once

#include <string>
#include <vector>

namespace qpspec::cli {

struct CriterionResult {
    std::string id;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

// Suites: "sarnak" (A1-A3), "cone" (A4-A6), "kam" (A7-A8), "amo" (A9),
// "determinism" (A10), "all".
std::vector<std::string> suite_names();
std::vector<CriterionResult> run_suite(const std::string& name);
std::string format_results(const std::vector<CriterionResult>& results);

}  // namespace qpspec::cli
