#pragma once

#include <functional>
#include <string>
#include <vector>

namespace chfh {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    /// Every criterion writes its ledgers and reports below this directory
    /// (created if missing). The determinism criterion adds a second pass in
    /// a sibling subdirectory.
    std::string ledger_dir = "acceptance_ledgers";
    /// Criteria to run; empty means all. Criterion 11 repeats the others
    /// that are selected.
    std::vector<int> only;
    std::function<void(const CriterionResult&)> on_result;
};

inline constexpr int kCriterionCount = 11;

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

/// "PASS  3  elliptic correctness  (0.4 s)  detail"
std::string format_result(const CriterionResult& r);

} // namespace chfh
