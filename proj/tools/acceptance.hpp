#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace igbm::app {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string measured;
    std::string threshold;
    std::string detail;
    double seconds = 0.0;  // kept out of the report so reruns compare equal
};

struct AcceptanceOptions {
    std::uint64_t seed = 1;
    int workers = 1;
    // Criterion 10 reruns commands into subdirectories of this path.
    std::filesystem::path scratch = "determinism";
    // Empty means all criteria 1-10.
    std::vector<int> only;
};

// Runs the acceptance criteria in order. A criterion that throws is recorded
// as failed with the error text. on_result is called after each one.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

// "[PASS] 3 variance laws: measured ... (threshold ...)"
std::string format_result_line(const CriterionResult& r);
std::string report_json(const std::vector<CriterionResult>& results, std::uint64_t seed);

}  // namespace igbm::app
