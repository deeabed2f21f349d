#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pisac/harness.hpp"

namespace pisac {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string measured;
    double runtime_s = 0.0;
    double budget_s = 0.0;  ///< 0: no runtime bound
};

struct ValidateOptions {
    std::uint64_t seed = 20240601;
    /// Multiplies every library kappa before it is compared (fault injection).
    double kappa_scale = 1.0;
    /// Criteria to run; empty runs all of them.
    std::vector<int> only;
};

/// The acceptance suite. Criterion 12 audits every beamformer produced by
/// the other criteria that ran.
std::vector<CriterionResult> run_validate_criteria(const ValidateOptions& options = {});

/// One line per criterion: "[PASS] 3 name: measured (1.2 s / 300 s)".
std::string format_criterion(const CriterionResult& r);

/// Criteria as a table (id, pass, runtime_s, budget_s); measured values
/// go to the metadata.
CurveTable run_validate(const ExperimentConfig& config, const ValidateOptions& options = {});

}  // namespace pisac
