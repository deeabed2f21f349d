#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pisac/linalg.hpp"

namespace pisac {

enum class ConstraintSense { less_equal, equal, greater_equal };

/// sum_k tr(B_k X_k) (sense) rhs. An empty (0 x 0) matrix stands for zero.
struct SdpConstraint {
    std::vector<CMat> matrices;
    ConstraintSense sense = ConstraintSense::less_equal;
    double rhs = 0.0;
};

/// maximize sum_k tr(A_k X_k) over Hermitian PSD blocks X_1..X_C (n x n)
/// subject to linear trace constraints.
struct SdpProblem {
    int block_dim = 0;
    int n_blocks = 0;
    std::vector<CMat> objective;
    std::vector<SdpConstraint> constraints;

    /// Throws DimensionMismatch / ConfigError on malformed data.
    void validate() const;
};

enum class SdpStatus { optimal, infeasible, max_iter };

std::string to_string(SdpStatus status);

struct SdpSolution {
    std::vector<CMat> x_blocks;
    double objective_value = 0.0;
    /// Upper bound on the optimum from the final dual iterate.
    double dual_bound = 0.0;
    SdpStatus status = SdpStatus::max_iter;
    /// Relative duality gap |p - d| / (1 + |p| + |d|) in the scaled problem.
    double gap = 0.0;
    /// Largest relative constraint violation of the returned blocks.
    double primal_violation = 0.0;
    int iterations = 0;
    /// Phase-1 optimum (sum of normalized violations) when it was run.
    double phase1_value = -1.0;
};

struct SdpOptions {
    int max_iterations = 200;
    double tolerance = 1e-9;
    double infeasibility_tolerance = 1e-7;
};

/// Dense primal-dual interior point (HKM direction, Mehrotra predictor-
/// corrector) on the complex Hermitian problem. Constraints and objective
/// are normalized internally; a phase-1 problem decides infeasibility when
/// the main solve does not converge.
SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

/// sum_k tr(B_k X_k) for one constraint.
double constraint_value(const SdpConstraint& constraint, const std::vector<CMat>& x_blocks);

/// Debug dump of a problem instance as JSON.
void write_sdp_problem(const SdpProblem& problem, const std::filesystem::path& path);

}  // namespace pisac
