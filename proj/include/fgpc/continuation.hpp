#pragma once

#include "fgpc/harmonic_balance.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace fgpc {

struct ContinuationOptions {
    double initial_step = 0.02; ///< arclength in (unknowns, Omega)
    double min_step = 1e-6;
    double max_step = 0.05;
    int max_points = 20000;
    int fast_iterations = 3;    ///< corrector counts at or below this grow the step
    int slow_iterations = 7;    ///< counts at or above this shrink it
    NewtonOptions corrector{1e-10, 15};
};

struct BranchPoint {
    double omega;                       ///< excitation frequency
    Eigen::VectorXd unknowns;
    double tangent_omega;               ///< dOmega/ds of the unit tangent
    std::vector<double> magnitudes;     ///< per state, k = 0..H
    std::string stability = "unknown";
};

struct Fold {
    std::size_t after_point;  ///< tangent sign flips between this point and the next
    double omega;             ///< interpolated turning-point frequency
};

struct Branch {
    int states = 1;
    int harmonics = 0;
    std::vector<BranchPoint> points;
    std::vector<Fold> folds;
    bool truncated = false;
    std::string warning;

    /// [min, max] of the fold frequencies; empty without two folds.
    std::optional<std::pair<double, double>> multi_solution_band() const;
};

/// Pseudo-arclength continuation in (unknowns, Omega) of a forced problem
/// from omega_start to omega_end, starting from `guess` at omega_start.
/// Traverses turning points; ends with a point at exactly omega_end when the
/// branch reaches it.
Branch continuation_sweep(const HbProblem& problem, double omega_start, double omega_end,
                          const Eigen::VectorXd& guess, const ContinuationOptions& options = {});

/// Same, starting from a time-integration guess at omega_start.
Branch continuation_sweep(const HbProblem& problem, double omega_start, double omega_end,
                          const ContinuationOptions& options = {});

/// CSV with columns Omega, x<c>_h<k> magnitudes, stability.
std::string branch_csv(const Branch& branch);

} // namespace fgpc
