#pragma once

#include "fgpc/dynamics.hpp"
#include "fgpc/fourier.hpp"
#include "fgpc/newton.hpp"

#include <Eigen/Dense>

#include <numbers>
#include <optional>
#include <vector>

namespace fgpc {

/// Phase anchor of a self-excited solution: the first-harmonic sine
/// coefficient b_1 of `state` is fixed to `value`.
struct Anchor {
    int state = 0;
    double value = 0.0;
};

/// Alternating frequency/time evaluation of the Galerkin residual for one
/// parameter value. Coefficients use the slot layout of FourierGrid
/// (a_0, a_1, b_1, ..., a_H, b_H) per state row.
class AftEvaluator {
public:
    AftEvaluator(const OdeSystem& system, const FourierGrid& grid);

    /// Inverse transform, pointwise residual at all phases, forward transform.
    /// Physical time at phase t_j is t_j / omega. Throws NonFiniteError with
    /// the offending time if the system residual is not finite.
    Eigen::MatrixXd residual(const Eigen::MatrixXd& slots, double omega, double theta,
                             double forcing_frequency) const;

    const OdeSystem& system() const { return *system_; }
    const FourierGrid& grid() const { return *grid_; }

private:
    const OdeSystem* system_;
    const FourierGrid* grid_;
};

/// Deterministic harmonic balance problem at a fixed parameter value.
///
/// Unknowns: per state the slots a_0, a_1, b_1, ..., a_H, b_H; for
/// self-excited systems the anchor's b_1 is removed and omega is appended.
class HbProblem {
public:
    HbProblem(OdeSystem system, FourierGrid grid, double theta, std::optional<Anchor> anchor = std::nullopt);

    const OdeSystem& system() const { return system_; }
    const FourierGrid& grid() const { return grid_; }
    double theta() const { return theta_; }
    const std::optional<Anchor>& anchor() const { return anchor_; }
    bool self_excited() const { return system_.self_excited(); }

    int unknown_count() const;

    Eigen::VectorXd residual(const Eigen::VectorXd& unknowns) const;
    /// Residual of a forced problem with the excitation frequency replaced.
    Eigen::VectorXd residual_at_frequency(const Eigen::VectorXd& unknowns, double forcing_frequency) const;
    VectorFunction residual_function() const;

    /// Slot matrix (n_d x (2H+1)) including the fixed anchor entry.
    Eigen::MatrixXd slots(const Eigen::VectorXd& unknowns) const;
    /// Base frequency: the forcing frequency, or the trailing unknown.
    double omega(const Eigen::VectorXd& unknowns) const;
    Eigen::VectorXd pack(const Eigen::MatrixXd& slots, double omega) const;

    HbProblem with_theta(double theta) const;
    HbProblem with_anchor(Anchor anchor) const;

private:
    OdeSystem system_;
    FourierGrid grid_;
    double theta_;
    std::optional<Anchor> anchor_;
};

inline Eigen::VectorXd assemble_hb_residual(const HbProblem& problem, const Eigen::VectorXd& unknowns)
{
    return problem.residual(unknowns);
}

/// Time-integration initial guess settings.
struct InitialGuessOptions {
    /// Integration start state (phase_dimension entries); empty means 0.1 in
    /// every component.
    std::vector<double> initial_state;
    double periods = 300.0;  ///< integration horizon in forcing / estimated periods
    double rtol = 1e-9;
    double period_hint = 2.0 * std::numbers::pi; ///< self-excited systems only
    int anchor_state = 0;
};

struct HbGuess {
    Eigen::MatrixXd slots;
    double omega;
    std::optional<Anchor> anchor; ///< set for self-excited systems
};

/// Integrates the system at theta, extracts the last period by FFT.
/// Throws PeriodicityError when no periodic motion is found.
HbGuess time_integration_guess(const OdeSystem& system, const FourierGrid& grid, double theta,
                               const InitialGuessOptions& options = {});

/// Solves from the time-integration guess (building the anchor from it for
/// self-excited systems); returns the problem actually solved and the result.
struct HbSolveResult {
    HbProblem problem;
    NewtonResult newton;
};
HbSolveResult solve_hb(const OdeSystem& system, const FourierGrid& grid, double theta,
                       const InitialGuessOptions& guess = {}, const NewtonOptions& options = {});

SolutionSet deflated_solve(const HbProblem& problem, const std::vector<Eigen::VectorXd>& initials,
                           const DeflationConfig& deflation, std::size_t max_solutions,
                           const NewtonOptions& options = {});

/// Deterministic multistart family around one guess: every harmonic scaled
/// by each factor and time-shifted by each phase (harmonic k rotated by k
/// phase). The unmodified guess comes first. Phase shifts are skipped for
/// self-excited systems, where they are a symmetry.
std::vector<Eigen::MatrixXd> multistart_guesses(const Eigen::MatrixXd& slots, bool self_excited,
                                                const std::vector<double>& scales = {1.0, 2.0, 4.0},
                                                const std::vector<double>& phases = {0.0, 0.5 * std::numbers::pi,
                                                                                     std::numbers::pi,
                                                                                     1.5 * std::numbers::pi});

/// sqrt(a_k^2 + b_k^2) for k = 0..H (|a_0| for k = 0) of one state row.
std::vector<double> harmonic_magnitudes(const Eigen::MatrixXd& slots, int state);

} // namespace fgpc
