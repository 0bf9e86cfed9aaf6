#pragma once

#include "fgpc/dynamics.hpp"
#include "fgpc/fourier.hpp"
#include "fgpc/harmonic_balance.hpp"
#include "fgpc/newton.hpp"
#include "fgpc/stochastic_basis.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fgpc {

/// Combined Fourier x polynomial-chaos Galerkin problem for one scalar
/// uncertain parameter.
///
/// Unknown layout: entry (c, s, m) of state c, cosine/sine slot s and
/// polynomial degree m sits at (c * (2H+1) + s) * (N+1) + m. For self-excited
/// systems the anchor state's b_1 entries (all m) are removed (b_{1,0} is the
/// fixed anchor value, the rest are zero) and q_{omega,0..N} are appended.
class FgpcProblem {
public:
    /// Self-excited problems may be built without an anchor; it must be set
    /// (usually from initial_guess) before the residual is evaluated.
    FgpcProblem(OdeSystem system, FourierGrid grid, StochasticBasis basis, QuadratureRule quadrature,
                std::optional<Anchor> anchor = std::nullopt);

    const OdeSystem& system() const { return system_; }
    const FourierGrid& grid() const { return grid_; }
    const StochasticBasis& basis() const { return basis_; }
    const QuadratureRule& quadrature() const { return quadrature_; }
    const std::optional<Anchor>& anchor() const { return anchor_; }
    bool self_excited() const { return system_.self_excited(); }
    int degree() const { return basis_.degree(); }

    int unknown_count() const;
    /// Quadrature-weighted mean of the nodes.
    double nominal_theta() const;

    Eigen::VectorXd residual(const Eigen::VectorXd& unknowns) const;
    VectorFunction residual_function() const;

    /// Per-degree slot matrices (n_d x (2H+1)), anchor entries included.
    std::vector<Eigen::MatrixXd> coefficient_slots(const Eigen::VectorXd& unknowns) const;
    /// q_{omega,0..N}; empty for forced systems.
    Eigen::VectorXd omega_coefficients(const Eigen::VectorXd& unknowns) const;
    Eigen::VectorXd pack(const std::vector<Eigen::MatrixXd>& slots, const Eigen::VectorXd& omega) const;

    /// Fourier slots and base frequency reconstructed at one parameter value.
    Eigen::MatrixXd slots_at(const Eigen::VectorXd& unknowns, double theta) const;
    double omega_at(const Eigen::VectorXd& unknowns, double theta) const;

    FgpcProblem with_anchor(Anchor anchor) const;
    /// Same system, grid and quadrature with a different polynomial degree.
    FgpcProblem with_degree(int degree) const;

private:
    void require_anchor() const;

    OdeSystem system_;
    FourierGrid grid_;
    StochasticBasis basis_;
    QuadratureRule quadrature_;
    std::optional<Anchor> anchor_;
};

/// Problem with default N_t and N_G (overridable) for an uncertain parameter
/// with distribution `dist`.
FgpcProblem make_fgpc_problem(const OdeSystem& system, int harmonics, int degree, const Distribution& dist,
                              std::optional<int> samples = std::nullopt,
                              std::optional<int> quadrature_nodes = std::nullopt);

inline Eigen::VectorXd assemble_fgpc_residual(const FgpcProblem& problem, const Eigen::VectorXd& unknowns)
{
    return problem.residual(unknowns);
}

struct FgpcGuess {
    Eigen::VectorXd unknowns;
    std::optional<Anchor> anchor;
};

/// Degree-0 coefficients (and q_{omega,0}) from a time integration at the
/// nominal parameter; higher degrees zero. With `zero` set, a forced problem
/// starts from all zeros instead.
FgpcGuess initial_guess(const FgpcProblem& problem, const InitialGuessOptions& options = {}, bool zero = false);

/// Places degree-0 slots (and frequency) into a full unknown vector.
Eigen::VectorXd lift_degree_zero(const FgpcProblem& problem, const Eigen::MatrixXd& slots, double omega);

class FgpcSolution {
public:
    std::string system_name;
    StochasticBasis basis;
    int samples = 0;          ///< N_t
    int quadrature_nodes = 0; ///< N_G
    std::optional<Anchor> anchor;
    double forcing_frequency = 0.0; ///< forced systems
    std::vector<Eigen::MatrixXd> coefficients; ///< per degree, n_d x (2H+1) slots
    Eigen::VectorXd omega_coefficients;        ///< empty for forced systems
    double residual_norm = 0.0;
    int iterations = 0;

    int states() const { return static_cast<int>(coefficients.front().rows()); }
    int harmonics() const { return static_cast<int>(coefficients.front().cols() - 1) / 2; }
    int degree() const { return basis.degree(); }
    bool self_excited() const { return omega_coefficients.size() > 0; }

    /// Complex view of degree m.
    HarmonicCoefficients complex_view(int m) const;
    Eigen::MatrixXd slots_at(double theta) const;
    double omega_at(double theta) const;
    /// Magnitude of the degree-0 first harmonic of state 0.
    double first_harmonic_magnitude() const;
};

FgpcSolution make_solution(const FgpcProblem& problem, const NewtonResult& result);

struct FgpcSolveOptions {
    NewtonOptions newton;
    std::optional<DeflationConfig> deflation; ///< unset: a single Newton solve
    std::size_t max_solutions = 3;
    /// Degree-0 search starts from multistart_guesses of the guess instead
    /// of the guess alone.
    bool multistart = true;
};

struct FgpcSolveResult {
    /// Sorted by degree-0 first-harmonic magnitude, largest first.
    std::vector<FgpcSolution> solutions;
    /// Branches that could not be solved at the full degree.
    std::vector<FailedAttempt> failures;
    /// Attempts of the degree-0 deflated search that found nothing new; the
    /// search always ends with these.
    std::vector<FailedAttempt> search_failures;
};

/// Newton on the FgPC residual from `guess`. With deflation, branches are
/// found on the degree-0 problem first and each is lifted to the full degree.
FgpcSolveResult solve_fgpc(const FgpcProblem& problem, const FgpcGuess& guess, const FgpcSolveOptions& options = {});

/// x_HN(t, theta) at physical times, rows = times, columns = states.
Eigen::MatrixXd evaluate_surrogate(const FgpcSolution& solution, double theta, std::span<const double> times);

/// x_HN at normalized phases tau (t = tau / omega(theta)).
Eigen::MatrixXd evaluate_at_phases(const FgpcSolution& solution, double theta, std::span<const double> phases);

} // namespace fgpc
