#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace fgpc {

/// Vector residual u -> r(u) with r the same length as u.
using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Step globalization: Armijo backtracking along the Newton direction, or a
/// Powell dogleg trust region between the Newton and steepest-descent steps.
enum class Globalization { line_search, dogleg };

struct NewtonOptions {
    double tolerance = 1e-10;     ///< convergence when ||r||_inf < tolerance
    int max_iterations = 50;
    double armijo = 1e-4;         ///< sufficient-decrease constant on ||r||^2
    double min_damping = 1.0 / 1024.0;
    double max_condition = 1e14;  ///< Jacobians with a larger estimate are singular
    bool parallel_jacobian = true;
    /// Without line search every full Newton step with a finite residual is
    /// taken (line_search globalization only).
    bool line_search = true;
    Globalization globalization = Globalization::line_search;
    double initial_radius = 1.0; ///< dogleg radius relative to 1 + ||u0||
};

enum class NewtonStatus { converged, max_iterations, singular_jacobian, line_search_failed, non_finite };

std::string to_string(NewtonStatus status);

struct NewtonResult {
    Eigen::VectorXd solution; ///< last iterate, also on failure
    NewtonStatus status = NewtonStatus::max_iterations;
    int iterations = 0;
    int residual_evaluations = 0;
    double residual_norm = 0.0; ///< ||r||_inf at solution
    double condition_estimate = 0.0;

    bool converged() const { return status == NewtonStatus::converged; }
};

/// Forward-difference Jacobian, column i perturbed by sqrt(eps) (1 + |u_i|).
Eigen::MatrixXd finite_difference_jacobian(const VectorFunction& f, const Eigen::VectorXd& u,
                                           const Eigen::VectorXd& fu, bool parallel = true);

/// Jacobian at u given the residual fu = f(u).
using JacobianFunction = std::function<Eigen::MatrixXd(const Eigen::VectorXd& u, const Eigen::VectorXd& fu)>;

/// Damped Newton with Armijo backtracking on ||r||^2. Never throws for
/// numerical failures; inspect status. Residual exceptions of type
/// NonFiniteError during line search are treated as infinite residuals.
NewtonResult newton_solve(const VectorFunction& f, const Eigen::VectorXd& initial,
                          const NewtonOptions& options = {});
/// Same with a caller-supplied Jacobian.
NewtonResult newton_solve(const VectorFunction& f, const JacobianFunction& jacobian, const Eigen::VectorXd& initial,
                          const NewtonOptions& options = {});

/// Shifted deflation D_s(q) = I / ||s - q||^p + shift I.
struct DeflationConfig {
    double power = 2.0;
    double shift = 1.0;
    /// Roots closer than radius * (1 + ||s||) to a stored root are duplicates.
    double distinct_radius = 1e-6;
};

void validate(const DeflationConfig& config);

/// Scalar product of all deflation operators at q (they are multiples of
/// the identity, so the product is a scalar).
double deflation_factor(const Eigen::VectorXd& q, const std::vector<Eigen::VectorXd>& roots,
                        const DeflationConfig& config);

/// q -> D_{s_m}(q) ... D_{s_1}(q) r(q).
VectorFunction deflate(VectorFunction f, std::vector<Eigen::VectorXd> roots, DeflationConfig config);

/// Jacobian of the deflated residual, eta J + r grad(eta)^T, with J the
/// finite-difference Jacobian of the undeflated residual. Differencing the
/// deflated residual directly breaks down within one difference step of a
/// stored root.
JacobianFunction deflated_jacobian(VectorFunction f, std::vector<Eigen::VectorXd> roots, DeflationConfig config,
                                   bool parallel = true);

struct FoundRoot {
    Eigen::VectorXd solution;
    double residual_norm;  ///< undeflated ||r||_inf
    int iterations;
    std::string stability = "unknown";
    std::size_t initial_index;
};

struct FailedAttempt {
    std::size_t initial_index;
    NewtonStatus status;
    std::string reason;
};

class SolutionSet {
public:
    std::vector<FoundRoot> roots;
    std::vector<FailedAttempt> failures;

    std::size_t size() const { return roots.size(); }
    bool empty() const { return roots.empty(); }
    Eigen::MatrixXd pairwise_distances() const;
    std::vector<Eigen::VectorXd> solutions() const;
};

/// Repeatedly solves the deflated system from each initial guess: after each
/// success the root is stored and the same guess is retried against the
/// extended deflation; on failure the next guess is used. Stops when
/// max_solutions are found or every guess failed after the last success.
/// Accepted roots always satisfy the undeflated tolerance.
SolutionSet deflated_solve(const VectorFunction& f, const std::vector<Eigen::VectorXd>& initials,
                           const DeflationConfig& deflation, std::size_t max_solutions,
                           const NewtonOptions& options = {});

} // namespace fgpc
