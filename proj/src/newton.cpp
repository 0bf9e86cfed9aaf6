#include "fgpc/newton.hpp"

#include "fgpc/error.hpp"
#include "fgpc/parallel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fgpc {

std::string to_string(NewtonStatus status)
{
    switch (status) {
    case NewtonStatus::converged:
        return "converged";
    case NewtonStatus::max_iterations:
        return "max_iterations";
    case NewtonStatus::singular_jacobian:
        return "singular_jacobian";
    case NewtonStatus::line_search_failed:
        return "line_search_failed";
    case NewtonStatus::non_finite:
        return "non_finite";
    }
    return "unknown";
}

Eigen::MatrixXd finite_difference_jacobian(const VectorFunction& f, const Eigen::VectorXd& u,
                                           const Eigen::VectorXd& fu, bool parallel)
{
    const Eigen::Index n = u.size();
    Eigen::MatrixXd jac(fu.size(), n);
    const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    auto column = [&](std::size_t i) {
        Eigen::VectorXd up = u;
        const double h = root_eps * (1.0 + std::abs(u(i)));
        up(i) += h;
        const double step = up(i) - u(i);
        jac.col(static_cast<Eigen::Index>(i)) = (f(up) - fu) / step;
    };
    if (parallel)
        parallel_for(static_cast<std::size_t>(n), column);
    else
        for (Eigen::Index i = 0; i < n; ++i)
            column(static_cast<std::size_t>(i));
    return jac;
}

namespace {

// Residual evaluation that maps NonFiniteError and NaN/Inf entries to nullopt.
bool try_eval(const VectorFunction& f, const Eigen::VectorXd& u, Eigen::VectorXd& out)
{
    try {
        out = f(u);
    } catch (const NonFiniteError&) {
        return false;
    }
    return out.allFinite();
}

} // namespace

NewtonResult newton_solve(const VectorFunction& f, const Eigen::VectorXd& initial, const NewtonOptions& options)
{
    const bool parallel = options.parallel_jacobian;
    return newton_solve(
        f, [&f, parallel](const Eigen::VectorXd& u, const Eigen::VectorXd& fu) {
            return finite_difference_jacobian(f, u, fu, parallel);
        },
        initial, options);
}

NewtonResult newton_solve(const VectorFunction& f, const JacobianFunction& jacobian, const Eigen::VectorXd& initial,
                          const NewtonOptions& options)
{
    NewtonResult result;
    result.solution = initial;
    Eigen::VectorXd r;
    ++result.residual_evaluations;
    if (!try_eval(f, result.solution, r)) {
        result.status = NewtonStatus::non_finite;
        result.residual_norm = std::numeric_limits<double>::infinity();
        return result;
    }
    if (r.size() != initial.size()) {
        std::ostringstream os;
        os << "newton_solve: residual has " << r.size() << " entries for " << initial.size() << " unknowns";
        throw DimensionError(os.str());
    }
    result.residual_norm = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    double radius = options.initial_radius * (1.0 + initial.norm());

    while (true) {
        if (result.residual_norm < options.tolerance) {
            result.status = NewtonStatus::converged;
            return result;
        }
        if (result.iterations >= options.max_iterations) {
            result.status = NewtonStatus::max_iterations;
            return result;
        }

        Eigen::MatrixXd jac;
        try {
            jac = jacobian(result.solution, r);
        } catch (const NonFiniteError&) {
            result.status = NewtonStatus::non_finite;
            return result;
        }
        result.residual_evaluations += static_cast<int>(result.solution.size());
        if (!jac.allFinite()) {
            result.status = NewtonStatus::non_finite;
            return result;
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
        const double rcond = lu.rcond();
        result.condition_estimate = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
        if (!(result.condition_estimate <= options.max_condition)) {
            result.status = NewtonStatus::singular_jacobian;
            return result;
        }
        const Eigen::VectorXd step = lu.solve(-r);
        ++result.iterations;

        if (options.globalization == Globalization::dogleg) {
            const double phi0 = r.squaredNorm();
            const Eigen::VectorXd grad = jac.transpose() * r;
            const Eigen::VectorXd jg = jac * grad;
            const double cauchy_len = jg.squaredNorm() > 0.0 ? grad.squaredNorm() / jg.squaredNorm() : 0.0;
            const Eigen::VectorXd cauchy = -cauchy_len * grad;
            bool moved = false;
            while (radius >= options.min_damping * 1e-6 * (1.0 + result.solution.norm())) {
                Eigen::VectorXd p;
                if (step.norm() <= radius) {
                    p = step;
                } else if (cauchy.norm() >= radius) {
                    p = (radius / cauchy.norm()) * cauchy;
                } else {
                    // Point on the segment cauchy -> step at distance radius.
                    const Eigen::VectorXd d = step - cauchy;
                    const double a = d.squaredNorm(), b = 2.0 * cauchy.dot(d),
                                 c = cauchy.squaredNorm() - radius * radius;
                    const double tau = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
                    p = cauchy + tau * d;
                }
                const Eigen::VectorXd trial = result.solution + p;
                Eigen::VectorXd r_trial;
                ++result.residual_evaluations;
                const bool finite = try_eval(f, trial, r_trial);
                const double predicted = phi0 - (r + jac * p).squaredNorm();
                const double rho = finite && predicted > 0.0 ? (phi0 - r_trial.squaredNorm()) / predicted : -1.0;
                if (rho < 0.25)
                    radius = 0.25 * p.norm();
                else if (rho > 0.75 && p.norm() >= 0.99 * radius)
                    radius *= 2.0;
                if (rho > 1e-4) {
                    result.solution = trial;
                    r = r_trial;
                    result.residual_norm = r.cwiseAbs().maxCoeff();
                    moved = true;
                    break;
                }
            }
            if (!moved) {
                result.status = NewtonStatus::line_search_failed;
                return result;
            }
            continue;
        }

        // Backtracking on phi = ||r||^2.
        const double phi0 = r.squaredNorm();
        double lambda = 1.0;
        double best_phi = std::numeric_limits<double>::infinity();
        double best_lambda = 0.0;
        Eigen::VectorXd trial, r_trial, r_best;
        bool accepted = false;
        if (!options.line_search) {
            trial = result.solution + step;
            ++result.residual_evaluations;
            if (!try_eval(f, trial, r_trial)) {
                result.status = NewtonStatus::non_finite;
                return result;
            }
            result.solution = trial;
            r = r_trial;
            result.residual_norm = r.cwiseAbs().maxCoeff();
            continue;
        }
        while (lambda >= options.min_damping) {
            trial = result.solution + lambda * step;
            ++result.residual_evaluations;
            if (try_eval(f, trial, r_trial)) {
                const double phi = r_trial.squaredNorm();
                if (phi <= (1.0 - 2.0 * options.armijo * lambda) * phi0) {
                    accepted = true;
                    r_best = r_trial;
                    best_lambda = lambda;
                    break;
                }
                if (phi < best_phi) {
                    best_phi = phi;
                    best_lambda = lambda;
                    r_best = r_trial;
                }
            }
            lambda *= 0.5;
        }
        if (!accepted && !(best_phi < phi0)) {
            result.status = NewtonStatus::line_search_failed;
            return result;
        }
        result.solution += best_lambda * step;
        r = r_best;
        result.residual_norm = r.cwiseAbs().maxCoeff();
    }
}

void validate(const DeflationConfig& config)
{
    if (!(config.power > 0.0))
        throw InvalidArgument("DeflationConfig: power p_D must be > 0");
    if (!(config.shift > 0.0))
        throw InvalidArgument("DeflationConfig: shift alpha_D must be > 0");
    if (!(config.distinct_radius > 0.0))
        throw InvalidArgument("DeflationConfig: distinctness radius must be > 0");
}

double deflation_factor(const Eigen::VectorXd& q, const std::vector<Eigen::VectorXd>& roots,
                        const DeflationConfig& config)
{
    double factor = 1.0;
    for (const auto& s : roots) {
        const double dist = (s - q).norm();
        factor *= 1.0 / std::pow(dist, config.power) + config.shift;
    }
    return factor;
}

VectorFunction deflate(VectorFunction f, std::vector<Eigen::VectorXd> roots, DeflationConfig config)
{
    validate(config);
    return [f = std::move(f), roots = std::move(roots), config](const Eigen::VectorXd& q) -> Eigen::VectorXd {
        return deflation_factor(q, roots, config) * f(q);
    };
}

JacobianFunction deflated_jacobian(VectorFunction f, std::vector<Eigen::VectorXd> roots, DeflationConfig config,
                                   bool parallel)
{
    validate(config);
    return [f = std::move(f), roots = std::move(roots), config, parallel](const Eigen::VectorXd& q,
                                                                          const Eigen::VectorXd& fq) {
        const double eta = deflation_factor(q, roots, config);
        const Eigen::VectorXd r = fq / eta;
        // grad(eta) = eta * sum_i grad(m_i) / m_i with m_i = d_i^-p + shift.
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(q.size());
        for (const auto& s : roots) {
            const Eigen::VectorXd diff = q - s;
            const double d = diff.norm();
            const double dp = std::pow(d, -config.power);
            grad += (-config.power * dp / (d * d) / (dp + config.shift)) * diff;
        }
        grad *= eta;
        return Eigen::MatrixXd(eta * finite_difference_jacobian(f, q, r, parallel) + r * grad.transpose());
    };
}

Eigen::MatrixXd SolutionSet::pairwise_distances() const
{
    const auto n = static_cast<Eigen::Index>(roots.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            d(i, j) = (roots[i].solution - roots[j].solution).norm();
    return d;
}

std::vector<Eigen::VectorXd> SolutionSet::solutions() const
{
    std::vector<Eigen::VectorXd> out;
    for (const auto& r : roots)
        out.push_back(r.solution);
    return out;
}

SolutionSet deflated_solve(const VectorFunction& f, const std::vector<Eigen::VectorXd>& initials,
                           const DeflationConfig& deflation, std::size_t max_solutions, const NewtonOptions& options)
{
    validate(deflation);
    if (initials.empty())
        throw InvalidArgument("deflated_solve: at least one initial guess is required");

    SolutionSet set;
    std::vector<Eigen::VectorXd> found;
    std::size_t index = 0;
    std::size_t failures_in_row = 0;

    auto is_duplicate = [&](const Eigen::VectorXd& q) {
        for (const auto& s : found)
            if ((s - q).norm() <= deflation.distinct_radius * (1.0 + s.norm()))
                return true;
        return false;
    };

    while (set.roots.size() < max_solutions && failures_in_row < initials.size()) {
        Eigen::VectorXd guess = initials[index];
        // A guess sitting exactly on a stored root hits the pole of the
        // deflation factor; step off it along a fixed direction.
        for (const auto& s : found)
            if ((s - guess).norm() <= 1e-14 * (1.0 + s.norm())) {
                const double n = static_cast<double>(guess.size());
                guess.array() += 1e-6 * (1.0 + s.norm()) / std::sqrt(n);
                break;
            }
        NewtonResult res = newton_solve(deflate(f, found, deflation),
                                        deflated_jacobian(f, found, deflation, options.parallel_jacobian), guess,
                                        options);
        std::string reason;
        if (res.converged()) {
            // The deflated tolerance bounds the undeflated one only when the
            // factor is >= 1; polish on the original residual to be sure.
            NewtonResult polished = newton_solve(f, res.solution, options);
            if (!polished.converged())
                reason = "undeflated polish failed: " + to_string(polished.status);
            else if (is_duplicate(polished.solution))
                reason = "converged to an already stored root";
            else {
                found.push_back(polished.solution);
                set.roots.push_back(FoundRoot{polished.solution, polished.residual_norm,
                                              res.iterations + polished.iterations, "unknown", index});
                failures_in_row = 0;
                continue;
            }
        } else {
            reason = to_string(res.status);
        }
        set.failures.push_back(FailedAttempt{index, res.status, reason});
        ++failures_in_row;
        index = (index + 1) % initials.size();
    }
    return set;
}

} // namespace fgpc
