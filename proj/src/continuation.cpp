#include "fgpc/continuation.hpp"

#include "fgpc/error.hpp"
#include "fgpc/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fgpc {

namespace {

struct Augmented {
    const HbProblem* problem;
    int n;

    Eigen::VectorXd residual(const Eigen::VectorXd& y) const
    {
        return problem->residual_at_frequency(y.head(n), y(n));
    }
};

// Unit tangent of the solution curve at y, oriented along `previous`.
Eigen::VectorXd tangent_at(const Augmented& a, const Eigen::VectorXd& y, const Eigen::VectorXd& previous)
{
    const VectorFunction f = [&a](const Eigen::VectorXd& v) { return a.residual(v); };
    const Eigen::VectorXd fy = f(y);
    // n x (n+1) Jacobian: the helper expects square maps, so pad a zero row.
    const VectorFunction padded = [&f](const Eigen::VectorXd& v) {
        Eigen::VectorXd r(v.size());
        r.head(v.size() - 1) = f(v);
        r(v.size() - 1) = 0.0;
        return r;
    };
    Eigen::VectorXd fp(y.size());
    fp.head(a.n) = fy;
    fp(a.n) = 0.0;
    Eigen::MatrixXd J = finite_difference_jacobian(padded, y, fp);
    J.row(a.n) = previous.transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(y.size());
    rhs(a.n) = 1.0;
    Eigen::VectorXd t = J.partialPivLu().solve(rhs);
    if (!t.allFinite() || t.norm() == 0.0)
        return previous;
    t.normalize();
    if (t.dot(previous) < 0.0)
        t = -t;
    return t;
}

BranchPoint make_point(const HbProblem& problem, const Eigen::VectorXd& y, double tangent_omega)
{
    const Eigen::Index n = y.size() - 1;
    BranchPoint p{y(n), y.head(n), tangent_omega, {}, "unknown"};
    const Eigen::MatrixXd sl = problem.slots(p.unknowns);
    for (int c = 0; c < problem.system().states(); ++c) {
        const auto m = harmonic_magnitudes(sl, c);
        p.magnitudes.insert(p.magnitudes.end(), m.begin(), m.end());
    }
    return p;
}

} // namespace

std::optional<std::pair<double, double>> Branch::multi_solution_band() const
{
    if (folds.size() < 2)
        return std::nullopt;
    double lo = folds.front().omega, hi = lo;
    for (const auto& f : folds) {
        lo = std::min(lo, f.omega);
        hi = std::max(hi, f.omega);
    }
    return std::make_pair(lo, hi);
}

Branch continuation_sweep(const HbProblem& problem, double omega_start, double omega_end,
                          const Eigen::VectorXd& guess, const ContinuationOptions& options)
{
    if (problem.self_excited())
        throw InvalidArgument("continuation_sweep: self-excited systems have no excitation frequency to sweep");
    if (!(omega_start > 0.0) || !(omega_end > 0.0) || omega_start == omega_end)
        throw InvalidArgument("continuation_sweep: need distinct positive start and end frequencies");
    if (!(options.min_step > 0.0) || !(options.initial_step >= options.min_step) ||
        !(options.max_step >= options.initial_step))
        throw InvalidArgument("continuation_sweep: require 0 < min_step <= initial_step <= max_step");

    const int n = problem.unknown_count();
    const Augmented aug{&problem, n};
    const double direction = omega_end > omega_start ? 1.0 : -1.0;
    const double lo = std::min(omega_start, omega_end), hi = std::max(omega_start, omega_end);

    Branch branch;
    branch.states = problem.system().states();
    branch.harmonics = problem.grid().harmonics();

    const NewtonResult first = newton_solve(
        [&](const Eigen::VectorXd& u) { return problem.residual_at_frequency(u, omega_start); }, guess,
        options.corrector);
    if (!first.converged()) {
        branch.truncated = true;
        branch.warning = "no converged start point at Omega = " + format_number(omega_start) + " (" +
                         to_string(first.status) + ")";
        return branch;
    }

    Eigen::VectorXd y(n + 1);
    y.head(n) = first.solution;
    y(n) = omega_start;
    Eigen::VectorXd seed = Eigen::VectorXd::Zero(n + 1);
    seed(n) = direction;
    Eigen::VectorXd t = tangent_at(aug, y, seed);
    branch.points.push_back(make_point(problem, y, t(n)));

    double step = options.initial_step;
    while (static_cast<int>(branch.points.size()) < options.max_points) {
        const Eigen::VectorXd predicted = y + step * t;
        const VectorFunction corrector = [&](const Eigen::VectorXd& v) {
            Eigen::VectorXd r(n + 1);
            r.head(n) = aug.residual(v);
            r(n) = t.dot(v - predicted);
            return r;
        };
        const NewtonResult res = newton_solve(corrector, predicted, options.corrector);
        if (!res.converged() || !(res.solution(n) > 0.0)) {
            step *= 0.5;
            if (step < options.min_step) {
                std::ostringstream os;
                os << "step below minimum " << options.min_step << " at Omega = " << format_number(y(n))
                   << "; branch truncated";
                branch.truncated = true;
                branch.warning = os.str();
                break;
            }
            continue;
        }

        const Eigen::VectorXd y_new = res.solution;
        const double w = y_new(n);
        if (w < lo || w > hi) {
            // Land exactly on the interval end the branch crossed.
            const double target = w < lo ? lo : hi;
            const double s = (target - y(n)) / (w - y(n));
            const Eigen::VectorXd start = y.head(n) + s * (y_new.head(n) - y.head(n));
            const NewtonResult endpoint = newton_solve(
                [&](const Eigen::VectorXd& u) { return problem.residual_at_frequency(u, target); }, start,
                options.corrector);
            if (endpoint.converged()) {
                Eigen::VectorXd ye(n + 1);
                ye.head(n) = endpoint.solution;
                ye(n) = target;
                branch.points.push_back(make_point(problem, ye, t(n)));
            }
            break;
        }

        const Eigen::VectorXd t_new = tangent_at(aug, y_new, t);
        if (t(n) * t_new(n) < 0.0) {
            // Linear interpolation of dOmega/ds locates the turning point.
            const double ds = (y_new - y).norm();
            const double frac = t(n) / (t(n) - t_new(n));
            branch.folds.push_back(Fold{branch.points.size() - 1, y(n) + 0.5 * t(n) * frac * ds});
        }
        branch.points.push_back(make_point(problem, y_new, t_new(n)));
        y = y_new;
        t = t_new;

        if (res.iterations <= options.fast_iterations)
            step = std::min(step * 1.5, options.max_step);
        else if (res.iterations >= options.slow_iterations)
            step = std::max(step * 0.7, options.min_step);
    }
    if (static_cast<int>(branch.points.size()) >= options.max_points && !branch.truncated) {
        branch.truncated = true;
        branch.warning = "maximum number of branch points reached";
    }

    // Labels only for single-state systems with both turning points bracketed.
    if (branch.states == 1 && branch.folds.size() == 2) {
        for (std::size_t i = 0; i < branch.points.size(); ++i) {
            const bool middle = i > branch.folds[0].after_point && i <= branch.folds[1].after_point;
            branch.points[i].stability = middle ? "unstable" : "stable";
        }
    }
    return branch;
}

Branch continuation_sweep(const HbProblem& problem, double omega_start, double omega_end,
                          const ContinuationOptions& options)
{
    const OdeSystem sys = problem.system().with_forcing_frequency(omega_start);
    const HbGuess g = time_integration_guess(sys, problem.grid(), problem.theta());
    const HbProblem start(sys, problem.grid(), problem.theta());
    return continuation_sweep(start, omega_start, omega_end, start.pack(g.slots, g.omega), options);
}

std::string branch_csv(const Branch& branch)
{
    std::vector<std::string> header{"Omega"};
    for (int c = 0; c < branch.states; ++c)
        for (int k = 0; k <= branch.harmonics; ++k)
            header.push_back("x" + std::to_string(c) + "_h" + std::to_string(k));
    header.push_back("stability");
    std::string out = csv_row(header);
    for (const auto& p : branch.points) {
        std::vector<std::string> row{format_number(p.omega)};
        for (double m : p.magnitudes)
            row.push_back(format_number(m));
        row.push_back(p.stability);
        out += csv_row(row);
    }
    return out;
}

} // namespace fgpc
