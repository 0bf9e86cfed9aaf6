#include "fgpc/fgpc.hpp"

#include "fgpc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fgpc {

namespace {

bool is_anchor_entry(const std::optional<Anchor>& anchor, int c, int s)
{
    return anchor && c == anchor->state && s == sine_slot(1);
}

} // namespace

FgpcProblem::FgpcProblem(OdeSystem system, FourierGrid grid, StochasticBasis basis, QuadratureRule quadrature,
                         std::optional<Anchor> anchor)
    : system_(std::move(system)),
      grid_(std::move(grid)),
      basis_(std::move(basis)),
      quadrature_(std::move(quadrature)),
      anchor_(anchor)
{
    if (grid_.states() != system_.states())
        throw DimensionError("FgpcProblem: grid and system state dimensions differ");
    if (quadrature_.size() < basis_.size()) {
        std::ostringstream os;
        os << "FgpcProblem: " << quadrature_.size() << " quadrature nodes cannot resolve degree " << basis_.degree()
           << " (need at least N+1 = " << basis_.size() << ")";
        throw InvalidArgument(os.str());
    }
    if (system_.self_excited()) {
        if (grid_.harmonics() < 1)
            throw InvalidArgument("FgpcProblem: self-excited systems need H >= 1");
        if (anchor_ && (anchor_->state < 0 || anchor_->state >= system_.states()))
            throw InvalidArgument("FgpcProblem: anchor state out of range");
    } else {
        anchor_.reset();
    }
}

void FgpcProblem::require_anchor() const
{
    if (system_.self_excited() && !anchor_)
        throw InvalidArgument("FgpcProblem: self-excited system '" + system_.name() +
                              "' has no phase anchor yet; build one with initial_guess");
}

int FgpcProblem::unknown_count() const { return system_.states() * grid_.real_slots() * basis_.size(); }

double FgpcProblem::nominal_theta() const
{
    return quadrature_.integrate([](double t) { return t; });
}

std::vector<Eigen::MatrixXd> FgpcProblem::coefficient_slots(const Eigen::VectorXd& u) const
{
    if (u.size() != unknown_count()) {
        std::ostringstream os;
        os << "FgpcProblem: expected " << unknown_count() << " unknowns, got " << u.size();
        throw DimensionError(os.str());
    }
    require_anchor();
    const int nd = system_.states(), S = grid_.real_slots(), P = basis_.size();
    std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(P), Eigen::MatrixXd(nd, S));
    Eigen::Index i = 0;
    for (int c = 0; c < nd; ++c)
        for (int s = 0; s < S; ++s) {
            if (is_anchor_entry(anchor_, c, s)) {
                for (int m = 0; m < P; ++m)
                    out[m](c, s) = m == 0 ? anchor_->value : 0.0;
                continue;
            }
            for (int m = 0; m < P; ++m)
                out[m](c, s) = u(i++);
        }
    return out;
}

Eigen::VectorXd FgpcProblem::omega_coefficients(const Eigen::VectorXd& u) const
{
    if (!system_.self_excited())
        return {};
    return u.tail(basis_.size());
}

Eigen::VectorXd FgpcProblem::pack(const std::vector<Eigen::MatrixXd>& slots, const Eigen::VectorXd& omega) const
{
    require_anchor();
    const int nd = system_.states(), S = grid_.real_slots(), P = basis_.size();
    if (static_cast<int>(slots.size()) != P)
        throw DimensionError("FgpcProblem::pack: need one slot matrix per degree");
    if (system_.self_excited() && omega.size() != P)
        throw DimensionError("FgpcProblem::pack: need N+1 frequency coefficients");
    Eigen::VectorXd u(unknown_count());
    Eigen::Index i = 0;
    for (int c = 0; c < nd; ++c)
        for (int s = 0; s < S; ++s) {
            if (is_anchor_entry(anchor_, c, s))
                continue;
            for (int m = 0; m < P; ++m)
                u(i++) = slots[m](c, s);
        }
    if (system_.self_excited())
        u.tail(P) = omega;
    return u;
}

Eigen::MatrixXd FgpcProblem::slots_at(const Eigen::VectorXd& u, double theta) const
{
    const auto q = coefficient_slots(u);
    const Eigen::VectorXd phi = basis_.evaluate(theta);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(system_.states(), grid_.real_slots());
    for (int m = 0; m < basis_.size(); ++m)
        out += phi(m) * q[m];
    return out;
}

double FgpcProblem::omega_at(const Eigen::VectorXd& u, double theta) const
{
    if (!system_.self_excited())
        return system_.forcing_frequency();
    return basis_.evaluate(theta).dot(omega_coefficients(u));
}

Eigen::VectorXd FgpcProblem::residual(const Eigen::VectorXd& u) const
{
    const auto q = coefficient_slots(u);
    const Eigen::VectorXd qw = omega_coefficients(u);
    const int nd = system_.states(), S = grid_.real_slots(), P = basis_.size();
    const bool self = system_.self_excited();
    const double forcing = self ? 0.0 : system_.forcing_frequency();
    const AftEvaluator aft(system_, grid_);

    std::vector<Eigen::MatrixXd> projected(static_cast<std::size_t>(P), Eigen::MatrixXd::Zero(nd, S));
    for (int z = 0; z < quadrature_.size(); ++z) {
        const double theta = quadrature_.nodes[z];
        const Eigen::VectorXd phi = basis_.evaluate(theta);
        Eigen::MatrixXd slots = Eigen::MatrixXd::Zero(nd, S);
        for (int m = 0; m < P; ++m)
            slots += phi(m) * q[m];
        const double omega = self ? phi.dot(qw) : forcing;
        Eigen::MatrixXd r;
        try {
            r = aft.residual(slots, omega, theta, forcing);
        } catch (const NonFiniteError& e) {
            std::ostringstream os;
            os << "quadrature node z = " << z << " (theta = " << theta << "): " << e.what();
            throw NonFiniteError(os.str());
        }
        const double w = quadrature_.weights[z];
        for (int m = 0; m < P; ++m)
            projected[m] += (w * phi(m)) * r;
    }

    Eigen::VectorXd out(unknown_count());
    for (int c = 0; c < nd; ++c)
        for (int s = 0; s < S; ++s)
            for (int m = 0; m < P; ++m)
                out((c * S + s) * P + m) = projected[m](c, s);
    return out;
}

VectorFunction FgpcProblem::residual_function() const
{
    require_anchor();
    return [p = *this](const Eigen::VectorXd& u) { return p.residual(u); };
}

FgpcProblem FgpcProblem::with_anchor(Anchor anchor) const
{
    return FgpcProblem(system_, grid_, basis_, quadrature_, anchor);
}

FgpcProblem FgpcProblem::with_degree(int degree) const
{
    return FgpcProblem(system_, grid_, StochasticBasis(basis_.distribution(), degree), quadrature_, anchor_);
}

FgpcProblem make_fgpc_problem(const OdeSystem& system, int harmonics, int degree, const Distribution& dist,
                              std::optional<int> samples, std::optional<int> quadrature_nodes)
{
    const int d = system.nonlinearity_degree();
    FourierGrid grid(harmonics, samples.value_or(FourierGrid::default_samples(harmonics, d)), system.states());
    StochasticBasis basis(dist, degree);
    QuadratureRule quad = gauss_rule(basis, quadrature_nodes.value_or(default_quadrature_nodes(degree, d)));
    return FgpcProblem(system, std::move(grid), std::move(basis), std::move(quad));
}

Eigen::VectorXd lift_degree_zero(const FgpcProblem& problem, const Eigen::MatrixXd& slots, double omega)
{
    const int P = problem.basis().size();
    std::vector<Eigen::MatrixXd> q(static_cast<std::size_t>(P),
                                   Eigen::MatrixXd::Zero(slots.rows(), slots.cols()));
    q[0] = slots;
    Eigen::VectorXd w;
    if (problem.self_excited()) {
        w = Eigen::VectorXd::Zero(P);
        w(0) = omega;
    }
    return problem.pack(q, w);
}

FgpcGuess initial_guess(const FgpcProblem& problem, const InitialGuessOptions& options, bool zero)
{
    if (zero) {
        if (problem.self_excited())
            throw InvalidArgument("initial_guess: the zero guess is an equilibrium of self-excited systems");
        return FgpcGuess{Eigen::VectorXd::Zero(problem.unknown_count()), std::nullopt};
    }
    InitialGuessOptions opts = options;
    if (problem.anchor())
        opts.anchor_state = problem.anchor()->state;
    const HbGuess g = time_integration_guess(problem.system(), problem.grid(), problem.nominal_theta(), opts);
    const FgpcProblem anchored = g.anchor ? problem.with_anchor(*g.anchor) : problem;
    return FgpcGuess{lift_degree_zero(anchored, g.slots, g.omega), g.anchor};
}

HarmonicCoefficients FgpcSolution::complex_view(int m) const
{
    return HarmonicCoefficients::from_slots(coefficients.at(static_cast<std::size_t>(m)));
}

Eigen::MatrixXd FgpcSolution::slots_at(double theta) const
{
    const Eigen::VectorXd phi = basis.evaluate(theta);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(coefficients.front().rows(), coefficients.front().cols());
    for (std::size_t m = 0; m < coefficients.size(); ++m)
        out += phi(static_cast<Eigen::Index>(m)) * coefficients[m];
    return out;
}

double FgpcSolution::omega_at(double theta) const
{
    if (!self_excited())
        return forcing_frequency;
    return basis.evaluate(theta).dot(omega_coefficients);
}

double FgpcSolution::first_harmonic_magnitude() const
{
    if (harmonics() < 1)
        return std::abs(coefficients.front()(0, 0));
    return std::hypot(coefficients.front()(0, cosine_slot(1)), coefficients.front()(0, sine_slot(1)));
}

FgpcSolution make_solution(const FgpcProblem& problem, const NewtonResult& result)
{
    FgpcSolution s{problem.system().name(),
                   problem.basis(),
                   problem.grid().samples(),
                   problem.quadrature().size(),
                   problem.anchor(),
                   problem.self_excited() ? 0.0 : problem.system().forcing_frequency(),
                   problem.coefficient_slots(result.solution),
                   problem.omega_coefficients(result.solution),
                   result.residual_norm,
                   result.iterations};
    return s;
}

FgpcSolveResult solve_fgpc(const FgpcProblem& problem, const FgpcGuess& guess, const FgpcSolveOptions& options)
{
    const FgpcProblem p = guess.anchor ? problem.with_anchor(*guess.anchor) : problem;
    if (guess.unknowns.size() != p.unknown_count()) {
        std::ostringstream os;
        os << "solve_fgpc: guess has " << guess.unknowns.size() << " entries, layout needs " << p.unknown_count();
        throw DimensionError(os.str());
    }
    const VectorFunction f = p.residual_function();
    FgpcSolveResult out;

    if (!options.deflation) {
        const NewtonResult res = newton_solve(f, guess.unknowns, options.newton);
        if (res.converged())
            out.solutions.push_back(make_solution(p, res));
        else
            out.failures.push_back(FailedAttempt{0, res.status, "Newton " + to_string(res.status)});
        return out;
    }

    const DeflationConfig& cfg = *options.deflation;
    validate(cfg);

    // Branches on the degree-0 problem, one initial guess suffices there.
    const FgpcProblem p0 = p.with_degree(0);
    const auto q = p.coefficient_slots(guess.unknowns);
    const Eigen::VectorXd qw = p.omega_coefficients(guess.unknowns);
    std::vector<Eigen::VectorXd> starts;
    const std::vector<Eigen::MatrixXd> family =
        options.multistart ? multistart_guesses(q[0], p.self_excited()) : std::vector<Eigen::MatrixXd>{q[0]};
    for (const auto& g : family)
        starts.push_back(lift_degree_zero(p0, g, qw.size() ? qw(0) : 0.0));
    SolutionSet set0 = deflated_solve(p0.residual_function(), starts, cfg, options.max_solutions, options.newton);
    out.search_failures = set0.failures;

    std::vector<Eigen::VectorXd> found;
    auto distinct = [&](const Eigen::VectorXd& s) {
        for (const auto& r : found)
            if ((s - r).norm() <= cfg.distinct_radius * (1.0 + s.norm()))
                return false;
        return true;
    };

    for (std::size_t b = 0; b < set0.roots.size(); ++b) {
        const Eigen::VectorXd& r0 = set0.roots[b].solution;
        const auto q0 = p0.coefficient_slots(r0);
        const Eigen::VectorXd w0 = p0.omega_coefficients(r0);
        const Eigen::VectorXd lifted = lift_degree_zero(p, q0[0], w0.size() ? w0(0) : 0.0);

        NewtonResult res = newton_solve(f, lifted, options.newton);
        if (!res.converged() || !distinct(res.solution)) {
            // The lifted guess fell into a known basin; push it away.
            const NewtonResult deflated = newton_solve(deflate(f, found, cfg), lifted, options.newton);
            res = deflated.converged() ? newton_solve(f, deflated.solution, options.newton) : deflated;
        }
        if (!res.converged() || !distinct(res.solution)) {
            out.failures.push_back(FailedAttempt{
                b, res.status, res.converged() ? "lifted branch duplicates an earlier one" : "lift of degree-0 branch failed"});
            continue;
        }
        found.push_back(res.solution);
        out.solutions.push_back(make_solution(p, res));
    }

    std::stable_sort(out.solutions.begin(), out.solutions.end(), [](const FgpcSolution& a, const FgpcSolution& b) {
        return a.first_harmonic_magnitude() > b.first_harmonic_magnitude();
    });
    return out;
}

Eigen::MatrixXd evaluate_at_phases(const FgpcSolution& solution, double theta, std::span<const double> phases)
{
    const Eigen::MatrixXd sl = solution.slots_at(theta);
    const int H = solution.harmonics();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(phases.size()), sl.rows());
    for (std::size_t j = 0; j < phases.size(); ++j) {
        for (Eigen::Index c = 0; c < sl.rows(); ++c) {
            double v = sl(c, 0);
            for (int k = 1; k <= H; ++k)
                v += sl(c, cosine_slot(k)) * std::cos(k * phases[j]) + sl(c, sine_slot(k)) * std::sin(k * phases[j]);
            out(static_cast<Eigen::Index>(j), c) = v;
        }
    }
    return out;
}

Eigen::MatrixXd evaluate_surrogate(const FgpcSolution& solution, double theta, std::span<const double> times)
{
    const double omega = solution.omega_at(theta);
    std::vector<double> phases(times.size());
    for (std::size_t j = 0; j < times.size(); ++j)
        phases[j] = omega * times[j];
    return evaluate_at_phases(solution, theta, phases);
}

} // namespace fgpc
