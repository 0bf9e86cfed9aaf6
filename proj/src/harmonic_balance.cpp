#include "fgpc/harmonic_balance.hpp"

#include "fgpc/error.hpp"
#include "fgpc/integrator.hpp"

#include <cmath>
#include <sstream>

namespace fgpc {

AftEvaluator::AftEvaluator(const OdeSystem& system, const FourierGrid& grid) : system_(&system), grid_(&grid)
{
    if (grid.states() != system.states()) {
        std::ostringstream os;
        os << "AftEvaluator: grid has " << grid.states() << " states, system '" << system.name() << "' has "
           << system.states();
        throw DimensionError(os.str());
    }
}

Eigen::MatrixXd AftEvaluator::residual(const Eigen::MatrixXd& slots, double omega, double theta,
                                       double forcing_frequency) const
{
    const FourierGrid& g = *grid_;
    const int nd = g.states();
    const int Nt = g.samples();
    if (slots.rows() != nd || slots.cols() != g.real_slots()) {
        std::ostringstream os;
        os << "AftEvaluator: expected coefficient shape " << nd << " x " << g.real_slots() << ", got " << slots.rows()
           << " x " << slots.cols();
        throw DimensionError(os.str());
    }
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        std::ostringstream os;
        os << "AftEvaluator: base frequency must be positive and finite, got " << omega;
        throw NonFiniteError(os.str());
    }

    const Eigen::MatrixXd x = slots * g.synthesis();
    const Eigen::MatrixXd xd = omega * (slots * g.synthesis_rate());
    Eigen::MatrixXd xdd;
    if (system_->order() == 2)
        xdd = (omega * omega) * (slots * g.synthesis_curvature());
    else
        xdd = Eigen::MatrixXd::Zero(nd, Nt);

    Eigen::MatrixXd r(nd, Nt);
    const auto& phases = g.phases();
    for (int j = 0; j < Nt; ++j) {
        const double t = phases[j] / omega;
        const Kinematics k{std::span<const double>(x.col(j).data(), nd), std::span<const double>(xd.col(j).data(), nd),
                           std::span<const double>(xdd.col(j).data(), nd)};
        system_->residual(k, EvalPoint{t, theta, forcing_frequency}, std::span<double>(r.col(j).data(), nd));
        for (int c = 0; c < nd; ++c) {
            if (!std::isfinite(r(c, j))) {
                std::ostringstream os;
                os << "non-finite residual of state " << c << " at t_" << j << " = " << t << " (theta = " << theta
                   << ")";
                throw NonFiniteError(os.str());
            }
        }
    }
    return r * g.analysis();
}

HbProblem::HbProblem(OdeSystem system, FourierGrid grid, double theta, std::optional<Anchor> anchor)
    : system_(std::move(system)), grid_(std::move(grid)), theta_(theta), anchor_(anchor)
{
    if (grid_.states() != system_.states())
        throw DimensionError("HbProblem: grid and system state dimensions differ");
    if (system_.self_excited()) {
        if (!anchor_)
            throw InvalidArgument("HbProblem: self-excited system '" + system_.name() + "' requires a phase anchor");
        if (anchor_->state < 0 || anchor_->state >= system_.states())
            throw InvalidArgument("HbProblem: anchor state out of range");
        if (grid_.harmonics() < 1)
            throw InvalidArgument("HbProblem: self-excited systems need H >= 1");
    } else {
        anchor_.reset();
    }
}

int HbProblem::unknown_count() const { return system_.states() * grid_.real_slots(); }

Eigen::MatrixXd HbProblem::slots(const Eigen::VectorXd& u) const
{
    if (u.size() != unknown_count()) {
        std::ostringstream os;
        os << "HbProblem: expected " << unknown_count() << " unknowns, got " << u.size();
        throw DimensionError(os.str());
    }
    const int nd = system_.states();
    const int S = grid_.real_slots();
    Eigen::MatrixXd out(nd, S);
    Eigen::Index i = 0;
    for (int c = 0; c < nd; ++c) {
        for (int s = 0; s < S; ++s) {
            if (anchor_ && c == anchor_->state && s == sine_slot(1))
                out(c, s) = anchor_->value;
            else
                out(c, s) = u(i++);
        }
    }
    return out;
}

double HbProblem::omega(const Eigen::VectorXd& u) const
{
    return anchor_ ? u(u.size() - 1) : system_.forcing_frequency();
}

Eigen::VectorXd HbProblem::pack(const Eigen::MatrixXd& slots, double omega) const
{
    const int nd = system_.states();
    const int S = grid_.real_slots();
    if (slots.rows() != nd || slots.cols() != S)
        throw DimensionError("HbProblem::pack: slot matrix shape mismatch");
    Eigen::VectorXd u(unknown_count());
    Eigen::Index i = 0;
    for (int c = 0; c < nd; ++c)
        for (int s = 0; s < S; ++s)
            if (!(anchor_ && c == anchor_->state && s == sine_slot(1)))
                u(i++) = slots(c, s);
    if (anchor_)
        u(i++) = omega;
    return u;
}

Eigen::VectorXd HbProblem::residual_at_frequency(const Eigen::VectorXd& u, double forcing_frequency) const
{
    const Eigen::MatrixXd sl = slots(u);
    const double w = anchor_ ? u(u.size() - 1) : forcing_frequency;
    const Eigen::MatrixXd r = AftEvaluator(system_, grid_).residual(sl, w, theta_, forcing_frequency);
    Eigen::VectorXd out(unknown_count());
    const int S = grid_.real_slots();
    for (int c = 0; c < system_.states(); ++c)
        for (int s = 0; s < S; ++s)
            out(c * S + s) = r(c, s);
    return out;
}

Eigen::VectorXd HbProblem::residual(const Eigen::VectorXd& u) const
{
    return residual_at_frequency(u, system_.self_excited() ? 0.0 : system_.forcing_frequency());
}

VectorFunction HbProblem::residual_function() const
{
    return [p = *this](const Eigen::VectorXd& u) { return p.residual(u); };
}

HbProblem HbProblem::with_theta(double theta) const
{
    HbProblem copy = *this;
    copy.theta_ = theta;
    return copy;
}

HbProblem HbProblem::with_anchor(Anchor anchor) const { return HbProblem(system_, grid_, theta_, anchor); }

HbGuess time_integration_guess(const OdeSystem& system, const FourierGrid& grid, double theta,
                               const InitialGuessOptions& options)
{
    std::vector<double> x0 = options.initial_state;
    if (x0.empty())
        x0.assign(static_cast<std::size_t>(system.phase_dimension()), 0.1);
    if (!(options.periods >= 4.0))
        throw InvalidArgument("initial guess: integration horizon must cover at least 4 periods");

    const bool self = system.self_excited();
    const double period = self ? options.period_hint : 2.0 * std::numbers::pi / system.forcing_frequency();
    const double horizon = options.periods * period;
    IntegratorOptions io;
    io.rtol = options.rtol;
    io.atol = options.rtol * 1e-3;
    io.dense_from = horizon - (self ? std::min(40.0, options.periods / 2.0) : 2.0) * period;
    const Trajectory traj = integrate(system, x0, theta, TimeSpan{0.0, horizon}, io);
    const SteadyState ss =
        steady_state_fft(traj, period, grid, self ? PeriodMode::detect : PeriodMode::known, options.anchor_state);

    HbGuess guess{ss.coefficients.to_slots(), ss.omega, std::nullopt};
    if (self)
        guess.anchor = Anchor{options.anchor_state, guess.slots(options.anchor_state, sine_slot(1))};
    return guess;
}

HbSolveResult solve_hb(const OdeSystem& system, const FourierGrid& grid, double theta,
                       const InitialGuessOptions& guess_options, const NewtonOptions& options)
{
    const HbGuess guess = time_integration_guess(system, grid, theta, guess_options);
    HbProblem problem(system, grid, theta, guess.anchor);
    NewtonResult res = newton_solve(problem.residual_function(), problem.pack(guess.slots, guess.omega), options);
    return HbSolveResult{std::move(problem), std::move(res)};
}

SolutionSet deflated_solve(const HbProblem& problem, const std::vector<Eigen::VectorXd>& initials,
                           const DeflationConfig& deflation, std::size_t max_solutions, const NewtonOptions& options)
{
    for (const auto& g : initials)
        if (g.size() != problem.unknown_count())
            throw DimensionError("deflated_solve: initial guess length does not match the unknown layout");
    return deflated_solve(problem.residual_function(), initials, deflation, max_solutions, options);
}

std::vector<Eigen::MatrixXd> multistart_guesses(const Eigen::MatrixXd& slots, bool self_excited,
                                                const std::vector<double>& scales, const std::vector<double>& phases)
{
    const int H = static_cast<int>(slots.cols() - 1) / 2;
    std::vector<Eigen::MatrixXd> out{slots};
    const std::vector<double> shifts = self_excited ? std::vector<double>{0.0} : phases;
    for (double scale : scales)
        for (double phi : shifts) {
            if (scale == 1.0 && phi == 0.0)
                continue;
            Eigen::MatrixXd g = slots;
            for (int k = 1; k <= H; ++k) {
                const double c = std::cos(k * phi), s = std::sin(k * phi);
                for (Eigen::Index r = 0; r < slots.rows(); ++r) {
                    const double a = slots(r, cosine_slot(k)), b = slots(r, sine_slot(k));
                    g(r, cosine_slot(k)) = scale * (a * c + b * s);
                    g(r, sine_slot(k)) = scale * (b * c - a * s);
                }
            }
            g.col(0) *= scale;
            out.push_back(std::move(g));
        }
    return out;
}

std::vector<double> harmonic_magnitudes(const Eigen::MatrixXd& slots, int state)
{
    const int H = static_cast<int>(slots.cols() - 1) / 2;
    std::vector<double> out(static_cast<std::size_t>(H) + 1);
    out[0] = std::abs(slots(state, 0));
    for (int k = 1; k <= H; ++k)
        out[k] = std::hypot(slots(state, cosine_slot(k)), slots(state, sine_slot(k)));
    return out;
}

} // namespace fgpc
