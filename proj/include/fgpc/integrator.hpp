#pragma once

#include "fgpc/dynamics.hpp"
#include "fgpc/fourier.hpp"

#include <Eigen/Dense>

#include <limits>
#include <span>
#include <vector>

namespace fgpc {

struct TimeSpan {
    double start;
    double end;
};

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    /// Continuous-extension segments are kept only for t >= dense_from.
    double dense_from = -std::numeric_limits<double>::infinity();
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 50'000'000;
};

/// Result of an adaptive integration: samples at the requested output
/// times plus a dense (4th-order continuous extension) representation of
/// the retained tail.
class Trajectory {
public:
    int dimension() const { return dimension_; }
    double start() const { return start_; }
    double end() const { return end_; }
    double dense_start() const { return segments_.empty() ? end_ : segments_.front().t0; }
    long steps() const { return steps_; }
    long rejected_steps() const { return rejected_; }

    const std::vector<double>& times() const { return times_; }
    /// times().size() x dimension().
    const Eigen::MatrixXd& states() const { return states_; }
    const Eigen::VectorXd& final_state() const { return final_; }

    /// Dense evaluation; t must lie in [dense_start(), end()].
    Eigen::VectorXd at(double t) const;
    double component_at(double t, int component) const;

private:
    friend Trajectory integrate(const OdeSystem&, std::span<const double>, double, TimeSpan,
                                const IntegratorOptions&, std::span<const double>);

    struct Segment {
        double t0;
        double h;
        Eigen::MatrixXd coeffs; // dimension x 5
    };

    std::size_t locate(double t) const;

    int dimension_ = 0;
    double start_ = 0.0;
    double end_ = 0.0;
    long steps_ = 0;
    long rejected_ = 0;
    std::vector<double> times_;
    Eigen::MatrixXd states_;
    Eigen::VectorXd final_;
    std::vector<Segment> segments_;
};

/// Adaptive explicit Runge-Kutta (Dormand-Prince 5(4)) integration of the
/// system's first-order form. x0 has phase_dimension() entries. Throws
/// StiffnessError when the step size underflows or max_steps is exceeded.
Trajectory integrate(const OdeSystem& system, std::span<const double> x0, double theta, TimeSpan span,
                     const IntegratorOptions& options, std::span<const double> output_times = {});

enum class PeriodMode {
    known,  ///< period_hint is the exact period (forced systems)
    detect, ///< estimate the period from the trajectory (self-excited systems)
};

struct SteadyState {
    HarmonicCoefficients coefficients;
    double omega;
    double period;
    double window_start;
};

/// Extracts Fourier coefficients of the last full period of quasi-stationary
/// motion. The first grid.states() trajectory components are transformed.
///
/// In known mode the window starts at an integer multiple of the period so
/// the phase matches the excitation. In detect mode the period is the median
/// of upward zero-crossing intervals of the reference state, refined by one
/// Newton step on the autocorrelation peak, and the window starts at a
/// maximum of the reference state. Throws PeriodicityError when the crossing
/// intervals scatter by more than 1% or fewer than three crossings exist.
SteadyState steady_state_fft(const Trajectory& trajectory, double period_hint, const FourierGrid& grid,
                             PeriodMode mode, int reference_state = 0);

/// Period of the reference state from zero crossings (detect mode above).
double detect_period(const Trajectory& trajectory, double period_hint, int reference_state = 0);

} // namespace fgpc
