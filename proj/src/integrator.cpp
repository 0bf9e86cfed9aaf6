#include "fgpc/integrator.hpp"

#include "fgpc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fgpc {

namespace {

// Dormand-Prince 5(4) tableau with Shampine's continuous extension.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double eval_segment(const Eigen::MatrixXd& r, double s, int i)
{
    const double s1 = 1.0 - s;
    return r(i, 0) + s * (r(i, 1) + s1 * (r(i, 2) + s * (r(i, 3) + s1 * r(i, 4))));
}

} // namespace

std::size_t Trajectory::locate(double t) const
{
    if (segments_.empty() || t < segments_.front().t0 - 1e-12 * (1.0 + std::abs(t)) || t > end_ + 1e-12 * (1.0 + std::abs(t))) {
        std::ostringstream os;
        os << "Trajectory: time " << t << " outside dense range [" << dense_start() << ", " << end_ << "]";
        throw InvalidArgument(os.str());
    }
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const Segment& s) { return v < s.t0; });
    if (it == segments_.begin())
        return 0;
    return static_cast<std::size_t>(std::distance(segments_.begin(), it) - 1);
}

Eigen::VectorXd Trajectory::at(double t) const
{
    const Segment& seg = segments_[locate(t)];
    const double s = (t - seg.t0) / seg.h;
    Eigen::VectorXd out(dimension_);
    for (int i = 0; i < dimension_; ++i)
        out(i) = eval_segment(seg.coeffs, s, i);
    return out;
}

double Trajectory::component_at(double t, int component) const
{
    const Segment& seg = segments_[locate(t)];
    return eval_segment(seg.coeffs, (t - seg.t0) / seg.h, component);
}

Trajectory integrate(const OdeSystem& system, std::span<const double> x0, double theta, TimeSpan span,
                     const IntegratorOptions& options, std::span<const double> output_times)
{
    const int n = system.phase_dimension();
    if (static_cast<int>(x0.size()) != n) {
        std::ostringstream os;
        os << "integrate: initial state has " << x0.size() << " entries, system '" << system.name() << "' needs "
           << n;
        throw DimensionError(os.str());
    }
    if (!(options.rtol > 0.0) || !(options.atol >= 0.0))
        throw InvalidArgument("integrate: tolerances must be positive");
    if (!(span.end > span.start))
        throw InvalidArgument("integrate: time span must have end > start");
    if (!std::is_sorted(output_times.begin(), output_times.end()))
        throw InvalidArgument("integrate: output times must be sorted");

    const double forcing = system.self_excited() ? 0.0 : system.forcing_frequency();
    auto f = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        system.rhs(std::span<const double>(y.data(), n), EvalPoint{t, theta, forcing},
                   std::span<double>(dy.data(), n));
    };

    Trajectory traj;
    traj.dimension_ = n;
    traj.start_ = span.start;
    traj.end_ = span.end;

    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    double t = span.start;
    f(t, y, k1);

    auto scale = [&](double a, double b) { return options.atol + options.rtol * std::max(std::abs(a), std::abs(b)); };

    // Initial step size (Hairer, Norsett & Wanner, II.4).
    double h;
    {
        double dnf = 0.0, dny = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sk = scale(y(i), y(i));
            dnf += (k1(i) / sk) * (k1(i) / sk);
            dny += (y(i) / sk) * (y(i) / sk);
        }
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
        h = std::min(h, span.end - span.start);
        ytmp = y + h * k1;
        f(t + h, ytmp, k2);
        double der2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sk = scale(y(i), y(i));
            der2 += ((k2(i) - k1(i)) / sk) * ((k2(i) - k1(i)) / sk);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
        h = std::min({100.0 * h, h1, options.max_step, span.end - span.start});
    }

    std::vector<double> out_t;
    std::vector<Eigen::VectorXd> out_y;
    std::size_t next_out = 0;
    while (next_out < output_times.size() && output_times[next_out] < span.start)
        ++next_out;
    if (next_out < output_times.size() && output_times[next_out] == span.start) {
        out_t.push_back(span.start);
        out_y.push_back(y);
        ++next_out;
    }

    Eigen::MatrixXd rc(n, 5);
    bool last_rejected = false;
    while (t < span.end) {
        if (traj.steps_ + traj.rejected_ >= options.max_steps) {
            std::ostringstream os;
            os << "integrate: exceeded " << options.max_steps << " steps at t = " << t
               << "; the system may be stiff, review the tolerance or the system definition";
            throw StiffnessError(os.str());
        }
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            std::ostringstream os;
            os << "integrate: step size underflow (h = " << h << ") at t = " << t
               << "; the system may be stiff, review the tolerance or the system definition";
            throw StiffnessError(os.str());
        }
        if (t + 1.01 * h >= span.end)
            h = span.end - t;

        ytmp = y + h * a21 * k1;
        f(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, ytmp, k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        f(t + h, ynew, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double e = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = err(i) / scale(y(i), ynew(i));
            e += r * r;
        }
        e = std::sqrt(e / n);
        if (!std::isfinite(e)) {
            ++traj.rejected_;
            h *= 0.25;
            last_rejected = true;
            continue;
        }

        if (e <= 1.0) {
            const double tnew = t + h;
            const bool keep = tnew >= options.dense_from;
            const bool need_output = next_out < output_times.size() && output_times[next_out] <= tnew;
            if (keep || need_output) {
                rc.col(0) = y;
                rc.col(1) = ynew - y;
                rc.col(2) = h * k1 - rc.col(1);
                rc.col(3) = rc.col(1) - h * k7 - rc.col(2);
                rc.col(4) = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            }
            while (next_out < output_times.size() && output_times[next_out] <= tnew) {
                const double s = (output_times[next_out] - t) / h;
                Eigen::VectorXd v(n);
                for (int i = 0; i < n; ++i)
                    v(i) = eval_segment(rc, s, i);
                out_t.push_back(output_times[next_out]);
                out_y.push_back(std::move(v));
                ++next_out;
            }
            if (keep)
                traj.segments_.push_back({t, h, rc});
            ++traj.steps_;
            t = tnew;
            y = ynew;
            k1 = k7;
            double fac = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
            if (last_rejected)
                fac = std::min(fac, 1.0);
            h = std::min(h * fac, options.max_step);
            last_rejected = false;
        } else {
            ++traj.rejected_;
            h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
            last_rejected = true;
        }
    }

    traj.final_ = y;
    traj.times_ = std::move(out_t);
    traj.states_.resize(static_cast<Eigen::Index>(out_y.size()), n);
    for (std::size_t i = 0; i < out_y.size(); ++i)
        traj.states_.row(static_cast<Eigen::Index>(i)) = out_y[i].transpose();
    return traj;
}

namespace {

// Zero of g on [a, b] with g(a) < 0 <= g(b) by bisection.
double bisect(const auto& g, double a, double b)
{
    double ga = g(a);
    for (int it = 0; it < 200 && b - a > 4e-16 * std::max(1.0, std::abs(b)); ++it) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if ((gm < 0.0) == (ga < 0.0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// Time of the maximum of g on [a, b]: dense scan then golden-section refinement.
double argmax(const auto& g, double a, double b, int scan)
{
    double best = a;
    double gbest = g(a);
    const double dt = (b - a) / scan;
    for (int i = 1; i <= scan; ++i) {
        const double t = a + dt * i;
        const double v = g(t);
        if (v > gbest) {
            gbest = v;
            best = t;
        }
    }
    double lo = std::max(a, best - dt);
    double hi = std::min(b, best + dt);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = g(x1);
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

double detect_period(const Trajectory& trajectory, double period_hint, int reference_state)
{
    if (!(period_hint > 0.0))
        throw InvalidArgument("detect_period: period hint must be > 0");
    if (reference_state < 0 || reference_state >= trajectory.dimension())
        throw DimensionError("detect_period: reference state out of range");

    const double w1 = trajectory.end();
    const double w0 = std::max(trajectory.dense_start(), w1 - 40.0 * period_hint);
    const int count = std::max(64, static_cast<int>(std::ceil((w1 - w0) / (period_hint / 64.0))));
    const double dt = (w1 - w0) / count;
    auto x = [&](double t) { return trajectory.component_at(t, reference_state); };

    double mean = 0.0;
    std::vector<double> samples(static_cast<std::size_t>(count) + 1);
    for (int i = 0; i <= count; ++i) {
        samples[i] = x(w0 + dt * i);
        mean += samples[i];
    }
    mean /= (count + 1);
    auto y = [&](double t) { return x(t) - mean; };

    std::vector<double> crossings;
    for (int i = 0; i < count; ++i)
        if (samples[i] - mean < 0.0 && samples[i + 1] - mean >= 0.0)
            crossings.push_back(bisect(y, w0 + dt * i, w0 + dt * (i + 1)));
    if (crossings.size() < 3) {
        std::ostringstream os;
        os << "detect_period: found " << crossings.size() << " upward zero crossings in [" << w0 << ", " << w1
           << "]; no periodic motion detected";
        throw PeriodicityError(os.str());
    }

    std::vector<double> intervals;
    for (std::size_t i = 1; i < crossings.size(); ++i)
        intervals.push_back(crossings[i] - crossings[i - 1]);
    std::vector<double> sorted = intervals;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    double var = 0.0;
    for (double v : intervals)
        var += (v - median) * (v - median);
    const double spread = std::sqrt(var / intervals.size()) / median;
    if (spread > 1e-2) {
        std::ostringstream os;
        os << "detect_period: zero-crossing intervals scatter by " << spread * 100.0
           << "% (threshold 1%); motion is not periodic";
        throw PeriodicityError(os.str());
    }

    // One Newton step on the autocorrelation peak A(T) over an integer number
    // of periods; A is even about the true period.
    double period = median;
    const int periods = static_cast<int>(std::floor((w1 - w0) / median)) - 1;
    if (periods >= 2) {
        const double length = (periods - 1) * median;
        const double start = w0;
        const int pts = 128 * (periods - 1);
        auto autocorr = [&](double lag) {
            const double step = length / pts;
            double s = 0.0;
            for (int i = 0; i < pts; ++i) {
                const double t = start + step * i;
                s += y(t) * y(t + lag);
            }
            return s / pts;
        };
        const double h = 1e-3 * median;
        const double am = autocorr(median - h);
        const double a0 = autocorr(median);
        const double ap = autocorr(median + h);
        const double d1v = (ap - am) / (2.0 * h);
        const double d2v = (ap - 2.0 * a0 + am) / (h * h);
        if (d2v < 0.0) {
            const double refined = median - d1v / d2v;
            if (std::abs(refined - median) < 0.05 * median)
                period = refined;
        }
    }
    return period;
}

SteadyState steady_state_fft(const Trajectory& trajectory, double period_hint, const FourierGrid& grid,
                             PeriodMode mode, int reference_state)
{
    if (grid.states() > trajectory.dimension())
        throw DimensionError("steady_state_fft: grid has more states than the trajectory");
    if (!(period_hint > 0.0))
        throw InvalidArgument("steady_state_fft: period hint must be > 0");

    double period = period_hint;
    double window = 0.0;
    if (mode == PeriodMode::known) {
        const double cycles = std::floor(trajectory.end() / period * (1.0 + 1e-12));
        window = (cycles - 1.0) * period;
        if (window < trajectory.dense_start() - 1e-9 * period) {
            throw PeriodicityError("steady_state_fft: trajectory does not retain a full forcing period aligned to the "
                                   "excitation phase");
        }
        window = std::max(window, trajectory.dense_start());
    } else {
        period = detect_period(trajectory, period_hint, reference_state);
        const double hi = trajectory.end() - period;
        const double lo = std::max(trajectory.dense_start(), hi - period);
        if (!(hi > lo))
            throw PeriodicityError("steady_state_fft: trajectory shorter than two detected periods");
        window = argmax([&](double t) { return trajectory.component_at(t, reference_state); }, lo, hi, 256);
    }

    const int Nt = grid.samples();
    Eigen::MatrixXd samples(Nt, grid.states());
    for (int j = 0; j < Nt; ++j) {
        const double t = window + period * static_cast<double>(j) / Nt;
        for (int c = 0; c < grid.states(); ++c)
            samples(j, c) = trajectory.component_at(t, c);
    }
    return SteadyState{forward_transform(samples, grid), 2.0 * std::numbers::pi / period, period, window};
}

} // namespace fgpc
