#include "fgpc/analysis.hpp"

#include "fgpc/error.hpp"
#include "fgpc/io.hpp"
#include "fgpc/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fgpc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Slot basis functions (1, cos p, sin p, ..., cos Hp, sin Hp) at each phase,
// or their phase derivatives.
Eigen::MatrixXd trig_table(int H, std::span<const double> phases, bool derivative = false)
{
    Eigen::MatrixXd T(2 * H + 1, static_cast<Eigen::Index>(phases.size()));
    for (std::size_t j = 0; j < phases.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        T(0, jj) = derivative ? 0.0 : 1.0;
        for (int k = 1; k <= H; ++k) {
            const double c = std::cos(k * phases[j]), s = std::sin(k * phases[j]);
            T(cosine_slot(k), jj) = derivative ? -k * s : c;
            T(sine_slot(k), jj) = derivative ? k * c : s;
        }
    }
    return T;
}

// Per-degree series of one state, (N+1) x phases.
Eigen::MatrixXd degree_series(const FgpcSolution& sol, int state, const Eigen::MatrixXd& table)
{
    Eigen::MatrixXd Q(sol.basis.size(), table.rows());
    for (int m = 0; m < sol.basis.size(); ++m)
        Q.row(m) = sol.coefficients[m].row(state);
    return Q * table;
}

Eigen::MatrixXd basis_matrix(const StochasticBasis& basis, std::span<const double> thetas)
{
    Eigen::MatrixXd B(static_cast<Eigen::Index>(thetas.size()), basis.size());
    for (std::size_t i = 0; i < thetas.size(); ++i)
        B.row(static_cast<Eigen::Index>(i)) = basis.evaluate(thetas[i]).transpose();
    return B;
}

std::vector<double> phases_for(const FgpcSolution& sol, std::span<const double> times)
{
    std::vector<double> p(times.begin(), times.end());
    if (!sol.self_excited())
        for (double& v : p)
            v *= sol.forcing_frequency;
    return p;
}

std::size_t lower_index(std::size_t n) { return static_cast<std::size_t>(std::lround(0.025 * (n - 1))); }
std::size_t upper_index(std::size_t n) { return static_cast<std::size_t>(std::lround(0.975 * (n - 1))); }

void column_statistics(Eigen::VectorXd values, double& mean, double& variance, double& lo, double& hi)
{
    const auto n = static_cast<std::size_t>(values.size());
    mean = values.mean();
    variance = (values.array() - mean).square().sum() / static_cast<double>(n);
    double* d = values.data();
    const std::size_t il = lower_index(n), iu = upper_index(n);
    std::nth_element(d, d + il, d + n);
    lo = d[il];
    std::nth_element(d, d + iu, d + n);
    hi = d[iu];
}

std::vector<double> sorted_samples(const Distribution& dist, std::size_t n, std::uint64_t seed)
{
    std::vector<double> s = sample(dist, static_cast<int>(n), seed);
    std::sort(s.begin(), s.end());
    return s;
}

} // namespace

Moments moments_from_coefficients(const FgpcSolution& solution, std::span<const double> times)
{
    if (solution.self_excited())
        throw InvalidArgument("moments_from_coefficients: closed-form moments need a deterministic base frequency; "
                              "use sample_summary for self-excited solutions");
    const auto phases = phases_for(solution, times);
    const Eigen::MatrixXd T = trig_table(solution.harmonics(), phases);
    const int nd = solution.states();
    const auto nt = static_cast<Eigen::Index>(times.size());
    Moments out{std::vector<double>(times.begin(), times.end()), Eigen::MatrixXd(nt, nd), Eigen::MatrixXd(nt, nd)};
    for (int c = 0; c < nd; ++c) {
        const Eigen::MatrixXd G = degree_series(solution, c, T);
        out.mean.col(c) = G.row(0).transpose();
        out.variance.col(c) = G.bottomRows(G.rows() - 1).colwise().squaredNorm().transpose();
    }
    return out;
}

std::vector<double> period_grid(const FgpcSolution& solution, std::size_t n_time)
{
    if (n_time < 2)
        throw InvalidArgument("period grid needs at least 2 points");
    const double span = solution.self_excited() ? two_pi : two_pi / solution.forcing_frequency;
    std::vector<double> t(n_time);
    for (std::size_t j = 0; j < n_time; ++j)
        t[j] = span * static_cast<double>(j) / static_cast<double>(n_time - 1);
    return t;
}

StochasticSummary sample_summary(const FgpcSolution& solution, const Distribution& dist, std::size_t n_samples,
                                 std::uint64_t seed, std::size_t n_time)
{
    if (n_samples < 1)
        throw InvalidArgument("sample_summary: need at least one sample");
    const std::vector<double> thetas = sorted_samples(dist, n_samples, seed);
    const std::vector<double> times = period_grid(solution, n_time);
    const Eigen::MatrixXd T = trig_table(solution.harmonics(), phases_for(solution, times));
    const Eigen::MatrixXd B = basis_matrix(solution.basis, thetas);
    const int nd = solution.states();
    const auto nt = static_cast<Eigen::Index>(n_time);

    StochasticSummary s;
    s.normalized_time = solution.self_excited();
    s.times = times;
    s.sample_count = n_samples;
    s.mean.resize(nt, nd);
    s.variance.resize(nt, nd);
    s.lower.resize(nt, nd);
    s.upper.resize(nt, nd);
    s.lower_path.resize(nt, nd);
    s.upper_path.resize(nt, nd);
    const std::size_t il = lower_index(n_samples), iu = upper_index(n_samples);
    s.lower_theta = thetas[il];
    s.upper_theta = thetas[iu];

    for (int c = 0; c < nd; ++c) {
        const Eigen::MatrixXd G = degree_series(solution, c, T);
        for (Eigen::Index j = 0; j < nt; ++j) {
            const Eigen::VectorXd values = B * G.col(j);
            column_statistics(values, s.mean(j, c), s.variance(j, c), s.lower(j, c), s.upper(j, c));
            s.lower_path(j, c) = values(static_cast<Eigen::Index>(il));
            s.upper_path(j, c) = values(static_cast<Eigen::Index>(iu));
        }
    }
    return s;
}

std::vector<double> surrogate_values(const FgpcSolution& solution, std::span<const double> thetas, double time,
                                     int state)
{
    const double t[] = {time};
    const Eigen::MatrixXd T = trig_table(solution.harmonics(), phases_for(solution, t));
    const Eigen::VectorXd g = degree_series(solution, state, T).col(0);
    const Eigen::VectorXd v = basis_matrix(solution.basis, thetas) * g;
    return {v.data(), v.data() + v.size()};
}

Eigen::MatrixXd surrogate_paths(const FgpcSolution& solution, std::span<const double> thetas,
                                std::span<const double> times, int state)
{
    const Eigen::MatrixXd T = trig_table(solution.harmonics(), phases_for(solution, times));
    return basis_matrix(solution.basis, thetas) * degree_series(solution, state, T);
}

Histogram make_histogram(std::span<const double> values, std::optional<int> bins)
{
    if (values.empty())
        throw InvalidArgument("histogram of an empty sample");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double lo = v.front(), hi = v.back();
    const auto n = v.size();
    int count = 1;
    if (bins) {
        if (*bins < 1)
            throw InvalidArgument("histogram bin count must be positive");
        count = *bins;
    } else if (hi > lo) {
        const double iqr = v[static_cast<std::size_t>(0.75 * (n - 1))] - v[static_cast<std::size_t>(0.25 * (n - 1))];
        const double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
        count = width > 0.0 ? static_cast<int>(std::ceil((hi - lo) / width)) : 1;
        count = std::clamp(count, 1, 10000);
    }
    Histogram h;
    const double a = hi > lo ? lo : lo - 0.5, b = hi > lo ? hi : hi + 0.5;
    const double width = (b - a) / count;
    for (int i = 0; i <= count; ++i)
        h.edges.push_back(a + width * i);
    std::vector<std::size_t> counts(static_cast<std::size_t>(count), 0);
    for (double x : v) {
        auto i = static_cast<int>((x - a) / width);
        counts[static_cast<std::size_t>(std::clamp(i, 0, count - 1))]++;
    }
    for (auto c : counts)
        h.density.push_back(static_cast<double>(c) / (static_cast<double>(n) * width));
    return h;
}

Marginal marginal_from_values(std::vector<double> values, double time, int state, std::optional<int> bins)
{
    if (values.empty())
        throw InvalidArgument("marginal of an empty sample");
    std::sort(values.begin(), values.end());
    Marginal m;
    m.time = time;
    m.state = state;
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values)
        sum += v;
    m.mean = sum / n;
    double m2 = 0.0, m3 = 0.0;
    for (double v : values) {
        const double d = v - m.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m.std = std::sqrt(m2);
    m.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    m.lower = values[lower_index(values.size())];
    m.upper = values[upper_index(values.size())];
    m.histogram = make_histogram(values, bins);
    m.values = std::move(values);
    return m;
}

Marginal marginal_at(const FgpcSolution& solution, const Distribution& dist, std::size_t n_samples,
                     std::uint64_t seed, double time, int state, std::optional<int> bins)
{
    const std::vector<double> thetas = sorted_samples(dist, n_samples, seed);
    return marginal_from_values(surrogate_values(solution, thetas, time, state), time, state, bins);
}

double ks_distance(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw InvalidArgument("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

CoefficientGrid coefficient_grid(const FgpcSolution& solution)
{
    const int H = solution.harmonics(), P = solution.basis.size();
    CoefficientGrid g;
    for (int c = 0; c < solution.states(); ++c) {
        Eigen::MatrixXd mag(H + 1, P);
        for (int m = 0; m < P; ++m) {
            const Eigen::MatrixXd& q = solution.coefficients[m];
            mag(0, m) = std::abs(q(c, 0));
            for (int k = 1; k <= H; ++k)
                mag(k, m) = std::hypot(q(c, cosine_slot(k)), q(c, sine_slot(k)));
        }
        g.magnitudes.push_back(mag);
    }
    g.omega = solution.omega_coefficients.cwiseAbs();
    return g;
}

double period_mean_abs(const FgpcSolution& solution, double theta, int state, int points)
{
    std::vector<double> phases(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j)
        phases[j] = two_pi * j / points;
    const Eigen::VectorXd x = evaluate_at_phases(solution, theta, phases).col(state);
    return x.cwiseAbs().mean();
}

double rms_period_error(const FgpcSolution& a, const FgpcSolution& b, std::span<const double> thetas)
{
    if (a.states() != b.states())
        throw DimensionError("rms_period_error: solutions have different state counts");
    constexpr int points = 1024;
    std::vector<double> phases(points);
    for (int j = 0; j < points; ++j)
        phases[j] = two_pi * j / points;
    const Eigen::MatrixXd Ba = basis_matrix(a.basis, thetas), Bb = basis_matrix(b.basis, thetas);
    const Eigen::MatrixXd Ta = trig_table(a.harmonics(), phases), Tb = trig_table(b.harmonics(), phases);
    double total = 0.0;
    for (int c = 0; c < a.states(); ++c) {
        const Eigen::MatrixXd Xa = Ba * degree_series(a, c, Ta), Xb = Bb * degree_series(b, c, Tb);
        const Eigen::VectorXd ma = Xa.cwiseAbs().rowwise().mean(), mb = Xb.cwiseAbs().rowwise().mean();
        total += std::sqrt((ma - mb).squaredNorm() / static_cast<double>(thetas.size()));
    }
    return total;
}

std::optional<double> ErrorMap::at(int H, int N) const
{
    for (std::size_t h = 0; h < harmonics.size(); ++h)
        for (std::size_t n = 0; n < degrees.size(); ++n)
            if (harmonics[h] == H && degrees[n] == N)
                return error[h][n];
    return std::nullopt;
}

Eigen::VectorXd truncated_guess(const FgpcProblem& problem, const FgpcSolution& solution)
{
    const int H = problem.grid().harmonics(), P = problem.basis().size();
    const int Hs = solution.harmonics(), Ps = solution.basis.size();
    const int nd = problem.system().states();
    std::vector<Eigen::MatrixXd> q(static_cast<std::size_t>(P), Eigen::MatrixXd::Zero(nd, 2 * H + 1));
    for (int m = 0; m < std::min(P, Ps); ++m)
        q[m].leftCols(2 * std::min(H, Hs) + 1) = solution.coefficients[m].leftCols(2 * std::min(H, Hs) + 1);
    Eigen::VectorXd w;
    if (problem.self_excited()) {
        w = Eigen::VectorXd::Zero(P);
        const int common = std::min(P, Ps);
        w.head(common) = solution.omega_coefficients.head(common);
    }
    return problem.pack(q, w);
}

ErrorMap convergence_map(const OdeSystem& system, const Distribution& dist, const std::vector<int>& harmonics,
                         const std::vector<int>& degrees, int reference_harmonics, int reference_degree,
                         std::size_t n_samples, std::uint64_t seed, const ConvergenceOptions& options)
{
    if (harmonics.empty() || degrees.empty())
        throw InvalidArgument("convergence_map: empty harmonic or degree list");
    if (n_samples < 1)
        throw InvalidArgument("convergence_map: need at least one sample");

    ErrorMap map;
    map.harmonics = harmonics;
    map.degrees = degrees;
    map.reference_harmonics = reference_harmonics;
    map.reference_degree = reference_degree;
    map.sample_count = n_samples;
    map.error.assign(harmonics.size(), std::vector<std::optional<double>>(degrees.size()));

    FgpcSolution reference = [&] {
        if (options.reference) {
            if (options.reference->harmonics() != reference_harmonics ||
                options.reference->degree() != reference_degree)
                throw InvalidArgument("convergence_map: supplied reference does not have the reference size");
            return *options.reference;
        }
        const FgpcProblem p = make_fgpc_problem(system, reference_harmonics, reference_degree, dist);
        const FgpcGuess g = initial_guess(p, options.guess);
        FgpcSolveOptions so;
        so.newton = options.newton;
        FgpcSolveResult r = solve_fgpc(p, g, so);
        if (r.solutions.empty())
            throw Error("convergence_map: the reference solve failed (" + r.failures.front().reason + ")");
        return r.solutions.front();
    }();

    const std::vector<double> thetas = sample(dist, static_cast<int>(n_samples), seed);
    const std::size_t cells = harmonics.size() * degrees.size();
    std::vector<std::string> notes(cells);

    parallel_for(cells, [&](std::size_t idx) {
        const std::size_t h = idx / degrees.size(), n = idx % degrees.size();
        const int H = harmonics[h], N = degrees[n];
        try {
            if (H == reference_harmonics && N == reference_degree) {
                map.error[h][n] = 0.0;
                return;
            }
            FgpcProblem p = make_fgpc_problem(system, H, N, dist);
            if (reference.anchor)
                p = p.with_anchor(*reference.anchor);
            const NewtonResult res = newton_solve(p.residual_function(), truncated_guess(p, reference), options.newton);
            if (!res.converged()) {
                notes[idx] = "H=" + std::to_string(H) + " N=" + std::to_string(N) + ": " + to_string(res.status);
                return;
            }
            map.error[h][n] = rms_period_error(make_solution(p, res), reference, thetas);
        } catch (const Error& e) {
            notes[idx] = "H=" + std::to_string(H) + " N=" + std::to_string(N) + ": " + e.what();
        }
    });
    for (auto& s : notes)
        if (!s.empty())
            map.notes.push_back(std::move(s));
    return map;
}

std::size_t McResult::failure_count() const
{
    return static_cast<std::size_t>(std::count(converged.begin(), converged.end(), false));
}

McResult mc_oracle(const OdeSystem& system, std::span<const double> sorted_thetas, int harmonics,
                   std::optional<int> samples, const McOptions& options)
{
    if (sorted_thetas.empty())
        throw InvalidArgument("mc_oracle: no samples");
    if (!std::is_sorted(sorted_thetas.begin(), sorted_thetas.end()))
        throw InvalidArgument("mc_oracle: samples must be sorted ascending");
    const auto start = std::chrono::steady_clock::now();

    const FourierGrid grid(harmonics, samples.value_or(FourierGrid::default_samples(harmonics, system.nonlinearity_degree())),
                           system.states());
    McResult out;
    out.samples = grid.samples();

    // Starting root at the first sample.
    std::optional<Anchor> anchor;
    Eigen::VectorXd warm;
    const double first = sorted_thetas.front();
    if (options.seed) {
        anchor = options.seed->anchor;
        const HbProblem p0(system, grid, options.seed->theta, anchor);
        warm = p0.pack(options.seed->slots, options.seed->omega);
        for (int s = 1; s <= options.seed_substeps; ++s) {
            const double th = options.seed->theta + (first - options.seed->theta) * s / options.seed_substeps;
            const NewtonResult r = newton_solve(p0.with_theta(th).residual_function(), warm, options.newton);
            if (r.converged())
                warm = r.solution;
        }
    } else {
        const HbGuess g = time_integration_guess(system, grid, first, options.guess);
        anchor = g.anchor;
        warm = HbProblem(system, grid, first, anchor).pack(g.slots, g.omega);
    }
    const HbProblem base(system, grid, first, anchor);

    for (double theta : sorted_thetas) {
        const HbProblem p = base.with_theta(theta);
        const NewtonResult r = newton_solve(p.residual_function(), warm, options.newton);
        out.thetas.push_back(theta);
        out.slots.push_back(p.slots(r.solution));
        out.omegas.push_back(p.omega(r.solution));
        out.converged.push_back(r.converged());
        out.iterations.push_back(r.iterations);
        if (r.converged()) {
            warm = r.solution;
        } else {
            std::ostringstream os;
            os << "theta = " << format_number(theta) << ": " << to_string(r.status);
            out.failures.push_back(os.str());
        }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

Eigen::MatrixXd mc_values(const McResult& mc, std::size_t i, std::span<const double> times, bool normalized)
{
    const Eigen::MatrixXd& sl = mc.slots.at(i);
    const int H = static_cast<int>(sl.cols() - 1) / 2;
    std::vector<double> phases(times.begin(), times.end());
    if (!normalized)
        for (double& p : phases)
            p *= mc.omegas[i];
    return (sl * trig_table(H, phases)).transpose();
}

PhasePortrait phase_portrait(const FgpcSolution& solution, const Distribution& dist, std::size_t n_samples,
                             std::uint64_t seed, int x_state, std::optional<int> y_state, std::size_t n_points)
{
    const int nd = solution.states();
    if (x_state < 0 || x_state >= nd || (y_state && (*y_state < 0 || *y_state >= nd)))
        throw InvalidArgument("phase_portrait: state index out of range");
    const std::vector<double> thetas = sorted_samples(dist, n_samples, seed);
    const std::vector<double> times = period_grid(solution, n_points);
    const auto phases = phases_for(solution, times);
    const Eigen::MatrixXd B = basis_matrix(solution.basis, thetas);
    const Eigen::MatrixXd X = B * degree_series(solution, x_state, trig_table(solution.harmonics(), phases));
    Eigen::MatrixXd Y;
    if (y_state) {
        Y = B * degree_series(solution, *y_state, trig_table(solution.harmonics(), phases));
    } else {
        Y = B * degree_series(solution, x_state, trig_table(solution.harmonics(), phases, true));
        for (std::size_t i = 0; i < thetas.size(); ++i)
            Y.row(static_cast<Eigen::Index>(i)) *= solution.omega_at(thetas[i]);
    }

    PhasePortrait pp;
    pp.x_state = x_state;
    pp.y_state = y_state;
    const auto il = static_cast<Eigen::Index>(lower_index(thetas.size()));
    const auto iu = static_cast<Eigen::Index>(upper_index(thetas.size()));
    pp.lower_theta = thetas[il];
    pp.upper_theta = thetas[iu];
    const Eigen::VectorXd mx = X.colwise().mean(), my = Y.colwise().mean();
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        pp.mean.x.push_back(mx(j));
        pp.mean.y.push_back(my(j));
        pp.lower.x.push_back(X(il, j));
        pp.lower.y.push_back(Y(il, j));
        pp.upper.x.push_back(X(iu, j));
        pp.upper.y.push_back(Y(iu, j));
    }
    return pp;
}

double enclosed_area(const PhaseCurve& c)
{
    double a = 0.0;
    const std::size_t n = c.x.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        a += c.x[i] * c.y[j] - c.x[j] * c.y[i];
    }
    return 0.5 * std::abs(a);
}

std::string moments_csv(const Moments& m)
{
    std::vector<std::string> header{"time"};
    for (Eigen::Index c = 0; c < m.mean.cols(); ++c) {
        header.push_back("x" + std::to_string(c) + "_mean");
        header.push_back("x" + std::to_string(c) + "_variance");
    }
    std::string out = csv_row(header);
    for (std::size_t j = 0; j < m.times.size(); ++j) {
        std::vector<double> row{m.times[j]};
        for (Eigen::Index c = 0; c < m.mean.cols(); ++c) {
            row.push_back(m.mean(static_cast<Eigen::Index>(j), c));
            row.push_back(m.variance(static_cast<Eigen::Index>(j), c));
        }
        out += csv_row(row);
    }
    return out;
}

std::string summary_csv(const StochasticSummary& s)
{
    std::vector<std::string> header{s.normalized_time ? "phase" : "time"};
    for (Eigen::Index c = 0; c < s.mean.cols(); ++c)
        for (const char* name : {"mean", "variance", "lower", "upper", "lower_path", "upper_path"})
            header.push_back("x" + std::to_string(c) + "_" + name);
    std::string out = csv_row(header);
    for (std::size_t j = 0; j < s.times.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        std::vector<double> row{s.times[j]};
        for (Eigen::Index c = 0; c < s.mean.cols(); ++c)
            for (const Eigen::MatrixXd* m : {&s.mean, &s.variance, &s.lower, &s.upper, &s.lower_path, &s.upper_path})
                row.push_back((*m)(jj, c));
        out += csv_row(row);
    }
    return out;
}

nlohmann::json marginal_json(const Marginal& m)
{
    return {{"time", m.time},
            {"state", m.state},
            {"samples", m.values.size()},
            {"mean", m.mean},
            {"std", m.std},
            {"skewness", m.skewness},
            {"lower", m.lower},
            {"upper", m.upper},
            {"bin_edges", m.histogram.edges},
            {"density", m.histogram.density}};
}

std::string coefficient_grid_csv(const CoefficientGrid& g)
{
    const Eigen::Index P = g.magnitudes.front().cols();
    std::vector<std::string> header{"row", "state", "harmonic"};
    for (Eigen::Index m = 0; m < P; ++m)
        header.push_back("degree_" + std::to_string(m));
    std::string out = csv_row(header);
    for (std::size_t c = 0; c < g.magnitudes.size(); ++c)
        for (Eigen::Index k = 0; k < g.magnitudes[c].rows(); ++k) {
            std::vector<std::string> row{"harmonic", std::to_string(c), std::to_string(k)};
            for (Eigen::Index m = 0; m < P; ++m)
                row.push_back(format_number(g.magnitudes[c](k, m)));
            out += csv_row(row);
        }
    if (g.omega.size() > 0) {
        std::vector<std::string> row{"omega", "", ""};
        for (Eigen::Index m = 0; m < g.omega.size(); ++m)
            row.push_back(format_number(g.omega(m)));
        out += csv_row(row);
    }
    return out;
}

std::string error_map_csv(const ErrorMap& map)
{
    std::string out = csv_row(std::vector<std::string>{"H", "N", "epsilon"});
    for (std::size_t h = 0; h < map.harmonics.size(); ++h)
        for (std::size_t n = 0; n < map.degrees.size(); ++n)
            out += csv_row(std::vector<std::string>{std::to_string(map.harmonics[h]), std::to_string(map.degrees[n]),
                                                    map.error[h][n] ? format_number(*map.error[h][n]) : "absent"});
    return out;
}

std::string portrait_csv(const PhasePortrait& p)
{
    std::string out =
        csv_row(std::vector<std::string>{"mean_x", "mean_y", "lower_x", "lower_y", "upper_x", "upper_y"});
    for (std::size_t j = 0; j < p.mean.x.size(); ++j)
        out += csv_row(std::vector<double>{p.mean.x[j], p.mean.y[j], p.lower.x[j], p.lower.y[j], p.upper.x[j],
                                           p.upper.y[j]});
    return out;
}

} // namespace fgpc
