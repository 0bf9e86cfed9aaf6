// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Each criterion also has to finish inside its runtime budget.

#include "fgpc/analysis.hpp"
#include "fgpc/continuation.hpp"
#include "fgpc/error.hpp"
#include "fgpc/fgpc.hpp"
#include "fgpc/harmonic_balance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace fgpc;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> check;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

const Distribution beta_alpha(Beta4{5.0, 5.0, 0.8, 1.2});
const Distribution uniform_mu(Uniform{0.8, 1.2});

FgpcSolution duffing_large(int H, int N)
{
    const FgpcProblem prob = make_fgpc_problem(duffing_system(DuffingParams{}), H, N, beta_alpha);
    FgpcSolveOptions o;
    o.deflation = DeflationConfig{};
    const FgpcSolveResult r = solve_fgpc(prob, initial_guess(prob), o);
    if (r.solutions.empty())
        throw Error("Duffing FgPC solve found no branch");
    // branches are ordered by first-harmonic magnitude, largest first
    return r.solutions.front();
}

// Classical RK4 with a fixed step on the van der Pol oscillator, period from
// upward zero crossings of x interpolated by the local cubic Hermite.
double vanderpol_period_rk4(double mu)
{
    auto f = [mu](double x, double v, double& dx, double& dv) {
        dx = v;
        dv = mu * (1.0 - x * x) * v - x;
    };
    const double h = 1e-3;
    double x = 0.1, v = 0.0, t = 0.0;
    std::vector<double> crossings;
    while (t < 400.0) {
        double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v;
        f(x, v, k1x, k1v);
        f(x + 0.5 * h * k1x, v + 0.5 * h * k1v, k2x, k2v);
        f(x + 0.5 * h * k2x, v + 0.5 * h * k2v, k3x, k3v);
        f(x + h * k3x, v + h * k3v, k4x, k4v);
        const double xn = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
        const double vn = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
        if (t > 200.0 && x < 0.0 && xn >= 0.0) {
            // Hermite cubic on [t, t + h] using x and x' = v at both ends
            double a = 0.0, b = 1.0;
            for (int it = 0; it < 60; ++it) {
                const double s = 0.5 * (a + b);
                const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
                const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
                const double xs = h00 * x + h10 * h * v + h01 * xn + h11 * h * vn;
                (xs < 0.0 ? a : b) = s;
            }
            crossings.push_back(t + h * 0.5 * (a + b));
        }
        x = xn;
        v = vn;
        t += h;
    }
    return (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(FGPC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome orthonormality()
{
    double worst = 0.0;
    for (const Distribution& d : {Distribution(Uniform{0.8, 1.2}), Distribution(Normal{1.0, 0.05}), beta_alpha}) {
        const StochasticBasis basis(d, 12);
        const QuadratureRule rule = gauss_rule(basis, 20);
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(13, 13);
        for (int z = 0; z < rule.size(); ++z) {
            const Eigen::VectorXd phi = basis.evaluate(rule.nodes[z]);
            gram += rule.weights[z] * phi * phi.transpose();
        }
        worst = std::max(worst, (gram - Eigen::MatrixXd::Identity(13, 13)).cwiseAbs().maxCoeff());
    }
    return {worst < 1e-10, "max |<Phi_m, Phi_n> - delta_mn| = " + fmt(worst) + " (limit 1e-10)"};
}

Outcome linear_closed_form()
{
    DuffingParams p;
    p.beta = 0.0;
    const OdeSystem sys = duffing_system(p);
    const FourierGrid grid = FourierGrid::oversampled(1, 3);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double a = 0.8 + 0.4 * i / 19.0;
        const HbSolveResult r = solve_hb(sys, grid, a);
        if (!r.newton.converged())
            return {false, "HB did not converge at alpha = " + fmt(a)};
        const double amp = harmonic_magnitudes(r.problem.slots(r.newton.solution), 0)[1];
        const double exact = p.gamma / std::sqrt((a - p.omega * p.omega) * (a - p.omega * p.omega) +
                                                 (p.delta * p.omega) * (p.delta * p.omega));
        worst = std::max(worst, std::abs(amp - exact));
    }
    return {worst < 1e-10, "max amplitude error over 20 alpha = " + fmt(worst) + " (limit 1e-10)"};
}

Outcome multiplicity()
{
    const OdeSystem base = duffing_system(DuffingParams{});
    const FourierGrid grid = FourierGrid::oversampled(5, 3);
    std::size_t count[2];
    int i = 0;
    for (double W : {1.4, 0.5}) {
        const OdeSystem sys = base.with_forcing_frequency(W);
        const HbProblem prob(sys, grid, 1.0);
        const HbGuess g = time_integration_guess(sys, grid, 1.0);
        std::vector<Eigen::VectorXd> starts;
        for (const auto& s : multistart_guesses(g.slots, false))
            starts.push_back(prob.pack(s, g.omega));
        count[i++] = deflated_solve(prob, starts, DeflationConfig{}, 6).size();
    }
    return {count[0] == 3 && count[1] == 1,
            "solutions at Omega = 1.4: " + std::to_string(count[0]) + " (want 3), at 0.5: " + std::to_string(count[1]) +
                " (want 1)"};
}

Outcome backbone_bands()
{
    const OdeSystem sys = duffing_system(DuffingParams{});
    double lo = -INFINITY, hi = INFINITY;
    std::string detail;
    for (double a : {0.8, 1.2}) {
        const Branch b = continuation_sweep(HbProblem(sys, FourierGrid::oversampled(5, 3), a), 0.5, 2.5);
        const auto band = b.multi_solution_band();
        if (!band)
            return {false, "no fold pair at alpha = " + fmt(a)};
        detail += "alpha " + fmt(a) + ": [" + fmt(band->first) + ", " + fmt(band->second) + "]; ";
        lo = std::max(lo, band->first);
        hi = std::min(hi, band->second);
    }
    const bool contains = lo <= 1.35 && hi >= 1.60;
    const bool edges = std::abs(lo - 1.33) <= 0.03 && std::abs(hi - 1.62) <= 0.03;
    return {contains && edges, detail + "common band [" + fmt(lo) + ", " + fmt(hi) +
                                   "] must contain [1.35, 1.60] with edges within 0.03 of [1.33, 1.62]"};
}

Outcome degeneracy()
{
    const OdeSystem sys = duffing_system(DuffingParams{});
    const FgpcProblem prob = make_fgpc_problem(sys, 5, 0, beta_alpha);
    const HbProblem hb(sys, prob.grid(), prob.nominal_theta());
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd x(prob.unknown_count());
        for (Eigen::Index j = 0; j < x.size(); ++j)
            x(j) = u(rng);
        worst = std::max(worst, (prob.residual(x) - hb.residual(x)).cwiseAbs().maxCoeff());
    }
    return {worst < 1e-13, "max |r_FgPC - r_HB| over 100 vectors = " + fmt(worst) + " (limit 1e-13)"};
}

Outcome sparsity()
{
    const FgpcSolution s = duffing_large(5, 12);
    double top = 0.0, even = 0.0;
    const CoefficientGrid g = coefficient_grid(s);
    const Eigen::MatrixXd& m = g.magnitudes[0];
    top = m.maxCoeff();
    for (int k = 0; k <= 5; k += 2)
        even = std::max(even, m.row(k).maxCoeff());
    return {s.residual_norm < 1e-10 && even < 1e-8 * top,
            "max even-harmonic magnitude / max magnitude = " + fmt(even / top) + " (limit 1e-8), residual " +
                fmt(s.residual_norm)};
}

// Criteria 7 and 8 share one oracle run.
struct OracleComparison {
    bool ok = false;
    std::string error;
    double mean_difference = 0.0, ks = 0.0;
    double mc_seconds = 0.0, surrogate_seconds = 0.0, solve_seconds = 0.0;
    std::size_t failures = 0;
};

const OracleComparison& oracle_comparison()
{
    static const OracleComparison result = [] {
        OracleComparison c;
        const auto t0 = std::chrono::steady_clock::now();
        const FgpcSolution s = duffing_large(5, 12);
        c.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        std::vector<double> th = sample(beta_alpha, 10000, 7);
        std::sort(th.begin(), th.end());
        McOptions mo;
        // start the chain on the large branch
        mo.guess.initial_state = {1.0, 0.0};
        const McResult mc = mc_oracle(duffing_system(DuffingParams{}), th, 5, std::nullopt, mo);
        c.mc_seconds = mc.seconds;
        c.failures = mc.failure_count();

        const std::vector<double> times = period_grid(s, 201);
        const auto t1 = std::chrono::steady_clock::now();
        const Eigen::MatrixXd paths = surrogate_paths(s, th, times);
        const std::vector<double> marginal = surrogate_values(s, th, 2.0);
        c.surrogate_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();

        Eigen::VectorXd mc_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(times.size()));
        std::vector<double> mc_marginal;
        const double at2[] = {2.0};
        std::size_t used = 0;
        for (std::size_t i = 0; i < th.size(); ++i) {
            if (!mc.converged[i])
                continue;
            mc_mean += mc_values(mc, i, times, false).col(0);
            mc_marginal.push_back(mc_values(mc, i, at2, false)(0, 0));
            ++used;
        }
        if (used == 0) {
            c.error = "every oracle sample failed";
            return c;
        }
        mc_mean /= static_cast<double>(used);
        const Eigen::VectorXd sur_mean = paths.colwise().mean().transpose();
        c.mean_difference = (sur_mean - mc_mean).cwiseAbs().maxCoeff();
        c.ks = ks_distance(marginal, mc_marginal);
        c.ok = true;
        return c;
    }();
    return result;
}

Outcome surrogate_vs_oracle()
{
    const OracleComparison& c = oracle_comparison();
    if (!c.ok)
        return {false, c.error};
    return {c.mean_difference < 1e-3 && c.ks < 0.02,
            "max |mean difference| = " + fmt(c.mean_difference) + " m (limit 1e-3), KS at t = 2 s = " + fmt(c.ks) +
                " (limit 0.02), oracle failures " + std::to_string(c.failures) + " of 10000"};
}

Outcome speedup()
{
    const OracleComparison& c = oracle_comparison();
    if (!c.ok)
        return {false, c.error};
    const double ratio = c.mc_seconds / c.surrogate_seconds;
    const double with_solve = c.mc_seconds / (c.surrogate_seconds + c.solve_seconds);
    return {ratio >= 5.0, "oracle " + fmt(c.mc_seconds) + " s vs surrogate evaluation " + fmt(c.surrogate_seconds) +
                              " s: " + fmt(ratio) + "x (limit 5x); including the FgPC solve " + fmt(with_solve) + "x"};
}

Outcome convergence_structure()
{
    ConvergenceOptions o;
    o.reference = duffing_large(5, 11);
    std::vector<int> degrees;
    for (int n = 0; n <= 12; ++n)
        degrees.push_back(n);
    const ErrorMap map =
        convergence_map(duffing_system(DuffingParams{}), beta_alpha, {1, 2, 3, 4, 5}, degrees, 5, 11, 1000, 4, o);
    double parity = 0.0;
    for (int H : {2, 4})
        for (int n : degrees) {
            const auto e = map.at(H, n), prev = map.at(H - 1, n);
            if (!e || !prev)
                return {false, "missing cell H = " + std::to_string(H) + ", N = " + std::to_string(n)};
            parity = std::max(parity, std::abs(*e - *prev) / *prev);
        }
    double lo = INFINITY, hi = 0.0;
    for (int n = 3; n <= 12; ++n) {
        const auto e = map.at(1, n);
        if (!e)
            return {false, "missing cell H = 1, N = " + std::to_string(n)};
        lo = std::min(lo, *e);
        hi = std::max(hi, *e);
    }
    const double spread = (hi - lo) / lo;
    return {parity < 0.05 && spread < 0.10, "max relative even/odd difference = " + fmt(parity) +
                                                " (limit 0.05), eps(1, N) spread for N in [3, 12] = " + fmt(spread) +
                                                " (limit 0.10)"};
}

Outcome self_excited()
{
    FgpcProblem prob = make_fgpc_problem(vanderpol_system(VanDerPolParams{}), 10, 6, uniform_mu);
    InitialGuessOptions go;
    go.period_hint = 6.3;
    const FgpcGuess g = initial_guess(prob, go);
    if (!g.anchor)
        return {false, "no phase anchor from the initial guess"};
    const FgpcSolveResult r = solve_fgpc(prob.with_anchor(*g.anchor), g);
    if (r.solutions.empty())
        return {false, "FgPC solve failed"};
    const FgpcSolution& s = r.solutions.front();

    double worst = 0.0;
    for (int i = 0; i < 9; ++i) {
        const double mu = 0.8 + 0.05 * i;
        const double T = vanderpol_period_rk4(mu);
        worst = std::max(worst, std::abs(2.0 * pi / s.omega_at(mu) - T) / T);
    }

    const std::vector<double> mu = sample(uniform_mu, 10000, 10);
    double sum = 0.0, sq = 0.0;
    for (double m : mu) {
        const double w = s.omega_at(m);
        sum += w;
        sq += w * w;
    }
    const double n = static_cast<double>(mu.size()), mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    const double dev = std::abs(mean - s.omega_coefficients(0));

    const HbSolveResult hb = solve_hb(vanderpol_system(VanDerPolParams{1.0}), FourierGrid::oversampled(10, 3), 1.0, go);
    if (!hb.newton.converged())
        return {false, "deterministic HB at mu = 1 failed"};
    const double T_hb = 2.0 * pi / hb.problem.omega(hb.newton.solution);
    const double T_ref = vanderpol_period_rk4(1.0);
    const double det = std::abs(T_hb - T_ref) / T_ref;

    return {worst < 1e-3 && dev < 4.0 * se && det < 1e-3,
            "max period error at 9 probes = " + fmt(worst) + " (limit 1e-3); |E[omega] - q_omega0| = " + fmt(dev) +
                " (limit 4 se = " + fmt(4.0 * se) + "); mu = 1 period " + fmt(T_hb) + " vs " + fmt(T_ref) +
                ", rel " + fmt(det) + " (limit 1e-3)"};
}

Outcome moment_identities()
{
    const FgpcSolution s = duffing_large(5, 12);
    const std::size_t n = 100000;
    const StochasticSummary sum = sample_summary(s, beta_alpha, n, 11, 201);
    const Moments m = moments_from_coefficients(s, sum.times);
    const std::vector<double> th = sample(beta_alpha, static_cast<int>(n), 11);
    const Eigen::MatrixXd X = surrogate_paths(s, th, sum.times);
    double mean_ratio = 0.0, var_ratio = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const Eigen::ArrayXd col = X.col(j).array();
        const double mu = col.mean();
        const Eigen::ArrayXd d = col - mu;
        const double var = d.square().mean();
        const double sd = std::sqrt(var);
        // standard errors of the sample mean and of the sample variance
        const double se_mean = sd / std::sqrt(static_cast<double>(n));
        const double se_var = std::sqrt(std::max((d.square() - var).square().mean(), 0.0) / static_cast<double>(n));
        mean_ratio = std::max(mean_ratio, std::abs(m.mean(j, 0) - mu) / se_mean);
        var_ratio = std::max(var_ratio, std::abs(m.variance(j, 0) - var) / se_var);
    }
    return {mean_ratio <= 4.0 && var_ratio <= 4.0, "max |mean - sample mean| = " + fmt(mean_ratio) +
                                                       " se, max |variance - sample variance| = " + fmt(var_ratio) +
                                                       " se (limit 4)"};
}

Outcome coverage()
{
    const FgpcSolution s = duffing_large(5, 12);
    const std::size_t n = 100000;
    const StochasticSummary sum = sample_summary(s, beta_alpha, n, 12, 201);
    // fresh samples, independent of the ones that set the interval
    const std::vector<double> th = sample(beta_alpha, static_cast<int>(n), 13);
    const Eigen::MatrixXd X = surrogate_paths(s, th, sum.times);
    double lo = 1.0, hi = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const auto inside = (X.col(j).array() >= sum.lower(j, 0) && X.col(j).array() <= sum.upper(j, 0)).count();
        const double f = static_cast<double>(inside) / static_cast<double>(n);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    return {lo >= 0.945 && hi <= 0.955,
            "coverage over 201 time points in [" + fmt(lo) + ", " + fmt(hi) + "] (limit [0.945, 0.955])"};
}

Outcome determinism()
{
    const fs::path root = fs::temp_directory_path() / "fgpc_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    std::size_t compared = 0;
    std::vector<std::string> mismatches;
    for (const auto& entry : fs::directory_iterator(FGPC_CONFIG_DIR)) {
        if (entry.path().extension() != ".config")
            continue;
        const std::string name = entry.path().stem().string();
        const fs::path a = root / (name + "_a"), b = root / (name + "_b");
        const int ra = run_cli("run " + entry.path().string() + " --output-dir " + a.string());
        const int rb = run_cli("run " + entry.path().string() + " --output-dir " + b.string());
        if (ra != 0 || rb != 0) {
            mismatches.push_back(name + " exit codes " + std::to_string(ra) + "/" + std::to_string(rb));
            continue;
        }
        std::set<std::string> fa, fb;
        for (const auto& f : fs::directory_iterator(a))
            fa.insert(f.path().filename().string());
        for (const auto& f : fs::directory_iterator(b))
            fb.insert(f.path().filename().string());
        if (fa != fb) {
            mismatches.push_back(name + " file lists differ");
            continue;
        }
        for (const auto& f : fa) {
            if (f == "manifest.json")
                continue;
            ++compared;
            if (read_file(a / f) != read_file(b / f))
                mismatches.push_back(name + "/" + f);
        }
    }
    fs::remove_all(root);
    std::string detail = std::to_string(compared) + " artifacts compared across the shipped configs";
    for (const auto& m : mismatches)
        detail += "; differs: " + m;
    return {mismatches.empty() && compared > 0, detail};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "orthonormality", 1.0, orthonormality},
        {2, "linear closed form", 1.0, linear_closed_form},
        {3, "multiplicity", 30.0, multiplicity},
        {4, "backbone bands", 120.0, backbone_bands},
        {5, "FgPC degeneracy", 5.0, degeneracy},
        {6, "Duffing sparsity", 120.0, sparsity},
        {7, "surrogate vs Monte-Carlo oracle", 600.0, surrogate_vs_oracle},
        {8, "speedup", 600.0, speedup},
        {9, "convergence-map structure", 600.0, convergence_structure},
        {10, "self-excited end-to-end", 300.0, self_excited},
        {11, "moment identities", 60.0, moment_identities},
        {12, "coverage calibration", 60.0, coverage},
        {13, "determinism", 600.0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_seconds;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail
                  << " [" << fmt(secs) << " s, budget " << fmt(c.budget_seconds) << " s"
                  << (in_time ? "" : ", over budget") << "]" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
