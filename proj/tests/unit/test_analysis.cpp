#include "fgpc/analysis.hpp"
#include "fgpc/error.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

using namespace fgpc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

const Distribution beta_alpha(Beta4{5.0, 5.0, 0.8, 1.2});

FgpcSolution solve_one(const OdeSystem& sys, int H, int N, const Distribution& dist, InitialGuessOptions o = {})
{
    FgpcProblem prob = make_fgpc_problem(sys, H, N, dist);
    const FgpcGuess g = initial_guess(prob, o);
    if (g.anchor)
        prob = prob.with_anchor(*g.anchor);
    FgpcSolveResult r = solve_fgpc(prob, g);
    REQUIRE(r.solutions.size() == 1);
    return r.solutions.front();
}

const FgpcSolution& duffing_large()
{
    static const FgpcSolution s = [] {
        InitialGuessOptions o;
        o.initial_state = {1.0, 0.0};
        return solve_one(duffing_system(DuffingParams{}), 5, 12, beta_alpha, o);
    }();
    return s;
}

const FgpcSolution& linear_solution(int N)
{
    static std::map<int, FgpcSolution> cache;
    auto it = cache.find(N);
    if (it == cache.end()) {
        DuffingParams p;
        p.beta = 0.0;
        it = cache.emplace(N, solve_one(duffing_system(p), 1, N, beta_alpha)).first;
    }
    return it->second;
}

const FgpcSolution& vanderpol()
{
    static const FgpcSolution s = [] {
        InitialGuessOptions o;
        o.period_hint = 6.3;
        return solve_one(vanderpol_system(VanDerPolParams{}), 10, 6, Distribution(Uniform{0.8, 1.2}), o);
    }();
    return s;
}

// Closed-form steady state of the linear oscillator with stiffness a.
double linear_response(double a, double t)
{
    const DuffingParams p;
    const double W = p.omega, den = (a - W * W) * (a - W * W) + (p.delta * W) * (p.delta * W);
    return p.gamma * ((a - W * W) * std::cos(W * t) + p.delta * W * std::sin(W * t)) / den;
}

int sign_changes(const Eigen::VectorXd& v)
{
    int n = 0;
    for (Eigen::Index i = 0; i + 1 < v.size(); ++i)
        if ((v(i) > 0) != (v(i + 1) > 0))
            ++n;
    return n;
}

} // namespace

TEST_CASE("degree zero has no variance")
{
    const FgpcSolution& s = linear_solution(0);
    const std::vector<double> t = period_grid(s, 50);
    const Moments m = moments_from_coefficients(s, t);
    CHECK(m.variance.cwiseAbs().maxCoeff() == 0.0);
    const StochasticSummary sum = sample_summary(s, beta_alpha, 1000, 3, 50);
    CHECK((sum.upper - sum.lower).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sum.variance.maxCoeff() < 1e-25);
}

TEST_CASE("linear mean matches sampling of the closed form")
{
    const FgpcSolution& s = linear_solution(6);
    const std::vector<double> t = period_grid(s, 41);
    const Moments m = moments_from_coefficients(s, t);
    const std::vector<double> a = sample(beta_alpha, 100000, 11);
    for (std::size_t j = 0; j < t.size(); ++j) {
        double sum = 0.0, sq = 0.0;
        for (double ai : a) {
            const double x = linear_response(ai, t[j]);
            sum += x;
            sq += x * x;
        }
        const double n = static_cast<double>(a.size()), mean = sum / n;
        const double se = std::sqrt(std::max(sq / n - mean * mean, 0.0) / n);
        CHECK(std::abs(m.mean(static_cast<Eigen::Index>(j), 0) - mean) < 4.0 * se + 1e-12);
    }
}

TEST_CASE("closed-form moments agree with surrogate sampling")
{
    const FgpcSolution& s = duffing_large();
    const std::size_t n = 100000;
    const StochasticSummary sum = sample_summary(s, beta_alpha, n, 21, 101);
    const Moments m = moments_from_coefficients(s, sum.times);
    for (Eigen::Index j = 0; j < m.mean.rows(); ++j) {
        const double sd = std::sqrt(sum.variance(j, 0));
        const double se = sd / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(m.mean(j, 0) - sum.mean(j, 0)) <= 4.0 * se + 1e-14);
        // standard error of the sample variance, kurtosis bounded by 3 for this near-linear map
        CHECK(std::abs(m.variance(j, 0) - sum.variance(j, 0)) <= 4.0 * sd * sd * std::sqrt(2.0 / n) + 1e-14);
        CHECK(sum.variance(j, 0) >= 0.0);
    }
    CHECK_THROWS_AS(moments_from_coefficients(vanderpol(), sum.times), InvalidArgument);
}

TEST_CASE("coverage interval holds 95 percent of fresh samples")
{
    const FgpcSolution& s = duffing_large();
    const std::size_t n = 100000;
    const StochasticSummary sum = sample_summary(s, beta_alpha, n, 31, 41);
    const std::vector<double> fresh = sample(beta_alpha, static_cast<int>(n), 32);
    const Eigen::MatrixXd X = surrogate_paths(s, fresh, sum.times);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const auto inside = (X.col(j).array() >= sum.lower(j, 0) && X.col(j).array() <= sum.upper(j, 0)).count();
        const double frac = static_cast<double>(inside) / static_cast<double>(n);
        CHECK(frac >= 0.945);
        CHECK(frac <= 0.955);
    }
}

TEST_CASE("Duffing boundary samples cross twice per period")
{
    const StochasticSummary sum = sample_summary(duffing_large(), beta_alpha, 10000, 41, 401);
    // the closing endpoint repeats the first point
    const Eigen::VectorXd gap = (sum.upper_path - sum.lower_path).col(0).head(400);
    Eigen::VectorXd cyclic(401);
    cyclic << gap, gap(0);
    CHECK(sign_changes(cyclic) == 2);
    CHECK(sum.lower_theta < sum.upper_theta);
}

TEST_CASE("self-excited frequency samples average to the mean coefficient")
{
    const FgpcSolution& v = vanderpol();
    REQUIRE(v.self_excited());
    const std::vector<double> mu = sample(Distribution(Uniform{0.8, 1.2}), 20000, 5);
    double sum = 0.0, sq = 0.0;
    for (double m : mu) {
        const double w = v.omega_at(m);
        sum += w;
        sq += w * w;
    }
    const double n = static_cast<double>(mu.size()), mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - v.omega_coefficients(0)) < 4.0 * se);

    const StochasticSummary s = sample_summary(v, Distribution(Uniform{0.8, 1.2}), 1000, 6, 65);
    CHECK(s.normalized_time);
    CHECK_THAT(s.times.back(), WithinAbs(2.0 * pi, 1e-14));
    CHECK(summary_csv(s).rfind("phase,x0_mean", 0) == 0);
}

TEST_CASE("marginal shape")
{
    // uncertain forcing amplitude: the response is linear in theta, so the
    // marginal inherits the symmetry of the input
    DuffingParams p;
    p.beta = 0.0;
    const Distribution amplitude(Beta4{5.0, 5.0, 0.15, 0.25});
    const FgpcSolution forced = solve_one(duffing_system(p, DuffingParameter::gamma), 1, 2, amplitude);
    const Marginal lin = marginal_at(forced, amplitude, 20000, 7, 2.0);
    CHECK(std::abs(lin.skewness) < 0.05);
    const Marginal duf = marginal_at(duffing_large(), beta_alpha, 20000, 7, 2.0);
    CHECK(std::abs(duf.skewness) > 0.1);
    CHECK(duf.lower < duf.mean);
    CHECK(duf.mean < duf.upper);
    CHECK(std::is_sorted(duf.values.begin(), duf.values.end()));

    double area = 0.0;
    for (std::size_t i = 0; i < duf.histogram.density.size(); ++i)
        area += duf.histogram.density[i] * (duf.histogram.edges[i + 1] - duf.histogram.edges[i]);
    CHECK_THAT(area, WithinAbs(1.0, 1e-12));
    CHECK(marginal_json(duf)["bin_edges"].size() == duf.histogram.density.size() + 1);
    CHECK(make_histogram(std::vector<double>{1.0, 1.0, 1.0}).density.size() == 1);
    CHECK(make_histogram(duf.values, 7).edges.size() == 8);
}

TEST_CASE("Kolmogorov-Smirnov distance")
{
    CHECK(ks_distance({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_distance({1, 2}, {3, 4}) == 1.0);
    CHECK_THAT(ks_distance({1, 2, 3, 4}, {3, 4, 5, 6}), WithinAbs(0.5, 1e-15));
}

TEST_CASE("coefficient grid structure")
{
    const CoefficientGrid g = coefficient_grid(duffing_large());
    REQUIRE(g.magnitudes.size() == 1);
    const Eigen::MatrixXd& m = g.magnitudes[0];
    CHECK(m.rows() == 6);
    CHECK(m.cols() == 13);
    const double top = m.maxCoeff();
    for (int k = 0; k <= 5; k += 2)
        CHECK(m.row(k).maxCoeff() < 1e-8 * top);
    CHECK(m.bottomRightCorner(3, 6).maxCoeff() < 1e-3 * top);
    CHECK(g.omega.size() == 0);

    // the single column of a degree-zero solution lists the harmonic magnitudes
    const FgpcSolution& s0 = linear_solution(0);
    const auto mags = harmonic_magnitudes(s0.coefficients[0], 0);
    const CoefficientGrid g0 = coefficient_grid(s0);
    for (int k = 0; k <= 1; ++k)
        CHECK(g0.magnitudes[0](k, 0) == mags[k]);

    const CoefficientGrid gv = coefficient_grid(vanderpol());
    CHECK(gv.omega.size() == 7);
    const std::string csv = coefficient_grid_csv(gv);
    CHECK(csv.find("\nomega,,,") != std::string::npos);
}

TEST_CASE("period error is a pseudometric")
{
    const OdeSystem sys = duffing_system(DuffingParams{});
    InitialGuessOptions large;
    large.initial_state = {1.0, 0.0};
    const FgpcSolution a = solve_one(sys, 1, 2, beta_alpha, large);
    const FgpcSolution b = solve_one(sys, 3, 4, beta_alpha, large);
    const FgpcSolution c = solve_one(sys, 3, 1, beta_alpha);
    const std::vector<double> th = sample(beta_alpha, 500, 8);
    CHECK(rms_period_error(a, a, th) == 0.0);
    CHECK(rms_period_error(a, b, th) == rms_period_error(b, a, th));
    CHECK(rms_period_error(a, c, th) <= rms_period_error(a, b, th) + rms_period_error(b, c, th) + 1e-15);
    CHECK(rms_period_error(a, b, th) > 0.0);
    // |x| has kinks at the zero crossings, so the periodic rule is only
    // second order there
    CHECK_THAT(period_mean_abs(b, 1.0, 0), WithinRel(period_mean_abs(b, 1.0, 0, 4096), 1e-5));
}

TEST_CASE("convergence map cells")
{
    const OdeSystem sys = duffing_system(DuffingParams{});
    ConvergenceOptions o;
    o.guess.initial_state = {1.0, 0.0};
    const ErrorMap map = convergence_map(sys, beta_alpha, {1, 2, 3}, {0, 2, 4}, 3, 4, 200, 9, o);
    REQUIRE(map.notes.empty());
    CHECK(map.at(3, 4) == 0.0);
    for (int N : {0, 2, 4}) {
        REQUIRE(map.at(1, N));
        REQUIRE(map.at(2, N));
        CHECK(*map.at(1, N) > 0.0);
        // even harmonics carry nothing for this system
        CHECK_THAT(*map.at(2, N), WithinRel(*map.at(1, N), 0.05));
    }
    CHECK(*map.at(3, 0) > *map.at(3, 2));
    CHECK_FALSE(map.at(7, 0));
    const std::string csv = error_map_csv(map);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
}

TEST_CASE("Monte-Carlo oracle warm starts")
{
    const OdeSystem sys = duffing_system(DuffingParams{});
    std::vector<double> th = sample(beta_alpha, 100, 12);
    std::sort(th.begin(), th.end());
    const McResult mc = mc_oracle(sys, th, 5);
    CHECK(mc.failure_count() == 0);
    CHECK(mc.samples == 32);
    for (std::size_t i = 1; i < th.size(); ++i)
        CHECK(mc.iterations[i] <= 5);

    const double nominal[] = {1.0};
    const McResult one = mc_oracle(sys, nominal, 5);
    const auto hb = solve_hb(sys, FourierGrid::oversampled(5, 3), 1.0);
    REQUIRE(one.converged[0]);
    CHECK((one.slots[0] - hb.problem.slots(hb.newton.solution)).cwiseAbs().maxCoeff() < 1e-12);

    const double unsorted[] = {1.0, 0.9};
    CHECK_THROWS_AS(mc_oracle(sys, unsorted, 5), InvalidArgument);

    // at t = 0 the value is the sum of the cosine coefficients
    const std::vector<double> t{0.0};
    double cosines = one.slots[0](0, 0);
    for (int k = 1; k <= 5; ++k)
        cosines += one.slots[0](0, cosine_slot(k));
    CHECK_THAT(mc_values(one, 0, t, false)(0, 0), WithinAbs(cosines, 1e-14));
}

TEST_CASE("surrogate agrees with the oracle on shared samples")
{
    const FgpcSolution& s = duffing_large();
    std::vector<double> th = sample(beta_alpha, 300, 13);
    std::sort(th.begin(), th.end());
    McOptions o;
    o.seed = HbSeed{1.0, s.slots_at(1.0), s.forcing_frequency, std::nullopt};
    const McResult mc = mc_oracle(duffing_system(DuffingParams{}), th, 5, std::nullopt, o);
    REQUIRE(mc.failure_count() == 0);
    const double t[] = {2.0};
    std::vector<double> oracle;
    for (std::size_t i = 0; i < th.size(); ++i)
        oracle.push_back(mc_values(mc, i, t, false)(0, 0));
    const std::vector<double> sur = surrogate_values(s, th, 2.0);
    for (std::size_t i = 0; i < th.size(); ++i)
        CHECK_THAT(sur[i], WithinAbs(oracle[i], 1e-4));
    CHECK(ks_distance(sur, oracle) < 0.01);
}

TEST_CASE("phase portraits")
{
    // linear response: the mean curve is an ellipse with semi-axes A and Omega A
    const FgpcSolution& s = linear_solution(4);
    const PhasePortrait lin = phase_portrait(s, beta_alpha, 2000, 14);
    const double A = harmonic_magnitudes(s.coefficients[0], 0)[1];
    const double W = s.forcing_frequency;
    CHECK_THAT(enclosed_area(lin.mean), WithinRel(pi * A * W * A, 0.01));

    const PhasePortrait d = phase_portrait(duffing_large(), beta_alpha, 5000, 15);
    for (const PhaseCurve* c : {&d.mean, &d.lower, &d.upper}) {
        CHECK(std::abs(c->x.front() - c->x.back()) < 1e-10);
        CHECK(std::abs(c->y.front() - c->y.back()) < 1e-10);
        CHECK(enclosed_area(*c) > 0.1);
    }
    CHECK(enclosed_area(d.lower) != enclosed_area(d.upper));
    CHECK(d.lower_theta < d.upper_theta);
    CHECK_THROWS_AS(phase_portrait(s, beta_alpha, 10, 1, 3), InvalidArgument);

    const PhasePortrait v = phase_portrait(vanderpol(), Distribution(Uniform{0.8, 1.2}), 500, 16);
    CHECK(std::abs(v.upper.x.front() - v.upper.x.back()) < 1e-10);
    CHECK(portrait_csv(v).rfind("mean_x,mean_y,lower_x", 0) == 0);
}
