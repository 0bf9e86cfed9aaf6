#include "fgpc/continuation.hpp"
#include "fgpc/error.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace fgpc;
using Catch::Matchers::WithinAbs;

namespace {

HbProblem duffing_problem(double alpha, double beta = 1.0, int H = 5)
{
    DuffingParams p;
    p.beta = beta;
    return HbProblem(duffing_system(p), FourierGrid::oversampled(H, 3), alpha);
}

// Distance from a point to the polyline through the points of a branch, in
// (Omega, unknowns) space.
double distance_to_branch(const Branch& b, double omega, const Eigen::VectorXd& u)
{
    auto embed = [](double w, const Eigen::VectorXd& v) {
        Eigen::VectorXd y(v.size() + 1);
        y << v, w;
        return y;
    };
    const Eigen::VectorXd q = embed(omega, u);
    double best = INFINITY;
    for (std::size_t i = 0; i + 1 < b.points.size(); ++i) {
        const Eigen::VectorXd a = embed(b.points[i].omega, b.points[i].unknowns);
        const Eigen::VectorXd c = embed(b.points[i + 1].omega, b.points[i + 1].unknowns);
        const Eigen::VectorXd d = c - a;
        const double t = std::clamp((q - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
        best = std::min(best, (a + t * d - q).norm());
    }
    return best;
}

} // namespace

TEST_CASE("linear branch follows the closed-form frequency response")
{
    const DuffingParams p;
    const HbProblem prob = duffing_problem(1.0, 0.0, 3);
    const Branch b = continuation_sweep(prob, 0.5, 2.5);
    REQUIRE_FALSE(b.truncated);
    CHECK(b.folds.empty());
    CHECK(b.points.size() > 20);
    for (const auto& pt : b.points) {
        const double W = pt.omega;
        const double amp = p.gamma / std::hypot(1.0 - W * W, p.delta * W);
        CHECK_THAT(pt.magnitudes[1], WithinAbs(amp, 1e-8));
        CHECK(pt.magnitudes[2] < 1e-10);
        CHECK(pt.stability == "unknown");
    }
    CHECK(b.points.front().omega == 0.5);
    CHECK(b.points.back().omega == 2.5);
}

TEST_CASE("nonlinear sweeps fold twice and label the middle branch")
{
    for (double alpha : {0.8, 1.2}) {
        const Branch b = continuation_sweep(duffing_problem(alpha), 0.5, 2.5);
        REQUIRE_FALSE(b.truncated);
        REQUIRE(b.folds.size() == 2);
        const auto band = b.multi_solution_band();
        REQUIRE(band);
        CHECK(band->first < band->second);
        CHECK(band->first > 1.0);
        CHECK(band->second < 1.8);
        CHECK(b.points.back().omega == 2.5);

        // points between the folds are the unstable middle branch
        for (std::size_t i = 0; i < b.points.size(); ++i) {
            const bool middle = i > b.folds[0].after_point && i <= b.folds[1].after_point;
            CHECK(b.points[i].stability == (middle ? "unstable" : "stable"));
        }
        // the tangent's Omega component changes sign exactly at the folds
        int flips = 0;
        for (std::size_t i = 0; i + 1 < b.points.size(); ++i)
            if ((b.points[i].tangent_omega > 0) != (b.points[i + 1].tangent_omega > 0))
                ++flips;
        CHECK(flips == 2);
    }
}

TEST_CASE("branch points are close together and satisfy the residual")
{
    ContinuationOptions o;
    const HbProblem prob = duffing_problem(1.0);
    const Branch b = continuation_sweep(prob, 0.5, 2.5, o);
    for (std::size_t i = 0; i < b.points.size(); ++i) {
        const auto& pt = b.points[i];
        CHECK(prob.residual_at_frequency(pt.unknowns, pt.omega).cwiseAbs().maxCoeff() < 1e-9);
        if (i > 0) {
            const auto& prev = b.points[i - 1];
            const double ds = std::hypot((pt.unknowns - prev.unknowns).norm(), pt.omega - prev.omega);
            CHECK(ds < 2.0 * o.max_step);
        }
    }
}

TEST_CASE("reversing the sweep traces the same branch")
{
    const HbProblem prob = duffing_problem(1.0);
    const Branch up = continuation_sweep(prob, 0.5, 2.5);
    const Branch down = continuation_sweep(prob, 2.5, 0.5);
    REQUIRE(down.folds.size() == 2);
    for (const auto& pt : down.points)
        CHECK(distance_to_branch(up, pt.omega, pt.unknowns) < 1e-3);
    const auto a = up.multi_solution_band(), c = down.multi_solution_band();
    CHECK_THAT(a->first, WithinAbs(c->first, 1e-3));
    CHECK_THAT(a->second, WithinAbs(c->second, 1e-3));
}

TEST_CASE("point cap truncates with a warning")
{
    ContinuationOptions o;
    o.max_points = 10;
    const Branch b = continuation_sweep(duffing_problem(1.0), 0.5, 2.5, o);
    CHECK(b.truncated);
    CHECK_FALSE(b.warning.empty());
    CHECK(b.points.size() <= 10);
    CHECK_FALSE(b.multi_solution_band());
}

TEST_CASE("branch table layout")
{
    const Branch b = continuation_sweep(duffing_problem(1.0, 1.0, 2), 0.5, 0.6);
    const std::string csv = branch_csv(b);
    CHECK(csv.rfind("Omega,x0_h0,x0_h1,x0_h2,stability\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(b.points.size() + 1));
}

TEST_CASE("invalid sweeps are rejected")
{
    const HbProblem prob = duffing_problem(1.0);
    CHECK_THROWS_AS(continuation_sweep(prob, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(continuation_sweep(prob, -1.0, 1.0), InvalidArgument);
    ContinuationOptions o;
    o.min_step = 0.1;
    CHECK_THROWS_AS(continuation_sweep(prob, 0.5, 1.0, o), InvalidArgument);

    const HbProblem v(vanderpol_system(VanDerPolParams{}), FourierGrid::oversampled(3, 3), 1.0, Anchor{0, 1.0});
    CHECK_THROWS_AS(continuation_sweep(v, 0.5, 1.0), InvalidArgument);
}
