#pragma once

#include "fgpc/fgpc.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fgpc {

/// Mean and variance series, rows = times, columns = states.
struct Moments {
    std::vector<double> times;
    Eigen::MatrixXd mean;
    Eigen::MatrixXd variance;
};

/// Closed-form moments from the coefficients: mean from degree 0, variance
/// as the sum of squared degree >= 1 series. Forced systems only: with a
/// random base frequency the closed form does not hold, use sample_summary.
Moments moments_from_coefficients(const FgpcSolution& solution, std::span<const double> times);

/// Sample statistics over one period. For forced systems time is physical
/// on [0, 2 pi / Omega]; for self-excited systems it is the normalized phase
/// on [0, 2 pi] (every sample spans its own period and shares the phase
/// anchor). Both grids include the closing endpoint.
struct StochasticSummary {
    bool normalized_time = false;
    std::vector<double> times;
    std::size_t sample_count = 0;
    Eigen::MatrixXd mean, variance;
    /// Per-time empirical 2.5 % / 97.5 % order statistics.
    Eigen::MatrixXd lower, upper;
    /// Paths of the two samples at the 2.5 % / 97.5 % positions of the sorted
    /// input.
    double lower_theta = 0.0, upper_theta = 0.0;
    Eigen::MatrixXd lower_path, upper_path;
};

StochasticSummary sample_summary(const FgpcSolution& solution, const Distribution& dist, std::size_t n_samples,
                                 std::uint64_t seed, std::size_t n_time);

/// Time grid used by sample_summary.
std::vector<double> period_grid(const FgpcSolution& solution, std::size_t n_time);

/// Surrogate values at one time (phase for self-excited) for many samples.
std::vector<double> surrogate_values(const FgpcSolution& solution, std::span<const double> thetas, double time,
                                     int state = 0);

/// Surrogate paths of one state, rows = samples, columns = times (phases
/// for self-excited solutions).
Eigen::MatrixXd surrogate_paths(const FgpcSolution& solution, std::span<const double> thetas,
                                std::span<const double> times, int state = 0);

struct Histogram {
    std::vector<double> edges;   ///< bins + 1 edges
    std::vector<double> density; ///< normalized to unit area
};

/// Freedman-Diaconis bins unless `bins` is given.
Histogram make_histogram(std::span<const double> values, std::optional<int> bins = std::nullopt);

struct Marginal {
    double time = 0.0;
    int state = 0;
    std::vector<double> values; ///< sorted
    Histogram histogram;
    double mean = 0.0, std = 0.0, skewness = 0.0, lower = 0.0, upper = 0.0;
};

Marginal marginal_from_values(std::vector<double> values, double time, int state, std::optional<int> bins = std::nullopt);
Marginal marginal_at(const FgpcSolution& solution, const Distribution& dist, std::size_t n_samples,
                     std::uint64_t seed, double time, int state = 0, std::optional<int> bins = std::nullopt);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::vector<double> a, std::vector<double> b);

/// sqrt(a_km^2 + b_km^2) per state as (H+1) x (N+1); `omega` holds |q_omega,m|
/// for self-excited solutions.
struct CoefficientGrid {
    std::vector<Eigen::MatrixXd> magnitudes;
    Eigen::VectorXd omega;
};

CoefficientGrid coefficient_grid(const FgpcSolution& solution);

/// Period mean of |x_c| via the 1024-point periodic trapezoid rule, summed
/// error metric building block.
double period_mean_abs(const FgpcSolution& solution, double theta, int state, int points = 1024);

/// RMS over samples of the period-mean-|x| difference, summed over states.
double rms_period_error(const FgpcSolution& a, const FgpcSolution& b, std::span<const double> thetas);

struct ErrorMap {
    std::vector<int> harmonics, degrees;
    int reference_harmonics = 0, reference_degree = 0;
    std::size_t sample_count = 0;
    /// [h][n]; empty when the cell's solve failed.
    std::vector<std::vector<std::optional<double>>> error;
    std::vector<std::string> notes;

    std::optional<double> at(int H, int N) const;
};

struct ConvergenceOptions {
    NewtonOptions newton;
    InitialGuessOptions guess;
    /// Reference solution to reuse; solved from a time-integration guess when
    /// unset.
    std::optional<FgpcSolution> reference;
};

/// Cell (H, N) starts Newton from the reference truncated (or zero-padded)
/// to its size; cells are solved concurrently.
ErrorMap convergence_map(const OdeSystem& system, const Distribution& dist, const std::vector<int>& harmonics,
                         const std::vector<int>& degrees, int reference_harmonics, int reference_degree,
                         std::size_t n_samples, std::uint64_t seed, const ConvergenceOptions& options = {});

/// Coefficients of `solution` truncated or zero-padded to (H, N), laid out for `problem`.
Eigen::VectorXd truncated_guess(const FgpcProblem& problem, const FgpcSolution& solution);

/// Deterministic starting point for the Monte-Carlo chain.
struct HbSeed {
    double theta;
    Eigen::MatrixXd slots;
    double omega;
    std::optional<Anchor> anchor;
};

struct McOptions {
    NewtonOptions newton;
    InitialGuessOptions guess;
    /// When set, the chain walks from seed->theta to the first sample in
    /// `seed_substeps` Newton continuations instead of integrating in time.
    std::optional<HbSeed> seed;
    int seed_substeps = 20;
};

struct McResult {
    std::vector<double> thetas;
    std::vector<Eigen::MatrixXd> slots; ///< per sample, last iterate on failure
    std::vector<double> omegas;
    std::vector<bool> converged;
    std::vector<int> iterations;
    std::vector<std::string> failures;
    double seconds = 0.0;
    int samples = 0; ///< N_t

    std::size_t failure_count() const;
};

/// Deterministic HB per sorted sample, each warm-started from the previous root.
McResult mc_oracle(const OdeSystem& system, std::span<const double> sorted_thetas, int harmonics,
                   std::optional<int> samples = std::nullopt, const McOptions& options = {});

/// Values of MC sample i at times (phases when normalized), rows = times.
Eigen::MatrixXd mc_values(const McResult& mc, std::size_t i, std::span<const double> times, bool normalized);

struct PhaseCurve {
    std::vector<double> x, y;
};

struct PhasePortrait {
    int x_state = 0;
    std::optional<int> y_state; ///< unset: velocity of x_state
    PhaseCurve mean, lower, upper;
    double lower_theta = 0.0, upper_theta = 0.0;
};

/// Closed curves over one period: sample mean and the two boundary sample
/// paths.
PhasePortrait phase_portrait(const FgpcSolution& solution, const Distribution& dist, std::size_t n_samples,
                             std::uint64_t seed, int x_state = 0, std::optional<int> y_state = std::nullopt,
                             std::size_t n_points = 257);

double enclosed_area(const PhaseCurve& curve);

std::string moments_csv(const Moments& moments);
std::string summary_csv(const StochasticSummary& summary);
nlohmann::json marginal_json(const Marginal& marginal);
std::string coefficient_grid_csv(const CoefficientGrid& grid);
std::string error_map_csv(const ErrorMap& map);
std::string portrait_csv(const PhasePortrait& portrait);

} // namespace fgpc
