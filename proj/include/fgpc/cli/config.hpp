#pragma once

#include "fgpc/continuation.hpp"
#include "fgpc/error.hpp"
#include "fgpc/newton.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fgpc::cli {

struct SystemConfig {
    std::string name;
    std::map<std::string, double> parameters;
    std::string uncertain;
};

struct DistributionConfig {
    std::string family;
    std::vector<double> parameters;
};

struct DiscretizationConfig {
    int harmonics = 0;
    int degree = 0;
    std::optional<int> time_samples;
    std::optional<int> quadrature_nodes;
};

struct SolverConfig {
    double tolerance = 1e-10;
    int max_iterations = 50;
    bool zero_guess = false;
    double integration_periods = 300.0;
    double integration_rtol = 1e-9;
    std::vector<double> initial_state;
    std::optional<double> period_hint;
    int anchor_state = 0;
};

struct DeflationSettings {
    bool enabled = false;
    DeflationConfig config;
    std::size_t max_solutions = 3;
};

struct MomentsRequest {
    int points = 201;
};
struct SummaryRequest {
    std::size_t samples = 100000;
    int points = 201;
};
struct MarginalRequest {
    double time = 0.0;
    std::size_t samples = 100000;
    std::optional<int> bins;
    int state = 0;
};
struct ConvergenceRequest {
    std::vector<int> harmonics, degrees;
    int reference_harmonics = 0, reference_degree = 0;
    std::size_t samples = 1000;
};
struct McRequest {
    std::size_t samples = 10000;
    int points = 201;
};
struct PortraitRequest {
    std::size_t samples = 10000;
    int points = 257;
    int x_state = 0;
    std::optional<int> y_state;
};
struct ContinuationRequest {
    double omega_start = 0.0, omega_end = 0.0;
    std::vector<double> theta_values;
    ContinuationOptions options;
};

struct AnalysisRequests {
    std::size_t branch = 0; ///< index into the solutions sorted by amplitude
    std::optional<MomentsRequest> moments;
    std::optional<SummaryRequest> summary;
    std::optional<MarginalRequest> marginal;
    bool coefficient_grid = false;
    std::optional<ConvergenceRequest> convergence_map;
    std::optional<McRequest> mc_oracle;
    std::optional<PortraitRequest> phase_portrait;
    std::optional<ContinuationRequest> continuation;

    bool need_solution() const
    {
        return moments || summary || marginal || coefficient_grid || mc_oracle || phase_portrait;
    }
};

struct ExperimentConfig {
    SystemConfig system;
    std::optional<DistributionConfig> distribution;
    DiscretizationConfig discretization;
    SolverConfig solver;
    DeflationSettings deflation;
    AnalysisRequests analyses;
    std::uint64_t seed = 0;
    std::string output_dir;
    nlohmann::json source; ///< the document as read
};

struct Violation {
    std::string path;    ///< JSON-pointer style location of the offending key
    std::string message;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Reads and parses the JSON document; syntax errors become a ConfigError.
nlohmann::json load_config_document(const std::filesystem::path& path);

/// Schema and consistency check without any computation; empty when valid.
std::vector<Violation> validate_config(const nlohmann::json& document);

/// Throws ConfigError listing every violation.
ExperimentConfig parse_config(const nlohmann::json& document);

} // namespace fgpc::cli
