#pragma once

#include "fgpc/cli/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

namespace fgpc::cli {

enum ExitCode : int { success = 0, hard_error = 1, partial = 2 };

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output_dir;
};

/// Runs the configured pipeline. Artifacts are staged in "<out>.partial" and
/// moved to <out> at the end; a previous run directory (one holding a
/// manifest.json) is replaced. On a hard error nothing is left behind.
int run(const std::filesystem::path& config_path, const RunOverrides& overrides, std::ostream& log);

/// Same, for an already parsed configuration.
int run(const ExperimentConfig& config, const std::filesystem::path& output_dir, std::ostream& log);

/// Prints the violations (or "valid"); returns 0 when valid, 1 otherwise.
int validate(const std::filesystem::path& config_path, std::ostream& out);

} // namespace fgpc::cli
