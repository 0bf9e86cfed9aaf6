#pragma once

#include "fgpc/fgpc.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace fgpc {

/// Self-describing document: metadata (system, H, N, N_t, N_G, distribution,
/// anchor, forcing frequency) and coefficient data in cosine/sine slot form,
/// indexed [degree][state][slot].
nlohmann::json solution_to_json(const FgpcSolution& solution);
FgpcSolution solution_from_json(const nlohmann::json& document);

void save_solution(const FgpcSolution& solution, const std::filesystem::path& path);
FgpcSolution load_solution(const std::filesystem::path& path);

} // namespace fgpc
