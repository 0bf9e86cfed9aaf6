#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fgpc {

/// Shortest round-trip decimal form ("%.17g"); identical inputs give
/// identical text on every run.
std::string format_number(double value);

/// Comma-joined row terminated by '\n'.
std::string csv_row(const std::vector<std::string>& cells);
std::string csv_row(const std::vector<double>& values);

/// Writes the file in one go; throws fgpc::Error on I/O failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

} // namespace fgpc
