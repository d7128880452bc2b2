#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace ifcable::cli {

/// Shortest round-trip decimal form of a double (deterministic across runs).
std::string format_double(double v);

/// @brief Writes a CSV file with %.17g-style numeric cells; one writer per
/// artifact, rows emitted in a fixed order so reruns are bit-identical.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_json(const std::string& path, const nlohmann::ordered_json& j);

/// Creates the directory (and parents) if needed; throws ConfigError on failure.
void ensure_directory(const std::string& dir);

}  // namespace ifcable::cli
