#include "artifacts.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ifcable/errors.hpp"

namespace ifcable::cli {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("artifacts: cannot open for writing: " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw ConfigError("artifacts: row width does not match header: " + path);
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
    if (!out) throw ConfigError("artifacts: write failed: " + path);
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("artifacts: cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw ConfigError("artifacts: write failed: " + path);
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("artifacts: cannot create directory " + dir + ": " + ec.message());
}

}  // namespace ifcable::cli
