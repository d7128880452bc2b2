#pragma once

#include <string>
#include <vector>

#include "ifcable/model.hpp"
#include "ifcable/solver.hpp"
#include "ifcable/source.hpp"
#include "json.hpp"

namespace ifcable::cli {

struct GridConfig {
    double half_extent{-1};  // <= 0 selects the source-derived default
    long n_points{4001};
};

struct DtPolicy {
    int fast_steps_per_period{40};   // per 2 pi / omega2 (full and error systems)
    int slow_steps_per_period{200};  // per 2 pi / eta (averaged system)
};

struct TimeConfig {
    double T{20};
    DtPolicy dt_policy{};
    long sample_every{0};  // 0 selects roughly 200 samples per run
};

struct StudyConfig {
    std::string kind;

    // rectangle certification
    double Delta{-1};  // < 0 selects the source amplitude bound
    double bound{0.5};
    long x_samples{2001};
    long t_samples{200};
    double invariance_T{-1};  // <= 0 selects 100/eta
    double initial_gauge{0.5};

    // simulate
    std::string system{"full"};
    std::string initial{"zero"};  // zero | bump (relative to the rest state)
    double bump_amp1{0.1};
    double bump_amp2{0};
    double bump_width{2};
    double source_dump_time{0};

    // average-check
    std::vector<double> V_values{-0.3, 0.1, 0.4};
    std::vector<double> x_values{0.3, 0.7, 1.3};
    std::vector<double> t_values;  // empty selects {10,25,40} * 2pi/100
    double W{0.05};

    // sweep / average-check / oscillatory
    std::vector<double> omega_list;
    double sample_interval{-1};  // <= 0 selects T/400
    double monitor_bound{0};     // > 0 certifies a rectangle and monitors gauge

    // oscillatory
    double d{1};
    std::string profile{"both"};  // constant | gaussian_cos | both
    double x{0};
    double t{2};
};

struct OutputConfig {
    std::string directory{"out"};
    std::vector<std::string> formats{"csv", "json"};
};

struct RunConfig {
    model::ModelParams<double> model{};
    source::SourceParams<double> source{};
    GridConfig grid{};
    TimeConfig time{};
    StudyConfig study{};
    OutputConfig output{};
    int threads{1};
    unsigned seed{0};
};

/// @brief Parses and validates a run configuration; every violation names the
/// offending field path.
RunConfig parse_config(const nlohmann::ordered_json& root);

/// @brief Reads a JSON config file. Parse failures carry line/column.
RunConfig load_config(const std::string& path);

/// Effective (defaults-filled) configuration, echoed into run manifests.
nlohmann::ordered_json echo_config(const RunConfig& cfg);

/// Grid with the source-derived default half extent applied.
solver::Grid<double> effective_grid(const RunConfig& cfg);

}  // namespace ifcable::cli
