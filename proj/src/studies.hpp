#pragma once

#include "config.hpp"
#include "json.hpp"

namespace ifcable::cli {

struct StudyOutcome {
    int exit_code{};  // 0 all checks pass, 1 check failure, 2 runtime abort
    nlohmann::ordered_json manifest;
};

/// @brief Runs the configured study, writes its artifacts plus manifest.json
/// into the output directory, and reports the aggregate check verdict.
StudyOutcome run_study(const RunConfig& cfg);

}  // namespace ifcable::cli
