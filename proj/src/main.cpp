#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "ifcable/errors.hpp"
#include "studies.hpp"

namespace {

constexpr const char* kFooter =
    "Exit codes: 0 all declared checks pass; 1 a declared check failed;\n"
    "2 runtime abort (solver blow-up or numerical failure); 3 bad usage or config.";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interferential-cable studies: simulation, averaging checks, and certification"};
    app.footer(kFooter);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 0;
    long long seed = -1;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory (overrides output.directory)");
    app.add_option("--threads", threads, "worker threads for independent study points");
    app.add_option("--seed", seed,
                   "jitter seed for certification face sampling (0 = deterministic grid)");

    const char* kinds[] = {"equilibrium", "admissible",  "rectangle", "simulate",
                           "average-check", "oscillatory", "sweep"};
    const char* briefs[] = {"voltage equilibrium report",
                            "admissibility of (beta, gamma)",
                            "contracting-rectangle certification",
                            "time integration of one system",
                            "averaged-system derivation residuals",
                            "oscillatory-integral decay rates",
                            "carrier-frequency approximation sweep"};
    for (int i = 0; i < 7; ++i) app.add_subcommand(kinds[i], briefs[i])->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    try {
        ifcable::cli::RunConfig cfg = ifcable::cli::load_config(config_path);
        cfg.study.kind = app.get_subcommands().front()->get_name();
        if (cfg.study.kind == "sweep" && cfg.study.omega_list.empty())
            throw ifcable::ConfigError(
                "config validation: study.omega_list: required for sweep studies");
        if (!out_dir.empty()) cfg.output.directory = out_dir;
        if (threads > 0) cfg.threads = threads;
        if (seed >= 0) cfg.seed = unsigned(seed);

        const auto outcome = ifcable::cli::run_study(cfg);
        for (const auto& [name, ok] : outcome.manifest.at("checks").items())
            std::printf("CHECK %s: %s\n", name.c_str(), ok.get<bool>() ? "PASS" : "FAIL");
        if (outcome.manifest.contains("error"))
            std::fprintf(stderr, "aborted: %s\n",
                         outcome.manifest.at("error").at("what").get<std::string>().c_str());
        std::printf("artifacts: %s\n", cfg.output.directory.c_str());
        return outcome.exit_code;
    } catch (const ifcable::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 3;
    } catch (const ifcable::BlowUpError& e) {
        std::fprintf(stderr, "blow-up: %s\n", e.what());
        return 2;
    } catch (const ifcable::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 2;
    }
}
