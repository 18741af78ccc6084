/* polaron <kind> --config <path> [--out <dir>] [--threads <n>] [--seed <u64>]
 * Exit codes: 0 success, 2 validation failure, 3 numerical-guard abort. */

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "polaron/experiment.hpp"
#include "polaron/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral simulator for the tracer-particle/condensate system"};
    app.set_version_flag("--version", polaron::version_string);
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    int threads = 1;
    std::uint64_t seed = 0;
    bool seed_given = false;

    for (const char* kind :
         {"travel", "simulate", "stability", "kernel", "dispersive", "supersonic", "sweep"}) {
        auto* sub = app.add_subcommand(kind);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "sweep worker threads");
        sub->add_option("--seed", seed, "recorded in provenance")
            ->each([&](const std::string&) { seed_given = true; });
    }

    CLI11_PARSE(app, argc, argv);
    std::string kind = app.get_subcommands().front()->get_name();

    try {
        polaron::ExperimentConfig cfg = polaron::ExperimentConfig::from_json_file(config_path);
        cfg.kind = polaron::kind_from_name(kind);
        if (seed_given) cfg.seed = seed;
        polaron::ExperimentResult res = polaron::run_experiment(cfg, out_dir, threads);
        for (const auto& r : res.records)
            std::printf("%-34s %-14.6g %s\n", r.name.c_str(), r.value,
                        r.pass ? "pass" : "FAIL");
        std::printf("report: %s\n", (std::filesystem::path(out_dir) / "report.ndjson").c_str());
        return 0;
    } catch (const polaron::NumericalGuardError& e) {
        std::fprintf(stderr, "numerical guard: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
