#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "lightyear/config.hpp"
#include "lightyear/runio.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic simulator for decentralized federated learning "
                 "with agreement-based update selection"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis_name, report_dir;

    CLI::App* run = app.add_subcommand("run", "Run one experiment and write rounds.csv + summary.json");
    run->add_option("--config", config_path, "JSON experiment config")->required();
    run->add_option("--out", out_dir, "Output directory")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "Run a sweep along one axis");
    sweep->add_option("--config", config_path, "JSON experiment config")->required();
    sweep->add_option("--axis", axis_name, "attackers | sensitivity | gamma")->required();
    sweep->add_option("--out", out_dir, "Output directory")->required();

    CLI::App* report = app.add_subcommand("report", "Aggregate finished runs under a directory");
    report->add_option("dir", report_dir, "Directory containing run outputs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        // CLI11 returns 0 for --help; anything else is a usage error.
        return rc == 0 ? 0 : kExitConfigError;
    }

    try {
        if (run->parsed()) {
            const lightyear::ExperimentConfig cfg = lightyear::parse_config(config_path);
            lightyear::cmd_run(cfg, out_dir);
            std::printf("run %s -> %s\n", lightyear::run_id(cfg).c_str(), out_dir.c_str());
        } else if (sweep->parsed()) {
            const lightyear::ExperimentConfig cfg = lightyear::parse_config(config_path);
            const lightyear::SweepAxis axis = lightyear::parse_axis(axis_name);
            lightyear::cmd_sweep(cfg, axis, out_dir);
            std::printf("sweep %s (%s) -> %s\n", lightyear::run_id(cfg).c_str(), axis_name.c_str(),
                        out_dir.c_str());
        } else if (report->parsed()) {
            std::string rendered;
            lightyear::cmd_report(report_dir, rendered);
            std::fputs(rendered.c_str(), stdout);
        }
    } catch (const lightyear::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntimeError;
    }
    return 0;
}
