#pragma once

#include <string>
#include <vector>

#include "lightyear/config.hpp"
#include "lightyear/sim.hpp"

namespace lightyear {

enum class SweepAxis { attackers, sensitivity, gamma };

// Runs one experiment and writes <out_dir>/rounds.csv and summary.json.
// Files land atomically: written to temporaries first, renamed only after
// both succeed, so a failed run leaves no partial outputs.
void cmd_run(const ExperimentConfig& cfg, const std::string& out_dir);

// Runs a sweep along one axis; the cell coordinates are prepended as CSV
// columns (k / s,k / gamma).
void cmd_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::string& out_dir);

struct ReportRow {
    std::string method;
    int n_malfunctioning = 0;
    int n_runs = 0;
    double mean_final_test_accuracy = 0.0;  // percent
    double std_final_test_accuracy = 0.0;   // percent, sample std (0 for one run)
};

// Scans a directory tree for completed runs and aggregates final-round test
// accuracy per (method, attacker count). Returns the table and writes
// report.csv under `dir`; `rendered` receives the aligned text table.
std::vector<ReportRow> cmd_report(const std::string& dir, std::string& rendered);

std::string format_mean_std(double mean_pct, double std_pct);  // "84.7 ± 7.3"

// rounds.csv serialization, exposed for tests: byte-stable for a given log.
std::string rounds_csv(const ExperimentConfig& cfg, const std::vector<RoundLog>& logs,
                       const std::vector<std::pair<std::string, std::string>>& extra_columns = {});

SweepAxis parse_axis(const std::string& name);

}  // namespace lightyear
