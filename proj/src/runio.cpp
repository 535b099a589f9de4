#include "lightyear/runio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace lightyear {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string csv_header(const std::vector<std::string>& extra_names) {
    std::string h;
    for (const std::string& n : extra_names) h += n + ",";
    h += "run_id,round,client_id,method,attack_kind,n_malfunctioning,test_acc,val_acc,ece,"
         "selected_set,composite_scores\n";
    return h;
}

void append_rows(std::string& out, const std::string& rid, const ExperimentConfig& cfg,
                 const std::vector<RoundLog>& logs, const std::vector<std::string>& extra_values) {
    std::string prefix;
    for (const std::string& v : extra_values) prefix += v + ",";
    const std::string method = to_string(cfg.method);
    for (const RoundLog& log : logs) {
        for (const ClientRound& c : log.clients) {
            out += prefix;
            out += rid;
            out += ',' + std::to_string(log.round);
            out += ',' + std::to_string(c.client_id);
            out += ',' + method;
            out += ',' + to_string(c.attack_kind);
            out += ',' + std::to_string(cfg.n_malfunctioning);
            out += ',' + g6(c.test_accuracy);
            out += ',' + g6(c.val_accuracy);
            out += ',' + g6(c.ece);
            out += ',';
            bool first = true;
            for (const int j : c.selected) {
                if (!first) out += ';';
                out += std::to_string(j);
                first = false;
            }
            out += ',';
            first = true;
            for (const auto& [peer, score] : c.composite_scores) {
                if (!first) out += ';';
                out += std::to_string(peer) + '=' + g6(score);
                first = false;
            }
            out += '\n';
        }
    }
}

// Writes every file through a temporary name and renames only after all
// writes succeeded, so a failure can never leave a partial output behind.
class AtomicDirWriter {
public:
    explicit AtomicDirWriter(const std::string& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
    }

    ~AtomicDirWriter() {
        for (const fs::path& tmp : pending_) {
            std::error_code ec;
            fs::remove(tmp, ec);
        }
    }

    void stage(const std::string& filename, const std::string& content) {
        const fs::path tmp = dir_ / (filename + ".tmp");
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.close();
        if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
        pending_.push_back(tmp);
        targets_.push_back(dir_ / filename);
    }

    void commit() {
        for (std::size_t i = 0; i < pending_.size(); ++i) {
            std::error_code ec;
            fs::rename(pending_[i], targets_[i], ec);
            if (ec)
                throw std::runtime_error("cannot finalize '" + targets_[i].string() + "': " + ec.message());
        }
        pending_.clear();
        targets_.clear();
    }

private:
    fs::path dir_;
    std::vector<fs::path> pending_;
    std::vector<fs::path> targets_;
};

json final_round_summary(const std::vector<RoundLog>& logs) {
    const RoundLog& last = logs.back();
    json per_client = json::array();
    for (const ClientRound& c : last.clients) per_client.push_back(c.test_accuracy);
    return {{"round", last.round},
            {"mean_test_accuracy", mean_test_accuracy(last)},
            {"mean_val_accuracy", mean_val_accuracy(last)},
            {"per_client_test_accuracy", per_client}};
}

}  // namespace

std::string rounds_csv(const ExperimentConfig& cfg, const std::vector<RoundLog>& logs,
                       const std::vector<std::pair<std::string, std::string>>& extra_columns) {
    std::vector<std::string> names, values;
    for (const auto& [n, v] : extra_columns) {
        names.push_back(n);
        values.push_back(v);
    }
    std::string out = csv_header(names);
    append_rows(out, run_id(cfg), cfg, logs, values);
    return out;
}

void cmd_run(const ExperimentConfig& cfg, const std::string& out_dir) {
    Federation fed(cfg);
    const std::vector<RoundLog> logs = fed.run_all();

    json summary;
    summary["run_id"] = run_id(cfg);
    summary["config"] = json::parse(config_to_json(cfg));
    json attackers = json::array();
    for (const int id : fed.malfunctioning()) attackers.push_back(id);
    summary["malfunctioning_ids"] = attackers;
    summary["rounds_completed"] = static_cast<int>(logs.size());
    summary["final"] = final_round_summary(logs);

    AtomicDirWriter writer(out_dir);
    writer.stage("rounds.csv", rounds_csv(cfg, logs));
    writer.stage("summary.json", summary.dump(2) + "\n");
    writer.commit();
}

void cmd_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::string& out_dir) {
    std::string csv;
    json cells = json::array();
    std::string axis_name;

    switch (axis) {
        case SweepAxis::attackers: {
            axis_name = "attackers";
            csv = csv_header({"k"});
            for (const AttackerSweepCell& cell : attacker_sweep(cfg, cfg.sweep.max_attackers)) {
                ExperimentConfig cell_cfg = cfg;
                cell_cfg.n_malfunctioning = cell.n_malfunctioning;
                append_rows(csv, run_id(cell_cfg), cell_cfg, cell.logs,
                            {std::to_string(cell.n_malfunctioning)});
                json ids = json::array();
                for (const int id : cell.attacker_ids) ids.push_back(id);
                cells.push_back({{"k", cell.n_malfunctioning},
                                 {"attacker_ids", ids},
                                 {"run_id", run_id(cell_cfg)},
                                 {"final_mean_test_accuracy", cell.final_mean_test_accuracy}});
            }
            break;
        }
        case SweepAxis::sensitivity: {
            axis_name = "sensitivity";
            csv = csv_header({"s", "k"});
            for (const SensitivityCell& cell :
                 sensitivity_sweep(cfg, cfg.sweep.s_values, cfg.sweep.attacker_counts)) {
                ExperimentConfig cell_cfg = cfg;
                cell_cfg.attack.ana_scaling_s = cell.ana_scaling_s;
                cell_cfg.n_malfunctioning = cell.n_malfunctioning;
                append_rows(csv, run_id(cell_cfg), cell_cfg, cell.logs,
                            {g6(cell.ana_scaling_s), std::to_string(cell.n_malfunctioning)});
                cells.push_back({{"s", cell.ana_scaling_s},
                                 {"k", cell.n_malfunctioning},
                                 {"run_id", run_id(cell_cfg)},
                                 {"mean_val_accuracy_per_round", cell.mean_val_accuracy_per_round}});
            }
            break;
        }
        case SweepAxis::gamma: {
            axis_name = "gamma";
            csv = csv_header({"gamma"});
            for (const GammaAblationCell& cell : gamma_ablation(cfg, cfg.sweep.gamma_values)) {
                ExperimentConfig cell_cfg = cfg;
                cell_cfg.method = Method::lightyear;
                cell_cfg.agreement.tau = -1.0;
                cell_cfg.lightyear.gamma = cell.gamma;
                append_rows(csv, run_id(cell_cfg), cell_cfg, cell.logs, {g6(cell.gamma)});
                cells.push_back({{"gamma", cell.gamma},
                                 {"run_id", run_id(cell_cfg)},
                                 {"mean_val_accuracy_per_round", cell.mean_val_accuracy_per_round}});
            }
            break;
        }
    }

    json summary;
    summary["axis"] = axis_name;
    summary["base_config"] = json::parse(config_to_json(cfg));
    summary["cells"] = cells;

    AtomicDirWriter writer(out_dir);
    writer.stage("rounds.csv", csv);
    writer.stage("summary.json", summary.dump(2) + "\n");
    writer.commit();
}

std::string format_mean_std(double mean_pct, double std_pct) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f ± %.1f", mean_pct, std_pct);
    return buf;
}

SweepAxis parse_axis(const std::string& name) {
    if (name == "attackers") return SweepAxis::attackers;
    if (name == "sensitivity") return SweepAxis::sensitivity;
    if (name == "gamma") return SweepAxis::gamma;
    throw ConfigError("unknown sweep axis \"" + name + "\"; valid: attackers, sensitivity, gamma");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

struct RunAccumulator {
    std::string method;
    int n_malfunctioning = 0;
    int final_round = -1;
    double acc_sum = 0.0;
    int acc_count = 0;
};

}  // namespace

std::vector<ReportRow> cmd_report(const std::string& dir, std::string& rendered) {
    if (!fs::exists(dir)) throw ConfigError("report: directory '" + dir + "' does not exist");

    std::vector<fs::path> csv_files;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().filename() == "rounds.csv")
            csv_files.push_back(entry.path());
    std::sort(csv_files.begin(), csv_files.end());
    if (csv_files.empty()) throw ConfigError("report: no rounds.csv found under '" + dir + "'");

    // Pass 1 per file: final-round mean test accuracy per run_id.
    std::map<std::pair<std::string, int>, std::vector<double>> by_cell;  // (method, k) -> finals
    for (const fs::path& file : csv_files) {
        std::ifstream in(file);
        if (!in) throw std::runtime_error("report: cannot open '" + file.string() + "'");
        std::string line;
        if (!std::getline(in, line)) throw std::runtime_error("report: '" + file.string() + "' is empty");
        const std::vector<std::string> header = split_csv_line(line);
        auto col = [&](const std::string& name) {
            const auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end())
                throw std::runtime_error("report: '" + file.string() + "' lacks column '" + name + "'");
            return static_cast<std::size_t>(it - header.begin());
        };
        const std::size_t c_rid = col("run_id"), c_round = col("round"), c_method = col("method"),
                          c_k = col("n_malfunctioning"), c_acc = col("test_acc");

        std::map<std::string, std::map<int, RunAccumulator>> runs;  // run_id -> round -> acc
        for (int line_no = 2; std::getline(in, line); ++line_no) {
            if (line.empty()) continue;
            const std::vector<std::string> f = split_csv_line(line);
            if (f.size() != header.size())
                throw std::runtime_error("report: '" + file.string() + "' line " + std::to_string(line_no) +
                                         " is malformed");
            try {
                const int round = std::stoi(f[c_round]);
                RunAccumulator& acc = runs[f[c_rid]][round];
                acc.method = f[c_method];
                acc.n_malfunctioning = std::stoi(f[c_k]);
                acc.acc_sum += std::stod(f[c_acc]);
                acc.acc_count += 1;
            } catch (const std::exception&) {
                throw std::runtime_error("report: '" + file.string() + "' line " + std::to_string(line_no) +
                                         " has non-numeric values");
            }
        }
        for (const auto& [rid, rounds] : runs) {
            const RunAccumulator& last = rounds.rbegin()->second;
            by_cell[{last.method, last.n_malfunctioning}].push_back(100.0 * last.acc_sum / last.acc_count);
        }
    }

    std::vector<ReportRow> rows;
    for (const auto& [key, finals] : by_cell) {
        ReportRow r;
        r.method = key.first;
        r.n_malfunctioning = key.second;
        r.n_runs = static_cast<int>(finals.size());
        double mean = 0.0;
        for (const double v : finals) mean += v;
        mean /= static_cast<double>(finals.size());
        double var = 0.0;
        if (finals.size() > 1) {
            for (const double v : finals) var += (v - mean) * (v - mean);
            var /= static_cast<double>(finals.size() - 1);
        }
        r.mean_final_test_accuracy = mean;
        r.std_final_test_accuracy = std::sqrt(var);
        rows.push_back(r);
    }

    std::ostringstream text;
    std::string report_csv = "method,n_malfunctioning,n_runs,final_test_acc_mean_pct,final_test_acc_std_pct\n";
    text << "method      k  runs  final test acc (%)\n";
    text << "---------  --  ----  ------------------\n";
    for (const ReportRow& r : rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-9s  %2d  %4d  %s\n", r.method.c_str(), r.n_malfunctioning,
                      r.n_runs, format_mean_std(r.mean_final_test_accuracy, r.std_final_test_accuracy).c_str());
        text << line;
        report_csv += r.method + "," + std::to_string(r.n_malfunctioning) + "," + std::to_string(r.n_runs) +
                      "," + g6(r.mean_final_test_accuracy) + "," + g6(r.std_final_test_accuracy) + "\n";
    }
    rendered = text.str();

    AtomicDirWriter writer(dir);
    writer.stage("report.csv", report_csv);
    writer.commit();
    return rows;
}

}  // namespace lightyear
