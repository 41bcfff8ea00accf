// laxsched: experiment runner for deadline-aware flow-level scheduling.
//
//   laxsched gains --out gains.csv [--k-max 64] [--samples 1000000] [--seed 1]
//   laxsched run --config exp.cfg [--out runs.csv] [--seed N] [--jobs N] [--trace]
//   laxsched oracle-check --config exp.cfg [--out feas.csv] [--trace]
//   laxsched reproduce fig2a --out DIR [--gains gains.csv] [--replications N]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "laxsched.hpp"

namespace fs = std::filesystem;
using namespace laxsched;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& contents) {
    if (path.empty() || path == "-") {
        std::cout << contents;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write '" + path + "'");
    out << contents;
    if (!out) throw RuntimeFailure("write failed for '" + path + "'");
}

std::string slug(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int cmd_gains(int k_max, long long samples, std::uint64_t seed, double sinr_db, const std::string& out) {
    const auto profile = estimate_gains(db_to_linear(sinr_db), k_max, samples, seed);
    std::ostringstream ss;
    write_gain_table(ss, profile);
    write_file(out, ss.str());
    return 0;
}

ExperimentConfig configured(const std::string& path, const std::string& out, const std::string& seed_flag) {
    auto cfg = load_config(path);
    if (!seed_flag.empty()) cfg.base_seed = std::stoull(seed_flag);
    if (!out.empty()) cfg.output = out;
    return cfg;
}

int cmd_run(ExperimentConfig cfg, int jobs, bool trace) {
    std::optional<GainProfile> gains;
    if (cfg.mode == SimMode::Fluid) gains = resolve_gains(cfg);
    TraceSink sink;
    fs::path trace_dir;
    if (trace) {
        trace_dir = (cfg.output.empty() || cfg.output == "-") ? fs::path("traces") : fs::path(cfg.output + ".traces");
        fs::create_directories(trace_dir);
        sink = [&](const RunRow& row, const SimReport& report) {
            std::ostringstream ss;
            write_slot_trace(ss, report);
            write_file((trace_dir / ("v" + slug(row.sweep_value) + "_r" + std::to_string(row.replication) + "_" +
                                     row.policy + ".csv"))
                           .string(),
                       ss.str());
        };
    }
    const auto rows = run_experiment(cfg, gains ? &*gains : nullptr, jobs, sink);
    std::ostringstream ss;
    write_run_csv(ss, rows);
    write_file(cfg.output, ss.str());
    return 0;
}

int cmd_oracle_check(ExperimentConfig cfg, int jobs, bool dump) {
    const auto gains = resolve_gains(cfg);
    const auto rows = run_oracle_check(cfg, gains, jobs);
    std::ostringstream ss;
    write_oracle_csv(ss, rows);
    write_file(cfg.output, ss.str());
    if (dump) {
        const fs::path dir = (cfg.output.empty() || cfg.output == "-") ? fs::path("oracle") : fs::path(cfg.output + ".oracle");
        fs::create_directories(dir);
        for (const auto& r : rows) {
            std::ostringstream d;
            write_oracle_dump(d, r.problem, r.result);
            write_file((dir / ("v" + slug(r.sweep_value) + "_r" + std::to_string(r.replication) + ".txt")).string(),
                       d.str());
        }
    }
    return 0;
}

int cmd_reproduce(const std::string& figure, const std::string& out_dir, const std::string& gains_path,
                  std::uint64_t seed, int replications, int jobs) {
    auto presets = reproduce_presets(figure, seed, replications);
    std::optional<GainProfile> gains;
    std::vector<RunRow> rows;
    for (auto& cfg : presets) {
        if (cfg.mode == SimMode::Fluid && !gains) {
            cfg.gains_table = gains_path;
            gains = resolve_gains(cfg);
        }
        auto part = run_experiment(cfg, gains ? &*gains : nullptr, jobs);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    std::stable_sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) {
        if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
        return a.replication < b.replication;
    });
    fs::create_directories(out_dir);
    std::ostringstream runs;
    write_run_csv(runs, rows);
    write_file((fs::path(out_dir) / (figure + "_runs.csv")).string(), runs.str());
    std::ostringstream summary;
    write_summary_csv(summary, summarize(rows));
    write_file((fs::path(out_dir) / (figure + "_summary.csv")).string(), summary.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deadline-aware flow-level scheduling simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string seed_flag;
    int jobs = 1;
    bool trace = false;

    auto* gains_cmd = app.add_subcommand("gains", "Estimate the multi-user diversity gain table");
    int k_max = 64;
    long long samples = 1000000;
    std::uint64_t gains_seed = 1;
    double sinr_db = 0.0;
    gains_cmd->add_option("--out", out_path, "Output path ('-' for stdout)")->required();
    gains_cmd->add_option("--k-max", k_max, "Largest active-user count")->check(CLI::Range(1, 4096));
    gains_cmd->add_option("--samples", samples, "Monte-Carlo samples (>= 10000)");
    gains_cmd->add_option("--seed", gains_seed, "RNG seed");
    gains_cmd->add_option("--sinr-db", sinr_db, "Mean SINR in dB");

    auto* run_cmd = app.add_subcommand("run", "Run a configured sweep and emit one CSV row per run");
    auto* oracle_cmd = app.add_subcommand("oracle-check", "Offline feasibility of identical-deadline instances");
    for (auto* cmd : {run_cmd, oracle_cmd}) {
        cmd->add_option("--config", config_path, "Key-value config file")->required();
        cmd->add_option("--out", out_path, "Output CSV path (overrides config 'output')");
        cmd->add_option("--seed", seed_flag, "Base seed (overrides run.seed)");
        cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_flag("--trace", trace, "Also write per-slot traces / oracle dumps");
    }

    auto* repro_cmd = app.add_subcommand("reproduce", "Run a preset experiment family");
    std::string figure;
    std::string gains_path;
    int replications = 1000;
    std::uint64_t repro_seed = 1;
    repro_cmd->add_option("figure", figure, "fig2a | fig2b | fig3a | fig3b")->required();
    repro_cmd->add_option("--out", out_path, "Output directory")->required();
    repro_cmd->add_option("--gains", gains_path, "Gain table from 'laxsched gains'");
    repro_cmd->add_option("--seed", repro_seed, "Base seed");
    repro_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    repro_cmd->add_option("--replications", replications, "Replications per point")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (gains_cmd->parsed()) return cmd_gains(k_max, samples, gains_seed, sinr_db, out_path);
        if (run_cmd->parsed()) return cmd_run(configured(config_path, out_path, seed_flag), jobs, trace);
        if (oracle_cmd->parsed()) return cmd_oracle_check(configured(config_path, out_path, seed_flag), jobs, trace);
        if (repro_cmd->parsed()) return cmd_reproduce(figure, out_path, gains_path, repro_seed, replications, jobs);
    } catch (const ConfigError& e) {
        std::cerr << "laxsched: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "laxsched: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "laxsched: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
