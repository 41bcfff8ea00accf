#ifndef LAXSCHED_EXPERIMENT_HPP
#define LAXSCHED_EXPERIMENT_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "laxsched/capacity.hpp"
#include "laxsched/channel.hpp"
#include "laxsched/engine.hpp"
#include "laxsched/oracle.hpp"
#include "laxsched/policies.hpp"
#include "laxsched/rng.hpp"
#include "laxsched/traffic.hpp"

namespace laxsched {

/// Bad or inconsistent experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SimMode { Fluid, Tdm };
enum class TrafficKind { Identical, Stationary };
enum class SweepVariable { Deadline, Stretch };

struct ExperimentConfig {
    SimMode mode = SimMode::Tdm;
    TrafficKind traffic = TrafficKind::Identical;
    IdenticalDeadlineSpec identical{};
    StationaryArrivalSpec stationary{};
    FileSizeLaw sizes = FileSizeLaw::ftp_default();
    double bandwidth_hz = 800e3;
    double mean_sinr_db = 0.0;
    std::vector<Policy> policies{make_policy(PolicyKind::MaxCI)};
    /// 0 selects 1% of the mean flow service time.
    double slot_length = 0.0;
    SweepVariable sweep = SweepVariable::Deadline;
    std::vector<double> sweep_values{100.0};
    int replications = 1;
    std::uint64_t base_seed = 1;
    int gains_k_max = 64;
    long long gains_samples = 1000000;
    std::uint64_t gains_seed = 1;
    std::string gains_table;
    std::string output;

    ChannelModel channel() const { return ChannelModel(bandwidth_hz, db_to_linear(mean_sinr_db)); }

    double effective_slot_length() const {
        if (slot_length > 0.0) return slot_length;
        return 0.01 * sizes.mean * kBitsPerMegabyte / channel().mean_rate();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    }
}

inline long long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
    }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const auto d = std::stoull(v, &pos);
        if (pos != v.size() || v.front() == '-') throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects an unsigned integer, got '" + v + "'");
    }
}

}  // namespace detail

/// Flat "section.key = value" lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
    }
    return kv;
}

inline ExperimentConfig config_from_key_values(const std::map<std::string, std::string>& kv) {
    ExperimentConfig c;
    FrameworkParams common;
    MaxWeightUrgency mw;
    ExpUrgency ex;
    LogUrgency lg;
    std::vector<std::string> policy_names{"max-ci"};
    std::string mode = "tdm";
    std::string traffic = "identical";
    std::string sweep = "deadline";
    double size_mean = 2.0, size_std = 0.722, size_max = 5.0;

    for (const auto& [key, v] : kv) {
        using detail::to_double;
        using detail::to_int;
        if (key == "mode") mode = v;
        else if (key == "traffic.kind") traffic = v;
        else if (key == "traffic.m") c.identical.user_count = static_cast<int>(to_int(key, v));
        else if (key == "traffic.a") c.identical.arrival_spread = to_double(key, v);
        else if (key == "traffic.deadline") c.identical.deadline = to_double(key, v);
        else if (key == "traffic.rate") c.stationary.rate = to_double(key, v);
        else if (key == "traffic.stretch") c.stationary.stretch = to_double(key, v);
        else if (key == "traffic.horizon") c.stationary.horizon = to_double(key, v);
        else if (key == "size.mean_mb") size_mean = to_double(key, v);
        else if (key == "size.std_mb") size_std = to_double(key, v);
        else if (key == "size.max_mb") size_max = to_double(key, v);
        else if (key == "channel.bandwidth_hz") c.bandwidth_hz = to_double(key, v);
        else if (key == "channel.mean_sinr_db") c.mean_sinr_db = to_double(key, v);
        else if (key == "policy.names") policy_names = detail::split_list(v);
        else if (key == "policy.delta") common.delta = to_double(key, v);
        else if (key == "policy.epsilon") common.epsilon = to_double(key, v);
        else if (key == "policy.kappa") common.kappa = to_double(key, v);
        else if (key == "policy.alpha") mw.alpha = to_double(key, v);
        else if (key == "policy.exp_beta") ex.beta = to_double(key, v);
        else if (key == "policy.exp_zeta") ex.zeta = to_double(key, v);
        else if (key == "policy.exp_eta") ex.eta = to_double(key, v);
        else if (key == "policy.log_beta") lg.beta = to_double(key, v);
        else if (key == "policy.log_zeta") lg.zeta = to_double(key, v);
        else if (key == "sim.slot_length") c.slot_length = to_double(key, v);
        else if (key == "sweep.variable") sweep = v;
        else if (key == "sweep.values") {
            c.sweep_values.clear();
            for (const auto& item : detail::split_list(v)) c.sweep_values.push_back(to_double(key, item));
        }
        else if (key == "run.replications") c.replications = static_cast<int>(to_int(key, v));
        else if (key == "run.seed") c.base_seed = detail::to_u64(key, v);
        else if (key == "gains.k_max") c.gains_k_max = static_cast<int>(to_int(key, v));
        else if (key == "gains.samples") c.gains_samples = to_int(key, v);
        else if (key == "gains.seed") c.gains_seed = detail::to_u64(key, v);
        else if (key == "gains.table") c.gains_table = v;
        else if (key == "output") c.output = v;
        else throw ConfigError("config: unknown key '" + key + "'");
    }

    if (mode == "fluid") c.mode = SimMode::Fluid;
    else if (mode == "tdm") c.mode = SimMode::Tdm;
    else throw ConfigError("config: mode must be fluid or tdm");
    if (traffic == "identical") c.traffic = TrafficKind::Identical;
    else if (traffic == "stationary") c.traffic = TrafficKind::Stationary;
    else throw ConfigError("config: traffic.kind must be identical or stationary");
    if (sweep == "deadline") c.sweep = SweepVariable::Deadline;
    else if (sweep == "stretch") c.sweep = SweepVariable::Stretch;
    else throw ConfigError("config: sweep.variable must be deadline or stretch");

    try {
        c.sizes = FileSizeLaw::from_moments(size_mean, size_std, size_max);
        c.policies.clear();
        if (policy_names.empty()) throw ConfigError("config: policy.names is empty");
        for (const auto& name : policy_names) {
            const auto kind = parse_policy_kind(name);
            FrameworkParams p = common;
            if (kind == PolicyKind::LMaxWeight) p.urgency = mw;
            if (kind == PolicyKind::LExp) p.urgency = ex;
            if (kind == PolicyKind::LLog) p.urgency = lg;
            c.policies.push_back(make_policy(kind, p));
        }
        (void)c.channel();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

/// Cross-field checks shared by every subcommand.
inline void validate(const ExperimentConfig& c) {
    if (c.replications < 1) throw ConfigError("config: run.replications must be >= 1");
    if (c.sweep_values.empty()) throw ConfigError("config: sweep.values must be non-empty");
    if (!std::is_sorted(c.sweep_values.begin(), c.sweep_values.end())) {
        throw ConfigError("config: sweep.values must be sorted");
    }
    if (c.slot_length < 0.0) throw ConfigError("config: sim.slot_length must be > 0");
    if (c.traffic == TrafficKind::Identical && c.sweep != SweepVariable::Deadline) {
        throw ConfigError("config: identical-deadline traffic sweeps the deadline");
    }
    if (c.traffic == TrafficKind::Stationary && c.sweep != SweepVariable::Stretch) {
        throw ConfigError("config: stationary traffic sweeps the stretch factor");
    }
    for (const auto& p : c.policies) {
        if (c.mode == SimMode::Fluid && !p.is_fluid()) {
            throw ConfigError("config: fluid mode only runs l2hpr, got " + std::string(policy_name(p.kind)));
        }
        if (c.mode == SimMode::Tdm && p.is_fluid()) {
            throw ConfigError("config: l2hpr needs mode = fluid");
        }
    }
    if (c.mode == SimMode::Fluid && c.traffic != TrafficKind::Identical) {
        throw ConfigError("config: fluid mode requires identical-deadline traffic");
    }
    try {
        if (c.traffic == TrafficKind::Identical) {
            for (double v : c.sweep_values) {
                auto s = c.identical;
                s.deadline = v;
                laxsched::validate(s);
            }
        } else {
            for (double v : c.sweep_values) {
                auto s = c.stationary;
                s.stretch = v;
                laxsched::validate(s);
            }
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.mode == SimMode::Fluid && c.identical.user_count > c.gains_k_max && c.gains_table.empty()) {
        throw ConfigError("config: traffic.m exceeds gains.k_max");
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    auto c = config_from_key_values(parse_key_values(in));
    validate(c);
    return c;
}

/// Gain table from gains.table if set, otherwise a fresh estimate.
inline GainProfile resolve_gains(const ExperimentConfig& c) {
    if (!c.gains_table.empty()) {
        std::ifstream in(c.gains_table);
        if (!in) throw ConfigError("cannot open gain table '" + c.gains_table + "'");
        try {
            return read_gain_table(in);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("gain table: ") + e.what());
        }
    }
    return estimate_gains(db_to_linear(c.mean_sinr_db), c.gains_k_max, c.gains_samples, c.gains_seed);
}

/// Seed for replication r; independent of the sweep value so every sweep
/// point sees the same sizes.
inline std::uint64_t replication_seed(std::uint64_t base_seed, int replication) {
    return split_seed(base_seed, static_cast<std::uint64_t>(replication));
}

inline std::vector<DownloadRequest> generate_instance(const ExperimentConfig& c, double sweep_value,
                                                      std::uint64_t seed) {
    auto rng = make_rng(seed, 1);
    const double mean_rate = c.channel().mean_rate();
    if (c.traffic == TrafficKind::Identical) {
        auto spec = c.identical;
        spec.deadline = sweep_value;
        return gen_identical_deadline(spec, c.sizes, mean_rate, rng);
    }
    auto spec = c.stationary;
    spec.stretch = sweep_value;
    return gen_stationary(spec, c.sizes, mean_rate, rng);
}

struct RunRow {
    double sweep_value = 0.0;
    int replication = 0;
    std::uint64_t seed = 0;
    std::string policy;
    int n_users = 0;
    int n_completed = 0;
    int n_expired = 0;
    bool schedulable = true;
    double violation_rate = 0.0;
};

namespace detail {

/// Runs fn(task) for task in [0, count) on `jobs` threads.
template <class Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < count; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
                next = count;
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace detail

using TraceSink = std::function<void(const RunRow&, const SimReport&)>;

/// One row per (sweep value, replication, policy), in that order no matter
/// how many jobs run. `gains` is needed only for fluid mode.
inline std::vector<RunRow> run_experiment(const ExperimentConfig& c, const GainProfile* gains, int jobs = 1,
                                          const TraceSink& trace_sink = {}) {
    validate(c);
    if (c.mode == SimMode::Fluid && gains == nullptr) {
        throw std::invalid_argument("run_experiment: fluid mode needs a gain profile");
    }
    const auto channel = c.channel();
    const double dt = c.effective_slot_length();
    const std::size_t np = c.policies.size();
    const std::size_t reps = static_cast<std::size_t>(c.replications);
    const std::size_t tasks = c.sweep_values.size() * reps;
    std::vector<RunRow> rows(tasks * np);
    std::mutex sink_mutex;
    detail::parallel_for(tasks, jobs, [&](std::size_t task) {
        const double value = c.sweep_values[task / reps];
        const int rep = static_cast<int>(task % reps);
        const auto seed = replication_seed(c.base_seed, rep);
        const auto requests = generate_instance(c, value, seed);
        for (std::size_t k = 0; k < np; ++k) {
            const Policy& pol = c.policies[k];
            SimReport report;
            if (pol.is_fluid()) {
                report = run_fluid(requests, *gains, dt, {static_cast<bool>(trace_sink), false});
            } else {
                report = run_tdm(requests, channel, pol, dt, split_seed(seed, 2), static_cast<bool>(trace_sink));
            }
            RunRow row{value,
                       rep,
                       seed,
                       std::string(policy_name(pol.kind)),
                       report.n_users,
                       report.n_completed,
                       report.n_expired,
                       report.schedulable,
                       report.violation_rate()};
            if (trace_sink) {
                std::lock_guard lock(sink_mutex);
                trace_sink(row, report);
            }
            rows[task * np + k] = std::move(row);
        }
    });
    return rows;
}

inline void write_run_csv(std::ostream& out, const std::vector<RunRow>& rows) {
    out << "sweep_value,replication,seed,policy,n_users,n_completed,n_expired,schedulable,violation_rate\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%d,%llu,%s,%d,%d,%d,%d,%.12g\n", r.sweep_value, r.replication,
                      static_cast<unsigned long long>(r.seed), r.policy.c_str(), r.n_users, r.n_completed,
                      r.n_expired, r.schedulable ? 1 : 0, r.violation_rate);
        out << buf;
    }
}

struct SummaryRow {
    double sweep_value = 0.0;
    std::string policy;
    int replications = 0;
    int schedulable_count = 0;
    long long users = 0;
    long long expired = 0;

    double violation_probability() const { return users == 0 ? 0.0 : static_cast<double>(expired) / users; }
};

/// Aggregates per (sweep value, policy), keeping first-seen order.
inline std::vector<SummaryRow> summarize(const std::vector<RunRow>& rows) {
    std::vector<SummaryRow> out;
    for (const auto& r : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) {
            return s.sweep_value == r.sweep_value && s.policy == r.policy;
        });
        if (it == out.end()) {
            out.push_back({r.sweep_value, r.policy});
            it = out.end() - 1;
        }
        ++it->replications;
        it->schedulable_count += r.schedulable ? 1 : 0;
        it->users += r.n_users;
        it->expired += r.n_expired;
    }
    return out;
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "sweep_value,policy,replications,schedulable_count,n_users,n_expired,violation_probability\n";
    char buf[256];
    for (const auto& s : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%s,%d,%d,%lld,%lld,%.12g\n", s.sweep_value, s.policy.c_str(),
                      s.replications, s.schedulable_count, s.users, s.expired, s.violation_probability());
        out << buf;
    }
}

struct OracleRow {
    double sweep_value = 0.0;
    int replication = 0;
    bool feasible = false;
    bool borderline = false;
    FeasibilityProblem problem;
    FeasibilityResult result;
};

/// Offline feasibility for every (deadline, replication) instance.
inline std::vector<OracleRow> run_oracle_check(const ExperimentConfig& c, const GainProfile& gains, int jobs = 1) {
    validate(c);
    if (c.traffic != TrafficKind::Identical) {
        throw ConfigError("oracle-check: only identical-deadline traffic has an offline oracle");
    }
    if (c.identical.user_count > kOracleMaxUsers) {
        throw ConfigError("oracle-check: traffic.m must be <= " + std::to_string(kOracleMaxUsers));
    }
    const std::size_t reps = static_cast<std::size_t>(c.replications);
    std::vector<OracleRow> rows(c.sweep_values.size() * reps);
    detail::parallel_for(rows.size(), jobs, [&](std::size_t task) {
        const double value = c.sweep_values[task / reps];
        const int rep = static_cast<int>(task % reps);
        auto problem = make_feasibility_problem(generate_instance(c, value, replication_seed(c.base_seed, rep)), gains);
        auto result = feasible(problem);
        rows[task] = {value, rep, result.feasible, result.borderline, std::move(problem), std::move(result)};
    });
    return rows;
}

inline void write_oracle_csv(std::ostream& out, const std::vector<OracleRow>& rows) {
    out << "sweep_value,replication,feasible,borderline\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%d,%d,%d\n", r.sweep_value, r.replication, r.feasible ? 1 : 0,
                      r.borderline ? 1 : 0);
        out << buf;
    }
}

/// Oracle feasibility next to per-policy schedulability, per deadline.
struct FrontierPoint {
    double deadline = 0.0;
    int instances = 0;
    int feasible = 0;
    int borderline = 0;
    std::vector<std::pair<std::string, int>> schedulable;
};

inline std::vector<FrontierPoint> schedulability_frontier(const ExperimentConfig& c, const GainProfile& gains,
                                                          int jobs = 1) {
    // the fluid policy may sit next to TDM ones here; run each in its own mode
    ExperimentConfig base = c;
    base.mode = SimMode::Fluid;
    base.policies = {make_policy(PolicyKind::L2hpr)};
    const auto oracle = run_oracle_check(base, gains, jobs);
    std::vector<RunRow> runs;
    for (const auto& pol : c.policies) {
        ExperimentConfig single = c;
        single.policies = {pol};
        single.mode = pol.is_fluid() ? SimMode::Fluid : SimMode::Tdm;
        auto part = run_experiment(single, &gains, jobs);
        runs.insert(runs.end(), part.begin(), part.end());
    }
    std::vector<FrontierPoint> out;
    for (double d : c.sweep_values) {
        FrontierPoint fp;
        fp.deadline = d;
        for (const auto& r : oracle) {
            if (r.sweep_value != d) continue;
            ++fp.instances;
            fp.feasible += r.feasible ? 1 : 0;
            fp.borderline += r.borderline ? 1 : 0;
        }
        for (const auto& pol : c.policies) {
            int count = 0;
            for (const auto& r : runs) {
                if (r.sweep_value == d && r.policy == policy_name(pol.kind) && r.schedulable) ++count;
            }
            fp.schedulable.emplace_back(std::string(policy_name(pol.kind)), count);
        }
        out.push_back(std::move(fp));
    }
    return out;
}

/// Preset experiment families; `replications` overrides the default 1000.
inline std::vector<ExperimentConfig> reproduce_presets(const std::string& figure, std::uint64_t base_seed,
                                                       int replications = 1000) {
    ExperimentConfig base;
    base.base_seed = base_seed;
    base.replications = replications;
    const FrameworkParams common{};
    std::vector<ExperimentConfig> out;
    if (figure == "fig2a" || figure == "fig3a") {
        base.traffic = TrafficKind::Identical;
        base.identical = {15, 100.0, 0.5};
        base.sweep = SweepVariable::Deadline;
        base.sweep_values = {100, 120, 140, 160, 180, 200, 220, 240, 260, 280, 300};
        ExperimentConfig fluid = base;
        fluid.mode = SimMode::Fluid;
        fluid.policies = {make_policy(PolicyKind::L2hpr, common)};
        ExperimentConfig tdm = base;
        tdm.mode = SimMode::Tdm;
        tdm.policies = {make_policy(PolicyKind::LMaxWeight, common), make_policy(PolicyKind::LExp, common),
                        make_policy(PolicyKind::LLog, common), make_policy(PolicyKind::MaxCI, common),
                        make_policy(PolicyKind::LLF, common)};
        out = {fluid, tdm};
    } else if (figure == "fig2b" || figure == "fig3b") {
        base.traffic = TrafficKind::Stationary;
        base.stationary = {0.05, 3.0, 2000.0};
        base.sweep = SweepVariable::Stretch;
        base.sweep_values = {2, 3, 4, 5, 6, 7, 8};
        base.mode = SimMode::Tdm;
        base.policies = {make_policy(PolicyKind::LMaxWeight, common), make_policy(PolicyKind::LExp, common),
                         make_policy(PolicyKind::LLog, common), make_policy(PolicyKind::MaxCI, common),
                         make_policy(PolicyKind::EDF, common), make_policy(PolicyKind::LLF, common)};
        out = {base};
    } else {
        throw ConfigError("reproduce: unknown figure id '" + figure + "' (fig2a, fig2b, fig3a, fig3b)");
    }
    for (auto& c : out) validate(c);
    return out;
}

}  // namespace laxsched

#endif
