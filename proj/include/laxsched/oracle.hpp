#ifndef LAXSCHED_ORACLE_HPP
#define LAXSCHED_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "laxsched/capacity.hpp"
#include "laxsched/core.hpp"
#include "laxsched/lp.hpp"

namespace laxsched {

inline constexpr int kOracleMaxUsers = 16;
inline constexpr double kOracleTolerance = 1e-9;
inline constexpr double kBorderlineMargin = 1e-6;

/// Offline schedulability instance: identical deadline, arrivals splitting
/// [min A, D] into intervals at every distinct arrival time.
struct FeasibilityProblem {
    std::vector<DownloadRequest> requests;
    GainProfile gains;
    /// Strictly increasing; front = earliest arrival, back = D.
    std::vector<double> epochs;

    double deadline() const { return epochs.back(); }
    std::size_t intervals() const { return epochs.size() - 1; }
    double length(std::size_t k) const { return epochs[k + 1] - epochs[k]; }
    bool available(std::size_t user, std::size_t k) const { return requests[user].arrival_time <= epochs[k]; }
};

inline FeasibilityProblem make_feasibility_problem(std::vector<DownloadRequest> requests, GainProfile gains) {
    if (requests.empty()) {
        throw std::invalid_argument("feasibility: no requests");
    }
    if (static_cast<int>(requests.size()) > kOracleMaxUsers) {
        throw std::invalid_argument("feasibility: at most " + std::to_string(kOracleMaxUsers) + " users supported");
    }
    if (static_cast<int>(requests.size()) > gains.max_users()) {
        throw std::invalid_argument("feasibility: gain profile shorter than user count");
    }
    const double d = requests.front().deadline;
    for (const auto& r : requests) {
        validate(r);
        if (r.deadline != d) {
            throw std::invalid_argument("feasibility: oracle requires identical deadlines");
        }
    }
    std::vector<double> epochs;
    for (const auto& r : requests) epochs.push_back(r.arrival_time);
    std::sort(epochs.begin(), epochs.end());
    epochs.erase(std::unique(epochs.begin(), epochs.end()), epochs.end());
    epochs.push_back(d);
    return {std::move(requests), std::move(gains), std::move(epochs)};
}

/// Aggregate capacity sum_k len_k * g_{|S available in k|} of a user set.
inline double subset_capacity(const FeasibilityProblem& p, unsigned mask) {
    double cap = 0.0;
    for (std::size_t k = 0; k < p.intervals(); ++k) {
        int count = 0;
        for (std::size_t i = 0; i < p.requests.size(); ++i) {
            if ((mask >> i & 1U) && p.available(i, k)) ++count;
        }
        cap += p.length(k) * p.gains[count];
    }
    return cap;
}

/// A user set whose demand exceeds everything the region can deliver to it
/// between its first arrival and the deadline.
struct InfeasibilityCertificate {
    std::vector<int> users;
    double window_start = 0.0;
    double window_end = 0.0;
    double demand = 0.0;
    double capacity = 0.0;
};

/// min over user sets S of capacity(S) / demand(S), by enumeration, with the
/// minimizing set. Values >= 1 mean every aggregate constraint holds.
inline std::pair<double, unsigned> subset_load_ratio(const FeasibilityProblem& p) {
    const auto m = p.requests.size();
    double best = std::numeric_limits<double>::infinity();
    unsigned best_mask = 0;
    for (unsigned mask = 1; mask < (1U << m); ++mask) {
        double demand = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (mask >> i & 1U) demand += p.requests[i].initial_size;
        }
        const double ratio = subset_capacity(p, mask) / demand;
        if (ratio < best) {
            best = ratio;
            best_mask = mask;
        }
    }
    return {best, best_mask};
}

struct FeasibilityResult {
    bool feasible = false;
    /// Within kBorderlineMargin of the feasibility boundary.
    bool borderline = false;
    /// Largest uniform scale of all sizes that is still schedulable.
    double load_scale = 0.0;
    /// witness[k][i]: data of user i (request order) served in interval k.
    std::vector<std::vector<double>> witness;
    std::optional<InfeasibilityCertificate> certificate;
    int generated_constraints = 0;
    long pivots = 0;
};

/// Decide schedulability by LP with lazily generated prefix constraints.
///
/// Variables y[i][k] >= 0 (user i's data in interval k, only after arrival)
/// and a scale lambda >= 0 with sum_k y[i][k] = lambda * F_i. Per interval,
/// the m largest entries may carry at most g_m * len_k; the most violated
/// such prefix set is added per interval until none is violated. The optimum
/// lambda* is the largest feasible uniform load scale: feasible iff
/// lambda* >= 1, and the witness is y / lambda*.
inline FeasibilityResult feasible(const FeasibilityProblem& p) {
    const auto m = p.requests.size();
    const auto kn = p.intervals();
    std::vector<std::vector<int>> var(m, std::vector<int>(kn, -1));
    int nvars = 0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < kn; ++k) {
            if (p.available(i, k)) var[i][k] = nvars++;
        }
    }
    const int lambda = nvars++;

    lp::Problem prob;
    prob.objective.assign(static_cast<std::size_t>(nvars), 0.0);
    prob.objective[static_cast<std::size_t>(lambda)] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> row(static_cast<std::size_t>(nvars), 0.0);
        for (std::size_t k = 0; k < kn; ++k) {
            if (var[i][k] >= 0) row[static_cast<std::size_t>(var[i][k])] = 1.0;
        }
        row[static_cast<std::size_t>(lambda)] = -p.requests[i].initial_size;
        prob.eq_rows.push_back(std::move(row));
        prob.eq_rhs.push_back(0.0);
    }
    auto add_set = [&](std::size_t k, const std::vector<std::size_t>& users) {
        std::vector<double> row(static_cast<std::size_t>(nvars), 0.0);
        for (auto i : users) row[static_cast<std::size_t>(var[i][k])] = 1.0;
        prob.le_rows.push_back(std::move(row));
        prob.le_rhs.push_back(p.gains[static_cast<int>(users.size())] * p.length(k));
    };
    // seed with the whole available set of every interval (bounds lambda)
    for (std::size_t k = 0; k < kn; ++k) {
        std::vector<std::size_t> all;
        for (std::size_t i = 0; i < m; ++i) {
            if (var[i][k] >= 0) all.push_back(i);
        }
        if (!all.empty()) add_set(k, all);
    }

    FeasibilityResult result;
    lp::Solution sol;
    for (int round = 0;; ++round) {
        sol = lp::solve(prob);
        result.pivots += sol.pivots;
        if (sol.status != lp::Status::Optimal) {
            throw std::runtime_error("feasibility LP did not reach an optimum");
        }
        bool added = false;
        for (std::size_t k = 0; k < kn; ++k) {
            std::vector<std::pair<double, std::size_t>> vals;
            for (std::size_t i = 0; i < m; ++i) {
                if (var[i][k] >= 0) vals.emplace_back(sol.x[static_cast<std::size_t>(var[i][k])], i);
            }
            std::sort(vals.begin(), vals.end(), [](auto a, auto b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
            double prefix = 0.0;
            double worst = 0.0;
            std::size_t worst_len = 0;
            for (std::size_t j = 0; j < vals.size(); ++j) {
                prefix += vals[j].first;
                const double cap = p.gains[static_cast<int>(j + 1)] * p.length(k);
                const double excess = prefix - cap;
                if (excess > kOracleTolerance * (1.0 + cap) && excess > worst) {
                    worst = excess;
                    worst_len = j + 1;
                }
            }
            if (worst_len > 0) {
                std::vector<std::size_t> users;
                for (std::size_t j = 0; j < worst_len; ++j) users.push_back(vals[j].second);
                add_set(k, users);
                ++result.generated_constraints;
                added = true;
            }
        }
        if (!added) break;
        if (round > 100000) throw std::runtime_error("feasibility: constraint generation did not converge");
    }

    const double scale = sol.x[static_cast<std::size_t>(lambda)];
    result.load_scale = scale;
    result.feasible = scale >= 1.0 - kOracleTolerance;
    result.borderline = std::abs(scale - 1.0) <= kBorderlineMargin;
    if (result.feasible) {
        result.witness.assign(kn, std::vector<double>(m, 0.0));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t k = 0; k < kn; ++k) {
                if (var[i][k] >= 0) result.witness[k][i] = sol.x[static_cast<std::size_t>(var[i][k])] / scale;
            }
        }
    } else {
        const auto [ratio, mask] = subset_load_ratio(p);
        InfeasibilityCertificate cert;
        cert.window_start = p.deadline();
        cert.window_end = p.deadline();
        for (std::size_t i = 0; i < m; ++i) {
            if (mask >> i & 1U) {
                cert.users.push_back(p.requests[i].user_id);
                cert.demand += p.requests[i].initial_size;
                cert.window_start = std::min(cert.window_start, p.requests[i].arrival_time);
            }
        }
        cert.capacity = subset_capacity(p, mask);
        result.certificate = cert;
    }
    return result;
}

inline FeasibilityResult feasible(std::vector<DownloadRequest> requests, GainProfile gains) {
    return feasible(make_feasibility_problem(std::move(requests), std::move(gains)));
}

struct ReplayResult {
    bool complete = true;
    bool in_region = true;
    double max_residual = 0.0;
};

/// Plays a witness forward interval by interval with the residual update,
/// using the constant rate y / len in each interval.
inline ReplayResult replay_witness(const FeasibilityProblem& p, const FeasibilityResult& r, double tol = 1e-9) {
    if (!r.feasible) {
        throw std::invalid_argument("replay_witness: no witness for an infeasible instance");
    }
    ReplayResult out;
    std::vector<FlowState> flows;
    for (const auto& req : p.requests) flows.emplace_back(req);
    for (std::size_t k = 0; k < p.intervals(); ++k) {
        const double len = p.length(k);
        std::vector<double> rates;
        for (std::size_t i = 0; i < flows.size(); ++i) {
            const double rate = r.witness[k][i] / len;
            if (!p.available(i, k)) {
                if (r.witness[k][i] != 0.0) out.in_region = false;
                continue;
            }
            rates.push_back(rate);
            if (flows[i].active()) flows[i] = advance_flow(flows[i], rate, len);
        }
        if (!in_region(p.gains, rates, 1e-9)) out.in_region = false;
    }
    for (const auto& f : flows) {
        out.max_residual = std::max(out.max_residual, f.residual_size);
    }
    out.complete = out.max_residual <= tol * std::max(1.0, p.deadline());
    return out;
}

/// Plain-text dump of a witness or certificate.
inline void write_oracle_dump(std::ostream& out, const FeasibilityProblem& p, const FeasibilityResult& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "feasible %d\nborderline %d\nload_scale %.12g\n", r.feasible ? 1 : 0,
                  r.borderline ? 1 : 0, r.load_scale);
    out << buf;
    if (r.feasible) {
        out << "witness interval,start,end,user_id,data,rate\n";
        for (std::size_t k = 0; k < p.intervals(); ++k) {
            for (std::size_t i = 0; i < p.requests.size(); ++i) {
                if (!p.available(i, k)) continue;
                std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%d,%.12g,%.12g\n", k, p.epochs[k], p.epochs[k + 1],
                              p.requests[i].user_id, r.witness[k][i], r.witness[k][i] / p.length(k));
                out << buf;
            }
        }
    } else if (r.certificate) {
        const auto& c = *r.certificate;
        out << "certificate users";
        for (int u : c.users) out << ' ' << u;
        std::snprintf(buf, sizeof buf, "\nwindow %.12g %.12g\ndemand %.12g\ncapacity %.12g\n", c.window_start,
                      c.window_end, c.demand, c.capacity);
        out << buf;
    }
}

}  // namespace laxsched

#endif
