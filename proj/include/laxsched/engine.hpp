#ifndef LAXSCHED_ENGINE_HPP
#define LAXSCHED_ENGINE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "laxsched/analysis.hpp"
#include "laxsched/capacity.hpp"
#include "laxsched/channel.hpp"
#include "laxsched/core.hpp"
#include "laxsched/policies.hpp"
#include "laxsched/traffic.hpp"

namespace laxsched {

struct UserOutcome {
    int user_id = 0;
    FlowStatus status = FlowStatus::Active;
    /// Exact intra-slot finish time for completed users, NaN otherwise.
    double completion_time = std::numeric_limits<double>::quiet_NaN();
};

struct TraceEntry {
    int user_id = 0;
    double residual = 0.0;
    double virtual_laxity = 0.0;
    bool active = true;
    bool in_lls = false;
    /// Fluid mode: allocated rate. TDM mode: 1 if served, else 0.
    double decision = 0.0;
};

/// State at the start of one slot, before that slot's service.
struct TraceRecord {
    long long slot_index = 0;
    std::vector<TraceEntry> entries;
    int least_laxity_user = 0;
    double least_virtual_laxity = 0.0;
    std::size_t lemma1_violations = 0;
    /// Data actually delivered during this slot.
    double transmitted = 0.0;
    /// Sum-rate ceiling for this slot times the slot length.
    double capacity = 0.0;
};

struct SimReport {
    std::vector<UserOutcome> outcomes;
    int n_users = 0;
    int n_completed = 0;
    int n_expired = 0;
    bool schedulable = true;
    long long slots = 0;
    std::size_t lemma1_violations = 0;
    std::vector<TraceRecord> trace;

    double violation_rate() const { return n_users == 0 ? 0.0 : static_cast<double>(n_expired) / n_users; }

    const UserOutcome& outcome(int user_id) const {
        for (const auto& o : outcomes) {
            if (o.user_id == user_id) return o;
        }
        throw std::out_of_range("SimReport: unknown user");
    }
};

/// First slot n with n*dt >= time, forgiving float error of ~1e-9 slots.
inline long long first_slot_at_or_after(double time, double slot_length) {
    return static_cast<long long>(std::ceil(time / slot_length - 1e-9));
}

namespace detail {

inline void finalize(SimReport& report) {
    report.n_users = static_cast<int>(report.outcomes.size());
    report.n_completed = 0;
    report.n_expired = 0;
    for (const auto& o : report.outcomes) {
        if (o.status == FlowStatus::Completed) ++report.n_completed;
        if (o.status == FlowStatus::Expired) ++report.n_expired;
    }
    report.schedulable = report.n_expired == 0;
}

}  // namespace detail

struct FluidOptions {
    bool record_trace = false;
    /// Maintain the ULT tracker, least-laxity sets and the one-slot laxity
    /// gap check. Costs O(M^2) per slot.
    bool track_ult = false;
};

/// Slotted fluid simulation of L2HPR on the polymatroid region.
///
/// All requests must share one deadline D. Per slot n: admit requests with
/// A_i <= t_n, analyse (if enabled), expire what is left at t_n >= D, then
/// allocate by rank and advance every active flow.
inline SimReport run_fluid(std::vector<DownloadRequest> requests, const GainProfile& gains, double slot_length,
                           FluidOptions options = {}) {
    if (!(slot_length > 0.0)) {
        throw std::invalid_argument("run_fluid: slot_length must be > 0");
    }
    SimReport report;
    if (requests.empty()) {
        return report;
    }
    for (const auto& r : requests) {
        validate(r);
    }
    const double deadline = requests.front().deadline;
    for (const auto& r : requests) {
        if (r.deadline != deadline) {
            throw std::invalid_argument("run_fluid: fluid mode requires identical deadlines");
        }
    }
    sort_by_arrival(requests);
    const double g1 = gains.g1();
    const long long deadline_slot = first_slot_at_or_after(deadline, slot_length);
    const double tol = 1e-9 * std::abs(deadline);

    std::vector<FlowState> flows;  // admitted, in admission order
    flows.reserve(requests.size());
    std::vector<long long> admit_slot(requests.size());
    for (std::size_t i = 0; i < requests.size(); ++i) {
        admit_slot[i] = first_slot_at_or_after(requests[i].arrival_time, slot_length);
    }
    report.outcomes.reserve(requests.size());
    for (const auto& r : requests) {
        report.outcomes.push_back({r.user_id, FlowStatus::Active});
    }

    UltTracker tracker;
    std::vector<double> lax;
    std::vector<std::size_t> active_idx;
    std::vector<FlowState> active;
    std::size_t next = 0;
    long long n = 0;
    for (;;) {
        while (next < requests.size() && admit_slot[next] <= n) {
            flows.emplace_back(requests[next]);
            if (options.track_ult) tracker.add_user(requests[next].user_id);
            ++next;
        }

        TraceRecord rec;
        rec.slot_index = n;
        if (options.track_ult && !flows.empty()) {
            lax.resize(flows.size());
            for (std::size_t i = 0; i < flows.size(); ++i) {
                lax[i] = virtual_expected_laxity(flows[i], g1);
            }
            tracker.update(lax);
            const auto star = least_laxity_index(tracker, lax);
            rec.least_laxity_user = flows[star].id();
            rec.least_virtual_laxity = lax[star];
            rec.lemma1_violations = lemma1_check(tracker, lax, slot_length, tol).size();
            report.lemma1_violations += rec.lemma1_violations;
            if (options.record_trace) {
                for (std::size_t i = 0; i < flows.size(); ++i) {
                    rec.entries.push_back({flows[i].id(), flows[i].residual_size, lax[i], flows[i].active(),
                                           i == star || tracker.closure(i, star), 0.0});
                }
            }
        } else if (options.record_trace) {
            for (const auto& f : flows) {
                rec.entries.push_back({f.id(), f.residual_size, virtual_expected_laxity(f, g1), f.active(), false, 0.0});
            }
        }

        if (n >= deadline_slot) {
            for (auto& f : flows) {
                if (f.active()) f.status = FlowStatus::Expired;
            }
        }

        active_idx.clear();
        active.clear();
        for (std::size_t i = 0; i < flows.size(); ++i) {
            if (flows[i].active()) {
                active_idx.push_back(i);
                active.push_back(flows[i]);
            }
        }
        const bool done = n >= deadline_slot || (next == requests.size() && active.empty());
        if (done) {
            if (options.record_trace) report.trace.push_back(std::move(rec));
            break;
        }

        if (!active.empty()) {
            const RateVector rates = l2hpr_allocate(active, gains, n, slot_length);
            const double t = slot_time(n, slot_length);
            rec.capacity = gains[static_cast<int>(active.size())] * slot_length;
            for (std::size_t k = 0; k < active.size(); ++k) {
                FlowState& f = flows[active_idx[k]];
                const double before = f.residual_size;
                f = advance_flow(f, rates[k], slot_length);
                rec.transmitted += before - f.residual_size;
                if (f.status == FlowStatus::Completed) {
                    auto& out = report.outcomes[active_idx[k]];
                    out.status = FlowStatus::Completed;
                    out.completion_time = t + before / rates[k];
                }
                if (options.record_trace) {
                    for (auto& e : rec.entries) {
                        if (e.user_id == f.id()) e.decision = rates[k];
                    }
                }
            }
            if (options.record_trace) report.trace.push_back(std::move(rec));
            ++n;
        } else {
            // idle until the next admission; laxities are frozen meanwhile
            if (options.record_trace) report.trace.push_back(std::move(rec));
            n = std::max(n + 1, std::min(admit_slot[next], deadline_slot));
        }
    }
    for (std::size_t i = 0; i < flows.size(); ++i) {
        if (flows[i].status == FlowStatus::Expired) report.outcomes[i].status = FlowStatus::Expired;
    }
    for (std::size_t i = flows.size(); i < requests.size(); ++i) {
        report.outcomes[i].status = FlowStatus::Expired;
    }
    report.slots = n;
    detail::finalize(report);
    return report;
}

/// Slotted TDM simulation: one user per slot at its sampled fading rate.
///
/// Per slot n: admit (A_i <= t_n), expire (t_n >= D_i), draw one normalized
/// rate per active user from the (seed, user, slot) stream, let the policy
/// pick, and advance only that user.
inline SimReport run_tdm(std::vector<DownloadRequest> requests, const ChannelModel& channel, const Policy& policy,
                         double slot_length, std::uint64_t seed, bool record_trace = false, double g1 = 1.0) {
    if (!(slot_length > 0.0)) {
        throw std::invalid_argument("run_tdm: slot_length must be > 0");
    }
    if (policy.is_fluid()) {
        throw std::invalid_argument("run_tdm: l2hpr is a fluid-mode policy");
    }
    SimReport report;
    if (requests.empty()) {
        return report;
    }
    for (const auto& r : requests) {
        validate(r);
    }
    sort_by_arrival(requests);
    report.outcomes.reserve(requests.size());
    for (const auto& r : requests) {
        report.outcomes.push_back({r.user_id, FlowStatus::Active});
    }

    struct Live {
        std::size_t index;
        long long deadline_slot;
    };
    std::vector<FlowState> active;
    std::vector<Live> meta;
    std::vector<double> rates;
    std::size_t next = 0;
    long long n = 0;
    while (next < requests.size() || !active.empty()) {
        if (active.empty()) {
            n = std::max(n, first_slot_at_or_after(requests[next].arrival_time, slot_length));
        }
        while (next < requests.size() && first_slot_at_or_after(requests[next].arrival_time, slot_length) <= n) {
            active.emplace_back(requests[next]);
            meta.push_back({next, first_slot_at_or_after(requests[next].deadline, slot_length)});
            ++next;
        }
        // expire
        std::size_t w = 0;
        for (std::size_t k = 0; k < active.size(); ++k) {
            if (n >= meta[k].deadline_slot) {
                report.outcomes[meta[k].index].status = FlowStatus::Expired;
                continue;
            }
            active[w] = active[k];
            meta[w] = meta[k];
            ++w;
        }
        active.resize(w);
        meta.resize(w);
        if (active.empty()) {
            continue;
        }

        rates.resize(active.size());
        for (std::size_t k = 0; k < active.size(); ++k) {
            rates[k] = channel.slot_rate(seed, static_cast<std::uint64_t>(active[k].id()), static_cast<std::uint64_t>(n));
        }
        const Choice pick = tdm_select(policy, active, rates, n, slot_length, g1);

        TraceRecord rec;
        if (record_trace) {
            rec.slot_index = n;
            for (const auto& f : active) {
                rec.entries.push_back({f.id(), f.residual_size, f.request.deadline - f.residual_size / g1, true, false,
                                       pick && *pick == f.id() ? 1.0 : 0.0});
            }
        }
        if (pick) {
            for (std::size_t k = 0; k < active.size(); ++k) {
                if (active[k].id() != *pick) continue;
                const double before = active[k].residual_size;
                active[k] = advance_flow(active[k], rates[k], slot_length);
                rec.transmitted = before - active[k].residual_size;
                rec.capacity = rates[k] * slot_length;
                if (active[k].status == FlowStatus::Completed) {
                    auto& out = report.outcomes[meta[k].index];
                    out.status = FlowStatus::Completed;
                    out.completion_time = slot_time(n, slot_length) + before / rates[k];
                    active.erase(active.begin() + static_cast<std::ptrdiff_t>(k));
                    meta.erase(meta.begin() + static_cast<std::ptrdiff_t>(k));
                }
                break;
            }
        }
        if (record_trace) report.trace.push_back(std::move(rec));
        ++n;
    }
    report.slots = n;
    detail::finalize(report);
    return report;
}

/// "slot,user_id,residual,virtual_laxity,in_LLS,decision", one row per
/// active user per slot.
inline void write_slot_trace(std::ostream& out, const SimReport& report) {
    out << "slot,user_id,residual,virtual_laxity,in_LLS,decision\n";
    char buf[160];
    for (const auto& rec : report.trace) {
        for (const auto& e : rec.entries) {
            if (!e.active) continue;
            std::snprintf(buf, sizeof buf, "%lld,%d,%.12g,%.12g,%d,%.12g\n", rec.slot_index, e.user_id, e.residual,
                          e.virtual_laxity, e.in_lls ? 1 : 0, e.decision);
            out << buf;
        }
    }
}

}  // namespace laxsched

#endif
