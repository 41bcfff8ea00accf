#ifndef LAXSCHED_CORE_HPP
#define LAXSCHED_CORE_HPP

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace laxsched {

/// Sizes are stored normalized by the mean channel rate, so one unit of size
/// is one second of service at the average rate and g_1 = 1.
struct DownloadRequest {
    int user_id = 0;
    double arrival_time = 0.0;
    double initial_size = 0.0;
    double deadline = 0.0;
};

inline void validate(const DownloadRequest& r) {
    if (r.user_id < 1) {
        throw std::invalid_argument("request user_id must be positive");
    }
    if (!(r.arrival_time >= 0.0)) {
        throw std::invalid_argument("request arrival_time must be >= 0");
    }
    if (!(r.initial_size > 0.0)) {
        throw std::invalid_argument("request initial_size must be > 0 (user " + std::to_string(r.user_id) + ")");
    }
    if (!(r.deadline > r.arrival_time)) {
        throw std::invalid_argument("request deadline must exceed arrival_time (user " + std::to_string(r.user_id) + ")");
    }
}

enum class FlowStatus { Active, Completed, Expired };

inline const char* to_string(FlowStatus s) {
    switch (s) {
    case FlowStatus::Active:
        return "active";
    case FlowStatus::Completed:
        return "completed";
    case FlowStatus::Expired:
        return "expired";
    }
    return "?";
}

struct FlowState {
    DownloadRequest request;
    double residual_size = 0.0;
    FlowStatus status = FlowStatus::Active;

    FlowState() = default;
    explicit FlowState(const DownloadRequest& r) : request(r), residual_size(r.initial_size) {}

    int id() const { return request.user_id; }
    bool active() const { return status == FlowStatus::Active; }
};

struct SimConfig {
    double slot_length = 0.01;
    double horizon = 1.0;
    std::uint64_t rng_seed = 0;
};

inline void validate(const SimConfig& c) {
    if (!(c.slot_length > 0.0)) {
        throw std::invalid_argument("slot_length must be > 0");
    }
    if (!(c.horizon > 0.0)) {
        throw std::invalid_argument("horizon must be > 0");
    }
    if (c.slot_length > c.horizon) {
        throw std::invalid_argument("slot_length must not exceed horizon");
    }
}

/// Start time of slot n.
inline double slot_time(long long slot_index, double slot_length) {
    return static_cast<double>(slot_index) * slot_length;
}

/// L_i[n] = D_i - n*dt - F_i[n]/g1. Negative values are allowed.
inline double expected_laxity(const FlowState& flow, long long slot_index, double slot_length, double g1 = 1.0) {
    return flow.request.deadline - slot_time(slot_index, slot_length) - flow.residual_size / g1;
}

/// L'_i[n] = D - F_i[n]/g1, the laxity with the common clock term removed.
inline double virtual_expected_laxity(const FlowState& flow, double g1 = 1.0) {
    return flow.request.deadline - flow.residual_size / g1;
}

/// Throws unless every flow carries the same deadline; returns that deadline.
inline double common_deadline(std::span<const FlowState> flows) {
    if (flows.empty()) {
        throw std::invalid_argument("common_deadline: no flows");
    }
    const double d = flows.front().request.deadline;
    for (const auto& f : flows) {
        if (f.request.deadline != d) {
            throw std::invalid_argument("virtual laxity requires identical deadlines");
        }
    }
    return d;
}

inline double virtual_expected_laxity(std::span<const FlowState> batch, std::size_t index, double g1 = 1.0) {
    common_deadline(batch);
    return virtual_expected_laxity(batch[index], g1);
}

/// Relative residual below which a flow counts as delivered; absorbs the
/// round-off of summing many rate*dt increments.
inline constexpr double kResidualSnap = 1e-12;

/// One slot of residual-size evolution: F' = max(0, F - rate*dt).
inline FlowState advance_flow(FlowState flow, double rate, double slot_length) {
    if (rate < 0.0) {
        throw std::invalid_argument("advance_flow: negative rate");
    }
    if (!flow.active()) {
        throw std::logic_error("advance_flow: flow is not active");
    }
    flow.residual_size = std::max(0.0, flow.residual_size - rate * slot_length);
    if (flow.residual_size <= kResidualSnap * flow.request.initial_size) {
        flow.residual_size = 0.0;
        flow.status = FlowStatus::Completed;
    }
    return flow;
}

}  // namespace laxsched

#endif
