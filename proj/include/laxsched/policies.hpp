#ifndef LAXSCHED_POLICIES_HPP
#define LAXSCHED_POLICIES_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "laxsched/capacity.hpp"
#include "laxsched/core.hpp"

namespace laxsched {

/// Selected user id for a TDM slot; empty when the queue is empty.
using Choice = std::optional<int>;

/// Fluid-mode rates, aligned index-for-index with the flows they were computed for.
using RateVector = std::vector<double>;

struct MaxWeightUrgency {
    double alpha = 1.0;
};
struct ExpUrgency {
    double beta = 0.05;
    double zeta = 1.0;
    double eta = 0.5;
};
struct LogUrgency {
    double beta = 10.0;
    double zeta = 10.0;
};
using Urgency = std::variant<MaxWeightUrgency, ExpUrgency, LogUrgency>;

/// Parameters of the laxity-threshold framework. Defaults are the
/// published ones; kappa = 1/mean_rate collapses to 1 after normalization.
struct FrameworkParams {
    double delta = -2.0;
    double epsilon = 0.001;
    double kappa = 1.0;
    Urgency urgency = MaxWeightUrgency{};
};

inline double clamp_laxity(double laxity, double epsilon) { return std::max(laxity, epsilon); }

/// (max(L, eps))^-alpha
inline double urgency_maxweight(double laxity, double alpha, double epsilon) {
    return std::pow(clamp_laxity(laxity, epsilon), -alpha);
}

/// exp(-beta L^eps / (zeta + mean^eta)), `group_mean` being the mean of
/// beta L^eps over the non-negligible group.
inline double urgency_exp(double laxity, double beta, double zeta, double eta, double group_mean,
                          double epsilon = 0.001) {
    return std::exp(-beta * clamp_laxity(laxity, epsilon) / (zeta + std::pow(group_mean, eta)));
}

/// 1 / ln(zeta + beta L^eps). Natural log; the argmax does not depend on the base.
inline double urgency_log(double laxity, double beta, double zeta, double epsilon = 0.001) {
    if (!(zeta + beta * epsilon > 1.0)) {
        throw std::invalid_argument("urgency_log: zeta + beta*epsilon must exceed 1");
    }
    return 1.0 / std::log(zeta + beta * clamp_laxity(laxity, epsilon));
}

inline void validate(const FrameworkParams& p) {
    if (!(p.epsilon > 0.0)) {
        throw std::invalid_argument("policy: epsilon must be > 0");
    }
    if (!(p.kappa > 0.0)) {
        throw std::invalid_argument("policy: kappa must be > 0");
    }
    std::visit(
        [&](const auto& u) {
            using T = std::decay_t<decltype(u)>;
            if constexpr (std::is_same_v<T, MaxWeightUrgency>) {
                if (!(u.alpha > 0.0)) {
                    throw std::invalid_argument("policy: alpha must be > 0");
                }
            } else {
                if (!(u.beta > 0.0)) {
                    throw std::invalid_argument("policy: beta must be > 0");
                }
                if (!(u.zeta > 0.0)) {
                    throw std::invalid_argument("policy: zeta must be > 0");
                }
                if constexpr (std::is_same_v<T, LogUrgency>) {
                    if (!(u.zeta + u.beta * p.epsilon > 1.0)) {
                        throw std::invalid_argument("policy: L-Log needs zeta + beta*epsilon > 1");
                    }
                }
            }
        },
        p.urgency);
}

namespace detail {

/// argmax of score over indices, ties to the smallest user id.
template <class Score>
Choice argmax_by_id(std::span<const FlowState> flows, Score&& score) {
    Choice best;
    double best_score = 0.0;
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const double s = score(i);
        const int id = flows[i].id();
        if (!best || s > best_score || (s == best_score && id < *best)) {
            best = id;
            best_score = s;
        }
    }
    return best;
}

template <class Score>
Choice argmin_by_id(std::span<const FlowState> flows, Score&& score) {
    return argmax_by_id(flows, [&](std::size_t i) { return -score(i); });
}

}  // namespace detail

/// L2HPR: rank users by ascending expected laxity (ties by smaller id) and
/// give rank j the marginal rate g_j - g_{j-1}.
inline RateVector l2hpr_allocate(std::span<const FlowState> flows, const GainProfile& gains, long long slot_index,
                                 double slot_length) {
    const auto q = flows.size();
    if (static_cast<int>(q) > gains.max_users()) {
        throw std::out_of_range("l2hpr_allocate: " + std::to_string(q) + " active users exceed k_max=" +
                                std::to_string(gains.max_users()));
    }
    std::vector<std::size_t> order(q);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> laxity(q);
    for (std::size_t i = 0; i < q; ++i) {
        laxity[i] = expected_laxity(flows[i], slot_index, slot_length, gains.g1());
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (laxity[a] != laxity[b]) {
            return laxity[a] < laxity[b];
        }
        return flows[a].id() < flows[b].id();
    });
    RateVector rates(q, 0.0);
    for (std::size_t rank = 0; rank < q; ++rank) {
        rates[order[rank]] = marginal_rate(gains, static_cast<int>(rank + 1));
    }
    return rates;
}

/// The threshold framework with an arbitrary urgency function
/// `urgency(laxity, group_mean_scaled_laxity)`.
///
/// Users with L >= delta compete on kappa * R * U(L); only when that group is
/// empty does the rest get served, greedily by kappa * R.
template <class UrgencyFn>
Choice framework_select_with(std::span<const FlowState> flows, std::span<const double> rates, double delta,
                             double kappa, long long slot_index, double slot_length, double g1,
                             UrgencyFn&& urgency, double group_weight = 0.0, double epsilon = 0.001) {
    if (rates.size() != flows.size()) {
        throw std::invalid_argument("framework_select: one rate per flow required");
    }
    std::vector<double> laxity(flows.size());
    std::vector<std::size_t> plus;
    std::vector<std::size_t> minus;
    for (std::size_t i = 0; i < flows.size(); ++i) {
        laxity[i] = expected_laxity(flows[i], slot_index, slot_length, g1);
        (laxity[i] >= delta ? plus : minus).push_back(i);
    }
    if (!plus.empty()) {
        double group_mean = 0.0;
        for (auto i : plus) {
            group_mean += group_weight * clamp_laxity(laxity[i], epsilon);
        }
        group_mean /= static_cast<double>(plus.size());
        Choice best;
        double best_score = 0.0;
        for (auto i : plus) {
            const double s = kappa * rates[i] * urgency(laxity[i], group_mean);
            const int id = flows[i].id();
            if (!best || s > best_score || (s == best_score && id < *best)) {
                best = id;
                best_score = s;
            }
        }
        return best;
    }
    return detail::argmax_by_id(flows, [&](std::size_t i) { return kappa * rates[i]; });
}

inline Choice framework_select(std::span<const FlowState> flows, std::span<const double> rates,
                               const FrameworkParams& params, long long slot_index, double slot_length,
                               double g1 = 1.0) {
    const double eps = params.epsilon;
    return std::visit(
        [&](const auto& u) -> Choice {
            using T = std::decay_t<decltype(u)>;
            if constexpr (std::is_same_v<T, MaxWeightUrgency>) {
                return framework_select_with(
                    flows, rates, params.delta, params.kappa, slot_index, slot_length, g1,
                    [&](double lax, double) { return urgency_maxweight(lax, u.alpha, eps); }, 0.0, eps);
            } else if constexpr (std::is_same_v<T, ExpUrgency>) {
                return framework_select_with(
                    flows, rates, params.delta, params.kappa, slot_index, slot_length, g1,
                    [&](double lax, double mean) { return urgency_exp(lax, u.beta, u.zeta, u.eta, mean, eps); },
                    u.beta, eps);
            } else {
                return framework_select_with(
                    flows, rates, params.delta, params.kappa, slot_index, slot_length, g1,
                    [&](double lax, double) { return urgency_log(lax, u.beta, u.zeta, eps); }, 0.0, eps);
            }
        },
        params.urgency);
}

inline Choice baseline_max_ci(std::span<const FlowState> flows, std::span<const double> rates) {
    if (rates.size() != flows.size()) {
        throw std::invalid_argument("baseline_max_ci: one rate per flow required");
    }
    return detail::argmax_by_id(flows, [&](std::size_t i) { return rates[i]; });
}

inline Choice baseline_edf(std::span<const FlowState> flows) {
    return detail::argmin_by_id(flows, [&](std::size_t i) { return flows[i].request.deadline; });
}

inline Choice baseline_llf(std::span<const FlowState> flows, long long slot_index, double slot_length,
                           double g1 = 1.0) {
    return detail::argmin_by_id(flows,
                                [&](std::size_t i) { return expected_laxity(flows[i], slot_index, slot_length, g1); });
}

enum class PolicyKind { L2hpr, LMaxWeight, LExp, LLog, MaxCI, EDF, LLF };

/// A named policy. L2HPR runs only in fluid mode; the rest are TDM selectors.
struct Policy {
    PolicyKind kind = PolicyKind::MaxCI;
    FrameworkParams params{};

    bool is_fluid() const { return kind == PolicyKind::L2hpr; }
};

inline std::string_view policy_name(PolicyKind k) {
    switch (k) {
    case PolicyKind::L2hpr:
        return "l2hpr";
    case PolicyKind::LMaxWeight:
        return "l-maxweight";
    case PolicyKind::LExp:
        return "l-exp";
    case PolicyKind::LLog:
        return "l-log";
    case PolicyKind::MaxCI:
        return "max-ci";
    case PolicyKind::EDF:
        return "edf";
    case PolicyKind::LLF:
        return "llf";
    }
    return "?";
}

/// "l-llf" is accepted as an alias of "l-log".
inline PolicyKind parse_policy_kind(std::string_view name) {
    if (name == "l2hpr") return PolicyKind::L2hpr;
    if (name == "l-maxweight") return PolicyKind::LMaxWeight;
    if (name == "l-exp") return PolicyKind::LExp;
    if (name == "l-log" || name == "l-llf") return PolicyKind::LLog;
    if (name == "max-ci") return PolicyKind::MaxCI;
    if (name == "edf") return PolicyKind::EDF;
    if (name == "llf") return PolicyKind::LLF;
    throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

/// Policy with its published urgency defaults (delta, epsilon and kappa shared).
inline Policy make_policy(PolicyKind kind, FrameworkParams common = {}) {
    Policy p{kind, common};
    switch (kind) {
    case PolicyKind::LMaxWeight:
        if (!std::holds_alternative<MaxWeightUrgency>(p.params.urgency)) p.params.urgency = MaxWeightUrgency{};
        break;
    case PolicyKind::LExp:
        if (!std::holds_alternative<ExpUrgency>(p.params.urgency)) p.params.urgency = ExpUrgency{};
        break;
    case PolicyKind::LLog:
        if (!std::holds_alternative<LogUrgency>(p.params.urgency)) p.params.urgency = LogUrgency{};
        break;
    default:
        break;
    }
    validate(p.params);
    return p;
}

/// One TDM decision.
inline Choice tdm_select(const Policy& policy, std::span<const FlowState> flows, std::span<const double> rates,
                         long long slot_index, double slot_length, double g1 = 1.0) {
    switch (policy.kind) {
    case PolicyKind::LMaxWeight:
    case PolicyKind::LExp:
    case PolicyKind::LLog:
        return framework_select(flows, rates, policy.params, slot_index, slot_length, g1);
    case PolicyKind::MaxCI:
        return baseline_max_ci(flows, rates);
    case PolicyKind::EDF:
        return baseline_edf(flows);
    case PolicyKind::LLF:
        return baseline_llf(flows, slot_index, slot_length, g1);
    case PolicyKind::L2hpr:
        break;
    }
    throw std::invalid_argument("l2hpr is a fluid-mode policy and cannot drive a TDM run");
}

}  // namespace laxsched

#endif
