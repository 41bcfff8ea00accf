#ifndef LAXSCHED_ANALYSIS_HPP
#define LAXSCHED_ANALYSIS_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "laxsched/capacity.hpp"

namespace laxsched {

/// Laxity-order history over the users that have arrived so far.
///
/// ult(a, b) holds once user a's virtual laxity has been <= user b's at some
/// observed slot; it never resets. closure(a, b) is its transitive closure.
/// Users are addressed by tracker index (insertion order).
class UltTracker {
public:
    std::size_t size() const { return ids_.size(); }
    std::span<const int> user_ids() const { return ids_; }

    std::size_t add_user(int user_id) {
        const std::size_t old_n = ids_.size();
        const std::size_t n = old_n + 1;
        std::vector<std::uint8_t> ult(n * n, 0);
        std::vector<std::uint8_t> closure(n * n, 0);
        for (std::size_t a = 0; a < old_n; ++a) {
            for (std::size_t b = 0; b < old_n; ++b) {
                ult[a * n + b] = ult_[a * old_n + b];
                closure[a * n + b] = closure_[a * old_n + b];
            }
        }
        ult[old_n * n + old_n] = 1;
        closure[old_n * n + old_n] = 1;
        ult_ = std::move(ult);
        closure_ = std::move(closure);
        ids_.push_back(user_id);
        return old_n;
    }

    bool ult(std::size_t a, std::size_t b) const { return ult_[a * size() + b] != 0; }
    bool closure(std::size_t a, std::size_t b) const { return closure_[a * size() + b] != 0; }

    std::size_t index_of(int user_id) const {
        const auto it = std::find(ids_.begin(), ids_.end(), user_id);
        if (it == ids_.end()) {
            throw std::out_of_range("UltTracker: unknown user " + std::to_string(user_id));
        }
        return static_cast<std::size_t>(it - ids_.begin());
    }

    /// Folds one slot of virtual laxities (one per tracked user, completed
    /// users at D) into the relation and refreshes the closure.
    void update(std::span<const double> virtual_laxities) {
        const std::size_t n = size();
        if (virtual_laxities.size() != n) {
            throw std::invalid_argument("UltTracker::update: one laxity per tracked user required");
        }
        std::vector<std::pair<std::size_t, std::size_t>> fresh;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (!ult_[a * n + b] && virtual_laxities[a] <= virtual_laxities[b]) {
                    ult_[a * n + b] = 1;
                    if (!closure_[a * n + b]) {
                        fresh.emplace_back(a, b);
                    }
                }
            }
        }
        if (fresh.size() > n) {
            recompute_closure();
            return;
        }
        for (auto [i, j] : fresh) {
            add_closure_edge(i, j);
        }
    }

    void recompute_closure() {
        const std::size_t n = size();
        closure_ = ult_;
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t a = 0; a < n; ++a) {
                if (!closure_[a * n + k]) {
                    continue;
                }
                for (std::size_t b = 0; b < n; ++b) {
                    closure_[a * n + b] |= closure_[k * n + b];
                }
            }
        }
    }

private:
    void add_closure_edge(std::size_t i, std::size_t j) {
        const std::size_t n = size();
        if (closure_[i * n + j]) {
            return;
        }
        std::vector<std::size_t> preds;
        std::vector<std::size_t> succs;
        for (std::size_t a = 0; a < n; ++a) {
            if (closure_[a * n + i]) preds.push_back(a);
            if (closure_[j * n + a]) succs.push_back(a);
        }
        for (auto a : preds) {
            for (auto b : succs) {
                closure_[a * n + b] = 1;
            }
        }
    }

    std::vector<int> ids_;
    std::vector<std::uint8_t> ult_;
    std::vector<std::uint8_t> closure_;
};

inline UltTracker update_ult(UltTracker tracker, std::span<const double> virtual_laxities) {
    tracker.update(virtual_laxities);
    return tracker;
}

/// Tracker index of the least-laxity user; smallest user id on ties.
inline std::size_t least_laxity_index(const UltTracker& tracker, std::span<const double> virtual_laxities) {
    if (tracker.size() == 0) {
        throw std::invalid_argument("least_laxity_index: no arrived users");
    }
    const auto ids = tracker.user_ids();
    std::size_t best = 0;
    for (std::size_t i = 1; i < tracker.size(); ++i) {
        if (virtual_laxities[i] < virtual_laxities[best] ||
            (virtual_laxities[i] == virtual_laxities[best] && ids[i] < ids[best])) {
            best = i;
        }
    }
    return best;
}

/// Tracker indices of the least-laxity user and everyone that indirectly
/// used to be less than it, in tracker order.
inline std::vector<std::size_t> least_laxity_set(const UltTracker& tracker, std::span<const double> virtual_laxities) {
    const std::size_t star = least_laxity_index(tracker, virtual_laxities);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tracker.size(); ++i) {
        if (i == star || tracker.closure(i, star)) {
            out.push_back(i);
        }
    }
    return out;
}

struct LaxityViolation {
    int lower_user = 0;
    int upper_user = 0;
    double gap = 0.0;
};

/// Pairs with ult(a, b) whose laxity gap exceeds one slot length (+ tol).
inline std::vector<LaxityViolation> lemma1_check(const UltTracker& tracker, std::span<const double> virtual_laxities,
                                                 double slot_length, double tol) {
    std::vector<LaxityViolation> out;
    const auto ids = tracker.user_ids();
    for (std::size_t a = 0; a < tracker.size(); ++a) {
        for (std::size_t b = 0; b < tracker.size(); ++b) {
            if (a == b || !tracker.ult(a, b)) {
                continue;
            }
            const double gap = virtual_laxities[a] - virtual_laxities[b];
            if (gap > slot_length + tol) {
                out.push_back({ids[a], ids[b], gap});
            }
        }
    }
    return out;
}

/// Slotted lower bound on the least virtual laxity for simultaneous arrivals:
/// min{ D - (M-1)dt, (sum L'_i[0] + n g_Q dt / g1) / Q - (M-1)dt } over the
/// least-laxity set of size Q.
inline double lemma2_bound(std::span<const double> initial_virtual_laxities, long long slot_index, double slot_length,
                           const GainProfile& gains, int total_users, double deadline) {
    const auto q = static_cast<int>(initial_virtual_laxities.size());
    if (q < 1) {
        throw std::invalid_argument("lemma2_bound: empty least-laxity set");
    }
    const double slack = static_cast<double>(total_users - 1) * slot_length;
    const double sum0 = std::accumulate(initial_virtual_laxities.begin(), initial_virtual_laxities.end(), 0.0);
    const double served = static_cast<double>(slot_index) * gains[q] * slot_length / gains.g1();
    return std::min(deadline - slack, (sum0 + served) / static_cast<double>(q) - slack);
}

/// Continuous-time least virtual laxity for staggered arrivals of a
/// least-laxity set, capped at the deadline. `arrivals` must be ascending and
/// `initial_virtual_laxities` aligned with them.
inline double appendixB_bound(std::span<const double> arrivals, std::span<const double> initial_virtual_laxities,
                              const GainProfile& gains, double t, double deadline) {
    const auto q = arrivals.size();
    if (q == 0 || initial_virtual_laxities.size() != q) {
        throw std::invalid_argument("appendixB_bound: need one laxity per arrival");
    }
    for (std::size_t j = 0; j < q; ++j) {
        if (arrivals[j] < 0.0 || arrivals[j] > t) {
            throw std::invalid_argument("appendixB_bound: arrival outside [0, t]");
        }
        if (j > 0 && arrivals[j] < arrivals[j - 1]) {
            throw std::invalid_argument("appendixB_bound: arrivals must be ascending");
        }
    }
    const double g1 = gains.g1();
    double total = std::accumulate(initial_virtual_laxities.begin(), initial_virtual_laxities.end(), 0.0);
    for (std::size_t j = 1; j < q; ++j) {
        total += gains[static_cast<int>(j)] / g1 * (arrivals[j] - arrivals[j - 1]);
    }
    total += gains[static_cast<int>(q)] / g1 * (t - arrivals[q - 1]);
    return std::min(deadline, total / static_cast<double>(q));
}

}  // namespace laxsched

#endif
