#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "laxsched/analysis.hpp"
#include "laxsched/policies.hpp"

using namespace laxsched;

namespace {

UltTracker tracker_with(int n) {
    UltTracker t;
    for (int i = 1; i <= n; ++i) t.add_user(i);
    return t;
}

// Reachability over the raw relation by depth-first search.
bool reachable(const UltTracker& t, std::size_t from, std::size_t to) {
    std::vector<bool> seen(t.size(), false);
    std::vector<std::size_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
        const auto a = stack.back();
        stack.pop_back();
        if (a == to) return true;
        for (std::size_t b = 0; b < t.size(); ++b) {
            if (!seen[b] && t.ult(a, b)) {
                seen[b] = true;
                stack.push_back(b);
            }
        }
    }
    return false;
}

const GainProfile kTwo({0.0, 1.0, 1.5});

}  // namespace

TEST(Ult, EqualLaxitiesRelateBothWays) {
    auto t = tracker_with(2);
    t.update(std::vector<double>{5.0, 5.0});
    EXPECT_TRUE(t.ult(0, 1));
    EXPECT_TRUE(t.ult(1, 0));
}

TEST(Ult, MonotoneUnderReversal) {
    auto t = tracker_with(2);
    t.update(std::vector<double>{1.0, 2.0});
    EXPECT_TRUE(t.ult(0, 1));
    EXPECT_FALSE(t.ult(1, 0));
    t.update(std::vector<double>{3.0, 2.0});
    EXPECT_TRUE(t.ult(0, 1));
    EXPECT_TRUE(t.ult(1, 0));
    t.update(std::vector<double>{1.0, 2.0});
    EXPECT_TRUE(t.ult(1, 0));
}

TEST(Ult, ClosureChains) {
    auto t = tracker_with(3);
    // 1 <= 2 at one slot, 2 <= 3 at another, never 1 <= 3 directly
    t.update(std::vector<double>{1.0, 2.0, 0.0});
    t.update(std::vector<double>{5.0, 2.0, 3.0});
    EXPECT_TRUE(t.ult(0, 1));
    EXPECT_TRUE(t.ult(1, 2));
    EXPECT_FALSE(t.ult(0, 2));
    EXPECT_TRUE(t.closure(0, 2));
    EXPECT_THROW(t.update(std::vector<double>{1.0}), std::invalid_argument);
    EXPECT_THROW(t.index_of(9), std::out_of_range);
}

TEST(Ult, FreeFunctionLeavesInputUntouched) {
    const auto t = tracker_with(2);
    const auto u = update_ult(t, std::vector<double>{1.0, 2.0});
    EXPECT_FALSE(t.ult(0, 1));
    EXPECT_TRUE(u.ult(0, 1));
}

TEST(Ult, ClosureMatchesReachabilityUnderRandomUpdates) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> lax(0.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        UltTracker t;
        int next_id = 1;
        for (int step = 0; step < 12; ++step) {
            if (t.size() < 10 && step % 2 == 0) t.add_user(next_id++);
            std::vector<double> l(t.size());
            for (auto& x : l) x = std::round(lax(rng) * (trial % 2 ? 1.0 : 10.0)) / (trial % 2 ? 1.0 : 10.0);
            t.update(l);
            for (std::size_t a = 0; a < t.size(); ++a) {
                for (std::size_t b = 0; b < t.size(); ++b) {
                    ASSERT_EQ(t.closure(a, b), reachable(t, a, b));
                    if (t.ult(a, b)) {
                        ASSERT_TRUE(t.closure(a, b));
                    }
                }
            }
            auto copy = t;
            copy.recompute_closure();
            for (std::size_t a = 0; a < t.size(); ++a) {
                for (std::size_t b = 0; b < t.size(); ++b) ASSERT_EQ(copy.closure(a, b), t.closure(a, b));
            }
        }
    }
}

TEST(LeastLaxity, IndexAndSet) {
    auto t = tracker_with(3);
    const std::vector<double> equal{4.0, 4.0, 4.0};
    t.update(equal);
    EXPECT_EQ(least_laxity_index(t, equal), 0u);
    EXPECT_EQ(least_laxity_set(t, equal).size(), 3u);

    auto u = tracker_with(3);
    const std::vector<double> l{1.0, 2.0, 9.0};
    u.update(l);
    // user 3 was never <= user 1
    EXPECT_EQ(least_laxity_set(u, l), (std::vector<std::size_t>{0}));
    EXPECT_THROW(least_laxity_index(UltTracker{}, std::vector<double>{}), std::invalid_argument);
}

TEST(LeastLaxity, TwoUserInstanceAtSlotOne) {
    auto t = tracker_with(2);
    t.update(std::vector<double>{5.0, 5.0});
    const std::vector<double> after{5.1, 5.05};
    t.update(after);
    EXPECT_EQ(least_laxity_index(t, after), 1u);
    EXPECT_EQ(least_laxity_set(t, after), (std::vector<std::size_t>{0, 1}));
}

TEST(Lemma1, DetectsSyntheticViolation) {
    auto t = tracker_with(2);
    t.update(std::vector<double>{1.0, 2.0});
    EXPECT_TRUE(lemma1_check(t, std::vector<double>{2.05, 2.0}, 0.1, 1e-9).empty());
    const auto v = lemma1_check(t, std::vector<double>{2.5, 2.0}, 0.1, 1e-9);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].lower_user, 1);
    EXPECT_EQ(v[0].upper_user, 2);
    EXPECT_NEAR(v[0].gap, 0.5, 1e-12);
}

// One L2HPR step keeps L'_a - L'_b <= dt for any pair that starts within dt.
TEST(Lemma1, OneStepPropertyOnRandomStates) {
    std::mt19937_64 rng(23);
    const GainProfile g({0.0, 1.0, 1.5, 1.8, 2.0, 2.15, 2.25});
    std::uniform_real_distribution<double> size(0.0, 4.0);
    const double deadline = 10.0;
    const double dt = 0.1;
    for (int trial = 0; trial < 3000; ++trial) {
        const int m = 2 + trial % 5;
        const long long n = trial % 30;
        std::vector<FlowState> flows;
        for (int i = 1; i <= m; ++i) {
            double f = size(rng);
            if (trial % 4 == 0) f = std::round(f * 10.0) / 10.0;
            FlowState s(DownloadRequest{i, 0.0, 5.0, deadline});
            s.residual_size = f;
            if (f == 0.0) s.status = FlowStatus::Completed;
            flows.push_back(s);
        }
        std::vector<FlowState> active;
        for (const auto& f : flows) {
            if (f.active()) active.push_back(f);
        }
        const auto rates = l2hpr_allocate(active, g, n, dt);
        std::vector<FlowState> next = flows;
        for (std::size_t k = 0, j = 0; k < flows.size(); ++k) {
            if (flows[k].active()) next[k] = advance_flow(flows[k], rates[j++], dt);
        }
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                const double before = virtual_expected_laxity(flows[a], 1.0) - virtual_expected_laxity(flows[b], 1.0);
                if (before > dt) continue;
                const double after = virtual_expected_laxity(next[a], 1.0) - virtual_expected_laxity(next[b], 1.0);
                ASSERT_LE(after, dt + 1e-9 * deadline) << "trial " << trial;
            }
        }
    }
}

TEST(Lemma2, Examples) {
    EXPECT_NEAR(lemma2_bound(std::vector<double>{5.0, 5.0}, 1, 0.1, kTwo, 2, 10.0), 4.975, 1e-12);
    const GainProfile g({0.0, 1.0, 1.5, 1.8});
    // n = 0, equal initial laxity ell
    EXPECT_NEAR(lemma2_bound(std::vector<double>{3.0, 3.0, 3.0}, 0, 0.1, g, 3, 10.0), 3.0 - 0.2, 1e-12);
    EXPECT_NEAR(lemma2_bound(std::vector<double>{3.0, 3.0, 3.0}, 0, 0.1, g, 3, 2.5), 2.5 - 0.2, 1e-12);
    EXPECT_THROW(lemma2_bound(std::vector<double>{}, 0, 0.1, g, 3, 10.0), std::invalid_argument);
}

TEST(AppendixB, Examples) {
    const GainProfile g({0.0, 1.0, 1.5, 1.8});
    // simultaneous arrivals reduce to min{D, (sum + g_Q t / g1) / Q}
    EXPECT_NEAR(appendixB_bound(std::vector<double>{0, 0, 0}, std::vector<double>{2, 3, 4}, g, 2.0, 10.0),
                (9.0 + 1.8 * 2.0) / 3.0, 1e-12);
    EXPECT_NEAR(appendixB_bound(std::vector<double>{0, 0, 0}, std::vector<double>{2, 3, 4}, g, 50.0, 10.0), 10.0,
                1e-12);
    // single user: L'(A) + (t - A), capped
    EXPECT_NEAR(appendixB_bound(std::vector<double>{2.0}, std::vector<double>{4.0}, g, 5.0, 10.0), 7.0, 1e-12);
    EXPECT_NEAR(appendixB_bound(std::vector<double>{2.0}, std::vector<double>{4.0}, g, 9.0, 10.0), 10.0, 1e-12);
    // staggered: (6 + 1*(1-0) + 1.5*(3-1)) / 2
    EXPECT_NEAR(appendixB_bound(std::vector<double>{0.0, 1.0}, std::vector<double>{2.0, 4.0}, g, 3.0, 10.0),
                (6.0 + 1.0 + 3.0) / 2.0, 1e-12);
    EXPECT_THROW(appendixB_bound(std::vector<double>{0.0, 4.0}, std::vector<double>{2.0, 4.0}, g, 3.0, 10.0),
                 std::invalid_argument);
    EXPECT_THROW(appendixB_bound(std::vector<double>{1.0, 0.0}, std::vector<double>{2.0, 4.0}, g, 3.0, 10.0),
                 std::invalid_argument);
}
