#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "laxsched/core.hpp"

using namespace laxsched;

namespace {

FlowState flow(double deadline, double residual, int id = 1) {
    FlowState f(DownloadRequest{id, 0.0, std::max(residual, 1.0), deadline});
    f.residual_size = residual;
    if (residual == 0.0) f.status = FlowStatus::Completed;
    return f;
}

}  // namespace

TEST(ExpectedLaxity, DirectSubstitution) {
    EXPECT_DOUBLE_EQ(expected_laxity(flow(10, 4), 0, 0.1, 1.0), 6.0);
    EXPECT_DOUBLE_EQ(expected_laxity(flow(10, 0), 20, 0.1, 1.0), 8.0);
    EXPECT_DOUBLE_EQ(expected_laxity(flow(10, 11), 0, 0.1, 1.0), -1.0);
}

TEST(VirtualLaxity, Examples) {
    EXPECT_DOUBLE_EQ(virtual_expected_laxity(flow(10, 5), 1.0), 5.0);
    EXPECT_DOUBLE_EQ(virtual_expected_laxity(flow(10, 0), 1.0), 10.0);
    EXPECT_DOUBLE_EQ(virtual_expected_laxity(flow(10, 2), 2.0), 9.0);
}

TEST(VirtualLaxity, RejectsMixedDeadlines) {
    std::vector<FlowState> batch{flow(10, 5, 1), flow(12, 5, 2)};
    EXPECT_THROW(virtual_expected_laxity(batch, 0), std::invalid_argument);
    batch[1] = flow(10, 3, 2);
    EXPECT_DOUBLE_EQ(virtual_expected_laxity(batch, 1), 7.0);
}

TEST(AdvanceFlow, Examples) {
    auto f = advance_flow(flow(10, 5), 1.0, 0.1);
    EXPECT_DOUBLE_EQ(f.residual_size, 4.9);
    EXPECT_EQ(f.status, FlowStatus::Active);

    f = advance_flow(flow(10, 0.05), 1.0, 0.1);
    EXPECT_EQ(f.residual_size, 0.0);
    EXPECT_EQ(f.status, FlowStatus::Completed);

    f = advance_flow(flow(10, 5), 0.0, 0.1);
    EXPECT_EQ(f.residual_size, 5.0);
    EXPECT_EQ(f.status, FlowStatus::Active);
}

TEST(AdvanceFlow, RejectsNegativeRateAndInactiveFlows) {
    EXPECT_THROW(advance_flow(flow(10, 5), -0.1, 0.1), std::invalid_argument);
    EXPECT_THROW(advance_flow(flow(10, 0), 1.0, 0.1), std::logic_error);
}

TEST(DownloadRequest, Invariants) {
    EXPECT_NO_THROW(validate(DownloadRequest{1, 0.0, 1.0, 5.0}));
    EXPECT_THROW(validate(DownloadRequest{1, 0.0, 0.0, 5.0}), std::invalid_argument);
    EXPECT_THROW(validate(DownloadRequest{1, 5.0, 1.0, 5.0}), std::invalid_argument);
    EXPECT_THROW(validate(DownloadRequest{0, 0.0, 1.0, 5.0}), std::invalid_argument);
    EXPECT_THROW(validate(DownloadRequest{1, -1.0, 1.0, 5.0}), std::invalid_argument);
}

TEST(SimConfig, Invariants) {
    EXPECT_NO_THROW(validate(SimConfig{0.1, 10.0, 7}));
    EXPECT_THROW(validate(SimConfig{0.0, 10.0, 7}), std::invalid_argument);
    EXPECT_THROW(validate(SimConfig{11.0, 10.0, 7}), std::invalid_argument);
}

// Random rate sequences: residual never increases, hits exactly zero, and the
// one-slot laxity change matches rate*dt/g1 - dt while the flow stays active.
TEST(FlowProperties, RandomRateSequences) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> rate_dist(0.0, 2.0);
    std::uniform_real_distribution<double> size_dist(0.1, 20.0);
    const double dt = 0.05;
    const double g1 = 1.0;
    for (int trial = 0; trial < 200; ++trial) {
        FlowState f(DownloadRequest{1, 0.0, size_dist(rng), 30.0});
        long long n = 0;
        while (f.active() && n < 100000) {
            const double rate = rate_dist(rng);
            const double before = f.residual_size;
            const double lax_before = expected_laxity(f, n, dt, g1);
            EXPECT_DOUBLE_EQ(virtual_expected_laxity(f, g1), lax_before + slot_time(n, dt));
            f = advance_flow(f, rate, dt);
            ++n;
            ASSERT_LE(f.residual_size, before);
            ASSERT_GE(f.residual_size, 0.0);
            ASSERT_LE(f.residual_size, f.request.initial_size);
            ASSERT_EQ(f.status == FlowStatus::Completed, f.residual_size == 0.0);
            if (f.active()) {
                const double lax_after = expected_laxity(f, n, dt, g1);
                EXPECT_NEAR(lax_after - lax_before, rate * dt / g1 - dt, 1e-12);
            }
        }
        EXPECT_EQ(f.status, FlowStatus::Completed);
        EXPECT_EQ(f.residual_size, 0.0);
    }
}

TEST(AdvanceFlow, SnapsRoundOffResidualToZero) {
    FlowState f(DownloadRequest{1, 0.0, 1.0, 10.0});
    for (int i = 0; i < 10; ++i) f = advance_flow(f, 1.0, 0.1);
    EXPECT_EQ(f.status, FlowStatus::Completed);
    EXPECT_EQ(f.residual_size, 0.0);
    FlowState g(DownloadRequest{1, 0.0, 1.0, 10.0});
    g = advance_flow(g, 1.0, 1.0 - 1e-9);
    EXPECT_EQ(g.status, FlowStatus::Active);
}
