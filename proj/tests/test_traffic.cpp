#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "laxsched/channel.hpp"
#include "laxsched/rng.hpp"
#include "laxsched/traffic.hpp"

using namespace laxsched;

namespace {

// Pinned closed-form moment match for mean 2 MB, std 0.722 MB.
constexpr double kLogMu = 0.6318963489698253;
constexpr double kLogSigma = 0.35000237596370704;
// Mean of the lognormal conditioned on <= 5 MB, pinned by quadrature.
constexpr double kTruncatedMean = 1.9906308261451082;

const double kMeanRate = ChannelModel().mean_rate();

}  // namespace

TEST(FileSizeLaw, MomentMatch) {
    const auto law = FileSizeLaw::ftp_default();
    EXPECT_NEAR(law.log_mu, kLogMu, 1e-12);
    EXPECT_NEAR(law.log_sigma, kLogSigma, 1e-12);
    const double mean = std::exp(law.log_mu + 0.5 * law.log_sigma * law.log_sigma);
    const double var = std::expm1(law.log_sigma * law.log_sigma) * mean * mean;
    EXPECT_NEAR(mean, 2.0, 1e-9);
    EXPECT_NEAR(std::sqrt(var), 0.722, 1e-9);
    EXPECT_THROW(FileSizeLaw::from_moments(2.0, 0.722, 1.5), std::invalid_argument);
    EXPECT_THROW(FileSizeLaw::from_moments(0.0, 0.722, 5.0), std::invalid_argument);
}

TEST(FileSizeLaw, TruncatedSamples) {
    const auto law = FileSizeLaw::ftp_default();
    Rng rng = make_rng(1);
    const int n = 1000000;
    double sum = 0.0;
    double max_seen = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_file_size_mb(law, rng);
        ASSERT_GT(x, 0.0);
        max_seen = std::max(max_seen, x);
        sum += x;
    }
    EXPECT_LE(max_seen, 5.0);
    EXPECT_GT(max_seen, 4.5);  // the tail is actually reached
    EXPECT_NEAR(sum / n, kTruncatedMean, 0.02);
    EXPECT_GE(sum / n, 1.89);
    EXPECT_LE(sum / n, 2.0);
}

TEST(FileSizeLaw, NormalizedSize) {
    const auto law = FileSizeLaw::ftp_default();
    Rng a = make_rng(4);
    Rng b = make_rng(4);
    const double mb = sample_file_size_mb(law, a);
    EXPECT_DOUBLE_EQ(sample_file_size(law, kMeanRate, b), mb * 8e6 / kMeanRate);
}

TEST(IdenticalDeadline, Examples) {
    const auto law = FileSizeLaw::ftp_default();
    Rng rng = make_rng(2);
    auto reqs = gen_identical_deadline({15, 100.0, 0.5}, law, kMeanRate, rng);
    ASSERT_EQ(reqs.size(), 15u);
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        EXPECT_EQ(reqs[i].deadline, 100.0);
        EXPECT_GE(reqs[i].arrival_time, 0.0);
        EXPECT_LE(reqs[i].arrival_time, 50.0);
        EXPECT_NO_THROW(validate(reqs[i]));
        if (i > 0) {
            EXPECT_LE(reqs[i - 1].arrival_time, reqs[i].arrival_time);
        }
    }

    rng = make_rng(2);
    reqs = gen_identical_deadline({6, 30.0, 0.0}, law, kMeanRate, rng);
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        EXPECT_EQ(reqs[i].arrival_time, 0.0);
        EXPECT_EQ(reqs[i].user_id, static_cast<int>(i) + 1);  // ties sorted by id
    }
    EXPECT_THROW(gen_identical_deadline({0, 30.0, 0.0}, law, kMeanRate, rng), std::invalid_argument);
    EXPECT_THROW(gen_identical_deadline({3, 30.0, 1.0}, law, kMeanRate, rng), std::invalid_argument);
}

TEST(IdenticalDeadline, SizesIndependentOfDeadline) {
    const auto law = FileSizeLaw::ftp_default();
    Rng r1 = make_rng(8);
    Rng r2 = make_rng(8);
    auto a = gen_identical_deadline({10, 100.0, 0.5}, law, kMeanRate, r1);
    auto b = gen_identical_deadline({10, 300.0, 0.5}, law, kMeanRate, r2);
    auto by_id = [](auto v) {
        std::sort(v.begin(), v.end(), [](auto& x, auto& y) { return x.user_id < y.user_id; });
        return v;
    };
    a = by_id(a);
    b = by_id(b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].initial_size, b[i].initial_size);
        EXPECT_NEAR(b[i].arrival_time, 3.0 * a[i].arrival_time, 1e-9);
    }
}

TEST(Stationary, DeadlinesAndCount) {
    const auto law = FileSizeLaw::ftp_default();
    const StationaryArrivalSpec spec{0.05, 3.0, 200000.0};
    Rng rng = make_rng(3);
    const auto reqs = gen_stationary(spec, law, kMeanRate, rng);
    const double expected = spec.rate * spec.horizon;
    EXPECT_NEAR(static_cast<double>(reqs.size()), expected, 3.0 * std::sqrt(expected));
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        EXPECT_NEAR(reqs[i].deadline, reqs[i].arrival_time + 3.0 * reqs[i].initial_size, 1e-9);
        EXPECT_LE(reqs[i].arrival_time, spec.horizon);
        EXPECT_EQ(reqs[i].user_id, static_cast<int>(i) + 1);
        if (i > 0) {
            ASSERT_GT(reqs[i].arrival_time, reqs[i - 1].arrival_time);
        }
    }
}

TEST(Stationary, StretchNearOneGivesZeroInitialLaxity) {
    const auto law = FileSizeLaw::ftp_default();
    Rng rng = make_rng(3);
    const auto reqs = gen_stationary({0.05, 1.0 + 1e-9, 1000.0}, law, kMeanRate, rng);
    ASSERT_FALSE(reqs.empty());
    for (const auto& r : reqs) {
        FlowState f(r);
        // laxity at arrival: D - A - F/g1 = (stretch - 1) F
        EXPECT_NEAR(r.deadline - r.arrival_time - f.residual_size, 0.0, 1e-9 * f.residual_size + 1e-10);
    }
    EXPECT_THROW(gen_stationary({0.05, 1.0, 1000.0}, law, kMeanRate, rng), std::invalid_argument);
    EXPECT_THROW(gen_stationary({0.0, 2.0, 1000.0}, law, kMeanRate, rng), std::invalid_argument);
}

// Kolmogorov-Smirnov against Exp(rate) on 10^4 gaps, alpha = 0.01.
TEST(Stationary, InterArrivalKolmogorovSmirnov) {
    const auto law = FileSizeLaw::ftp_default();
    const double rate = 0.05;
    Rng rng = make_rng(21);
    const auto reqs = gen_stationary({rate, 3.0, 10000.0 / rate * 1.05}, law, kMeanRate, rng);
    ASSERT_GE(reqs.size(), 10001u);
    std::vector<double> gaps;
    double prev = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) {
        gaps.push_back(reqs[i].arrival_time - prev);
        prev = reqs[i].arrival_time;
    }
    std::sort(gaps.begin(), gaps.end());
    const double n = static_cast<double>(gaps.size());
    double d = 0.0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const double cdf = -std::expm1(-rate * gaps[i]);
        d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
    }
    EXPECT_LT(d, 1.628 / std::sqrt(n));
}

TEST(Traffic, SeedDeterminism) {
    const auto law = FileSizeLaw::ftp_default();
    Rng a = make_rng(5), b = make_rng(5), c = make_rng(6);
    const auto x = gen_stationary({0.05, 3.0, 5000.0}, law, kMeanRate, a);
    const auto y = gen_stationary({0.05, 3.0, 5000.0}, law, kMeanRate, b);
    const auto z = gen_stationary({0.05, 3.0, 5000.0}, law, kMeanRate, c);
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(x[i].arrival_time, y[i].arrival_time);
        EXPECT_EQ(x[i].initial_size, y[i].initial_size);
    }
    EXPECT_TRUE(x.size() != z.size() || x.front().arrival_time != z.front().arrival_time);
}

TEST(Trace, RoundTrip) {
    const auto law = FileSizeLaw::ftp_default();
    Rng rng = make_rng(9);
    const auto reqs = gen_identical_deadline({7, 120.0, 0.5}, law, kMeanRate, rng);
    std::stringstream ss;
    write_trace(ss, reqs);
    EXPECT_EQ(ss.str().rfind("user_id,arrival_s,size_norm,deadline_s\n", 0), 0u);
    const auto back = read_trace(ss);
    ASSERT_EQ(back.size(), reqs.size());
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        EXPECT_EQ(back[i].user_id, reqs[i].user_id);
        EXPECT_NEAR(back[i].arrival_time, reqs[i].arrival_time, 1e-9);
        EXPECT_NEAR(back[i].initial_size, reqs[i].initial_size, 1e-10);
        EXPECT_EQ(back[i].deadline, 120.0);
    }
    std::istringstream bad("user_id,arrival_s,size_norm,deadline_s\n1,5,1,5\n");
    EXPECT_THROW(read_trace(bad), std::invalid_argument);
}
