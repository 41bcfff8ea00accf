#ifndef LAXSCHED_CAPACITY_HPP
#define LAXSCHED_CAPACITY_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "laxsched/rng.hpp"

namespace laxsched {

/// Multi-user diversity gains g_0..g_K of the symmetric polymatroid region.
///
/// g_k is the sum-rate achievable with k active users relative to a single
/// user. The constructor enforces g_0 = 0, g_1 = 1 and strictly concave,
/// strictly increasing growth.
class GainProfile {
public:
    GainProfile() : gains_{0.0, 1.0} {}

    explicit GainProfile(std::vector<double> gains) : gains_(std::move(gains)) {
        if (gains_.size() < 2) {
            throw std::invalid_argument("GainProfile needs at least g_0 and g_1");
        }
        if (gains_[0] != 0.0) {
            throw std::invalid_argument("GainProfile: g_0 must be 0");
        }
        if (gains_[1] != 1.0) {
            throw std::invalid_argument("GainProfile: g_1 must be 1");
        }
        for (std::size_t k = 1; k + 1 < gains_.size(); ++k) {
            const double next = gains_[k + 1] - gains_[k];
            const double prev = gains_[k] - gains_[k - 1];
            if (!(next > 0.0)) {
                throw std::invalid_argument("GainProfile: gains must be strictly increasing at k=" + std::to_string(k + 1));
            }
            if (!(next < prev)) {
                throw std::invalid_argument("GainProfile: gains must be strictly concave at k=" + std::to_string(k + 1));
            }
        }
    }

    /// Largest supported active-user count.
    int max_users() const { return static_cast<int>(gains_.size()) - 1; }

    double operator[](int k) const {
        if (k < 0 || k > max_users()) {
            throw std::out_of_range("GainProfile: k=" + std::to_string(k) + " exceeds k_max=" +
                                    std::to_string(max_users()) + "; raise k_max");
        }
        return gains_[static_cast<std::size_t>(k)];
    }

    double g1() const { return gains_[1]; }

    std::span<const double> values() const { return gains_; }

    bool operator==(const GainProfile&) const = default;

private:
    std::vector<double> gains_;
};

/// Rate given to the user of the given laxity rank: g_rank - g_{rank-1}.
inline double marginal_rate(const GainProfile& profile, int rank) {
    if (rank < 1 || rank > profile.max_users()) {
        throw std::out_of_range("marginal_rate: rank " + std::to_string(rank) + " out of range");
    }
    return profile[rank] - profile[rank - 1];
}

/// Membership in the symmetric polymatroid region. Because the rank function
/// depends only on cardinality, the m largest rates bound every m-subset, so
/// checking sorted prefix sums covers all 2^k subset constraints.
inline bool in_region(const GainProfile& profile, std::span<const double> rates, double tol = 1e-12) {
    if (static_cast<int>(rates.size()) > profile.max_users()) {
        return false;
    }
    std::vector<double> sorted(rates.begin(), rates.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double prefix = 0.0;
    for (std::size_t m = 0; m < sorted.size(); ++m) {
        if (sorted[m] < 0.0 || sorted[m] > 1.0 + tol) {
            return false;
        }
        prefix += sorted[m];
        const double cap = profile[static_cast<int>(m + 1)];
        if (prefix > cap + tol * (1.0 + cap)) {
            return false;
        }
    }
    return true;
}

namespace detail {

/// Pool-adjacent-violators projection onto non-increasing sequences (equal
/// weights). Block sums are preserved.
inline std::vector<double> pava_nonincreasing(std::span<const double> values) {
    struct Block {
        double sum;
        std::size_t count;
        double mean() const { return sum / static_cast<double>(count); }
    };
    std::vector<Block> blocks;
    for (double v : values) {
        blocks.push_back({v, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() < blocks.back().mean()) {
            Block merged{blocks[blocks.size() - 2].sum + blocks.back().sum,
                         blocks[blocks.size() - 2].count + blocks.back().count};
            blocks.pop_back();
            blocks.back() = merged;
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& b : blocks) {
        out.insert(out.end(), b.count, b.mean());
    }
    return out;
}

}  // namespace detail

/// Monte-Carlo estimate of g_1..g_{k_max} for i.i.d. Rayleigh users.
///
/// g_k = E[log2(1 + max of k exponential SINRs)] / E[log2(1 + SINR)]. The max
/// of k unit exponentials is drawn through the Renyi representation
/// sum_{j<=k} E_j / j, which couples all k in one sample and keeps the
/// estimated increments smooth. Residual concavity violations are projected
/// out with PAVA; if that leaves ties, the sample count was too small.
inline GainProfile estimate_gains(double mean_sinr, int k_max, long long sample_count, std::uint64_t seed) {
    if (k_max < 1) {
        throw std::invalid_argument("estimate_gains: k_max must be >= 1");
    }
    if (sample_count < 10000) {
        throw std::invalid_argument("estimate_gains: sample_count must be >= 10^4");
    }
    if (!(mean_sinr > 0.0)) {
        throw std::invalid_argument("estimate_gains: mean_sinr must be > 0");
    }
    auto rng = make_rng(seed, 0x6a1e);
    std::exponential_distribution<double> expo(1.0);
    const auto k_count = static_cast<std::size_t>(k_max);
    std::vector<double> sums(k_count, 0.0);
    for (long long s = 0; s < sample_count; ++s) {
        double running_max = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
            running_max += expo(rng) / static_cast<double>(k + 1);
            sums[k] += std::log2(1.0 + mean_sinr * running_max);
        }
    }
    std::vector<double> raw(k_count + 1, 0.0);
    for (std::size_t k = 0; k < k_count; ++k) {
        raw[k + 1] = sums[k] / sums[0];
    }
    raw[1] = 1.0;

    // increments d_2..d_K, repaired to be non-increasing and capped by d_1 = 1
    std::vector<double> inc;
    for (std::size_t k = 2; k <= k_count; ++k) {
        inc.push_back(raw[k] - raw[k - 1]);
    }
    inc = detail::pava_nonincreasing(inc);

    std::vector<double> gains{0.0, 1.0};
    for (double d : inc) {
        gains.push_back(gains.back() + d);
    }
    try {
        return GainProfile(std::move(gains));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("estimate_gains: sample_count ") + std::to_string(sample_count) +
                                 " too small for k_max " + std::to_string(k_max) + " (" + e.what() + ")");
    }
}

/// "k,g_k" table, rows k = 0..K, 12 significant digits.
inline void write_gain_table(std::ostream& out, const GainProfile& profile) {
    out << "k,g_k\n";
    char buf[64];
    const auto g = profile.values();
    for (std::size_t k = 0; k < g.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.12g\n", k, g[k]);
        out << buf;
    }
}

inline GainProfile read_gain_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("k,g_k", 0) != 0) {
        throw std::invalid_argument("gain table: missing 'k,g_k' header");
    }
    std::vector<double> gains;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("gain table: malformed row '" + line + "'");
        }
        const long k = std::stol(line.substr(0, comma));
        if (k != static_cast<long>(gains.size())) {
            throw std::invalid_argument("gain table: rows must be k = 0,1,2,... in order");
        }
        gains.push_back(std::stod(line.substr(comma + 1)));
    }
    return GainProfile(std::move(gains));
}

}  // namespace laxsched

#endif
