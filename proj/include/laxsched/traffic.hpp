#ifndef LAXSCHED_TRAFFIC_HPP
#define LAXSCHED_TRAFFIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "laxsched/core.hpp"

namespace laxsched {

inline constexpr double kBitsPerMegabyte = 8.0e6;

/// Lognormal file sizes truncated at max_size by resampling.
struct FileSizeLaw {
    double mean = 2.0;
    double std = 0.722;
    double max_size = 5.0;
    double log_mu = 0.0;
    double log_sigma = 0.0;

    /// Moment-matches the untruncated lognormal to (mean, std), sizes in MB.
    static FileSizeLaw from_moments(double mean, double std, double max_size) {
        if (!(mean > 0.0) || !(std > 0.0)) {
            throw std::invalid_argument("FileSizeLaw: mean and std must be > 0");
        }
        if (!(max_size > mean)) {
            throw std::invalid_argument("FileSizeLaw: max_size must exceed mean");
        }
        FileSizeLaw law;
        law.mean = mean;
        law.std = std;
        law.max_size = max_size;
        const double ratio = std / mean;
        const double var = std::log1p(ratio * ratio);
        law.log_sigma = std::sqrt(var);
        law.log_mu = std::log(mean) - 0.5 * var;
        return law;
    }

    static FileSizeLaw ftp_default() { return from_moments(2.0, 0.722, 5.0); }
};

/// Raw draw in MB.
template <class Urbg>
double sample_file_size_mb(const FileSizeLaw& law, Urbg& rng) {
    std::lognormal_distribution<double> dist(law.log_mu, law.log_sigma);
    double x = dist(rng);
    while (x > law.max_size) {
        x = dist(rng);
    }
    return x;
}

/// Draw normalized by the mean channel rate (seconds of mean-rate service).
template <class Urbg>
double sample_file_size(const FileSizeLaw& law, double mean_rate_bps, Urbg& rng) {
    return sample_file_size_mb(law, rng) * kBitsPerMegabyte / mean_rate_bps;
}

struct IdenticalDeadlineSpec {
    int user_count = 15;
    double deadline = 100.0;
    double arrival_spread = 0.5;
};

inline void validate(const IdenticalDeadlineSpec& s) {
    if (s.user_count < 1) {
        throw std::invalid_argument("identical-deadline traffic: user_count must be >= 1");
    }
    if (!(s.deadline > 0.0)) {
        throw std::invalid_argument("identical-deadline traffic: deadline must be > 0");
    }
    if (!(s.arrival_spread >= 0.0 && s.arrival_spread < 1.0)) {
        throw std::invalid_argument("identical-deadline traffic: arrival_spread must be in [0, 1)");
    }
}

struct StationaryArrivalSpec {
    double rate = 0.05;
    double stretch = 3.0;
    double horizon = 1000.0;
};

inline void validate(const StationaryArrivalSpec& s) {
    if (!(s.rate > 0.0)) {
        throw std::invalid_argument("stationary traffic: rate must be > 0");
    }
    if (!(s.stretch > 1.0)) {
        throw std::invalid_argument("stationary traffic: stretch must be > 1");
    }
    if (!(s.horizon > 0.0)) {
        throw std::invalid_argument("stationary traffic: horizon must be > 0");
    }
}

inline void sort_by_arrival(std::vector<DownloadRequest>& requests) {
    std::stable_sort(requests.begin(), requests.end(), [](const DownloadRequest& a, const DownloadRequest& b) {
        if (a.arrival_time != b.arrival_time) {
            return a.arrival_time < b.arrival_time;
        }
        return a.user_id < b.user_id;
    });
}

/// M users with a common deadline D, arrivals uniform on [0, aD].
///
/// Each user consumes its draws in a fixed order (arrival fraction, then
/// size), so for a fixed seed the sizes do not depend on D and the arrivals
/// scale linearly with D.
template <class Urbg>
std::vector<DownloadRequest> gen_identical_deadline(const IdenticalDeadlineSpec& spec, const FileSizeLaw& law,
                                                    double mean_rate_bps, Urbg& rng) {
    validate(spec);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<DownloadRequest> out;
    out.reserve(static_cast<std::size_t>(spec.user_count));
    for (int i = 1; i <= spec.user_count; ++i) {
        const double frac = unit(rng);
        const double size = sample_file_size(law, mean_rate_bps, rng);
        out.push_back({i, frac * spec.arrival_spread * spec.deadline, size, spec.deadline});
    }
    sort_by_arrival(out);
    return out;
}

/// Poisson arrivals on [0, horizon] with D_i = A_i + stretch * F_i / g1.
template <class Urbg>
std::vector<DownloadRequest> gen_stationary(const StationaryArrivalSpec& spec, const FileSizeLaw& law,
                                            double mean_rate_bps, Urbg& rng, double g1 = 1.0) {
    validate(spec);
    std::exponential_distribution<double> gap(spec.rate);
    std::vector<DownloadRequest> out;
    double t = gap(rng);
    int id = 1;
    while (t <= spec.horizon) {
        const double size = sample_file_size(law, mean_rate_bps, rng);
        out.push_back({id++, t, size, t + spec.stretch * size / g1});
        t += gap(rng);
    }
    return out;
}

inline void write_trace(std::ostream& out, const std::vector<DownloadRequest>& requests) {
    out << "user_id,arrival_s,size_norm,deadline_s\n";
    char buf[128];
    for (const auto& r : requests) {
        std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g\n", r.user_id, r.arrival_time, r.initial_size,
                      r.deadline);
        out << buf;
    }
}

inline std::vector<DownloadRequest> read_trace(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("user_id,arrival_s,size_norm,deadline_s", 0) != 0) {
        throw std::invalid_argument("request trace: missing header");
    }
    std::vector<DownloadRequest> out;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        DownloadRequest r;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &r.user_id, &r.arrival_time, &r.initial_size,
                        &r.deadline) != 4) {
            throw std::invalid_argument("request trace: malformed row '" + line + "'");
        }
        validate(r);
        out.push_back(r);
    }
    return out;
}

}  // namespace laxsched

#endif
