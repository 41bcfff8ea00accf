#ifndef LAXSCHED_CHANNEL_HPP
#define LAXSCHED_CHANNEL_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "laxsched/rng.hpp"

namespace laxsched {

/// E[log2(1 + gamma)] for gamma ~ Exponential(mean = mean_sinr).
///
/// Integrating by parts against the exponential tail gives
/// (1/ln 2) * int_0^inf exp(-x / mean_sinr) / (1 + x) dx.
inline double mean_spectral_efficiency(double mean_sinr) {
    if (!(mean_sinr > 0.0)) {
        throw std::invalid_argument("mean_spectral_efficiency: mean_sinr must be > 0");
    }
    boost::math::quadrature::exp_sinh<double> integrator;
    auto tail = [mean_sinr](double x) { return std::exp(-x / mean_sinr) / (1.0 + x); };
    double error = 0.0;
    const double value = integrator.integrate(tail, 1e-14, &error);
    return value / std::numbers::ln2;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Rayleigh block-fading user channel with Shannon rates, R = B log2(1 + gamma).
class ChannelModel {
public:
    ChannelModel() : ChannelModel(800e3, 1.0) {}

    ChannelModel(double bandwidth_hz, double mean_sinr) : bandwidth_(bandwidth_hz), mean_sinr_(mean_sinr) {
        if (!(bandwidth_hz > 0.0)) {
            throw std::invalid_argument("ChannelModel: bandwidth must be > 0");
        }
        if (!(mean_sinr > 0.0)) {
            throw std::invalid_argument("ChannelModel: mean_sinr must be > 0");
        }
        spectral_efficiency_ = mean_spectral_efficiency(mean_sinr);
        mean_rate_ = bandwidth_ * spectral_efficiency_;
    }

    double bandwidth() const { return bandwidth_; }
    double mean_sinr() const { return mean_sinr_; }
    /// Mean rate in bits/s; the normalization constant for sizes and rates.
    double mean_rate() const { return mean_rate_; }

    /// B log2(1 + gamma) / mean_rate.
    double normalized_rate_for_sinr(double sinr) const { return std::log2(1.0 + sinr) / spectral_efficiency_; }

    /// Rate for (user, slot) drawn from a seed-derived counter stream, so any
    /// pair can be sampled independently of evaluation order.
    double slot_rate(std::uint64_t seed, std::uint64_t user_id, std::uint64_t slot_index) const {
        const double u = counter_uniform(seed, user_id, slot_index);
        return normalized_rate_for_sinr(-mean_sinr_ * std::log(u));
    }

private:
    double bandwidth_;
    double mean_sinr_;
    double spectral_efficiency_ = 0.0;
    double mean_rate_ = 0.0;
};

template <class Urbg>
double sample_normalized_rate(const ChannelModel& model, Urbg& rng) {
    std::exponential_distribution<double> sinr(1.0 / model.mean_sinr());
    return model.normalized_rate_for_sinr(sinr(rng));
}

}  // namespace laxsched

#endif
