#pragma once

// i.i.d. sampling oracle: s ~ d, s' ~ P(s, .), r from the reward law.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tdtarget/mrp.hpp"
#include "tdtarget/rng.hpp"

namespace tdtarget {

/// One oracle draw. States are zero-based row indices of the feature matrix
/// (state label = index + 1).
struct Sample {
    std::size_t state = 0;
    double reward = 0.0;
    std::size_t next_state = 0;
};

/// Seeded, single-owner random stream. Identical seeds give identical draws.
class SampleStream {
public:
    explicit SampleStream(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t seed() const { return rng_.seed(); }
    std::uint64_t counter() const { return rng_.counter(); }

    double uniform() { return rng_.next_double(); }
    double uniform(double lo, double hi) { return rng_.uniform(lo, hi); }
    bool bernoulli(double p) { return rng_.next_double() < p; }

    SampleStream split(std::uint64_t index) const { return SampleStream(rng_.split(index)); }

private:
    explicit SampleStream(CounterRng rng) : rng_(rng) {}
    CounterRng rng_;
};

namespace detail {

inline std::vector<double> cumulative(const Eigen::Ref<const Eigen::RowVectorXd>& probs) {
    std::vector<double> cdf(static_cast<std::size_t>(probs.size()));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        acc += probs(i);
        cdf[static_cast<std::size_t>(i)] = acc;
    }
    return cdf;
}

inline std::size_t invert_cdf(const std::vector<double>& cdf, double u) {
    // scale by the total so rounding in the row sum cannot leave mass uncovered
    const double target = u * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    return it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin());
}

} // namespace detail

/// Precomputes the inverse-CDF tables for a (process, features) pair.
/// Each draw consumes exactly three uniforms from the stream: state,
/// next state, reward perturbation.
class SamplingOracle {
public:
    SamplingOracle(const MarkovRewardProcess& process, const FeatureModel& features)
        : sigma_(process.sigma()), rewards_(process.reward_law()) {
        if (features.num_states() != process.num_states()) {
            throw InvalidInput("sampling oracle: process and features disagree on the state count");
        }
        state_cdf_ = detail::cumulative(features.d().transpose());
        next_cdf_.reserve(process.num_states());
        for (Eigen::Index s = 0; s < process.transition().rows(); ++s) {
            next_cdf_.push_back(detail::cumulative(process.transition().row(s)));
        }
        halfwidth_.resize(process.num_states());
        for (std::size_t s = 0; s < halfwidth_.size(); ++s) {
            halfwidth_[s] = rewards_.halfwidth_at(s, sigma_);
        }
    }

    Sample draw(SampleStream& stream) const {
        Sample out;
        out.state = detail::invert_cdf(state_cdf_, stream.uniform());
        out.next_state = detail::invert_cdf(next_cdf_[out.state], stream.uniform());
        const double u = stream.uniform();
        const double w = halfwidth_[out.state];
        out.reward = rewards_.mean(static_cast<Eigen::Index>(out.state)) + w * (2.0 * u - 1.0);
        return out;
    }

    double sigma() const { return sigma_; }

private:
    double sigma_;
    RewardLaw rewards_;
    std::vector<double> state_cdf_;
    std::vector<std::vector<double>> next_cdf_;
    std::vector<double> halfwidth_;
};

inline Sample draw(SampleStream& stream, const MarkovRewardProcess& process, const FeatureModel& features) {
    return SamplingOracle(process, features).draw(stream);
}

/// TD semi-gradient g = -phi(s) (r + gamma phi(s')' target - phi(s)' theta).
inline Vector td_semi_gradient(const Matrix& phi, double gamma, const Sample& sample, const Vector& theta,
                               const Vector& target) {
    const auto s = static_cast<Eigen::Index>(sample.state);
    const auto sn = static_cast<Eigen::Index>(sample.next_state);
    const double td_error = sample.reward + gamma * phi.row(sn).dot(target) - phi.row(s).dot(theta);
    return -td_error * phi.row(s).transpose();
}

struct GradientStatistics {
    Vector mean;
    Vector standard_error;     ///< per component, sd / sqrt(count)
    double second_moment = 0;  ///< mean of ||g||^2
    double second_moment_se = 0;
    std::size_t count = 0;
};

/// Monte Carlo statistics of the semi-gradient at a fixed (theta, target).
inline GradientStatistics gradient_statistics(SampleStream& stream, const MarkovRewardProcess& process,
                                              const FeatureModel& features, const Vector& theta,
                                              const Vector& target, std::size_t count) {
    if (count < 1) {
        throw InvalidInput("gradient statistics need at least one draw");
    }
    const SamplingOracle oracle(process, features);
    const auto n = static_cast<Eigen::Index>(features.num_features());
    // Welford accumulators keep the variance stable over 1e6 draws
    Vector mean = Vector::Zero(n);
    Vector m2 = Vector::Zero(n);
    double sq_mean = 0.0;
    double sq_m2 = 0.0;
    for (std::size_t i = 1; i <= count; ++i) {
        const Vector g = td_semi_gradient(features.phi(), process.gamma(), oracle.draw(stream), theta, target);
        const double inv = 1.0 / static_cast<double>(i);
        const Vector delta = g - mean;
        mean += delta * inv;
        m2 += delta.cwiseProduct(g - mean);
        const double q = g.squaredNorm();
        const double dq = q - sq_mean;
        sq_mean += dq * inv;
        sq_m2 += dq * (q - sq_mean);
    }
    GradientStatistics out;
    out.mean = std::move(mean);
    out.count = count;
    out.second_moment = sq_mean;
    if (count > 1) {
        const double denom = static_cast<double>(count - 1);
        out.standard_error = (m2 / denom / static_cast<double>(count)).cwiseSqrt();
        out.second_moment_se = std::sqrt(sq_m2 / denom / static_cast<double>(count));
    } else {
        out.standard_error = Vector::Zero(n);
    }
    return out;
}

inline Vector empirical_gradient_mean(SampleStream& stream, const MarkovRewardProcess& process,
                                      const FeatureModel& features, const Vector& theta, const Vector& target,
                                      std::size_t count) {
    return gradient_statistics(stream, process, features, theta, target, count).mean;
}

} // namespace tdtarget
