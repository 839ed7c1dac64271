#pragma once

// Policy-induced Markov reward process, linear features and the weighted
// (stationary-distribution) geometry shared by the rest of the library.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tdtarget/errors.hpp"
#include "tdtarget/rng.hpp"

namespace tdtarget {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kStationaryTolerance = 1e-10;
inline constexpr double kRankTolerance = 1e-10;

// -----------------------------------------------------------------------------
// Reward law
// -----------------------------------------------------------------------------

/// Per-state reward distribution. The observed reward at state s is
/// mean(s) plus a centred uniform perturbation whose half-width is
/// min(noise_halfwidth, mean(s), sigma - mean(s)), so observations stay in
/// [0, sigma] and their expectation is exactly mean(s).
struct RewardLaw {
    Vector mean;
    double noise_halfwidth = 0.0;

    double halfwidth_at(std::size_t s, double sigma) const {
        const double m = mean(static_cast<Eigen::Index>(s));
        return std::max(0.0, std::min({noise_halfwidth, m, sigma - m}));
    }
};

// -----------------------------------------------------------------------------
// Markov reward process
// -----------------------------------------------------------------------------

class MarkovRewardProcess {
public:
    MarkovRewardProcess(Matrix transition, RewardLaw rewards, double gamma, double sigma)
        : transition_(std::move(transition)), rewards_(std::move(rewards)), gamma_(gamma), sigma_(sigma) {
        validate();
    }

    std::size_t num_states() const { return static_cast<std::size_t>(transition_.rows()); }
    const Matrix& transition() const { return transition_; }
    const RewardLaw& reward_law() const { return rewards_; }
    const Vector& reward_mean() const { return rewards_.mean; }
    double gamma() const { return gamma_; }
    double sigma() const { return sigma_; }

private:
    void validate() const {
        const auto n = transition_.rows();
        if (n < 1 || transition_.cols() != n) {
            throw InvalidInput("transition matrix must be square and non-empty");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((transition_.row(i).array() < 0.0).any() || !transition_.row(i).allFinite()) {
                throw InvalidInput("transition row " + std::to_string(i) + " has a negative or non-finite entry");
            }
            const double sum = transition_.row(i).sum();
            if (std::abs(sum - 1.0) > kRowSumTolerance) {
                std::ostringstream os;
                os << "transition row " << i << " sums to " << sum << ", not 1";
                throw InvalidInput(os.str());
            }
        }
        if (!(gamma_ > 0.0 && gamma_ < 1.0)) {
            throw InvalidInput("gamma must lie in (0, 1)");
        }
        if (!(sigma_ >= 0.0)) {
            throw InvalidInput("sigma must be non-negative");
        }
        if (rewards_.mean.size() != n) {
            throw InvalidInput("reward mean vector length does not match the number of states");
        }
        if ((rewards_.mean.array() < 0.0).any() || (rewards_.mean.array() > sigma_).any()) {
            throw InvalidInput("every reward mean must lie in [0, sigma]");
        }
        if (!(rewards_.noise_halfwidth >= 0.0)) {
            throw InvalidInput("reward noise half-width must be non-negative");
        }
    }

    Matrix transition_;
    RewardLaw rewards_;
    double gamma_;
    double sigma_;
};

/// Uniform-transition chain with rewards drawn once per state from
/// U[0, reward_high] using `reward_seed`.
inline MarkovRewardProcess uniform_benchmark_process(std::uint64_t reward_seed, std::size_t num_states = 10,
                                                     double gamma = 0.9, double reward_high = 20.0,
                                                     double noise_halfwidth = 0.0) {
    const auto n = static_cast<Eigen::Index>(num_states);
    Matrix p = Matrix::Constant(n, n, 1.0 / static_cast<double>(num_states));
    CounterRng rng(reward_seed);
    RewardLaw law;
    law.mean.resize(n);
    for (Eigen::Index s = 0; s < n; ++s) {
        law.mean(s) = rng.uniform(0.0, reward_high);
    }
    law.noise_halfwidth = noise_halfwidth;
    return MarkovRewardProcess(std::move(p), std::move(law), gamma, reward_high);
}

// -----------------------------------------------------------------------------
// Stationary distribution
// -----------------------------------------------------------------------------

/// Power iteration d <- d P from the uniform vector until ||d P - d||_inf <= tol.
inline Vector stationary_distribution(const Matrix& p, double tol = 1e-12, std::size_t max_iter = 1'000'000) {
    const auto n = p.rows();
    if (n < 1 || p.cols() != n) {
        throw InvalidInput("transition matrix must be square and non-empty");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if ((p.row(i).array() < 0.0).any() || std::abs(p.row(i).sum() - 1.0) > kRowSumTolerance) {
            throw InvalidInput("row " + std::to_string(i) + " of the transition matrix is not stochastic");
        }
    }
    Eigen::RowVectorXd d = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
    double residual = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        Eigen::RowVectorXd next = d * p;
        next /= next.sum();
        residual = (next - d).cwiseAbs().maxCoeff();
        d = std::move(next);
        if (residual <= tol) {
            // residual is measured on the previous iterate; confirm on the returned one
            const double check = (d * p - d).cwiseAbs().maxCoeff();
            if (check <= tol) {
                return d.transpose();
            }
        }
    }
    throw ConvergenceError("power iteration did not converge within max_iter", residual);
}

// -----------------------------------------------------------------------------
// Weighted norm
// -----------------------------------------------------------------------------

/// ||x||_D = sqrt(x' D x) with D = diag(d).
inline double d_norm(const Vector& x, const Vector& d) {
    if (x.size() != d.size()) {
        throw InvalidInput("d_norm: vector and weight dimensions differ");
    }
    return std::sqrt((d.array() * x.array().square()).sum());
}

// -----------------------------------------------------------------------------
// Features
// -----------------------------------------------------------------------------

enum class RbfForm {
    displayed, ///< exp(-(s - c)^2) / scale
    gaussian,  ///< exp(-(s - c)^2 / scale)
};

struct RbfFeatureSpec {
    std::vector<double> centers;
    double scale = 200.0;
    RbfForm form = RbfForm::displayed;
};

inline double smallest_singular_value(const Matrix& phi) {
    Eigen::JacobiSVD<Matrix> svd(phi);
    const auto& sv = svd.singularValues();
    return sv.size() == 0 ? 0.0 : sv(sv.size() - 1);
}

inline void require_full_column_rank(const Matrix& phi) {
    if (phi.cols() > phi.rows()) {
        throw InvalidInput("feature matrix has more columns than rows");
    }
    const double smin = smallest_singular_value(phi);
    if (!(smin > kRankTolerance)) {
        std::ostringstream os;
        os << "feature matrix is rank deficient: smallest singular value " << smin;
        throw InvalidInput(os.str());
    }
}

/// Row s holds phi(states[s]).
inline Matrix build_rbf_features(const RbfFeatureSpec& spec, std::span<const double> states) {
    if (spec.centers.empty()) {
        throw InvalidInput("RBF spec needs at least one center");
    }
    if (!(spec.scale > 0.0)) {
        throw InvalidInput("RBF scale must be positive");
    }
    Matrix phi(static_cast<Eigen::Index>(states.size()), static_cast<Eigen::Index>(spec.centers.size()));
    for (std::size_t s = 0; s < states.size(); ++s) {
        for (std::size_t i = 0; i < spec.centers.size(); ++i) {
            const double sq = (states[s] - spec.centers[i]) * (states[s] - spec.centers[i]);
            phi(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) =
                spec.form == RbfForm::displayed ? std::exp(-sq) / spec.scale : std::exp(-sq / spec.scale);
        }
    }
    require_full_column_rank(phi);
    return phi;
}

/// States are labelled 1..num_states.
inline Matrix build_rbf_features(const RbfFeatureSpec& spec, std::size_t num_states) {
    std::vector<double> states(num_states);
    std::iota(states.begin(), states.end(), 1.0);
    return build_rbf_features(spec, states);
}

/// Feature matrix together with the stationary weights of its process.
class FeatureModel {
public:
    FeatureModel(Matrix phi, Vector d) : phi_(std::move(phi)), d_(std::move(d)) {
        if (phi_.rows() != d_.size()) {
            throw InvalidInput("feature rows and distribution length differ");
        }
        require_full_column_rank(phi_);
        if ((d_.array() <= 0.0).any()) {
            throw InvalidInput("stationary distribution must be strictly positive on every state");
        }
        if (std::abs(d_.sum() - 1.0) > kStationaryTolerance) {
            throw InvalidInput("stationary distribution does not sum to 1");
        }
    }

    /// Computes d from the process and checks d P = d.
    FeatureModel(const MarkovRewardProcess& process, Matrix phi)
        : FeatureModel(std::move(phi), stationary_distribution(process.transition())) {
        check_stationary(process);
    }

    void check_stationary(const MarkovRewardProcess& process) const {
        if (static_cast<std::size_t>(d_.size()) != process.num_states()) {
            throw InvalidInput("feature model and process have different state counts");
        }
        const double r = (d_.transpose() * process.transition() - d_.transpose()).cwiseAbs().maxCoeff();
        if (r > kStationaryTolerance) {
            std::ostringstream os;
            os << "d is not stationary for the process (residual " << r << ")";
            throw InvalidInput(os.str());
        }
    }

    const Matrix& phi() const { return phi_; }
    const Vector& d() const { return d_; }
    Eigen::DiagonalMatrix<double, Eigen::Dynamic> weight() const { return d_.asDiagonal(); }
    std::size_t num_features() const { return static_cast<std::size_t>(phi_.cols()); }
    std::size_t num_states() const { return static_cast<std::size_t>(phi_.rows()); }

private:
    Matrix phi_;
    Vector d_;
};

} // namespace tdtarget
