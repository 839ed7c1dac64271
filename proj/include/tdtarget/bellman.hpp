#pragma once

// Closed-form Bellman objects: losses, gradients, the D-weighted projection,
// the projected Bellman operator and its fixed point.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "tdtarget/errors.hpp"
#include "tdtarget/mrp.hpp"

namespace tdtarget {

inline constexpr double kMaxConditionNumber = 1e12;
inline constexpr double kFixedPointResidualTolerance = 1e-8;

inline double condition_number(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

/// Process + features with every derived matrix the algorithms need.
/// Immutable once built.
class ProjectedModel {
public:
    ProjectedModel(MarkovRewardProcess process, FeatureModel features)
        : process_(std::move(process)), features_(std::move(features)) {
        if (features_.num_states() != process_.num_states()) {
            throw InvalidInput("process and features disagree on the state count");
        }
        const Matrix& phi = features_.phi();
        const Vector& d = features_.d();
        phi_t_d_ = phi.transpose() * d.asDiagonal();
        gram_ = phi_t_d_ * phi;
        p_phi_ = process_.transition() * phi;
        phi_t_d_r_ = phi_t_d_ * process_.reward_mean();
        phi_t_d_p_phi_ = phi_t_d_ * p_phi_;
        gram_solver_ = Eigen::LDLT<Matrix>(gram_);
        if (gram_solver_.info() != Eigen::Success || condition_number(gram_) > kMaxConditionNumber) {
            throw NumericalError("Gram matrix Phi' D Phi is singular or ill-conditioned");
        }
        projection_ = phi * gram_solver_.solve(phi_t_d_);
        fixed_point_ = solve_fixed_point();
    }

    const MarkovRewardProcess& process() const { return process_; }
    const FeatureModel& features() const { return features_; }
    const Matrix& phi() const { return features_.phi(); }
    const Vector& d() const { return features_.d(); }
    const Matrix& transition() const { return process_.transition(); }
    const Vector& rewards() const { return process_.reward_mean(); }
    double gamma() const { return process_.gamma(); }
    std::size_t num_features() const { return features_.num_features(); }
    std::size_t num_states() const { return features_.num_states(); }

    /// Phi' D Phi
    const Matrix& gram() const { return gram_; }
    /// Phi' D
    const Matrix& phi_t_d() const { return phi_t_d_; }
    /// Phi' D R
    const Vector& phi_t_d_r() const { return phi_t_d_r_; }
    /// Phi' D P Phi (no gamma)
    const Matrix& phi_t_d_p_phi() const { return phi_t_d_p_phi_; }
    /// Pi = Phi (Phi' D Phi)^{-1} Phi' D
    const Matrix& projection() const { return projection_; }
    /// theta*, the solution of the projected Bellman equation
    const Vector& fixed_point() const { return fixed_point_; }

    Vector solve_gram(const Vector& rhs) const { return gram_solver_.solve(rhs); }

    /// R + gamma P Phi target
    Vector bellman_target(const Vector& target) const {
        return process_.reward_mean() + gamma() * (p_phi_ * target);
    }

    double d_norm(const Vector& x) const { return tdtarget::d_norm(x, features_.d()); }

    /// ||Phi theta - Phi theta*||_D
    double weighted_error(const Vector& theta) const { return d_norm(phi() * (theta - fixed_point_)); }

private:
    Vector solve_fixed_point() const {
        const Matrix system = phi_t_d_ * (gamma() * p_phi_ - phi());
        if (condition_number(system) > kMaxConditionNumber) {
            throw NumericalError("fixed-point system Phi' D (gamma P - I) Phi is ill-conditioned");
        }
        Vector theta = system.fullPivLu().solve(-phi_t_d_r_);
        const Vector phi_theta = phi() * theta;
        const double residual = d_norm(phi_theta - projection_ * bellman_target(theta));
        if (!(residual <= kFixedPointResidualTolerance * std::max(1.0, d_norm(phi_theta)))) {
            std::ostringstream os;
            os << "fixed-point residual " << residual << " exceeds tolerance";
            throw NumericalError(os.str());
        }
        return theta;
    }

    MarkovRewardProcess process_;
    FeatureModel features_;
    Matrix phi_t_d_;
    Matrix gram_;
    Matrix p_phi_;
    Vector phi_t_d_r_;
    Matrix phi_t_d_p_phi_;
    Eigen::LDLT<Matrix> gram_solver_;
    Matrix projection_;
    Vector fixed_point_;
};

namespace detail {
inline void require_dim(const Vector& v, const ProjectedModel& m, const char* what) {
    if (static_cast<std::size_t>(v.size()) != m.num_features()) {
        throw InvalidInput(std::string(what) + ": weight vector has the wrong dimension");
    }
}
} // namespace detail

/// 1/2 ||R + gamma P Phi theta - Phi theta||_D^2
inline double msbe_loss(const Vector& theta, const ProjectedModel& model) {
    detail::require_dim(theta, model, "msbe_loss");
    const double r = model.d_norm(model.bellman_target(theta) - model.phi() * theta);
    return 0.5 * r * r;
}

/// 1/2 ||R + gamma P Phi target - Phi theta||_D^2
inline double modified_loss(const Vector& theta, const Vector& target, const ProjectedModel& model) {
    detail::require_dim(theta, model, "modified_loss");
    detail::require_dim(target, model, "modified_loss");
    const double r = model.d_norm(model.bellman_target(target) - model.phi() * theta);
    return 0.5 * r * r;
}

/// Gradient in theta of modified_loss: -Phi' D (R + gamma P Phi target - Phi theta).
inline Vector modified_loss_gradient(const Vector& theta, const Vector& target, const ProjectedModel& model) {
    detail::require_dim(theta, model, "modified_loss_gradient");
    detail::require_dim(target, model, "modified_loss_gradient");
    return -(model.phi_t_d() * (model.bellman_target(target) - model.phi() * theta));
}

/// theta+ with Phi theta+ = Pi (R + gamma P Phi theta); also the minimiser of
/// modified_loss(. ; theta).
inline Vector projected_bellman_apply(const Vector& theta, const ProjectedModel& model) {
    detail::require_dim(theta, model, "projected_bellman_apply");
    return model.solve_gram(model.phi_t_d() * model.bellman_target(theta));
}

/// F(x) = Pi (R + gamma P x) for a state-space vector x.
inline Vector projected_bellman_operator(const Vector& x, const ProjectedModel& model) {
    if (static_cast<std::size_t>(x.size()) != model.num_states()) {
        throw InvalidInput("projected_bellman_operator: state vector has the wrong dimension");
    }
    return model.projection() * (model.rewards() + model.gamma() * (model.transition() * x));
}

inline const Vector& exact_fixed_point(const ProjectedModel& model) { return model.fixed_point(); }

/// ||Phi theta - F(Phi theta)||_D
inline double fixed_point_residual(const Vector& theta, const ProjectedModel& model) {
    const Vector x = model.phi() * theta;
    return model.d_norm(x - projected_bellman_operator(x, model));
}

/// J = (I - gamma P)^{-1} R, the exact value function.
inline Vector value_function(const ProjectedModel& model) {
    const auto n = static_cast<Eigen::Index>(model.num_states());
    const Matrix system = Matrix::Identity(n, n) - model.gamma() * model.transition();
    return system.partialPivLu().solve(model.rewards());
}

/// ||Phi theta* - J||_D
inline double approximation_gap(const ProjectedModel& model) {
    return model.d_norm(model.phi() * model.fixed_point() - value_function(model));
}

} // namespace tdtarget
