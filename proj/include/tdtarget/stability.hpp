#pragma once

// Mean-field ODE matrices of the coupled learners, Hurwitz and Lyapunov
// checks, and the finite-sample constants of periodic TD.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tdtarget/bellman.hpp"
#include "tdtarget/errors.hpp"
#include "tdtarget/learners.hpp"

namespace tdtarget {

inline constexpr double kHurwitzThreshold = -1e-10;

// -----------------------------------------------------------------------------
// ODE systems
// -----------------------------------------------------------------------------

/// d/dt [theta; target] = A [theta; target] + b
struct OdeSystem {
    Matrix a;
    Vector b;
    Variant variant = Variant::a_td;
    double delta = 0.0;
    std::optional<double> nu;

    /// -A^{-1} b
    Vector equilibrium() const {
        auto lu = a.fullPivLu();
        if (!lu.isInvertible()) {
            throw NumericalError("ODE matrix is singular; no unique equilibrium");
        }
        return lu.solve(-b);
    }
};

namespace detail {
inline Matrix ident(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return Matrix::Identity(k, k);
}

inline Matrix blocks(const Matrix& tl, const Matrix& tr, const Matrix& bl, const Matrix& br) {
    const auto n = tl.rows();
    Matrix out(2 * n, 2 * n);
    out << tl, tr, bl, br;
    return out;
}

inline Vector stack(const Vector& top, const Vector& bottom) {
    Vector out(top.size() + bottom.size());
    out << top, bottom;
    return out;
}
} // namespace detail

inline OdeSystem atd_ode_system(const ProjectedModel& model, double delta) {
    if (!(delta > 0.0)) {
        throw InvalidInput("averaging TD ODE needs delta > 0");
    }
    const std::size_t n = model.num_features();
    const Matrix eye = detail::ident(n);
    OdeSystem sys;
    sys.a = detail::blocks(-model.gram(), model.gamma() * model.phi_t_d_p_phi(), delta * eye, -delta * eye);
    sys.b = detail::stack(model.phi_t_d_r(), Vector::Zero(static_cast<Eigen::Index>(n)));
    sys.variant = Variant::a_td;
    sys.delta = delta;
    return sys;
}

inline OdeSystem dtd_ode_system(const ProjectedModel& model, double delta) {
    if (!(delta >= 0.0)) {
        throw InvalidInput("double TD ODE needs delta >= 0");
    }
    const Matrix eye = detail::ident(model.num_features());
    const Matrix diag = -model.gram() - delta * eye;
    const Matrix off = model.gamma() * model.phi_t_d_p_phi() + delta * eye;
    OdeSystem sys;
    sys.a = detail::blocks(diag, off, off, diag);
    sys.b = detail::stack(model.phi_t_d_r(), model.phi_t_d_r());
    sys.variant = Variant::d_td;
    sys.delta = delta;
    return sys;
}

/// diag(nu I, (1 - nu) I)
inline Matrix randomization_matrix(std::size_t n, double nu) {
    Vector diag(2 * static_cast<Eigen::Index>(n));
    diag.head(static_cast<Eigen::Index>(n)).setConstant(nu);
    diag.tail(static_cast<Eigen::Index>(n)).setConstant(1.0 - nu);
    return diag.asDiagonal();
}

/// Lambda A and Lambda b with A, b from the parallel double TD system.
inline OdeSystem randomized_dtd_ode_system(const ProjectedModel& model, double delta, double nu) {
    if (!(nu > 0.0 && nu < 1.0)) {
        throw InvalidInput("nu must lie in (0, 1)");
    }
    OdeSystem sys = dtd_ode_system(model, delta);
    const Matrix lambda = randomization_matrix(model.num_features(), nu);
    sys.a = lambda * sys.a;
    sys.b = lambda * sys.b;
    sys.variant = Variant::d_td_random;
    sys.nu = nu;
    return sys;
}

/// [[0, I], [I, 0]]
inline Matrix block_swap(std::size_t n) {
    const Matrix eye = detail::ident(n);
    const Matrix zero = Matrix::Zero(eye.rows(), eye.cols());
    return detail::blocks(zero, eye, eye, zero);
}

inline OdeSystem ode_system_for(const AlgorithmConfig& cfg, const ProjectedModel& model) {
    switch (cfg.variant) {
    case Variant::a_td: return atd_ode_system(model, *cfg.delta);
    case Variant::d_td: return dtd_ode_system(model, *cfg.delta);
    case Variant::d_td_random: return randomized_dtd_ode_system(model, *cfg.delta, *cfg.nu);
    default: throw InvalidInput("no coupled ODE system for variant " + std::string(to_string(cfg.variant)));
    }
}

// -----------------------------------------------------------------------------
// Stability checks
// -----------------------------------------------------------------------------

struct StabilityReport {
    std::vector<std::complex<double>> eigenvalues;
    double max_real_part = 0.0;
    bool hurwitz = false;
    std::optional<double> lyapunov_residual;
    std::optional<Vector> equilibrium;
};

inline StabilityReport is_hurwitz(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw InvalidInput("is_hurwitz expects a non-empty square matrix");
    }
    Eigen::EigenSolver<Matrix> solver(a, false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigenvalue computation failed");
    }
    StabilityReport rep;
    rep.max_real_part = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        rep.eigenvalues.push_back(solver.eigenvalues()(i));
        rep.max_real_part = std::max(rep.max_real_part, solver.eigenvalues()(i).real());
    }
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](const auto& x, const auto& y) {
        return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
    });
    rep.hurwitz = rep.max_real_part < kHurwitzThreshold;
    return rep;
}

inline double max_symmetric_eigenvalue(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigenvalue computation failed");
    }
    return solver.eigenvalues().maxCoeff();
}

inline double min_symmetric_eigenvalue(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigenvalue computation failed");
    }
    return solver.eigenvalues().minCoeff();
}

/// lambda_max(A' M + M A). Negative certifies A Hurwitz.
inline double lyapunov_check(const Matrix& a, const Matrix& m) {
    if (a.rows() != a.cols() || m.rows() != a.rows() || m.cols() != a.cols()) {
        throw InvalidInput("lyapunov_check: dimension mismatch");
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        throw InvalidInput("lyapunov_check: M must be symmetric");
    }
    const double m_min = min_symmetric_eigenvalue(m);
    if (!(m_min > 0.0)) {
        std::ostringstream os;
        os << "lyapunov_check: M is not positive definite (smallest eigenvalue " << m_min << ")";
        throw InvalidInput(os.str());
    }
    return max_symmetric_eigenvalue(a.transpose() * m + m * a);
}

/// Full report: spectrum, verdict, Lyapunov residual for the natural M of
/// the variant (I, or Lambda^{-1} for the randomized system), equilibrium.
inline StabilityReport analyse(const OdeSystem& sys) {
    StabilityReport rep = is_hurwitz(sys.a);
    const auto dim = static_cast<std::size_t>(sys.a.rows());
    Matrix m = detail::ident(dim);
    if (sys.nu) {
        m = randomization_matrix(dim / 2, *sys.nu).inverse();
    }
    rep.lyapunov_residual = lyapunov_check(sys.a, m);
    try {
        rep.equilibrium = sys.equilibrium();
    } catch (const NumericalError&) {
        rep.equilibrium.reset();
    }
    return rep;
}

/// Smallest eigenvalue of the Schur-complement expression
///   2 delta I + Y + Y' - (X' - Y)' (-(X + X'))^{-1} (X' - Y)
/// with X = Phi' D (-I + gamma P) Phi and Y = gamma Phi' D P Phi.
/// Positive means the averaging TD matrix passes the Lyapunov test with M = I
/// after the similarity transform.
inline double schur_delta_margin(const ProjectedModel& model, double delta) {
    if (!(delta > 0.0)) {
        throw InvalidInput("schur_delta_condition needs delta > 0");
    }
    const Matrix y = model.gamma() * model.phi_t_d_p_phi();
    const Matrix x = y - model.gram();
    const Matrix inner = -(x + x.transpose());
    Eigen::LLT<Matrix> llt(inner);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("Schur complement inner block -(X + X') is not positive definite");
    }
    const Matrix coupling = x.transpose() - y;
    const Matrix eye = detail::ident(model.num_features());
    const Matrix expr = 2.0 * delta * eye + y + y.transpose() - coupling.transpose() * llt.solve(coupling);
    return min_symmetric_eigenvalue(expr);
}

inline bool schur_delta_condition(const ProjectedModel& model, double delta) {
    return schur_delta_margin(model, delta) > 0.0;
}

// -----------------------------------------------------------------------------
// Finite-sample constants
// -----------------------------------------------------------------------------

struct BoundConstants {
    double xi1 = 0, xi2 = 0, xi3 = 0;
    double chi1 = 0, chi2 = 0, chi3 = 0;
    double rho1 = 0, rho2 = 0;
    double omega1 = 0, omega2 = 0;
    double mu = 0;         ///< lambda_min(Phi' D Phi)
    double lipschitz = 0;  ///< sqrt(lambda_max((Phi' D Phi)^2))
    double phi_spectral = 0;  ///< ||Phi||_2
    double phi_d = 0;         ///< ||Phi||_D, Euclidean to D-norm operator norm
    double beta = 0, kappa = 0;
};

/// Operator norm of Phi from the Euclidean norm to the D-norm.
inline double phi_d_norm(const ProjectedModel& model) {
    return std::sqrt(max_symmetric_eigenvalue(model.gram()));
}

/// Constants of the inner SGD rate, the sample-complexity bound and the
/// iterate-boundedness lemma. `initial_error_sq` is E||Phi theta_0 - Phi theta*||_D^2.
inline BoundConstants bound_constants(const ProjectedModel& model, double beta, double kappa, const Vector& theta_star,
                                      double initial_error_sq = 0.0) {
    if (static_cast<std::size_t>(theta_star.size()) != model.num_features()) {
        throw InvalidInput("bound_constants: theta_star has the wrong dimension");
    }
    BoundConstants c;
    c.beta = beta;
    c.kappa = kappa;
    const Matrix& g = model.gram();
    const Matrix& phi = model.phi();
    const double gamma = model.gamma();
    c.mu = min_symmetric_eigenvalue(g);
    const Matrix gg = g * g;
    c.lipschitz = std::sqrt(max_symmetric_eigenvalue(gg));
    c.phi_spectral = Eigen::JacobiSVD<Matrix>(phi).singularValues()(0);
    c.phi_d = phi_d_norm(model);

    if (!(c.mu > 0.0)) {
        throw InvalidInput("bound_constants: Phi' D Phi is not positive definite");
    }
    if (!(beta > 1.0 / c.mu)) {
        std::ostringstream os;
        os << "bound_constants: need beta > 1/mu, got beta=" << beta << " <= 1/mu=" << 1.0 / c.mu;
        throw InvalidInput(os.str());
    }
    if (!(kappa > 0.0)) {
        throw InvalidInput("bound_constants: need kappa > 0");
    }

    const double p2 = c.phi_spectral * c.phi_spectral;
    const double p4 = p2 * p2;
    c.xi3 = 3.0 * p4 / min_symmetric_eigenvalue(gg);

    const double cap = 1.0 / (c.lipschitz * (c.xi3 + 1.0));
    if (beta / (kappa + 1.0) > cap) {
        std::ostringstream os;
        os << "bound_constants: need beta/(kappa+1) <= 1/(L(xi3+1)), got " << beta / (kappa + 1.0) << " > " << cap;
        throw InvalidInput(os.str());
    }

    const double sigma = model.process().sigma();
    const Matrix& a = model.phi_t_d_p_phi();
    const double lift = (1.0 + c.xi3) * (1.0 + c.xi3);
    c.xi1 = 3.0 * sigma * sigma * p2 + 2.0 * lift * model.phi_t_d_r().squaredNorm();
    c.xi2 = 3.0 * p4 + 2.0 * lift * max_symmetric_eigenvalue(a.transpose() * a);

    c.chi3 = beta * beta * c.lipschitz / (2.0 * (beta * c.mu - 1.0));
    const Matrix p_phi = model.transition() * phi;
    const double residual = model.d_norm(model.rewards() + p_phi * theta_star - phi * theta_star);
    c.chi1 = (c.xi1 + c.xi2 * theta_star.squaredNorm()) * c.chi3 + (kappa + 1.0) * residual * residual;
    const Matrix diff = p_phi - phi;
    c.chi2 = c.xi2 * c.chi3 + (kappa + 1.0) * max_symmetric_eigenvalue(diff.transpose() * model.d().asDiagonal() * diff);

    const double pd2 = c.phi_d * c.phi_d;
    c.rho1 = 2.0 * pd2 / (c.mu * c.mu * (1.0 - gamma) * (1.0 - gamma) * std::log(1.0 / gamma));
    c.rho2 = c.chi1 * c.mu + c.chi2 * initial_error_sq;

    const double g2 = gamma * gamma;
    c.omega1 = 2.0 * ((1.0 + g2) / (1.0 - g2)) * pd2 * model.d().maxCoeff() / (c.mu * (1.0 - g2));
    c.omega2 = initial_error_sq / c.mu;
    return c;
}

/// Expected-error bound after T outer steps of periodic TD:
///   ||Phi||_D sqrt(max d) sum_{k=1}^{T-1} gamma^{T-k} sqrt(eps_k) + gamma^T e0
/// epsilons[k-1] holds eps_k; entries beyond T-1 are ignored.
inline double ptd_error_bound(std::size_t t_outer, const std::vector<double>& epsilons, const ProjectedModel& model,
                              double initial_error) {
    if (t_outer >= 2 && epsilons.size() < t_outer - 1) {
        throw InvalidInput("ptd_error_bound: need eps_1 .. eps_{T-1}");
    }
    if (!(initial_error >= 0.0)) {
        throw InvalidInput("ptd_error_bound: initial error must be non-negative");
    }
    const double gamma = model.gamma();
    double sum = 0.0;
    for (std::size_t k = 1; k + 1 <= t_outer; ++k) {
        const double eps = epsilons[k - 1];
        if (!(eps >= 0.0)) {
            throw InvalidInput("ptd_error_bound: eps_k must be non-negative");
        }
        sum += std::pow(gamma, static_cast<double>(t_outer - k)) * std::sqrt(eps);
    }
    const double scale = phi_d_norm(model) * std::sqrt(model.d().maxCoeff());
    return scale * sum + std::pow(gamma, static_cast<double>(t_outer)) * initial_error;
}

/// Markov bound on P(||Phi theta_T - Phi theta*||_D >= tau).
inline double ptd_tail_probability(double tau, std::size_t t_outer, const std::vector<double>& epsilons,
                                   const ProjectedModel& model, double initial_error) {
    if (!(tau > 0.0)) {
        throw InvalidInput("ptd_tail_probability: tau must be positive");
    }
    return ptd_error_bound(t_outer, epsilons, model, initial_error) / tau;
}

/// rho1 (rho2 / eps^2 + 4 chi2) ln(1/eps) SO calls.
inline double sample_complexity(const ProjectedModel& model, double epsilon, double beta, double kappa,
                                const Vector& theta_star, double initial_error_sq) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw InvalidInput("sample_complexity: epsilon must lie in (0, 1)");
    }
    const BoundConstants c = bound_constants(model, beta, kappa, theta_star, initial_error_sq);
    return c.rho1 * (c.rho2 / (epsilon * epsilon) + 4.0 * c.chi2) * std::log(1.0 / epsilon);
}

} // namespace tdtarget
