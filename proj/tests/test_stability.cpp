#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "tdtarget/experiment.hpp"
#include "tdtarget/stability.hpp"

using namespace tdtarget;

namespace {

ProjectedModel benchmark(bool zero_rewards = false, bool three_centers = false) {
    ProcessSpec ps = benchmark_process();
    if (zero_rewards) ps.reward_means = Vector::Zero(10);
    return build_problem(ps, three_centers ? three_center_features() : two_center_features()).model;
}

// one state, one feature equal to 1, reward 1, gamma 1/2: theta* = 2
ProjectedModel single_state() {
    MarkovRewardProcess proc(Matrix::Ones(1, 1), RewardLaw{Vector::Ones(1), 0.0}, 0.5, 1.0);
    FeatureModel fm(proc, Matrix::Ones(1, 1));
    return ProjectedModel(std::move(proc), std::move(fm));
}

Vector stacked(const Vector& a, const Vector& b) {
    Vector out(a.size() + b.size());
    out << a, b;
    return out;
}

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> out;
    for (int i = 0; i < points; ++i) out.push_back(lo * std::pow(hi / lo, i / double(points - 1)));
    return out;
}

bool positive_definite(const Matrix& m) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.transpose())).eigenvalues().minCoeff() > 0.0;
}

} // namespace

TEST(OdeSystem, SingleStateAveragingSystemByHand) {
    const ProjectedModel m = single_state();
    const OdeSystem sys = atd_ode_system(m, 0.25);
    Matrix expected(2, 2);
    expected << -1.0, 0.5, 0.25, -0.25;
    EXPECT_LE((sys.a - expected).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_DOUBLE_EQ(sys.b(0), 1.0);
    EXPECT_DOUBLE_EQ(sys.b(1), 0.0);
    EXPECT_LE((sys.equilibrium() - Vector::Constant(2, 2.0)).cwiseAbs().maxCoeff(), 1e-12);
    // trace -1.25, determinant 0.125: both roots have negative real part
    EXPECT_TRUE(is_hurwitz(sys.a).hurwitz);
}

TEST(OdeSystem, SingleStateDoubleSystemByHand) {
    const ProjectedModel m = single_state();
    const OdeSystem sys = dtd_ode_system(m, 0.5);
    Matrix expected(2, 2);
    expected << -1.5, 1.0, 1.0, -1.5;
    EXPECT_LE((sys.a - expected).cwiseAbs().maxCoeff(), 1e-14);
    const StabilityReport rep = is_hurwitz(sys.a);
    ASSERT_EQ(rep.eigenvalues.size(), 2u);
    EXPECT_NEAR(rep.eigenvalues[0].real(), -0.5, 1e-12);
    EXPECT_NEAR(rep.eigenvalues[1].real(), -2.5, 1e-12);
}

TEST(OdeSystem, EquilibriaSitAtTheFixedPoint) {
    const ProjectedModel m = benchmark();
    const Vector star = stacked(m.fixed_point(), m.fixed_point());
    for (double delta : {0.05, 0.9, 10.0}) {
        for (const OdeSystem& sys :
             {atd_ode_system(m, delta), dtd_ode_system(m, delta), randomized_dtd_ode_system(m, delta, 0.3)}) {
            EXPECT_LE((sys.equilibrium() - star).cwiseAbs().maxCoeff(), 1e-7 * star.norm());
            EXPECT_LE((sys.a * star + sys.b).cwiseAbs().maxCoeff(), 1e-9);
        }
    }
}

TEST(OdeSystem, DoubleSystemIsAffineInDelta) {
    const ProjectedModel m = benchmark();
    const std::size_t n = m.num_features();
    const Matrix base = dtd_ode_system(m, 0.0).a;
    Matrix coupling = -Matrix::Identity(2 * n, 2 * n);
    coupling += block_swap(n);
    for (double delta : {0.1, 1.0, 7.5}) {
        EXPECT_LE((dtd_ode_system(m, delta).a - base - delta * coupling).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(OdeSystem, AveragingTargetRowsScaleWithDelta) {
    const ProjectedModel m = benchmark();
    const auto n = Eigen::Index(m.num_features());
    const Matrix unit = atd_ode_system(m, 1.0).a;
    for (double delta : {1e-6, 0.3, 40.0}) {
        const Matrix a = atd_ode_system(m, delta).a;
        EXPECT_LE((a.bottomRows(n) - delta * unit.bottomRows(n)).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, delta));
        EXPECT_TRUE(a.topRows(n) == unit.topRows(n));
    }
}

TEST(OdeSystem, DoubleSystemIsAveragingSystemPlusItsSwap) {
    for (const ProjectedModel& m : {benchmark(), benchmark(false, true)}) {
        const Matrix c = block_swap(m.num_features());
        for (double delta : {1e-3, 0.9, 20.0}) {
            const Matrix b = atd_ode_system(m, delta).a;
            const Matrix a = dtd_ode_system(m, delta).a;
            EXPECT_LE((a - (b + c.transpose() * b * c)).cwiseAbs().rowwise().sum().maxCoeff(), 1e-12) << delta;
        }
    }
}

TEST(OdeSystem, DoubleSystemCommutesWithBlockSwap) {
    const ProjectedModel m = benchmark(false, true);
    const Matrix c = block_swap(m.num_features());
    EXPECT_LE((c * c - Matrix::Identity(c.rows(), c.cols())).cwiseAbs().maxCoeff(), 0.0);
    for (double delta : {0.0, 0.9}) {
        const Matrix a = dtd_ode_system(m, delta).a;
        EXPECT_LE((c * a * c - a).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(OdeSystem, UncoupledDoubleSpectrumSplitsIntoTwoTdMatrices) {
    // with delta = 0 the system decouples along theta + target and theta - target
    const ProjectedModel m = benchmark(false, true);
    const Matrix plus = -m.gram() + m.gamma() * m.phi_t_d_p_phi();
    const Matrix minus = -m.gram() - m.gamma() * m.phi_t_d_p_phi();
    std::vector<double> expected;
    for (const Matrix& part : {plus, minus}) {
        const Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(part).eigenvalues();
        for (Eigen::Index i = 0; i < ev.size(); ++i) expected.push_back(ev(i).real());
    }
    std::sort(expected.rbegin(), expected.rend());
    const StabilityReport rep = is_hurwitz(dtd_ode_system(m, 0.0).a);
    ASSERT_EQ(rep.eigenvalues.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_NEAR(rep.eigenvalues[i].real(), expected[i], 1e-10);
    }
    EXPECT_TRUE(rep.hurwitz);
}

TEST(OdeSystem, EvenRandomizationHalvesTheSystem) {
    const ProjectedModel m = benchmark();
    const OdeSystem full = dtd_ode_system(m, 0.9);
    const OdeSystem half = randomized_dtd_ode_system(m, 0.9, 0.5);
    EXPECT_LE((half.a - 0.5 * full.a).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((half.b - 0.5 * full.b).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(randomized_dtd_ode_system(m, 0.9, 1.0), InvalidInput);
    for (double nu : {0.1, 0.9}) {
        const Matrix lambda = randomization_matrix(2, nu);
        EXPECT_TRUE(lambda.isDiagonal());
        EXPECT_GT(lambda.diagonal().minCoeff(), 0.0);
    }
}

TEST(OdeSystem, RandomizedSystemsAreHurwitzWithMatchingLyapunovCertificate) {
    for (const ProjectedModel& m : {benchmark(), benchmark(false, true)}) {
        for (double nu : {0.1, 0.5, 0.9}) {
            for (double delta : log_grid(1e-3, 1e2, 8)) {
                const StabilityReport rep = analyse(randomized_dtd_ode_system(m, delta, nu));
                EXPECT_TRUE(rep.hurwitz) << "nu " << nu << " delta " << delta;
                ASSERT_TRUE(rep.lyapunov_residual.has_value());
                EXPECT_LT(*rep.lyapunov_residual, 0.0);
            }
        }
    }
}

TEST(OdeSystem, ConfigDispatch) {
    const ProjectedModel m = benchmark();
    EXPECT_EQ(ode_system_for(atd_config(1, 0.5), m).variant, Variant::a_td);
    EXPECT_EQ(ode_system_for(dtd_config(1, 0.5), m).variant, Variant::d_td);
    EXPECT_EQ(*ode_system_for(dtd_random_config(1, 0.5, 0.2), m).nu, 0.2);
    EXPECT_THROW(ode_system_for(td_config(1), m), InvalidInput);
    EXPECT_THROW(atd_ode_system(m, 0.0), InvalidInput);
    EXPECT_THROW(dtd_ode_system(m, -1.0), InvalidInput);
}

TEST(OdeSystem, SingularMatrixHasNoEquilibrium) {
    OdeSystem sys;
    sys.a = Matrix::Zero(2, 2);
    sys.b = Vector::Ones(2);
    EXPECT_THROW(sys.equilibrium(), NumericalError);
}

TEST(IsHurwitz, ReferenceMatrices) {
    EXPECT_TRUE(is_hurwitz(-Matrix::Identity(3, 3)).hurwitz);
    EXPECT_DOUBLE_EQ(is_hurwitz(-Matrix::Identity(3, 3)).max_real_part, -1.0);
    Matrix rotation(2, 2);
    rotation << 0.0, 1.0, -1.0, 0.0;
    const StabilityReport rot = is_hurwitz(rotation);
    EXPECT_FALSE(rot.hurwitz);
    EXPECT_NEAR(rot.max_real_part, 0.0, 1e-14);
    Matrix shear(2, 2);
    shear << -1.0, 100.0, 0.0, -1.0;
    EXPECT_TRUE(is_hurwitz(shear).hurwitz);
    EXPECT_THROW(is_hurwitz(Matrix(0, 0)), InvalidInput);
    EXPECT_THROW(is_hurwitz(Matrix::Zero(2, 3)), InvalidInput);
}

TEST(IsHurwitz, CoupledSystemsAcrossDeltaGrid) {
    const ProjectedModel m = benchmark();
    for (double delta : log_grid(1e-3, 1e2, 20)) {
        EXPECT_TRUE(is_hurwitz(atd_ode_system(m, delta).a).hurwitz) << delta;
        const StabilityReport rep = analyse(dtd_ode_system(m, delta));
        EXPECT_TRUE(rep.hurwitz) << delta;
        EXPECT_LT(*rep.lyapunov_residual, 0.0) << delta;
    }
}

TEST(Lyapunov, ReferenceValuesAndRejections) {
    EXPECT_DOUBLE_EQ(lyapunov_check(-Matrix::Identity(3, 3), Matrix::Identity(3, 3)), -2.0);
    Matrix nonsym(2, 2);
    nonsym << 1.0, 0.5, 0.0, 1.0;
    EXPECT_THROW(lyapunov_check(-Matrix::Identity(2, 2), nonsym), InvalidInput);
    Matrix indefinite(2, 2);
    indefinite << 1.0, 0.0, 0.0, -1.0;
    EXPECT_THROW(lyapunov_check(-Matrix::Identity(2, 2), indefinite), InvalidInput);
    EXPECT_THROW(lyapunov_check(-Matrix::Identity(2, 2), Matrix::Identity(3, 3)), InvalidInput);
}

TEST(Lyapunov, NegativeResidualImpliesHurwitz) {
    CounterRng rng(3);
    int certified = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Matrix a(3, 3);
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = 0; j < 3; ++j) a(i, j) = rng.uniform(-1, 1);
        a -= 0.8 * Matrix::Identity(3, 3);
        if (lyapunov_check(a, Matrix::Identity(3, 3)) < 0.0) {
            ++certified;
            EXPECT_TRUE(is_hurwitz(a).hurwitz);
        }
    }
    EXPECT_GT(certified, 10);
}

TEST(Schur, MarginGrowsLinearlyInDelta) {
    const ProjectedModel m = benchmark();
    const double base = schur_delta_margin(m, 1.0);
    for (double delta : {0.01, 2.0, 50.0}) {
        EXPECT_NEAR(schur_delta_margin(m, delta) - base, 2.0 * (delta - 1.0), 1e-8 * std::max(1.0, delta));
    }
    EXPECT_THROW(schur_delta_margin(m, 0.0), InvalidInput);
}

TEST(Schur, ReferenceDeltas) {
    const ProjectedModel m = benchmark();
    EXPECT_TRUE(schur_delta_condition(m, 100.0));
    EXPECT_FALSE(schur_delta_condition(m, 1e-6));
}

TEST(Schur, AgreesWithBlockPositiveDefiniteness) {
    // Schur complement lemma: with -(X + X') > 0, the margin is positive iff the
    // full symmetric block matrix is positive definite
    const ProjectedModel m = benchmark();
    const Matrix y = m.gamma() * m.phi_t_d_p_phi();
    const Matrix x = y - m.gram();
    const Matrix c = x.transpose() - y;
    const auto n = Eigen::Index(m.num_features());
    ASSERT_TRUE(positive_definite(-(x + x.transpose())));
    for (double delta : log_grid(1e-4, 1e3, 30)) {
        Matrix block(2 * n, 2 * n);
        block << -(x + x.transpose()), c, c.transpose(), 2 * delta * Matrix::Identity(n, n) + y + y.transpose();
        const Matrix expr = 2 * delta * Matrix::Identity(n, n) + y + y.transpose() -
                            c.transpose() * (-(x + x.transpose())).inverse() * c;
        const double oracle = Eigen::SelfAdjointEigenSolver<Matrix>(expr).eigenvalues().minCoeff();
        EXPECT_NEAR(schur_delta_margin(m, delta), oracle, 1e-9 * std::max(1.0, std::abs(oracle)));
        EXPECT_EQ(schur_delta_condition(m, delta), positive_definite(block)) << delta;
    }
}

TEST(Schur, ConditionImpliesHurwitz) {
    for (const ProjectedModel& m : {benchmark(), benchmark(false, true)}) {
        for (double delta : log_grid(1e-3, 1e3, 25)) {
            if (schur_delta_condition(m, delta)) {
                EXPECT_TRUE(is_hurwitz(atd_ode_system(m, delta).a).hurwitz) << delta;
            }
        }
    }
}

TEST(BoundConstants, MatchIndependentFormulas) {
    const ProjectedModel m = benchmark();
    const auto [beta, kappa] = default_bound_parameters(m);
    const BoundConstants c = bound_constants(m, beta, kappa, m.fixed_point());
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Matrix>(m.phi()).singularValues();
    const double mu = Eigen::SelfAdjointEigenSolver<Matrix>(m.gram()).eigenvalues()(0);
    EXPECT_NEAR(c.phi_spectral, sv(0), 1e-12 * sv(0));
    EXPECT_NEAR(c.mu, mu, 1e-12);
    EXPECT_NEAR(c.xi3, 3.0 * std::pow(sv(0), 4) / (mu * mu), 1e-8 * c.xi3);
    // ||Phi x||_D / ||x|| is maximised at the top Gram eigenvector
    const Eigen::SelfAdjointEigenSolver<Matrix> es(m.gram());
    const Vector top = es.eigenvectors().col(1);
    EXPECT_NEAR(c.phi_d, m.d_norm(m.phi() * top), 1e-12);
    EXPECT_NEAR(c.chi3, beta * beta * c.lipschitz / (2 * (beta * mu - 1)), 1e-9 * c.chi3);
    for (double v : {c.xi1, c.xi2, c.xi3, c.chi1, c.chi2, c.chi3, c.rho1, c.rho2, c.omega1}) EXPECT_GT(v, 0.0);
    EXPECT_EQ(c.omega2, 0.0);
}

TEST(BoundConstants, ZeroRewardsLeaveOnlyNoiseInChiOne) {
    const ProjectedModel m = benchmark(true);
    const auto [beta, kappa] = default_bound_parameters(m);
    const BoundConstants c = bound_constants(m, beta, kappa, Vector::Zero(2));
    const double p2 = c.phi_spectral * c.phi_spectral;
    const double sigma = m.process().sigma();
    EXPECT_NEAR(c.xi1, 3 * sigma * sigma * p2, 1e-12 * c.xi1);
    EXPECT_NEAR(c.chi1, c.xi1 * c.chi3, 1e-10 * c.chi1);
}

TEST(BoundConstants, PreconditionsAreChecked) {
    const ProjectedModel m = benchmark();
    const auto [beta, kappa] = default_bound_parameters(m);
    const double mu = bound_constants(m, beta, kappa, m.fixed_point()).mu;
    try {
        bound_constants(m, 0.5 / mu, kappa, m.fixed_point());
        FAIL() << "expected InvalidInput";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("1/mu"), std::string::npos);
    }
    try {
        bound_constants(m, beta, 10.0, m.fixed_point());
        FAIL() << "expected InvalidInput";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("xi3"), std::string::npos);
    }
    EXPECT_THROW(bound_constants(m, beta, kappa, Vector::Zero(3)), InvalidInput);
    EXPECT_THROW(bound_constants(m, beta, 0.0, m.fixed_point()), InvalidInput);
}

TEST(ErrorBound, ExactSubproblemsGiveGeometricDecay) {
    const ProjectedModel m = benchmark();
    for (std::size_t t : {0u, 1u, 5u, 40u}) {
        const std::vector<double> eps(t, 0.0);
        EXPECT_NEAR(ptd_error_bound(t, eps, m, 10.0), 10.0 * std::pow(0.9, double(t)), 1e-12);
    }
}

TEST(ErrorBound, ConstantAccuracyApproachesGeometricSeriesLimit) {
    const ProjectedModel m = benchmark();
    const double eps = 1e-4;
    const double scale = phi_d_norm(m) * std::sqrt(m.d().maxCoeff());
    const double limit = scale * std::sqrt(eps) * m.gamma() / (1 - m.gamma());
    const std::size_t t = 2000;
    EXPECT_NEAR(ptd_error_bound(t, std::vector<double>(t, eps), m, 1.0), limit, 1e-9 * limit);
    // shorter horizons stay below the limit plus the initial term
    for (std::size_t s : {2u, 10u, 100u}) {
        EXPECT_LE(ptd_error_bound(s, std::vector<double>(s, eps), m, 1.0), limit + std::pow(0.9, double(s)));
    }
}

TEST(ErrorBound, ExplicitSumForShortHorizon) {
    const ProjectedModel m = benchmark();
    const std::vector<double> eps{0.04, 0.01, 0.0025};
    const double scale = phi_d_norm(m) * std::sqrt(m.d().maxCoeff());
    const double expected = scale * (0.9 * 0.9 * 0.9 * 0.2 + 0.9 * 0.9 * 0.1 + 0.9 * 0.05) + std::pow(0.9, 4) * 3.0;
    EXPECT_NEAR(ptd_error_bound(4, eps, m, 3.0), expected, 1e-12);
    EXPECT_THROW(ptd_error_bound(5, eps, m, 3.0), InvalidInput);
    EXPECT_THROW(ptd_error_bound(2, {-1.0}, m, 3.0), InvalidInput);
    EXPECT_THROW(ptd_error_bound(2, {1.0}, m, -1.0), InvalidInput);
}

TEST(ErrorBound, TailProbabilityIsBoundOverTau) {
    const ProjectedModel m = benchmark();
    const std::vector<double> eps(9, 0.01);
    const double bound = ptd_error_bound(10, eps, m, 5.0);
    for (double tau : {0.5, 2.0, 100.0}) EXPECT_DOUBLE_EQ(ptd_tail_probability(tau, 10, eps, m, 5.0), bound / tau);
    EXPECT_THROW(ptd_tail_probability(0.0, 10, eps, m, 5.0), InvalidInput);
}

TEST(SampleComplexity, ScalesLikeInverseSquare) {
    const ProjectedModel m = benchmark();
    const auto [beta, kappa] = default_bound_parameters(m);
    const double e0 = std::pow(m.weighted_error(Vector::Zero(2)), 2);
    const double coarse = sample_complexity(m, 1e-3, beta, kappa, m.fixed_point(), e0);
    const double fine = sample_complexity(m, 5e-4, beta, kappa, m.fixed_point(), e0);
    EXPECT_GE(fine / coarse, 3.5);
    EXPECT_LE(fine / coarse, 4.5);
    double prev = 0.0;
    for (double eps : {0.5, 0.1, 1e-2, 1e-3, 1e-4}) {
        const double n = sample_complexity(m, eps, beta, kappa, m.fixed_point(), e0);
        EXPECT_GT(n, prev);
        prev = n;
    }
    EXPECT_EQ(sample_complexity(m, 1e-3, beta, kappa, m.fixed_point(), e0), coarse);
    const double tenth = sample_complexity(m, 0.1, beta, kappa, m.fixed_point(), e0);
    EXPECT_TRUE(std::isfinite(tenth));
    EXPECT_GT(tenth, 0.0);
    EXPECT_THROW(sample_complexity(m, 1.0, beta, kappa, m.fixed_point(), e0), InvalidInput);
    EXPECT_THROW(sample_complexity(m, 0.0, beta, kappa, m.fixed_point(), e0), InvalidInput);
}

TEST(ExpectedIncrement, EqualsStepTimesOdeField) {
    const ProjectedModel m = benchmark();
    CounterRng rng(4);
    for (const AlgorithmConfig& cfg : {atd_config(1, 0.7), dtd_config(1, 0.7), dtd_config(1, 0.0),
                                       dtd_random_config(1, 0.7, 0.2)}) {
        const OdeSystem sys = ode_system_for(cfg, m);
        for (int trial = 0; trial < 10; ++trial) {
            Vector theta(2), target(2);
            theta << rng.uniform(-100, 100), rng.uniform(-100, 100);
            target << rng.uniform(-100, 100), rng.uniform(-100, 100);
            const auto [dtheta, dtarget] = expected_increment(cfg, m, theta, target, 0.01);
            const Vector field = 0.01 * (sys.a * stacked(theta, target) + sys.b);
            EXPECT_LE((stacked(dtheta, dtarget) - field).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, field.norm()))
                << to_string(cfg.variant);
        }
    }
}
