#include "soilest/ekf.hpp"
#include "soilest/error.hpp"
#include "soilest/matrix_exponential.hpp"
#include "soilest/richards.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>

using namespace soilest;

namespace {

Eigen::Matrix2d two_state_system() {
    Eigen::Matrix2d a;
    a << -1e-3, 4e-4, 2e-4, -6e-4;
    return a;
}

} // namespace

// The exact flow of a linear system makes the EKF a plain Kalman filter;
// compare against the textbook recursion written out here.
TEST(Ekf, LinearSystemMatchesTextbookKalmanFilter) {
    const Eigen::Matrix2d a = two_state_system();
    const LinearDynamics dyn(a);
    const double dt = 60.0;
    const Eigen::Matrix2d phi = expm(Eigen::MatrixXd(a * dt));
    const SensorLayout layout({0}, 2);
    Eigen::RowVector2d c(1.0, 0.0);

    FilterState fs = make_filter_state(Eigen::Vector2d(1.0, -1.0), 2.0, 1e-2, 0.1, 1);
    Eigen::Vector2d x = fs.x;
    Eigen::Matrix2d p = fs.P;
    const Eigen::Matrix2d q = fs.Q;
    const double r = 0.01;

    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.1);
    Eigen::Vector2d truth(0.5, 0.2);
    FilterOptions opt;
    opt.plausible_min_m = -1e9;
    opt.plausible_max_m = 1e9;
    for (int k = 0; k < 200; ++k) {
        truth = phi * truth;
        const double y = truth(0) + noise(rng);

        fs = predict(dyn, fs, k * dt, dt, opt);
        fs = update(fs, Eigen::VectorXd::Constant(1, y), layout, opt);

        x = phi * x;
        p = phi * p * phi.transpose() + q;
        const double s = (c * p * c.transpose())(0, 0) + r;
        const Eigen::Vector2d g = p * c.transpose() / s;
        x += g * (y - c * x);
        p = (Eigen::Matrix2d::Identity() - g * c) * p;

        ASSERT_LT((fs.x - x).cwiseAbs().maxCoeff(), 1e-10) << "step " << k;
        ASSERT_LT((fs.P - p).cwiseAbs().maxCoeff(), 1e-10) << "step " << k;
    }
}

TEST(Ekf, JosephFormAgreesWithStandardForm) {
    FilterState fs = make_filter_state(Eigen::Vector3d(-1, -2, -3), 0.5, 1e-3, 0.05, 2);
    fs.P(0, 1) = fs.P(1, 0) = 0.1;
    const SensorLayout layout({0, 2}, 3);
    const Eigen::Vector2d y(-0.8, -2.9);
    FilterOptions joseph;
    joseph.joseph = true;
    const FilterState a = update(fs, y, layout);
    const FilterState b = update(fs, y, layout, joseph);
    EXPECT_LT((a.x - b.x).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((a.P - b.P).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EkfProperty, UpdateNeverIncreasesVariance) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd l(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) l(i, j) = g(rng);
        FilterState fs = make_filter_state(Eigen::VectorXd::Constant(5, -1.0), 1.0, 0.0, 0.1, 2);
        fs.P = l * l.transpose() + 0.1 * Eigen::MatrixXd::Identity(5, 5);
        const SensorLayout layout({1, 3}, 5);
        const FilterState out = update(fs, Eigen::Vector2d(-1.1, -0.9), layout);
        EXPECT_TRUE(((out.P.diagonal() - fs.P.diagonal()).array() <= 1e-12).all());
        EXPECT_LT((out.P - out.P.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Ekf, FirstOrderTransitionUsesIPlusADt) {
    const Eigen::Matrix2d a = two_state_system();
    const LinearDynamics dyn(a);
    FilterState fs = make_filter_state(Eigen::Vector2d(1.0, 0.0), 1.0, 0.0, 0.1, 1);
    FilterOptions opt;
    opt.transition = TransitionMode::first_order;
    const FilterState out = predict(dyn, fs, 0.0, 10.0, opt);
    const Eigen::Matrix2d phi = Eigen::Matrix2d::Identity() + 10.0 * a;
    EXPECT_LT((out.P - phi * phi.transpose()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Ekf, RejectsBadShapesAndSteps) {
    const LinearDynamics dyn(two_state_system());
    const FilterState fs = make_filter_state(Eigen::Vector2d(1.0, 0.0), 1.0, 0.0, 0.1, 1);
    EXPECT_THROW((void)predict(dyn, fs, 0.0, 0.0), DomainError);
    const FilterState wrong = make_filter_state(Eigen::Vector3d(1.0, 0.0, 0.0), 1.0, 0.0, 0.1, 1);
    EXPECT_THROW((void)predict(dyn, wrong, 0.0, 1.0), DomainError);
}

TEST(Ekf, SingularInnovationCovarianceNamesSensors) {
    FilterState fs = make_filter_state(Eigen::Vector2d(-1.0, -1.0), 0.0, 0.0, 0.0, 1);
    try {
        (void)update(fs, Eigen::VectorXd::Constant(1, -1.0), SensorLayout({1}, 2));
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
    }
}

TEST(Assimilation, AlignsDeduplicatesAndRejects) {
    const LinearDynamics dyn(Eigen::Matrix2d::Zero());
    const SensorLayout layout({0, 1}, 2);
    const FilterState fs = make_filter_state(Eigen::Vector2d(-1.0, -1.0), 1.0, 0.0, 0.1, 2);
    AssimilationOptions opt;
    opt.horizon_s = 3600.0;
    opt.dt_s = 720.0;
    const std::vector<Observation> obs = {
        {0.0, 0, -0.5},
        {700.0, 0, -0.6},    // step 1, 20 s off
        {730.0, 0, -0.7},    // step 1, 10 s off: wins
        {1440.0, 1, -500.0}, // implausible
        {1440.0, 0, 5.0},    // above the plausible maximum
        {9000.0, 1, -0.5},   // after the horizon
    };
    const AssimilationResult r = run_assimilation(dyn, fs, obs, layout, opt);
    EXPECT_EQ(r.estimate.times.size(), 6U);
    EXPECT_EQ(r.updates, 2);
    EXPECT_EQ(r.assimilated, 2);
    EXPECT_EQ(r.dropped_duplicates, 1);
    EXPECT_EQ(r.rejected_implausible, 2);
    EXPECT_EQ(r.dropped_outside_horizon, 1);
    ASSERT_EQ(r.innovations.size(), 2U);
    EXPECT_NEAR(r.innovations[1].innovation, -0.7 - r.estimate.states[0](0), 1e-12);
    EXPECT_EQ(r.covariance_diagonal.size(), 6U);
}

TEST(Assimilation, PreconditionViolationsThrow) {
    const LinearDynamics dyn(Eigen::Matrix2d::Zero());
    const SensorLayout layout({0}, 2);
    const FilterState fs = make_filter_state(Eigen::Vector2d(-1.0, -1.0), 1.0, 0.0, 0.1, 1);
    const std::vector<Observation> unsorted = {{720.0, 0, -1.0}, {0.0, 0, -1.0}};
    EXPECT_THROW((void)run_assimilation(dyn, fs, unsorted, layout), ValidationError);
    const std::vector<Observation> foreign = {{0.0, 1, -1.0}};
    EXPECT_THROW((void)run_assimilation(dyn, fs, foreign, layout), ValidationError);
}

TEST(Assimilation, OpenLoopFollowsTheModel) {
    const CylindricalGrid grid(2, 4, 4, 10.0, 0.5);
    auto model = std::make_shared<RichardsModel>(grid, uniform_field(grid, loam()));
    const RichardsDynamics dyn(model);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(grid.size(), -0.9);
    FilterState fs = make_filter_state(x0, 0.1, 1e-6, 0.06, 0);
    AssimilationOptions opt;
    opt.horizon_s = 2 * 720.0;
    const AssimilationResult r = run_assimilation(dyn, fs, {}, SensorLayout({}, grid.size()), opt);
    const Eigen::VectorXd expected = step(*model, step(*model, x0, 0.0, 720.0), 720.0, 720.0);
    EXPECT_LT((r.estimate.states.back() - expected).cwiseAbs().maxCoeff(), 1e-12);
}
