#include "soilest/matrix_exponential.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace soilest;
using Eigen::Index;

namespace {

/// Plain Taylor series with many terms on a small-norm matrix.
Eigen::MatrixXd taylor_reference(const Eigen::MatrixXd& a, int terms) {
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    Eigen::MatrixXd term = result;
    for (int k = 1; k <= terms; ++k) {
        term = term * a / static_cast<double>(k);
        result += term;
    }
    return result;
}

} // namespace

TEST(MatrixExponential, DiagonalAndNilpotent) {
    Eigen::MatrixXd d = Eigen::Vector3d(-2.0, 0.0, 0.7).asDiagonal();
    const Eigen::MatrixXd e = expm(d);
    EXPECT_NEAR(e(0, 0), std::exp(-2.0), 1e-15);
    EXPECT_NEAR(e(1, 1), 1.0, 1e-15);
    EXPECT_NEAR(e(2, 2), std::exp(0.7), 1e-14);

    Eigen::Matrix2d n;
    n << 0.0, 3.0, 0.0, 0.0;
    const Eigen::MatrixXd en = expm(n);
    EXPECT_NEAR(en(0, 1), 3.0, 1e-14);
    EXPECT_NEAR(en(0, 0), 1.0, 1e-15);
}

TEST(MatrixExponential, RotationGenerator) {
    Eigen::Matrix2d a;
    a << 0.0, -1.3, 1.3, 0.0;
    const Eigen::MatrixXd e = expm(a);
    EXPECT_NEAR(e(0, 0), std::cos(1.3), 1e-14);
    EXPECT_NEAR(e(1, 0), std::sin(1.3), 1e-14);
}

TEST(MatrixExponentialProperty, MatchesTaylorOnSmallNorms) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd a(6, 6);
        for (Index i = 0; i < a.size(); ++i) a(i) = 0.2 * g(rng);
        EXPECT_LT((expm(a) - taylor_reference(a, 50)).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(MatrixExponentialProperty, ActionMatchesDenseExponential) {
    std::mt19937_64 rng(32);
    std::normal_distribution<double> g(0.0, 1.0);
    for (double scale : {0.1, 5.0, 50.0}) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(12, 12);
        for (Index i = 0; i < 12; ++i) {
            a(i, i) = -scale * (1.0 + std::abs(g(rng)));
            if (i + 1 < 12) {
                a(i, i + 1) = 0.3 * scale * g(rng);
                a(i + 1, i) = 0.3 * scale * g(rng);
            }
        }
        Eigen::MatrixXd b(12, 3);
        for (Index i = 0; i < b.size(); ++i) b(i) = g(rng);
        const Eigen::SparseMatrix<double> s = a.sparseView();
        const Eigen::MatrixXd reference = expm(a * 0.7) * b;
        const Eigen::MatrixXd action = expm_multiply(s, b, 0.7);
        EXPECT_LT((reference - action).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, reference.cwiseAbs().maxCoeff()))
            << "scale " << scale;
    }
}

TEST(MatrixExponential, StiffActionUsesDensePath) {
    // ||A t|| ~ 1e7 would need ten million Taylor pieces.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
    a << -1e4, 1.0, 0.0, 1.0, -2.0, 0.5, 0.0, 0.5, -1.0;
    const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd action = expm_multiply(a.sparseView(), b, 1e3);
    EXPECT_LT((action - expm(a * 1e3)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(action.allFinite());
}

TEST(MatrixExponential, ExpOfSumForCommutingMatrices) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(5, 5);
    const Eigen::MatrixXd left = expm(2.0 * a);
    const Eigen::MatrixXd right = expm(a) * expm(a);
    EXPECT_LT((left - right).cwiseAbs().maxCoeff(), 1e-11 * left.cwiseAbs().maxCoeff());
}
