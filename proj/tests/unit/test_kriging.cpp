#include "soilest/error.hpp"
#include "soilest/grid.hpp"
#include "soilest/kriging.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace soilest;

namespace {

std::vector<Point3> random_points(std::mt19937_64& rng, int count) {
    std::uniform_real_distribution<double> xy(-50.0, 50.0);
    std::uniform_real_distribution<double> depth(0.0, 0.75);
    std::vector<Point3> pts;
    for (int i = 0; i < count; ++i) pts.push_back({xy(rng), xy(rng), depth(rng)});
    return pts;
}

} // namespace

// Spherical variogram, sill 1, range 10, points on a line at 0, 2, 6 and a
// query at 3. The bordered 4x4 system was solved in exact rational
// arithmetic: w = (-1251/83416, 31977/41708, 20713/83416).
TEST(Kriging, HandSolvedSystem) {
    const VariogramModel model{VariogramKind::spherical, 0.0, 1.0, 10.0};
    const std::vector<Point3> pts = {{0, 0, 0}, {2, 0, 0}, {6, 0, 0}};
    const OrdinaryKriging ok(pts, {1.0, 4.0, -2.0}, model, KrigingGeometry{1.0});
    const KrigingWeights w = ok.weights({3, 0, 0});
    EXPECT_NEAR(w.weights(0), -1251.0 / 83416.0, 1e-13);
    EXPECT_NEAR(w.weights(1), 31977.0 / 41708.0, 1e-13);
    EXPECT_NEAR(w.weights(2), 20713.0 / 83416.0, 1e-13);
    EXPECT_NEAR(std::abs(w.lagrange), 269001.0 / 20854000.0, 1e-13);
    EXPECT_NEAR(ok.predict({3, 0, 0}), 2.5551333077587035, 1e-12);
}

TEST(Kriging, SymmetricConfigurationGivesEqualWeights) {
    const VariogramModel model{VariogramKind::exponential, 0.0, 2.0, 7.0};
    const std::vector<Point3> pts = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}};
    const OrdinaryKriging ok(pts, {1, 2, 3, 4}, model, KrigingGeometry{1.0});
    const KrigingWeights w = ok.weights({0, 0, 0});
    for (Index i = 0; i < 4; ++i) EXPECT_NEAR(w.weights(i), 0.25, 1e-12);
    EXPECT_NEAR(ok.predict({0, 0, 0}), 2.5, 1e-12);
}

TEST(KrigingProperty, ExactAtSamplesAndUnbiasedWeights) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> value(0.0, 1.0);
    for (VariogramKind kind : {VariogramKind::exponential, VariogramKind::spherical, VariogramKind::gaussian}) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto pts = random_points(rng, 30);
            std::vector<double> vals;
            for (std::size_t i = 0; i < pts.size(); ++i) vals.push_back(value(rng));
            const OrdinaryKriging ok(pts, vals, VariogramModel{kind, 0.0, 1.3, 25.0});
            ASSERT_FALSE(ok.singular());
            for (std::size_t i = 0; i < pts.size(); ++i) {
                EXPECT_NEAR(ok.predict(pts[i]), vals[i], 1e-8);
            }
            for (const Point3& q : random_points(rng, 10)) {
                EXPECT_NEAR(ok.weights(q).weights.sum(), 1.0, 1e-10);
            }
        }
    }
}

TEST(KrigingProperty, ConstantSamplesGiveConstantField) {
    std::mt19937_64 rng(22);
    const auto pts = random_points(rng, 25);
    const OrdinaryKriging ok(pts, std::vector<double>(pts.size(), 3.25), VariogramModel{});
    for (const Point3& q : random_points(rng, 50)) {
        EXPECT_NEAR(ok.predict(q), 3.25, 1e-10);
    }
}

TEST(Kriging, CoincidentSamplesFallBackToNearestNeighbour) {
    const std::vector<Point3> pts = {{0, 0, 0}, {0, 0, 0}, {5, 0, 0}};
    const OrdinaryKriging ok(pts, {1.0, 1.0, 7.0}, VariogramModel{VariogramKind::exponential, 0.0, 1.0, 3.0},
                             KrigingGeometry{1.0});
    EXPECT_TRUE(ok.singular());
    EXPECT_DOUBLE_EQ(ok.predict({4.5, 0, 0}), 7.0);
    EXPECT_DOUBLE_EQ(ok.nearest_neighbour({0.2, 0, 0}), 1.0);
}

TEST(Kriging, AnisotropyStretchesDepth) {
    const KrigingGeometry geometry{1.0 / 20.0};
    EXPECT_DOUBLE_EQ(geometry.distance({0, 0, 0}, {0, 0, 0.1}), 2.0);
    EXPECT_DOUBLE_EQ(geometry.distance({0, 0, 0}, {3, 4, 0}), 5.0);
}

TEST(Kriging, VariogramValidation) {
    EXPECT_THROW((VariogramModel{VariogramKind::exponential, 1.0, 0.5, 1.0}.validate()), ValidationError);
    EXPECT_THROW((VariogramModel{VariogramKind::exponential, 0.0, 1.0, 0.0}.validate()), ValidationError);
    EXPECT_EQ(parse_variogram_kind("spherical"), VariogramKind::spherical);
    EXPECT_THROW((void)parse_variogram_kind("linear"), ValidationError);
}

TEST(Kriging, FitRecoversRangeOrderOfMagnitude) {
    // Samples of a smooth field: the fitted range must be positive and the
    // sill close to the sample variance.
    std::mt19937_64 rng(23);
    const auto pts = random_points(rng, 80);
    std::vector<double> vals;
    for (const auto& p : pts) vals.push_back(std::sin(p.x / 20.0) + std::cos(p.y / 25.0));
    VariogramFitOptions opt;
    opt.geometry = KrigingGeometry{1.0};
    const VariogramModel m = fit_variogram(pts, vals, opt);
    EXPECT_GT(m.range, 1.0);
    EXPECT_GT(m.sill, 0.0);
    EXPECT_EQ(m.nugget, 0.0);
}

TEST(Kriging, LogSpaceForConductivity) {
    EXPECT_DOUBLE_EQ(to_kriging_space(SoilParameterId::K_s, std::exp(-12.0)), -12.0);
    EXPECT_DOUBLE_EQ(from_kriging_space(SoilParameterId::K_s, -12.0), std::exp(-12.0));
    EXPECT_DOUBLE_EQ(to_kriging_space(SoilParameterId::n, 1.5), 1.5);
}

TEST(Kriging, FieldFromConstantSamplesIsUniform) {
    std::mt19937_64 rng(24);
    std::vector<SoilSample> samples;
    for (const auto& p : random_points(rng, 20)) samples.push_back({p, loam()});
    const CylindricalGrid grid(3, 6, 4, 50.0, 0.75);
    ParameterModels models;
    models.fill(VariogramModel{VariogramKind::exponential, 0.0, 1.0, 30.0});
    const KrigedField f = krige_field(samples, grid, models);
    for (const auto& p : f.field) {
        EXPECT_NEAR(p.theta_s, loam().theta_s, 1e-10);
        EXPECT_NEAR(p.theta_r, loam().theta_r, 1e-10);
        EXPECT_NEAR(p.K_s / loam().K_s, 1.0, 1e-9);
        EXPECT_NEAR(p.alpha, loam().alpha, 1e-9);
        EXPECT_NEAR(p.n, loam().n, 1e-10);
    }
    EXPECT_EQ(f.projected_nodes, 0);
}
