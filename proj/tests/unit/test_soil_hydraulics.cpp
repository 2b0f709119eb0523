#include "soilest/error.hpp"
#include "soilest/soil_hydraulics.hpp"

#include "van_genuchten_reference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace soilest;

namespace {

SoilParameters random_parameters(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ts(0.30, 0.55);
    std::uniform_real_distribution<double> frac(0.05, 0.5);
    std::uniform_real_distribution<double> log_ks(std::log(1e-8), std::log(1e-4));
    std::uniform_real_distribution<double> log_alpha(std::log(0.5), std::log(15.0));
    std::uniform_real_distribution<double> n(1.1, 3.0);
    SoilParameters p;
    p.theta_s = ts(rng);
    p.theta_r = frac(rng) * p.theta_s;
    p.K_s = std::exp(log_ks(rng));
    p.alpha = std::exp(log_alpha(rng));
    p.n = n(rng);
    return p;
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

// Reference values computed at 30 significant digits for the loam parameters.
TEST(SoilHydraulics, LoamReferenceValues) {
    const SoilParameters p = loam();
    EXPECT_NEAR(water_content(-1.0, p), 0.24213178471815216097, 1e-14);
    EXPECT_LT(relative(hydraulic_conductivity(-0.5, p), 2.9843484539329038214e-8), 1e-12);
    EXPECT_LT(relative(capillary_capacity(-0.2, p), 0.31196689468448943782), 1e-12);
    EXPECT_LT(relative(capillary_capacity(-1.0, p), 0.080940572287630743892), 1e-12);
}

TEST(SoilHydraulics, SaturatedBranch) {
    const SoilParameters p = loam();
    for (double h : {0.0, 1e-9, 0.5, 10.0}) {
        const HydraulicState s = evaluate_hydraulics(h, p);
        EXPECT_EQ(s.theta, p.theta_s);
        EXPECT_EQ(s.conductivity, p.K_s);
        EXPECT_EQ(s.capacity, 0.0);
        EXPECT_EQ(s.d_capacity, 0.0);
    }
}

TEST(SoilHydraulics, DryLimitApproachesResidual) {
    const SoilParameters p = loam();
    EXPECT_LT(relative(water_content(-1e6, p), static_cast<double>(reference::theta(-1e6L, p))), 1e-13);
    EXPECT_NEAR(water_content(-1e10, p), p.theta_r, 1e-6);
    const double k = hydraulic_conductivity(-1e8, p);
    EXPECT_GT(k, 0.0);
    EXPECT_LT(k, 1e-30);
}

TEST(SoilHydraulics, RejectsInvalidParameters) {
    SoilParameters p = loam();
    p.n = 1.0;
    EXPECT_THROW((void)water_content(-1.0, p), DomainError);
    p = loam();
    p.theta_r = 0.5;
    EXPECT_THROW((void)water_content(-1.0, p), DomainError);
    p = loam();
    p.K_s = -1.0;
    EXPECT_THROW((void)hydraulic_conductivity(-1.0, p), DomainError);
    EXPECT_THROW((void)capillary_capacity(std::nan(""), loam()), DomainError);
}

TEST(SoilHydraulicsProperty, CapacityIsDerivativeOfWaterContent) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> log_h(std::log(1e-3), std::log(1e2));
    for (int trial = 0; trial < 100; ++trial) {
        const SoilParameters p = random_parameters(rng);
        for (int j = 0; j < 20; ++j) {
            const double h = -std::exp(log_h(rng));
            const double expected = static_cast<double>(reference::capacity(h, p));
            EXPECT_LT(relative(capillary_capacity(h, p), expected), 1e-5) << "h=" << h << " n=" << p.n;
        }
    }
}

TEST(SoilHydraulicsProperty, MatchesExtendedPrecisionReference) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> log_h(std::log(1e-4), std::log(1e3));
    for (int trial = 0; trial < 200; ++trial) {
        const SoilParameters p = random_parameters(rng);
        const double h = -std::exp(log_h(rng));
        const HydraulicState s = evaluate_hydraulics(h, p);
        EXPECT_LT(relative(s.theta, static_cast<double>(reference::theta(h, p))), 1e-13);
        EXPECT_LT(relative(s.conductivity, static_cast<double>(reference::conductivity(h, p))), 1e-11) << "h=" << h << " n=" << p.n;
    }
}

TEST(SoilHydraulicsProperty, AnalyticDerivativesMatchFiniteDifferences) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> log_h(std::log(1e-3), std::log(50.0));
    for (int trial = 0; trial < 100; ++trial) {
        const SoilParameters p = random_parameters(rng);
        const double h = -std::exp(log_h(rng));
        const HydraulicState s = evaluate_hydraulics(h, p);
        EXPECT_LT(relative(s.d_conductivity, static_cast<double>(reference::d_conductivity(h, p))), 1e-5);
        const double step = 1e-6 * std::abs(h);
        const HydraulicState up = evaluate_hydraulics(h + step, p);
        const HydraulicState down = evaluate_hydraulics(h - step, p);
        EXPECT_LT(relative(s.d_capacity, (up.capacity - down.capacity) / (2 * step)), 1e-4);
    }
}

TEST(SoilHydraulicsProperty, MonotoneAndBounded) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const SoilParameters p = random_parameters(rng);
        double previous_theta = p.theta_r;
        double previous_k = 0.0;
        for (double h = -100.0; h < 0.0; h *= 0.8) {
            const HydraulicState s = evaluate_hydraulics(h, p);
            EXPECT_GE(s.theta, previous_theta);
            EXPECT_GE(s.conductivity, previous_k);
            EXPECT_GE(s.theta, p.theta_r);
            EXPECT_LE(s.theta, p.theta_s);
            EXPECT_LE(s.conductivity, p.K_s);
            EXPECT_GE(s.capacity, 0.0);
            previous_theta = s.theta;
            previous_k = s.conductivity;
            if (h > -1e-6) break;
        }
    }
}
