#include <gtest/gtest.h>

#include <cmath>

#include "fairrank/distance.hpp"
#include "support.hpp"

using namespace fairrank;
using namespace fairrank::testing;

TEST(DeltaNd, Counts) {
    EXPECT_NEAR(delta_nd(std::size_t{3}, std::size_t{10}, 0.5), -0.2, 1e-15);
    EXPECT_NEAR(delta_nd(std::size_t{10}, std::size_t{10}, 0.5), 0.5, 1e-15);
    EXPECT_THROW(delta_nd(std::size_t{0}, std::size_t{0}, 0.5), Error);
}

TEST(DeltaNd, ExposureVector) {
    const auto g = binary_groups();
    EXPECT_NEAR(delta_nd(ExposureVector({0.5, 0.25}), TargetDistribution({0.5, 0.5}), g), 2.0 / 3.0 - 0.5, 1e-15);
    try {
        delta_nd(ExposureVector({0.0, 0.0}), TargetDistribution({0.5, 0.5}), g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NoExposure);
    }
}

TEST(DeltaRd, Value) { EXPECT_NEAR(delta_rd(2.0, 8.0, 0.5), -0.75, 1e-15); }

TEST(DeltaRd, EmptyUnprotectedIsDegenerate) {
    try {
        delta_rd(5.0, 0.0, 0.5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DegenerateDenominator);
    }
    EXPECT_THROW(delta_rd(1.0, 1.0, 1.0), Error);
}

TEST(DeltaRd, UnknownGroupExcludedFromUnprotected) {
    GroupSpace g({"A", "B", "?"}, 0, 2);
    const double v = delta_rd(ExposureVector({1.0, 1.0, 5.0}), TargetDistribution({0.5, 0.5, 0.0}), g);
    EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(DeltaKl, Values) {
    const double pm[2] = {1.0, 0.0}, u[2] = {0.5, 0.5}, q[2] = {0.75, 0.25};
    EXPECT_NEAR(delta_kl(pm, u), 1.0, 1e-12);
    EXPECT_NEAR(delta_kl(q, u), 0.75 * std::log2(1.5) + 0.25 * std::log2(0.5), 1e-12);
    EXPECT_DOUBLE_EQ(delta_kl(u, u), 0.0);
}

TEST(DeltaKl, ZeroTargetStaysFinite) {
    const double o[2] = {0.5, 0.5}, t[2] = {1.0, 0.0};
    const double v = delta_kl(o, t);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 10.0);
}

TEST(DeltaKl, RequiresNormalizedObserved) {
    const double o[2] = {0.5, 0.6}, t[2] = {0.5, 0.5};
    EXPECT_THROW(delta_kl(o, t), Error);
}

TEST(Delta, DispatchNormalizesKl) {
    const auto g = binary_groups();
    const TargetDistribution t({0.5, 0.5});
    EXPECT_NEAR(delta(DistanceKind::KL, ExposureVector({3.0, 1.0}), t, g), 0.75 * std::log2(1.5) + 0.25 * std::log2(0.5),
                1e-12);
    EXPECT_NEAR(delta(DistanceKind::ND, ExposureVector({3.0, 1.0}), t, g), 0.25, 1e-15);
    EXPECT_NEAR(delta(DistanceKind::RD, ExposureVector({3.0, 1.0}), t, g), 2.0, 1e-15);
}

TEST(Delta, ZeroAtTarget) {
    const auto g = binary_groups();
    const TargetDistribution t({0.3, 0.7});
    for (auto k : {DistanceKind::ND, DistanceKind::RD, DistanceKind::KL})
        EXPECT_NEAR(delta(k, ExposureVector({0.3, 0.7}), t, g), 0.0, 1e-12);
}
