#include <gtest/gtest.h>

#include <cmath>

#include "fairrank/metrics_multi.hpp"
#include "support.hpp"

using namespace fairrank;
using namespace fairrank::testing;

TEST(DemographicParity, Ratio) {
    const auto r = demographic_parity(ExposureVector({0.25, 0.75}), binary_groups());
    EXPECT_NEAR(r.ratio, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(r.log2_ratio, std::log2(1.0 / 3.0), 1e-15);
}

TEST(DemographicParity, EqualIsZeroLog) {
    EXPECT_DOUBLE_EQ(demographic_parity(ExposureVector({0.4, 0.4}), binary_groups()).log2_ratio, 0.0);
}

TEST(DemographicParity, Degenerate) {
    try {
        demographic_parity(ExposureVector({1.0, 0.0}), binary_groups());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DegenerateDenominator);
    }
    try {
        demographic_parity(ExposureVector({0.0, 0.0}), binary_groups());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NoExposure);
    }
}

TEST(DemographicParity, UnknownGroupIgnored) {
    GroupSpace g({"A", "B", "?"}, 0, 2);
    EXPECT_DOUBLE_EQ(demographic_parity(ExposureVector({0.2, 0.2, 0.6}), g).ratio, 1.0);
}

TEST(Eed, ParityMode) {
    EXPECT_DOUBLE_EQ(eed(ExposureVector({0.5, 0.5})), 0.5);
    EXPECT_DOUBLE_EQ(eed(ExposureVector({1.0, 0.0})), 1.0);
    EXPECT_DOUBLE_EQ(eed(ExposureVector({3.0, 3.0})), 0.5);
    EXPECT_THROW(eed(ExposureVector({0.0, 0.0})), Error);
}

TEST(Eed, MinimumAtEquality) {
    for (std::size_t g = 2; g <= 6; ++g) {
        EXPECT_NEAR(eed(ExposureVector(std::vector<double>(g, 0.7))), 1.0 / static_cast<double>(g), 1e-15);
        std::vector<double> skew(g, 0.1);
        skew[0] = 0.2;
        EXPECT_GT(eed(ExposureVector(skew)), 1.0 / static_cast<double>(g));
    }
}

TEST(Eed, RawMode) { EXPECT_DOUBLE_EQ(eed(ExposureVector({3.0, 4.0}), EedMode::Raw), 25.0); }
