#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bedseis/hydro_bed.hpp"

using namespace bedseis;

TEST(Bed, ZeroRoughnessIsAnExactRamp) {
    const auto bed = build_bed(10.0, 0.05, 1001, 0.0, 0);
    ASSERT_EQ(bed.node_x.size(), 1001u);
    EXPECT_EQ(bed.node_x.back(), 10.0);
    for (std::size_t k = 0; k < bed.node_x.size(); ++k) EXPECT_EQ(bed.node_z[k], -0.05 * bed.node_x[k]);
}

TEST(Bed, RoughnessHasRequestedSpread) {
    const auto bed = build_bed(10.0, 0.05, 1001, 1e-3, 42);
    std::vector<double> dev(bed.node_z.size());
    for (std::size_t k = 0; k < dev.size(); ++k) dev[k] = bed.node_z[k] + 0.05 * bed.node_x[k];
    const double mean = std::accumulate(dev.begin(), dev.end(), 0.0) / static_cast<double>(dev.size());
    double ss = 0.0;
    for (double d : dev) ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / static_cast<double>(dev.size() - 1));
    EXPECT_GE(sd, 0.9e-3);
    EXPECT_LE(sd, 1.1e-3);
}

TEST(Bed, SameSeedSameProfile) {
    const auto a = build_bed(10.0, 0.05, 1001, 1e-3, 7);
    const auto b = build_bed(10.0, 0.05, 1001, 1e-3, 7);
    const auto c = build_bed(10.0, 0.05, 1001, 1e-3, 8);
    EXPECT_EQ(a.node_z, b.node_z);
    EXPECT_NE(a.node_z, c.node_z);
}

TEST(Bed, RejectsDegenerateInput) {
    EXPECT_THROW(build_bed(0.0, 0.05, 11, 0.0, 0), InvalidConfiguration);
    EXPECT_THROW(build_bed(-1.0, 0.05, 11, 0.0, 0), InvalidConfiguration);
    EXPECT_THROW(build_bed(10.0, 0.05, 1, 0.0, 0), InvalidConfiguration);
}

TEST(Bed, ElevationInterpolatesNodes) {
    const auto bed = build_bed(10.0, 0.05, 101, 1e-3, 3);
    for (std::size_t k = 0; k + 1 < bed.node_x.size(); k += 7) {
        EXPECT_NEAR(bed_elevation(bed, bed.node_x[k]), bed.node_z[k], 1e-13);
        const double mid = 0.5 * (bed.node_x[k] + bed.node_x[k + 1]);
        EXPECT_NEAR(bed_elevation(bed, mid), 0.5 * (bed.node_z[k] + bed.node_z[k + 1]), 1e-13);
    }
}

TEST(Bed, ElevationIsPeriodic) {
    const auto bed = build_bed(10.0, 0.05, 101, 1e-3, 3);
    EXPECT_EQ(bed_elevation(bed, 10.5), bed_elevation(bed, 0.5));
    EXPECT_EQ(bed_elevation(bed, -9.5), bed_elevation(bed, 0.5));
    EXPECT_DOUBLE_EQ(wrap_periodic(-0.25, 10.0), 9.75);
}

TEST(Flow, PowerLawFixedPoint) {
    const FlowProfile p{1.3, 0.1, 0.004, 1.0 / 7.0};
    EXPECT_DOUBLE_EQ(fluid_velocity(p, 0.1), 1.3);
}

TEST(Flow, NearBedVelocity) {
    const FlowProfile p{1.0, 0.2, 0.11 / 30.0, 1.0 / 7.0};
    EXPECT_NEAR(fluid_velocity(p, 0.0), 0.5633320965571743, 1e-15);
    // Below the bed surface the particle sees U(0).
    EXPECT_EQ(fluid_velocity(p, -0.01), fluid_velocity(p, 0.0));
}

TEST(Flow, ZeroExponentIsUniform) {
    const FlowProfile p{0.8, 0.2, 0.004, 0.0};
    for (double z : {0.0, 0.01, 0.2, 3.0}) EXPECT_EQ(fluid_velocity(p, z), 0.8);
}

TEST(Flow, MonotoneInHeight) {
    const FlowProfile p{1.0, 0.2, 0.004, 1.0 / 7.0};
    double prev = fluid_velocity(p, 0.0);
    for (int k = 1; k <= 100; ++k) {
        const double u = fluid_velocity(p, 0.003 * k);
        EXPECT_GT(u, prev);
        prev = u;
    }
}

TEST(Flow, Manning) {
    EXPECT_NEAR(manning_velocity(0.10, 0.09, 0.05), 1.2926608140191302, 1e-14);
    EXPECT_EQ(manning_velocity(0.10, 0.0, 0.05), 0.0);
    EXPECT_THROW(manning_velocity(0.0, 0.09, 0.05), InvalidConfiguration);
    EXPECT_THROW(manning_velocity(0.1, 0.09, 0.0), InvalidConfiguration);
}

TEST(Grains, MedianNearElevenCentimetres) {
    const GrainDistribution g{0.05, 0.9, 0.015, 0.5};
    auto d = sample_diameters(g, 100000, 11);
    std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
    const double median = d[d.size() / 2];
    EXPECT_NEAR(median, 0.11, 0.011);
    EXPECT_NEAR(g.median(), 0.11, 0.011);
}

TEST(Grains, TruncationBoundsHold) {
    const GrainDistribution g{0.05, 0.9, 0.01, 0.5};
    const auto d = sample_diameters(g, 1000000, 5);
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    EXPECT_GE(*lo, 0.01);
    EXPECT_LE(*hi, 0.5);
}

TEST(Grains, DegenerateSpreadGivesTheMode) {
    const GrainDistribution g{0.05, 0.0, 0.015, 0.5};
    for (double d : sample_diameters(g, 100, 1)) EXPECT_EQ(d, 0.05);
}

TEST(Grains, Validation) {
    EXPECT_THROW(sample_diameters({0.05, 0.9, 0.5, 0.5}, 10, 1), InvalidConfiguration);
    EXPECT_THROW(sample_diameters({0.05, 0.9, 0.6, 0.5}, 10, 1), InvalidConfiguration);
    EXPECT_THROW(sample_diameters({0.05, 0.9, 0.01, 0.5}, 0, 1), InvalidConfiguration);
}

TEST(Grains, Deterministic) {
    const GrainDistribution g;
    EXPECT_EQ(sample_diameters(g, 500, 9), sample_diameters(g, 500, 9));
}
