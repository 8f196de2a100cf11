#include "conserv/mvs.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace conserv;

namespace {

GridDensity grid1(const Density& d, double lo, double hi, int n = 4096) { return to_grid(d, Box{{lo}, {hi}}, {n}); }

// [first, last] cell centres of a 1-D cell set.
std::pair<double, double> extent(const CellSet& s) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < s.member.size(); ++i)
        if (s.has(i)) {
            lo = std::min(lo, s.lattice.center_of(i)[0]);
            hi = std::max(hi, s.lattice.center_of(i)[0]);
        }
    return {lo, hi};
}

double alpha_of_unit_interval() { return oracle::Phi(1.0) - oracle::Phi(-1.0); }

} // namespace

TEST(LevelThreshold, StandardNormal) {
    const auto g = grid1(gaussian_1d(0, 1), -6, 6);
    EXPECT_NEAR(level_threshold(g, 0.6827), oracle::phi(1.0), 2e-4);
}

TEST(LevelThreshold, UniformSingleLevel) {
    const auto g = grid1(uniform_1d(0, 1), 0, 1, 1000);
    for (double a : {0.1, 0.5, 0.9}) EXPECT_NEAR(level_threshold(g, a), 1.0, 1e-12);
}

TEST(LevelThreshold, Exponential) {
    const auto g = grid1(exponential(1.0), 0, 20, 8192);
    EXPECT_NEAR(level_threshold(g, 0.5), std::exp(-std::log(2.0)), 2e-3);
}

TEST(MvSetGrid, StandardNormalUnitInterval) {
    const auto g = grid1(gaussian_1d(0, 1), -6, 6);
    const MVSet s = mv_set_grid(g, alpha_of_unit_interval());
    const auto [lo, hi] = extent(std::get<CellSet>(s.region));
    const double h = g.lattice.spacing(0);
    EXPECT_LE(std::abs(lo + 1.0), 2 * h);
    EXPECT_LE(std::abs(hi - 1.0), 2 * h);
}

TEST(MvSetGrid, UniformIsCentred) {
    const auto g = grid1(uniform_1d(0, 1), 0, 1, 1000);
    const MVSet s = mv_set_grid(g, 0.5);
    const auto [lo, hi] = extent(std::get<CellSet>(s.region));
    EXPECT_NEAR(lo, 0.25, 2e-3);
    EXPECT_NEAR(hi, 0.75, 2e-3);
}

TEST(MvSetGrid, MixtureDisconnectedNearPointThree) {
    const Density d = example5_mixture();
    const auto g = to_grid(d, support_box(d), {512, 512});
    const MVSet s = mv_set_grid(g, 0.3);
    EXPECT_EQ(connected_components(std::get<CellSet>(s.region)).size(), 2u);
}

TEST(MvSetGrid, MassOvershootAtMostOneCell) {
    const auto g = grid1(gaussian_1d(0, 1), -6, 6);
    for (double a : {0.05, 0.3, 0.5, 0.9, 0.99}) {
        const MVSet s = mv_set_grid(g, a);
        // The last cell added sits on the boundary |x| = z.
        const double z = oracle::Phi_inv(0.5 * (1.0 + a));
        const double boundary_cell = oracle::phi(z - g.lattice.spacing(0)) * g.lattice.spacing(0);
        EXPECT_GE(s.achieved_mass, a);
        EXPECT_LE(s.achieved_mass - a, boundary_cell);
        EXPECT_NEAR(mass_on_set(g, s), s.achieved_mass, 1e-12);
    }
}

TEST(MvSetGrid, PrefixesNest) {
    const auto g = grid1(mixture_1d({0.4, 0.6}, {-2, 2}, {1, 0.5}), -8, 8);
    const LevelSweep sweep(g);
    CellSet prev = std::get<CellSet>(sweep.mv_set(0.05).region);
    for (int k = 2; k <= 19; ++k) {
        const CellSet cur = std::get<CellSet>(sweep.mv_set(0.05 * k).region);
        for (std::size_t i = 0; i < cur.member.size(); ++i)
            if (prev.has(i)) EXPECT_TRUE(cur.has(i));
        prev = cur;
    }
}

TEST(MvSetAnalytic, Exponential) {
    const MVSet s = mv_set_analytic(exponential(2.0), 0.5);
    const auto& iv = std::get<Interval>(s.region);
    EXPECT_EQ(iv.lo, 0.0);
    EXPECT_NEAR(iv.hi, std::log(2.0) / 2.0, 1e-12);
    EXPECT_NEAR(iv.hi, 0.34657, 1e-5);
}

TEST(MvSetAnalytic, GaussianDisk) {
    const MVSet s = mv_set_analytic(gaussian_diag({0, 0}, {1, 1}), 0.5);
    EXPECT_NEAR(std::get<Ellipsoid>(s.region).radius2, -2.0 * std::log(0.5), 1e-9);
}

TEST(MvSetAnalytic, UniformCentred) {
    const MVSet s = mv_set_analytic(uniform_1d(0, 1), 0.25);
    const auto& b = std::get<Box>(s.region);
    EXPECT_NEAR(b.lower[0], 0.375, 1e-12);
    EXPECT_NEAR(b.upper[0], 0.625, 1e-12);
}

TEST(MvSetAnalytic, AgreesWithGrid1d) {
    const auto g = grid1(gaussian_1d(0.5, 2.0), -8, 9);
    for (double a : {0.2, 0.5, 0.8}) {
        const MVSet an = mv_set_analytic(gaussian_1d(0.5, 2.0), a);
        EXPECT_NEAR(mass_on_set(g, rasterize(an.region, g.lattice)), a, 2e-3);
    }
}

TEST(MassOnSet, ShiftedNormalOnUnitInterval) {
    const Box b{{-10.0}, {10.0}};
    const auto gt = to_grid(gaussian_1d(0, 1), b, {4096});
    const auto gc = to_grid(gaussian_1d(1, 2.25), b, {4096});
    const MVSet s = mv_set_grid(gt, alpha_of_unit_interval());
    const double expect = oracle::Phi((1.0 - 1.0) / 1.5) - oracle::Phi((-1.0 - 1.0) / 1.5);
    EXPECT_NEAR(mass_on_set(gc, s), expect, 2e-3);
}

TEST(MassOnSet, FullBox) {
    const auto g = grid1(gaussian_1d(0, 1), -6, 6);
    EXPECT_NEAR(mass_on_set(g, rasterize(g.lattice.box(), g.lattice)), 1.0, 1e-6);
}

TEST(Contains, WiderNormalHoldsNarrower) {
    const Box b{{-12.0}, {12.0}};
    const auto g4 = to_grid(gaussian_1d(0, 4), b, {4096});
    const auto g1 = to_grid(gaussian_1d(0, 1), b, {4096});
    const auto k = contains(mv_set_grid(g4, 0.5), mv_set_grid(g1, 0.5), g4, g1);
    EXPECT_TRUE(k.holds);
    EXPECT_EQ(k.violation_mass, 0.0);
}

TEST(Contains, ShiftedNormalFails) {
    const Box b{{-8.0}, {9.0}};
    const auto gc = to_grid(gaussian_1d(1, 1), b, {4096});
    const auto gt = to_grid(gaussian_1d(0, 1), b, {4096});
    const auto k = contains(mv_set_grid(gc, 0.9), mv_set_grid(gt, 0.9), gc, gt);
    EXPECT_FALSE(k.holds);
    // Inner set [-z, z], outer [1-z, 1+z]: missing part is [-z, 1-z).
    const double z = oracle::Phi_inv(0.95);
    const double missing = oracle::Phi(1.0 - z) - oracle::Phi(-z);
    EXPECT_GT(k.violation_mass, 0.05);
    EXPECT_NEAR(k.violation_mass, missing, 3e-3);
    ASSERT_TRUE(k.violation_box);
    EXPECT_NEAR(k.violation_box->lower[0], -z, 0.02);
}

TEST(Contains, SelfHolds) {
    const auto g = grid1(exponential(1.0), 0, 15);
    const MVSet s = mv_set_grid(g, 0.7);
    EXPECT_TRUE(contains(s, s, g, g).holds);
}

TEST(ModeSet, NormalSingleCluster) {
    const auto g = grid1(gaussian_1d(0, 1), -6, 6);
    const ModeSet m = mode_set(g, 0.01);
    const auto comps = connected_components(m.cells);
    ASSERT_EQ(comps.size(), 1u);
    const auto [lo, hi] = extent(m.cells);
    EXPECT_LT(lo, 0.0);
    EXPECT_GT(hi, 0.0);
    EXPECT_NEAR(hi - lo, 2.0 * std::sqrt(-2.0 * std::log(0.99)), 2 * g.lattice.spacing(0));
}

TEST(ModeSet, UniformAllSupportCells) {
    const auto g = grid1(uniform_1d(0, 1), -1, 2, 300);
    EXPECT_EQ(mode_set(g, 0.01).cells.count(), 100u);
}

TEST(ModeSet, BimodalEqualPeaksTwoClusters) {
    const auto g = grid1(mixture_1d({0.5, 0.5}, {-3, 3}, {1, 1}), -8, 8);
    EXPECT_EQ(connected_components(mode_set(g, 0.01).cells).size(), 2u);
}

TEST(Dilate, GrowsByOneCellEachSide) {
    const Lattice lat(Box{{0.0}, {10.0}}, {10});
    CellSet s{lat, std::vector<std::uint8_t>(10, 0)};
    s.member[4] = 1;
    const CellSet d = dilate(s, 1);
    EXPECT_EQ(d.count(), 3u);
    EXPECT_TRUE(d.has(3) && d.has(4) && d.has(5));
}

TEST(Rasterize, IntervalCells) {
    const Lattice lat(Box{{0.0}, {10.0}}, {10});
    const CellSet s = rasterize(Interval{2.0, 5.0}, lat);
    EXPECT_EQ(s.count(), 3u); // centres 2.5, 3.5, 4.5
}
