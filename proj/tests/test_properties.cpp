#include "properties.hpp"

#include <gtest/gtest.h>

using namespace conserv;

TEST(Properties, MvSetsNest) {
    const auto t = props::mv_nesting(Settings{});
    EXPECT_TRUE(t.ok()) << t.str();
}

TEST(Properties, MvMassWithinSlack) {
    const auto t = props::mv_mass(Settings{});
    EXPECT_TRUE(t.ok()) << t.str() << ", worst |mass - alpha| / slack = " << t.worst;
}

TEST(Properties, EqualMeanPsdMatchesStrict) {
    const auto t = props::psd_vs_strict(Settings{}, 7);
    EXPECT_GE(t.total, 50);
    EXPECT_TRUE(t.ok()) << t.str();
}

TEST(Properties, PowerMeanLimits) {
    const auto t = props::power_mean_limits(Settings{});
    EXPECT_TRUE(t.ok()) << t.str() << ", sup |pm(1e-6) - llop| = " << t.worst;
}

TEST(Properties, FusedOutputsNormalised) {
    const auto t = props::fused_normalised(Settings{});
    EXPECT_TRUE(t.ok()) << t.str() << ", worst mass error " << t.worst;
}

TEST(Properties, KlNonNegative) {
    const auto t = props::kl_nonnegative(11);
    EXPECT_TRUE(t.ok()) << t.str() << ", min KL " << t.worst;
}

TEST(Properties, StrictImpliesWeakAcrossFamilies) {
    // Wider-by-scaling candidates are strictly, hence weakly, conservative.
    const std::vector<std::pair<Density, Density>> pairs = {
        {gaussian_1d(0, 2), gaussian_1d(0, 1)},
        {exponential(0.5), exponential(1.0)},
        {uniform_1d(-2, 3), uniform_1d(0, 1)},
        {student_t(2), gaussian_1d(0, 1)},
    };
    for (const auto& [c, t] : pairs) {
        const auto r = full_report(c, t);
        EXPECT_TRUE(r.strict.verdict) << c.family();
        EXPECT_TRUE(r.weak.verdict) << c.family();
    }
}

TEST(Properties, SelfComparison) {
    for (const auto& [name, d] : props::families()) {
        if (d.dim() != 1) continue;
        const auto r = full_report(d, d);
        EXPECT_TRUE(r.strict.verdict) << name;
        EXPECT_TRUE(r.weak.verdict) << name;
        EXPECT_NEAR(r.gekl.gap, 0.0, 1e-9) << name;
    }
}
