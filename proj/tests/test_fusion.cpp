#include "conserv/experiments.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>

using namespace conserv;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FusionScenario flat_common(std::vector<Density> uniques) {
    FusionScenario s;
    s.uniques = std::move(uniques);
    s.weights.assign(s.uniques.size(), 1.0 / static_cast<double>(s.uniques.size()));
    return s;
}

// Reference grid from closed-form values at the cell centres, normalised.
std::vector<double> reference(const Lattice& lat, const std::function<double(double)>& f) {
    std::vector<double> v(lat.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) sum += v[i] = f(lat.center_of(i)[0]);
    for (double& x : v) x /= sum * lat.cell_volume();
    return v;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double mean_of(const GridDensity& g) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) m += g.lattice.center_of(i)[0] * g.cell_mass(i);
    return m;
}

double argmax_x(const Lattice& lat, const std::vector<double>& v) {
    return lat.center_of(static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin()))[0];
}

double fig4_common(double x) { return 0.5 * oracle::normal_pdf(x, -1.8, 1) + 0.5 * oracle::normal_pdf(x, 1.8, 1); }

std::vector<GridDensity> pair_inputs(double m1, double m2, const Lattice& lat) {
    return inputs_from_scenario(flat_common({gaussian_1d(m1, 1), gaussian_1d(m2, 1)}), lat);
}

const Lattice kLine(Box{{-10.0}, {10.0}}, {4000});

} // namespace

TEST(Inputs, FlatCommonGivesUniqueFactor) {
    const auto in = pair_inputs(0, 0, kLine);
    const auto ref = reference(kLine, [](double x) { return oracle::normal_pdf(x, 0, 1); });
    EXPECT_LT(sup_diff(in[0].values, ref), 1e-12);
    EXPECT_EQ(in[0].values, in[1].values);
}

TEST(Inputs, BimodalScenarioDominantLeftMode) {
    const auto s = figure4_scenario();
    const Lattice lat = fusion_lattice(s);
    const auto in = inputs_from_scenario(s, lat);
    const auto ref = reference(lat, [](double x) { return fig4_common(x) * oracle::normal_pdf(x, -0.6, 1); });
    EXPECT_LT(sup_diff(in[0].values, ref), 1e-9);
    EXPECT_NEAR(argmax_x(lat, in[0].values), argmax_x(lat, ref), 1e-12);
    EXPECT_LT(argmax_x(lat, in[0].values), 0.0);
}

TEST(TrueFusion, ProductOfStandardNormals) {
    double eta = 0.0;
    const GridDensity t = true_fusion(flat_common({gaussian_1d(0, 1), gaussian_1d(0, 1)}), kLine, &eta);
    const auto ref = reference(kLine, [](double x) { return oracle::normal_pdf(x, 0, 0.5); });
    EXPECT_LT(sup_diff(t.values, ref), 1e-9);
    // eta = integral of the unnormalised product = N(0; 0, 2).
    EXPECT_NEAR(eta, oracle::normal_pdf(0, 0, 2), 1e-6);
}

TEST(TrueFusion, BimodalScenarioModes) {
    const auto s = figure4_scenario();
    const Lattice lat = fusion_lattice(s);
    const GridDensity t = true_fusion(s, lat);
    const auto ref = reference(lat, [](double x) {
        return fig4_common(x) * oracle::normal_pdf(x, -0.6, 1) * oracle::normal_pdf(x, -1.4, 1);
    });
    EXPECT_LT(sup_diff(t.values, ref), 1e-9);
    EXPECT_NEAR(argmax_x(lat, t.values), argmax_x(lat, ref), 1e-12);
}

TEST(TrueFusion, SingleUniqueIsItself) {
    FusionScenario s = flat_common({exponential(1.5)});
    const Lattice lat(Box{{0.0}, {12.0}}, {2000});
    EXPECT_LT(sup_diff(true_fusion(s, lat).values, inputs_from_scenario(s, lat)[0].values), 1e-12);
}

TEST(Lop, IdenticalInputsUnchanged) {
    const auto in = pair_inputs(0.3, 0.3, kLine);
    EXPECT_LT(sup_diff(lop(in, {0.3, 0.7}).values, in[0].values), 1e-12);
}

TEST(Lop, SymmetricMixture) {
    const auto in = pair_inputs(-1, 1, kLine);
    const GridDensity f = lop(in, {0.5, 0.5});
    const auto ref = reference(kLine, [](double x) {
        return 0.5 * oracle::normal_pdf(x, -1, 1) + 0.5 * oracle::normal_pdf(x, 1, 1);
    });
    EXPECT_LT(sup_diff(f.values, ref), 1e-9);
    EXPECT_NEAR(mean_of(f), 0.0, 1e-12);
    for (std::size_t i = 0; i < f.size() / 2; ++i) EXPECT_NEAR(f.values[i], f.values[f.size() - 1 - i], 1e-12);
}

TEST(Lop, DegenerateWeight) {
    const auto in = pair_inputs(-1, 1, kLine);
    EXPECT_EQ(lop(in, {1.0, 0.0}).values, in[0].values);
}

TEST(Llop, Idempotent) {
    const auto in = pair_inputs(0, 0, kLine);
    EXPECT_LT(sup_diff(llop(in, {0.5, 0.5}).values, in[0].values), 1e-12);
}

TEST(Llop, CovarianceIntersection) {
    const auto in = pair_inputs(-1, 1, kLine);
    const auto ref = reference(kLine, [](double x) { return oracle::normal_pdf(x, 0, 1); });
    EXPECT_LT(sup_diff(llop(in, {0.5, 0.5}).values, ref), 1e-9);
    // Unequal weights: precision stays 1, mean is w1 m1 + w2 m2.
    const auto ref2 = reference(kLine, [](double x) { return oracle::normal_pdf(x, 0.8 * -1 + 0.2 * 1, 1); });
    EXPECT_LT(sup_diff(llop(in, {0.8, 0.2}).values, ref2), 1e-9);
}

TEST(Llop, DegenerateWeight) {
    const auto in = pair_inputs(-1, 1, kLine);
    EXPECT_LT(sup_diff(llop(in, {1.0, 0.0}).values, in[0].values), 1e-12);
}

TEST(PowerMean, ScalarValues) {
    EXPECT_NEAR(power_mean({1.0, 3.0}, {0.5, 0.5}, 2.0), std::sqrt(5.0), 1e-14);
    EXPECT_NEAR(power_mean({1.0, 3.0}, {0.5, 0.5}, -1.0), 1.0 / (0.5 / 1.0 + 0.5 / 3.0), 1e-14);
    EXPECT_NEAR(power_mean({1.0, 3.0}, {0.5, 0.5}, 0.0), std::sqrt(3.0), 1e-14);
    EXPECT_EQ(power_mean({1.0, 3.0}, {0.5, 0.5}, kInf), 3.0);
    EXPECT_EQ(power_mean({1.0, 3.0}, {0.5, 0.5}, -kInf), 1.0);
    EXPECT_EQ(power_mean({0.0, 3.0}, {0.5, 0.5}, -2.0), 0.0);
    // Tiny values must not underflow through p^q.
    EXPECT_NEAR(power_mean({1e-300, 1e-300}, {0.5, 0.5}, 4.0) / 1e-300, 1.0, 1e-12);
}

TEST(PowerMean, QOneIsLop) {
    const auto in = pair_inputs(-1, 2, kLine);
    EXPECT_EQ(power_mean_fusion(in, {0.3, 0.7}, 1.0).values, lop(in, {0.3, 0.7}).values);
}

TEST(PowerMean, QNearZeroApproachesLlop) {
    const auto in = pair_inputs(-1, 2, kLine);
    EXPECT_LT(sup_diff(power_mean_fusion(in, {0.3, 0.7}, 1e-6).values, llop(in, {0.3, 0.7}).values), 1e-4);
}

TEST(PowerMean, InfinityIsMax) {
    const auto in = pair_inputs(-1, 1, kLine);
    const GridDensity f = power_mean_fusion(in, {0.5, 0.5}, kInf);
    const auto ref = reference(kLine, [](double x) {
        return std::max(oracle::normal_pdf(x, -1, 1), oracle::normal_pdf(x, 1, 1));
    });
    EXPECT_LT(sup_diff(f.values, ref), 1e-9);
    // Centre is a local minimum between the two peaks.
    const std::size_t mid = f.size() / 2;
    EXPECT_LT(f.values[mid], f.values[mid - 200]);
}

TEST(PowerMean, OutputsNormalised) {
    const auto in = pair_inputs(-1, 1.5, kLine);
    for (double q : {-kInf, -2.0, 0.0, 0.5, 1.0, 2.0, kInf})
        EXPECT_NEAR(power_mean_fusion(in, {0.4, 0.6}, q).total_mass(), 1.0, 1e-9);
}

TEST(PowerMean, OpenFacesCombine) {
    const Lattice lat(Box{{0.0}, {10.0}}, {1000});
    // One input cut on the right, one not.
    std::vector<GridDensity> in = {make_grid(lat, std::vector<double>(1000, 1.0), {false, true, false, false}),
                                   make_grid(lat, std::vector<double>(1000, 1.0), kAllClosed)};
    EXPECT_TRUE(lop(in, {0.5, 0.5}).open[1]);
    EXPECT_FALSE(llop(in, {0.5, 0.5}).open[1]);
}

TEST(BayesUpdate, FlatLikelihood) {
    const auto in = pair_inputs(0, 0, kLine);
    EXPECT_LT(sup_diff(bayes_update(in[0], uniform_1d(-20, 20)).values, in[0].values), 1e-12);
}

TEST(BayesUpdate, ConjugateNormal) {
    const auto in = pair_inputs(0, 0, kLine);
    const auto ref = reference(kLine, [](double x) { return oracle::normal_pdf(x, 0.5, 0.5); });
    EXPECT_LT(sup_diff(bayes_update(in[0], gaussian_1d(1, 1)).values, ref), 1e-9);
}

TEST(BayesUpdate, LopPosteriorWeak) {
    const FusedResult fr = fuse(with_rule(figure4_scenario(), {Rule::lop, 1.0, "lop"}));
    const auto lik = gaussian_1d(0, 4);
    EXPECT_TRUE(check_weak(bayes_update(fr.fused, lik), bayes_update(fr.oracle, lik)).verdict);
}

TEST(FusionReport, BimodalScenarioRules) {
    const auto base = figure4_scenario();
    std::vector<RuleSpec> rules = {{Rule::lop, 1, "lop"}, {Rule::llop, 0, "llop"}};
    for (double q : {-5.0, -1.0, 0.5, 2.0, 5.0, kInf, -kInf}) rules.push_back({Rule::power_mean, q, "q"});
    for (const auto& r : rules) {
        const auto fr = fusion_conservativeness(with_rule(base, r), Settings{});
        EXPECT_TRUE(fr.report.weak.verdict) << to_string(r.rule) << " q=" << r.q;
        ASSERT_TRUE(fr.report.weak.alpha_prime);
        EXPECT_LT(*fr.report.weak.alpha_prime, 1.0);
    }
}

TEST(Validate, RejectsBadScenarios) {
    EXPECT_THROW(validate(flat_common({gaussian_1d(0, 1)})), InputError);
    FusionScenario s = flat_common({gaussian_1d(0, 1), gaussian_1d(1, 1)});
    s.weights = {0.5, 0.6};
    EXPECT_THROW(validate(s), InputError);
    s.weights = {0.5, 0.5};
    s.q = std::nan("");
    EXPECT_THROW(validate(s), InputError);
    FusionScenario mixed = flat_common({gaussian_1d(0, 1), gaussian_diag({0, 0}, {1, 1})});
    EXPECT_THROW(validate(mixed), InputError);
}

TEST(Rule, RoundTrip) {
    for (Rule r : {Rule::lop, Rule::llop, Rule::power_mean}) EXPECT_EQ(rule_from_string(to_string(r)), r);
    EXPECT_THROW(rule_from_string("chernoff"), InputError);
}

TEST(BayesUpdate, LogRatioShiftsByConstant) {
    const FusedResult fr = fuse(with_rule(mixture_common_scenario(), {Rule::llop, 0.0, "llop"}));
    const auto lik = gaussian_1d(2, 1);
    const GridDensity pf = bayes_update(fr.fused, lik), pt = bayes_update(fr.oracle, lik);
    // log(pf'/pt') - log(pf/pt) = log(Z_t'/Z_f'), with Z' the evidence of each prior.
    double zf = 0.0, zt = 0.0;
    for (std::size_t i = 0; i < pf.size(); ++i) {
        const double l = oracle::normal_pdf(pf.lattice.center_of(i)[0], 2, 1);
        zf += fr.fused.values[i] * l;
        zt += fr.oracle.values[i] * l;
    }
    const double expect = std::log(zt / zf);
    for (std::size_t i = 0; i < pf.size(); i += 97) {
        if (pf.values[i] < 1e-250 || pt.values[i] < 1e-250) continue;
        const double shift = std::log(pf.values[i] / pt.values[i]) - std::log(fr.fused.values[i] / fr.oracle.values[i]);
        EXPECT_NEAR(shift, expect, 1e-9);
    }
}

TEST(BayesUpdate, ASetIsLevelShifted) {
    // A' = {pf' < pt'} = {pf/pt < Z_f'/Z_t'}: the prior ratio cut at a new level.
    const FusedResult fr = fuse(with_rule(figure4_scenario(), {Rule::lop, 1.0, "lop"}));
    const auto lik = gaussian_1d(0, 4);
    const GridDensity pf = bayes_update(fr.fused, lik), pt = bayes_update(fr.oracle, lik);
    double zf = 0.0, zt = 0.0;
    for (std::size_t i = 0; i < pf.size(); ++i) {
        const double l = oracle::normal_pdf(pf.lattice.center_of(i)[0], 0, 4);
        zf += fr.fused.values[i] * l;
        zt += fr.oracle.values[i] * l;
    }
    const double level = zf / zt;
    const CellSet a = set_A(pf, pt);
    int checked = 0;
    for (std::size_t i = 0; i < pf.size(); ++i) {
        const double r = fr.fused.values[i] / fr.oracle.values[i];
        if (!std::isfinite(r) || std::abs(r - level) < 1e-6 * level || pt.values[i] < 1e-200) continue;
        EXPECT_EQ(a.has(i), r < level) << "cell " << i;
        ++checked;
    }
    EXPECT_GT(checked, 1000);
}
