#include "conserv/experiments.hpp"
#include "conserv/serialize.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace conserv;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string output;
};

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("conserv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string put(const std::string& name, const Json& j) {
        const auto p = (dir_ / name).string();
        write_text_file(p, j.dump());
        return p;
    }
    std::string put_text(const std::string& name, const std::string& text) {
        const auto p = (dir_ / name).string();
        write_text_file(p, text);
        return p;
    }

    CliRun run(const std::string& args) {
        const auto log = dir_ / "stdout.txt";
        const std::string cmd = std::string(CONSERV_CLI) + " " + args + " > " + log.string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

Json normal(double mean, double var) { return {{"family", "gaussian"}, {"params", {{"mean", {mean}}, {"cov", {{var}}}}}}; }

Json figure4_json(const std::string& rule, double q) {
    Json j = scenario_to_json(figure4_scenario());
    j["rule"] = rule;
    j["q"] = q;
    return j;
}

} // namespace

TEST(Serialize, DensityRoundTrip) {
    const std::vector<Density> ds = {gaussian_diag({1, 2}, {3, 4}), mixture_1d({0.3, 0.7}, {-1, 1}, {1, 2}),
                                     exponential(2.5),           uniform_1d(-1, 3),
                                     skew_normal(-2),            student_t(4),
                                     two_sided_gaussian(),       scaled_tail_exponential(0.8),
                                     notch_density()};
    for (const auto& d : ds) {
        const Density back = density_from_json(density_to_json(d));
        EXPECT_EQ(back.family(), d.family());
        for (double x : {-1.5, 0.0, 0.3, 1.5, 12.0}) {
            if (d.dim() == 2) {
                const double p[2] = {x, -x};
                EXPECT_DOUBLE_EQ(eval(back, p), eval(d, p));
            } else {
                EXPECT_DOUBLE_EQ(eval(back, x), eval(d, x)) << d.family() << " at " << x;
            }
        }
    }
}

TEST(Serialize, GridRoundTrip) {
    const GridDensity g = to_grid(gaussian_1d(0, 1), Box{{-5.0}, {5.0}}, {64});
    const GridDensity back = grid_from_json(grid_to_json(g));
    ASSERT_EQ(back.values.size(), g.values.size());
    // Re-normalised on load, so equal up to rounding.
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(back.values[i], g.values[i], 1e-15);
    EXPECT_EQ(back.open, g.open);
}

TEST(Serialize, ErrorsNameField) {
    try {
        density_from_json(Json{{"family", "exponential"}, {"params", {{"rate", -1}}}});
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("rate"), std::string::npos) << e.what();
    }
    try {
        density_from_json(Json{{"family", "gaussian"}, {"params", {{"mean", {0}}}}});
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("cov"), std::string::npos) << e.what();
    }
    EXPECT_THROW(density_from_json(Json{{"family", "cauchy"}, {"params", Json::object()}}), InputError);
}

TEST(Serialize, ScenarioRejectsOffSimplexWeights) {
    Json j = scenario_to_json(figure4_scenario());
    j["weights"] = {0.5, 0.6};
    try {
        scenario_from_json(j);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("simplex"), std::string::npos);
    }
}

TEST(Serialize, CsvHeaders) {
    ConditionCurve c2{{0.1, 0.2}, {0.0, 0.01}, 2}, c3{{0.1, 0.2}, {-0.01, 0.0}, 3};
    const std::string csv = curves_csv(c2, c3);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "alpha,cond2,cond3");
    const auto g1 = to_grid(uniform_1d(0, 1), Box{{0.0}, {1.0}}, {64});
    EXPECT_EQ(grid_csv(g1).substr(0, 10), "x,density\n");
    const auto g2 = to_grid(gaussian_diag({0, 0}, {1, 1}), Box{{-1.0, -1.0}, {1.0, 1.0}}, {64, 64});
    EXPECT_EQ(grid_csv(g2).substr(0, 12), "x,y,density\n");
}

TEST(Serialize, FormatNumberRoundTrips) {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678})
        EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST_F(CliTest, CheckWeakExample) {
    const auto pc = put("pc.json", normal(1, 2.25));
    const auto pt = put("pt.json", normal(0, 1));
    const auto out = (dir_ / "out").string();
    const CliRun r = run("check " + pc + " " + pt + " --definition weak --out " + out);
    EXPECT_EQ(r.code, 0) << r.output;
    const Json rep = read_json_file(out + "/report.json");
    EXPECT_TRUE(rep["verdict_weak"].get<bool>());
    const double ap = rep["alpha_prime"].get<double>();
    EXPECT_GE(ap, 0.63);
    EXPECT_LE(ap, 0.69);
    EXPECT_EQ(slurp(out + "/curves.csv").substr(0, 17), "alpha,cond2,cond3");
}

TEST_F(CliTest, CheckEqualVarianceShiftIsFalse) {
    const auto pc = put("pc.json", normal(1, 1));
    const auto pt = put("pt.json", normal(0, 1));
    EXPECT_EQ(run("check " + pc + " " + pt + " --definition weak --out " + (dir_ / "o").string()).code, 1);
}

TEST_F(CliTest, CheckMissingFile) {
    const auto pt = put("pt.json", normal(0, 1));
    const CliRun r = run("check " + (dir_ / "nope.json").string() + " " + pt);
    EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, CheckMalformedDescriptorNamesField) {
    const auto pc = put("pc.json", Json{{"family", "exponential"}, {"params", {{"rate", "fast"}}}});
    const auto pt = put("pt.json", normal(0, 1));
    const CliRun r = run("check " + pc + " " + pt + " --out " + (dir_ / "o").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("rate"), std::string::npos) << r.output;
    const auto bad = put_text("bad.json", "{\"family\": ");
    EXPECT_EQ(run("check " + bad + " " + pt).code, 2);
}

TEST_F(CliTest, PdOnlyForGaussians) {
    const auto pc = put("pc.json", density_to_json(exponential(0.5)));
    const auto pt = put("pt.json", density_to_json(exponential(1.0)));
    EXPECT_EQ(run("check " + pc + " " + pt + " --definition strict --out " + (dir_ / "o").string()).code, 0);
    EXPECT_EQ(run("check " + pc + " " + pt + " --definition pd --out " + (dir_ / "o").string()).code, 2);
}

TEST_F(CliTest, FuseLlop) {
    const auto sc = put("sc.json", figure4_json("llop", 0));
    const auto out = (dir_ / "out").string();
    EXPECT_EQ(run("fuse " + sc + " --out " + out).code, 0);
    EXPECT_TRUE(read_json_file(out + "/report.json")["verdict_weak"].get<bool>());
    EXPECT_TRUE(fs::exists(out + "/fused.json"));
    EXPECT_TRUE(fs::exists(out + "/oracle.json"));
    // Outputs are density descriptors and can be checked directly.
    EXPECT_EQ(run("check " + out + "/fused.json " + out + "/oracle.json --out " + (dir_ / "again").string()).code, 0);
}

TEST_F(CliTest, FusePowerMeanOneEqualsLop) {
    const auto a = put("a.json", figure4_json("power_mean", 1));
    const auto b = put("b.json", figure4_json("lop", 1));
    ASSERT_EQ(run("fuse " + a + " --out " + (dir_ / "a").string()).code, 0);
    ASSERT_EQ(run("fuse " + b + " --out " + (dir_ / "b").string()).code, 0);
    EXPECT_EQ(slurp(dir_ / "a" / "fused.json"), slurp(dir_ / "b" / "fused.json"));
}

TEST_F(CliTest, FuseSingleInputRejected) {
    Json j = figure4_json("lop", 1);
    j["uniques"] = Json::array({normal(0, 1)});
    j["weights"] = {1.0};
    EXPECT_EQ(run("fuse " + put("sc.json", j) + " --out " + (dir_ / "o").string()).code, 2);
}

TEST_F(CliTest, FuseWeightsOffSimplex) {
    Json j = figure4_json("lop", 1);
    j["weights"] = {0.7, 0.7};
    const CliRun r = run("fuse " + put("sc.json", j) + " --out " + (dir_ / "o").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("simplex"), std::string::npos) << r.output;
}

TEST_F(CliTest, ReproduceUnknownId) {
    const CliRun r = run("reproduce fig99 --out " + (dir_ / "o").string());
    EXPECT_EQ(r.code, 2);
    for (const auto& id : experiment_ids()) EXPECT_NE(r.output.find(id), std::string::npos) << id;
}

TEST_F(CliTest, ReproduceIsDeterministic) {
    const auto a = (dir_ / "a").string(), b = (dir_ / "b").string();
    EXPECT_EQ(run("reproduce fig2_weak_example --out " + a).code, 0);
    EXPECT_EQ(run("reproduce fig2_weak_example --out " + b).code, 0);
    for (const char* f : {"curves.csv", "report.json"})
        EXPECT_EQ(slurp(fs::path(a) / "fig2_weak_example" / f), slurp(fs::path(b) / "fig2_weak_example" / f)) << f;
    const std::string summary = slurp(fs::path(a) / "fig2_weak_example" / "summary.txt");
    EXPECT_NE(summary.find("PASS"), std::string::npos);
}

TEST_F(CliTest, TableGauss) {
    const auto out = (dir_ / "t").string();
    EXPECT_EQ(run("table-gauss --out " + out).code, 0);
    const std::string csv = slurp(fs::path(out) / "table2.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "row,GEOP,SC,WC,p.d.,p.s.d.,GEKL,expected");
    EXPECT_NE(csv.find("instance-dependent"), std::string::npos);
}

TEST_F(CliTest, AlphaGridFlag) {
    const auto pc = put("pc.json", normal(1, 2.25));
    const auto pt = put("pt.json", normal(0, 1));
    const auto out = (dir_ / "o").string();
    EXPECT_EQ(run("check " + pc + " " + pt + " --alpha-grid 0.05:0.95:0.05 --out " + out).code, 0);
    const std::string csv = slurp(out + "/curves.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 19);
    EXPECT_EQ(run("check " + pc + " " + pt + " --alpha-grid 0:1:0.1").code, 2);
}
