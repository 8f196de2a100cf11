#include "conserv/experiments.hpp"

#include "conserv/serialize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

namespace conserv {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Artifacts {
public:
    Artifacts(const RunConfig& cfg, ExperimentResult& r) : dir_(fs::path(cfg.out_dir) / r.id), r_(r) {
        fs::create_directories(dir_);
    }
    void text(const std::string& name, const std::string& content) {
        write_text_file((dir_ / name).string(), content);
        r_.files.push_back(name);
    }
    void json(const std::string& name, const Json& j) { text(name, j.dump(2) + "\n"); }
    [[nodiscard]] const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    ExperimentResult& r_;
};

void check(ExperimentResult& r, std::string name, bool pass, std::string detail) {
    r.checks.push_back({std::move(name), pass, std::move(detail)});
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

const char* mark(bool b) { return b ? "✓" : "X"; }

double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

// Interpolated alpha of the last upward zero crossing of a curve.
std::optional<double> zero_crossing(const ConditionCurve& c) {
    std::optional<double> out;
    for (std::size_t i = 0; i + 1 < c.values.size(); ++i) {
        const double a = c.values[i], b = c.values[i + 1];
        if (a < 0.0 && b >= 0.0) out = c.alphas[i] + (c.alphas[i + 1] - c.alphas[i]) * (-a) / (b - a);
    }
    return out;
}

void fig2(const RunConfig& cfg, ExperimentResult& r) {
    Artifacts out(cfg, r);
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = full_report(gaussian_1d(1.0, 2.25), gaussian_1d(0.0, 1.0), cfg.settings);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.text("curves.csv", curves_csv(rep.weak.curve2, rep.weak.curve3));
    out.json("report.json", report_to_json(rep));
    const double tol = rep.weak.curve_tol;
    check(r, "cond2 >= -curve_tol for every alpha", min_of(rep.weak.curve2.values) >= -tol,
          "min cond2 = " + fmt(min_of(rep.weak.curve2.values)) + ", curve_tol = " + fmt(tol));
    const double ap = rep.weak.alpha_prime.value_or(-1.0);
    check(r, "alpha' in [0.63, 0.69]", rep.weak.verdict && ap >= 0.63 && ap <= 0.69, "alpha' = " + fmt(ap));
    const auto zc = zero_crossing(rep.weak.curve3);
    check(r, "cond3 crosses zero in [0.63, 0.69]", zc && *zc >= 0.63 && *zc <= 0.69,
          zc ? "crossing at " + fmt(*zc) : "no crossing");
    check(r, "weakly but not strictly conservative", rep.weak.verdict && !rep.strict.verdict,
          std::string("strict first failing alpha = ") + fmt(rep.strict.first_failing_alpha.value_or(-1)));
    check(r, "runtime < 10 s", secs < 10.0, fmt(secs) + " s");
}

void fig1(const RunConfig& cfg, ExperimentResult& r) {
    Artifacts out(cfg, r);
    // Expected psd / GEOP / GEKL per candidate.
    const bool expected[3][3] = {{true, false, true}, {true, true, true}, {false, false, true}};
    std::ostringstream csv;
    csv << "candidate,psd,geop,gekl,expected_psd,expected_geop,expected_gekl\n";
    Json reports = Json::object();
    const auto cands = figure1_candidates();
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto rep = full_report(cands[i].second, figure1_truth(), cfg.settings);
        const bool got[3] = {rep.verdict_psd.value_or(false), rep.geop.verdict, rep.gekl.verdict};
        csv << cands[i].first << ',' << mark(got[0]) << ',' << mark(got[1]) << ',' << mark(got[2]) << ','
            << mark(expected[i][0]) << ',' << mark(expected[i][1]) << ',' << mark(expected[i][2]) << '\n';
        reports[cands[i].first] = report_to_json(rep);
        const bool ok = got[0] == expected[i][0] && got[1] == expected[i][1] && got[2] == expected[i][2];
        check(r, cands[i].first + " psd/GEOP/GEKL match", ok,
              std::string(mark(got[0])) + mark(got[1]) + mark(got[2]) + " (op_fraction " + fmt(rep.geop.op_fraction) +
                  ", GEKL gap " + fmt(rep.gekl.gap) + ")");
    }
    out.text("table.csv", csv.str());
    out.json("reports.json", reports);
}

void psd_sc_trials(const RunConfig& cfg, ExperimentResult& r, Artifacts& out) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u01;
    std::ostringstream csv;
    csv << "trial,dim,kind,psd_class,strict\n";
    int agree = 0, total = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int m = trial < 30 ? 1 : 2;
        const int kind = trial % 3; // 0 strict_pd, 1 psd with a shared direction, 2 neither
        Eigen::MatrixXd st, sc;
        if (m == 1) {
            st = Eigen::MatrixXd::Constant(1, 1, 0.5 + 2.0 * u01(rng));
            const double k = kind == 0 ? 1.2 + 1.8 * u01(rng) : kind == 1 ? 1.0 : 0.3 + 0.5 * u01(rng);
            sc = k * st;
        } else {
            Eigen::Matrix2d a;
            a << n01(rng), n01(rng), n01(rng), n01(rng);
            st = a * a.transpose() + 0.5 * Eigen::Matrix2d::Identity();
            const double th = 2.0 * 3.141592653589793 * u01(rng);
            Eigen::Vector2d u(std::cos(th), std::sin(th)), v(-std::sin(th), std::cos(th));
            const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(st).eigenvalues().minCoeff();
            const double grow = 0.5 + 2.0 * u01(rng);
            if (kind == 0) sc = st + grow * v * v.transpose() + 0.3 * grow * u * u.transpose();
            if (kind == 1) sc = st + grow * v * v.transpose();
            if (kind == 2) sc = st + grow * v * v.transpose() - 0.5 * lmin * u * u.transpose();
        }
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
        const PsdResult p = psd_compare(sc, st);
        const bool strict = check_strict(gaussian(mu, sc), gaussian(mu, st), cfg.settings).verdict;
        const bool ok = strict == (p != PsdResult::neither);
        agree += ok;
        ++total;
        csv << trial << ',' << m << ',' << kind << ',' << to_string(p) << ',' << strict << '\n';
    }
    out.text("psd_sc_trials.csv", csv.str());
    check(r, "equal-mean Gaussians: psd <=> strict (seeded trials)", agree == total,
          std::to_string(agree) + "/" + std::to_string(total) + " agree, seed " + std::to_string(cfg.seed));
}

void table2(const RunConfig& cfg, ExperimentResult& r) {
    Artifacts out(cfg, r);
    const auto rows = gauss_table_rows();
    const auto verdicts = table_gauss(cfg, out.dir().string());
    r.files.push_back("table2.csv");
    r.files.push_back("table2.json");
    static const char* cols[6] = {"GEOP", "SC", "WC", "p.d.", "p.s.d.", "GEKL"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        bool ok = true;
        std::string got, varies;
        for (std::size_t c = 0; c < 6; ++c) {
            got += mark(verdicts[i].at(c));
            if (rows[i].expected[c] == '/') {
                varies += std::string(" ") + cols[c] + "=" + mark(verdicts[i].at(c));
                continue;
            }
            ok = ok && verdicts[i].at(c) == (rows[i].expected[c] == '1');
        }
        check(r, rows[i].label, ok, got + (varies.empty() ? "" : "; instance-dependent:" + varies));
    }
    psd_sc_trials(cfg, r, out);
}

void ex5(const RunConfig& cfg, ExperimentResult& r) {
    Artifacts out(cfg, r);
    const Density d = example5_mixture();
    const int n = cfg.settings.cells_2d;
    const GridDensity g = to_grid(d, support_box(d, cfg.settings.support_mass_tol), {n, n});
    const LevelSweep sweep(g);
    std::ostringstream csv;
    csv << "alpha,beta,achieved_mass,components\n";
    Json sets = Json::array();
    std::size_t at30 = 0, at35 = 0;
    for (int k = 1; k <= 19; ++k) {
        const double a = 0.05 * k;
        const MVSet s = sweep.mv_set(a);
        const std::size_t comps = connected_components(std::get<CellSet>(s.region)).size();
        if (k == 6) at30 = comps;
        if (k == 7) at35 = comps;
        csv << format_number(a) << ',' << format_number(s.beta) << ',' << format_number(s.achieved_mass) << ','
            << comps << '\n';
        if (k % 3 == 0) sets.push_back(mvset_to_json(s));
    }
    out.text("mv_sets.csv", csv.str());
    out.json("mv_sets.json", sets);
    check(r, "MV set near alpha = 0.3 is disconnected", at30 == 2 && at35 == 2,
          "components at 0.30: " + std::to_string(at30) + ", at 0.35: " + std::to_string(at35));

    // Oracle: local maxima of the mixture on a fine scan, kept if within mode_tol of the peak.
    const Box b = support_box(d, cfg.settings.support_mass_tol);
    const int fine = 800;
    const double hx = (b.upper[0] - b.lower[0]) / fine, hy = (b.upper[1] - b.lower[1]) / fine;
    std::vector<double> v(static_cast<std::size_t>((fine + 1) * (fine + 1)));
    auto at = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(i * (fine + 1) + j)]; };
    double top = 0.0;
    for (int i = 0; i <= fine; ++i)
        for (int j = 0; j <= fine; ++j) {
            const double x[2] = {b.lower[0] + i * hx, b.lower[1] + j * hy};
            at(i, j) = eval(d, x);
            top = std::max(top, at(i, j));
        }
    int maxima = 0, kept = 0;
    for (int i = 1; i < fine; ++i)
        for (int j = 1; j < fine; ++j) {
            bool is_max = true;
            for (int di = -1; di <= 1 && is_max; ++di)
                for (int dj = -1; dj <= 1; ++dj)
                    if ((di || dj) && at(i + di, j + dj) >= at(i, j)) {
                        is_max = false;
                        break;
                    }
            if (is_max) {
                ++maxima;
                if (at(i, j) >= (1.0 - cfg.settings.mode_tol) * top) ++kept;
            }
        }
    const std::size_t clusters = connected_components(mode_set(g, cfg.settings.mode_tol).cells).size();
    check(r, "mode-set clusters match local-maxima oracle", clusters == static_cast<std::size_t>(kept),
          std::to_string(clusters) + " cluster(s); " + std::to_string(maxima) + " local maxima, " +
              std::to_string(kept) + " within mode_tol of the peak");
}

void ex10(const RunConfig& cfg, ExperimentResult& r) {
    Artifacts out(cfg, r);
    std::ostringstream csv;
    csv << "rate_c,rate_t,strict,geop\n";
    int agree = 0, total = 0, closed_form = 0;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            const double lc = 0.2 + (3.0 - 0.2) * i / 9.0;
            const double lt = 0.2 + (3.0 - 0.2) * j / 9.0;
            const auto [gc, gt] = common_grid(exponential(lc), exponential(lt), cfg.settings);
            const bool sc = check_strict(gc, gt, cfg.settings).verdict;
            const bool geop = check_geop(gc, gt, cfg.settings).verdict;
            agree += sc == geop;
            closed_form += sc == (lc <= lt);
            ++total;
            csv << format_number(lc) << ',' << format_number(lt) << ',' << sc << ',' << geop << '\n';
        }
    out.text("pairs.csv", csv.str());
    check(r, "strict <=> GEOP on 10x10 rate pairs", agree == total,
          std::to_string(agree) + "/" + std::to_string(total) + " agree");
    check(r, "verdicts match rate_c <= rate_t", closed_form == total,
          std::to_string(closed_form) + "/" + std::to_string(total));
}

void ex12(const RunConfig& cfg, ExperimentResult& r) {
    Artifacts out(cfg, r);
    const Density c = scaled_tail_exponential(0.8);
    const Density t = exponential(1.0);
    const double ht = entropy(t);
    const auto rep = full_report(c, t, cfg.settings);
    out.json("report.json", report_to_json(rep));
    out.json("density_c.json", density_to_json(c));
    const double hc = rep.geop.entropy_c;
    check(r, "H(p_t) = 1 (closed form)", std::abs(ht - 1.0) <= 1e-6, "H(p_t) = " + fmt(ht));
    check(r, "H(p_c) = 1.48 +- 0.01", std::abs(hc - 1.48) <= 0.01, "H(p_c) = " + fmt(hc));
    check(r, "GEOP true", rep.geop.verdict,
          "order preserved: " + std::string(rep.geop.order_preserved ? "yes" : "no") + ", entropy gap " +
              fmt(rep.geop.entropy_gap()));
    check(r, "strict false with a violating small alpha", !rep.strict.verdict && rep.strict.first_failing_alpha,
          "first failing alpha = " + fmt(rep.strict.first_failing_alpha.value_or(-1)) + ", violation mass " +
              fmt(rep.strict.violation_mass));
}

std::vector<std::pair<std::string, FusionScenario>> builtin_scenarios() {
    return {{"figure4", figure4_scenario()},
            {"exponential_uniques", exponential_uniques_scenario()},
            {"mixture_common", mixture_common_scenario()}};
}

// h = p_f / p_t at both box edges relative to the cell where p_t peaks.
double edge_ratio(const GridDensity& f, const GridDensity& t) {
    const std::size_t centre =
        static_cast<std::size_t>(std::max_element(t.values.begin(), t.values.end()) - t.values.begin());
    const double hc = f.values[centre] / t.values[centre];
    double worst = kInf;
    for (std::size_t i : {std::size_t{0}, t.size() - 1}) {
        if (t.values[i] <= 0.0) continue; // a genuine support edge, not a truncation
        worst = std::min(worst, f.values[i] / t.values[i] / hc);
    }
    return worst;
}

void fig4(const RunConfig& cfg, ExperimentResult& r) {
    Artifacts out(cfg, r);
    std::ostringstream csv;
    csv << "scenario,rule,weak,alpha_prime,from_certificate,A_bounded,edge_ratio\n";
    int weak_ok = 0, bounded = 0, ratio_ok = 0, total = 0;
    for (const auto& [name, base] : builtin_scenarios()) {
        bool oracle_written = false;
        for (const auto& rule : fusion_rules()) {
            const auto fr = fusion_conservativeness(with_rule(base, rule), cfg.settings);
            const auto& w = fr.report.weak;
            const double ratio = edge_ratio(fr.result.fused, fr.result.oracle);
            weak_ok += w.verdict && w.alpha_prime && *w.alpha_prime < 1.0;
            bounded += fr.report.sufficient.set_A_bounded;
            ratio_ok += ratio >= 10.0;
            ++total;
            csv << name << ',' << rule.label << ',' << w.verdict << ',' << format_number(w.alpha_prime.value_or(-1))
                << ',' << w.from_certificate << ',' << fr.report.sufficient.set_A_bounded << ','
                << format_number(ratio) << '\n';
            if (name == "figure4") {
                out.text("fused_" + rule.label + ".csv", grid_csv(fr.result.fused));
                out.json("report_" + rule.label + ".json", report_to_json(fr.report));
                if (!oracle_written) {
                    out.text("oracle.csv", grid_csv(fr.result.oracle));
                    for (std::size_t k = 0; k < fr.result.inputs.size(); ++k)
                        out.text("input" + std::to_string(k + 1) + ".csv", grid_csv(fr.result.inputs[k]));
                    oracle_written = true;
                }
            }
        }
    }
    out.text("summary.csv", csv.str());
    const auto frac = [&](int k) { return std::to_string(k) + "/" + std::to_string(total); };
    check(r, "every rule weakly conservative with alpha' < 1", weak_ok == total, frac(weak_ok));
    check(r, "A bounded for every rule", bounded == total, frac(bounded));
    check(r, "p_f/p_t at the box edge >= 10x its central value", ratio_ok == total, frac(ratio_ok));
}

void appendix_a(const RunConfig& cfg, ExperimentResult& r) {
    Artifacts out(cfg, r);
    const Density c = notch_density();
    const Density t = gaussian_1d(0.0, 4.0);

    const GridDensity g = to_grid(c, Box{{-10.0}, {20.0}}, {3000});
    const double slice = mass_on_set(g, rasterize(Interval{1.0, 2.0}, g.lattice));
    check(r, "notch slice mass on [1,2] = 0.05 +- 2e-3", std::abs(slice - 0.05) <= 2e-3, "mass = " + fmt(slice));

    const auto rep = full_report(c, t, cfg.settings);
    out.text("curves.csv", curves_csv(rep.weak.curve2, rep.weak.curve3));
    out.json("report.json", report_to_json(rep));
    const double tol = rep.weak.curve_tol;
    const double m2 = min_of(rep.weak.curve2.values), m3 = min_of(rep.weak.curve3.values);
    check(r, "Conditions 1-3 hold at every tested alpha", rep.support_condition && m2 >= -tol && m3 >= -tol,
          "min cond2 " + fmt(m2) + ", min cond3 " + fmt(m3) + ", curve_tol " + fmt(tol));
    check(r, "not strictly conservative", !rep.strict.verdict,
          "first failing alpha = " + fmt(rep.strict.first_failing_alpha.value_or(-1)));

    // Every violating cell over the whole alpha grid must sit in the notch.
    const auto [gc, gt] = common_grid(c, t, cfg.settings);
    const LevelSweep sc(gc), st(gt);
    double lo = kInf, hi = -kInf;
    for (double a : cfg.settings.alphas) {
        const auto k = contains(sc.mv_set(a), st.mv_set(a), gc, gt, cfg.settings.containment_slack);
        if (k.violation_box) {
            lo = std::min(lo, k.violation_box->lower[0]);
            hi = std::max(hi, k.violation_box->upper[0]);
        }
    }
    const double h = gc.lattice.spacing(0);
    check(r, "violations localised to [1,2]", lo >= 1.0 - h && hi <= 2.0 + h,
          "violating cells span [" + fmt(lo) + ", " + fmt(hi) + "]");
}

void bayes(const RunConfig& cfg, ExperimentResult& r) {
    Artifacts out(cfg, r);
    const std::vector<std::pair<std::string, Density>> likelihoods = {
        {"N(0,4)", gaussian_1d(0.0, 4.0)}, {"N(2,1)", gaussian_1d(2.0, 1.0)}, {"Exponential(0.5)", exponential(0.5)}};
    std::ostringstream csv;
    csv << "scenario,rule,likelihood,weak,alpha_prime,from_certificate,A_mismatch_cells,log_ratio_shift_spread\n";
    int weak_ok = 0, a_same = 0, ratio_ok = 0, total = 0;
    for (const auto& [name, base] : builtin_scenarios()) {
        for (const auto& rule : fusion_rules()) {
            const FusedResult fr = fuse(with_rule(base, rule), cfg.settings);
            const CellSet a0 = set_A(fr.fused, fr.oracle);
            for (const auto& [lname, lik] : likelihoods) {
                const GridDensity pf = bayes_update(fr.fused, lik);
                const GridDensity pt = bayes_update(fr.oracle, lik);
                const WeakResult w = check_weak(pf, pt, cfg.settings);
                const CellSet a1 = set_A(pf, pt);
                const CellSet d0 = dilate(a0, 1), d1 = dilate(a1, 1);
                std::size_t mismatch = 0;
                for (std::size_t i = 0; i < a0.member.size(); ++i)
                    mismatch += (a0.member[i] && !d1.member[i]) || (a1.member[i] && !d0.member[i]);
                // log(pf'/pt') - log(pf/pt) should be one constant wherever defined.
                double lo = kInf, hi = -kInf;
                for (std::size_t i = 0; i < pf.size(); ++i) {
                    if (pf.values[i] < 1e-200 || pt.values[i] < 1e-200) continue;
                    const double shift = std::log(pf.values[i] / pt.values[i]) -
                                         std::log(fr.fused.values[i] / fr.oracle.values[i]);
                    lo = std::min(lo, shift);
                    hi = std::max(hi, shift);
                }
                weak_ok += w.verdict;
                a_same += mismatch == 0;
                ratio_ok += hi - lo < 1e-9;
                ++total;
                csv << name << ',' << rule.label << ',' << lname << ',' << w.verdict << ','
                    << format_number(w.alpha_prime.value_or(-1)) << ',' << w.from_certificate << ',' << mismatch
                    << ',' << format_number(hi - lo) << '\n';
            }
        }
    }
    out.text("posteriors.csv", csv.str());
    const auto frac = [&](int k) { return std::to_string(k) + "/" + std::to_string(total); };
    check(r, "updated fusion weakly conservative w.r.t. updated oracle", weak_ok == total, frac(weak_ok));
    check(r, "A-set identical before/after update (1 boundary layer)", a_same == total, frac(a_same));
    check(r, "log(p_f/p_t) shifts by a constant under the update", ratio_ok == total, frac(ratio_ok));
}

} // namespace

bool ExperimentResult::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

const std::vector<std::string>& experiment_ids() {
    static const std::vector<std::string> ids = {
        "fig2_weak_example", "fig1_gauss_candidates", "table2_gauss_matrix", "ex5_mixture_mvs",
        "ex10_exponential_equiv", "ex12_geop_not_sc", "fig4_homogeneous", "appendixA_notch",
        "bayes_preservation"};
    return ids;
}

ExperimentResult run_experiment(const std::string& id, const RunConfig& cfg) {
    ExperimentResult r;
    r.id = id;
    if (id == "fig2_weak_example") fig2(cfg, r);
    else if (id == "fig1_gauss_candidates") fig1(cfg, r);
    else if (id == "table2_gauss_matrix") table2(cfg, r);
    else if (id == "ex5_mixture_mvs") ex5(cfg, r);
    else if (id == "ex10_exponential_equiv") ex10(cfg, r);
    else if (id == "ex12_geop_not_sc") ex12(cfg, r);
    else if (id == "fig4_homogeneous") fig4(cfg, r);
    else if (id == "appendixA_notch") appendix_a(cfg, r);
    else if (id == "bayes_preservation") bayes(cfg, r);
    else {
        std::string valid;
        for (const auto& v : experiment_ids()) valid += (valid.empty() ? "" : ", ") + v;
        throw InputError("unknown experiment '" + id + "'; valid ids: " + valid);
    }
    std::ostringstream os;
    for (const auto& c : r.checks) os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  [" << c.detail << "]\n";
    os << (r.pass() ? "PASS" : "FAIL") << "  " << id << '\n';
    write_text_file((fs::path(cfg.out_dir) / id / "summary.txt").string(), os.str());
    r.files.push_back("summary.txt");
    return r;
}

FusionScenario figure4_scenario() {
    FusionScenario s;
    s.common = mixture_1d({0.5, 0.5}, {-1.8, 1.8}, {1.0, 1.0});
    s.uniques = {gaussian_1d(-0.6, 1.0), gaussian_1d(-1.4, 1.0)};
    s.weights = {0.5, 0.5};
    return s;
}

FusionScenario exponential_uniques_scenario() {
    FusionScenario s;
    s.common = exponential(0.5);
    s.uniques = {exponential(1.0), exponential(2.0)};
    s.weights = {0.5, 0.5};
    return s;
}

FusionScenario mixture_common_scenario() {
    FusionScenario s;
    s.common = mixture_1d({0.3, 0.7}, {-2.0, 2.0}, {1.0, 2.0});
    s.uniques = {gaussian_1d(0.0, 2.0), gaussian_1d(1.0, 3.0)};
    s.weights = {0.5, 0.5};
    return s;
}

std::vector<RuleSpec> fusion_rules() {
    std::vector<RuleSpec> out = {{Rule::lop, 1.0, "lop"}, {Rule::llop, 0.0, "llop"}};
    for (double q : {-kInf, -2.0, 0.0, 0.5, 1.0, 2.0, kInf})
        out.push_back({Rule::power_mean, q, "pm_q" + format_number(q)});
    return out;
}

FusionScenario with_rule(FusionScenario s, const RuleSpec& r) {
    s.rule = r.rule;
    s.q = r.q;
    return s;
}

std::vector<GaussRow> gauss_table_rows() {
    const std::vector<double> truth_var{4.0, 1.0};
    auto t2 = [&] { return gaussian_diag({0.0, 0.0}, truth_var); };
    return {
        {"mu_c = mu_t, Sigma_c = 2 Sigma_t [diag(8,2) vs diag(4,1)]", gaussian_diag({0.0, 0.0}, {8.0, 2.0}), t2(), "111111"},
        {"mu_c = mu_t, Sigma_c > Sigma_t [diag(6,2) vs diag(4,1)]", gaussian_diag({0.0, 0.0}, {6.0, 2.0}), t2(), "011111"},
        {"mu_c = mu_t, Sigma_c >= Sigma_t [diag(4,2.25) vs diag(4,1)]", gaussian_diag({0.0, 0.0}, {4.0, 2.25}), t2(), "011011"},
        {"mu_c != mu_t, Sigma_c = k Sigma_t [N(1,2.25) vs N(0,1)]", gaussian_1d(1.0, 2.25), gaussian_1d(0.0, 1.0), "00111/"},
        {"mu_c != mu_t, Sigma_c > Sigma_t [mu_c=(1,0), diag(5,2.25) vs diag(4,1)]", gaussian_diag({1.0, 0.0}, {5.0, 2.25}), t2(), "00111/"},
        {"mu_c != mu_t, Sigma_c >= Sigma_t [mu_c=(1,0.5), diag(4,2.25) vs diag(4,1)]", gaussian_diag({1.0, 0.5}, {4.0, 2.25}), t2(), "00/01/"},
        {"Sigma_c not >= Sigma_t [diag(2.25,9) vs diag(4,1)]", gaussian_diag({0.0, 0.0}, {2.25, 9.0}), t2(), "00000/"},
    };
}

bool GaussVerdicts::at(std::size_t col) const {
    switch (col) {
    case 0: return geop;
    case 1: return strict;
    case 2: return weak;
    case 3: return pd;
    case 4: return psd;
    default: return gekl;
    }
}

GaussVerdicts gauss_verdicts(const Density& c, const Density& t, const Settings& s) {
    const auto rep = full_report(c, t, s);
    return {rep.geop.verdict, rep.strict.verdict, rep.weak.verdict, rep.verdict_pd.value_or(false),
            rep.verdict_psd.value_or(false), rep.gekl.verdict};
}

std::vector<GaussVerdicts> table_gauss(const RunConfig& cfg, const std::string& dir) {
    fs::create_directories(dir);
    const auto rows = gauss_table_rows();
    std::vector<GaussVerdicts> out;
    std::ostringstream csv;
    csv << "row,GEOP,SC,WC,p.d.,p.s.d.,GEKL,expected\n";
    Json j = Json::array();
    for (const auto& row : rows) {
        out.push_back(gauss_verdicts(row.c, row.t, cfg.settings));
        const auto& v = out.back();
        std::string expected;
        for (char e : row.expected) expected += e == '1' ? "✓" : e == '0' ? "X" : "/";
        csv << '"' << row.label << '"';
        Json cells = Json::object();
        static const char* cols[6] = {"GEOP", "SC", "WC", "p.d.", "p.s.d.", "GEKL"};
        for (std::size_t c = 0; c < 6; ++c) {
            // "/" entries depend on the instance: print what this instance gives.
            csv << ',' << mark(v.at(c)) << (row.expected[c] == '/' ? "*" : "");
            cells[cols[c]] = v.at(c);
        }
        csv << ',' << expected << '\n';
        j.push_back({{"row", row.label},
                      {"c", density_to_json(row.c)},
                      {"t", density_to_json(row.t)},
                      {"verdicts", cells},
                      {"expected", expected}});
    }
    csv << "# * = instance-dependent entry (\"/\" in the reference table); verdict shown is for this instance\n";
    write_text_file((fs::path(dir) / "table2.csv").string(), csv.str());
    write_text_file((fs::path(dir) / "table2.json").string(), j.dump(2) + "\n");
    return out;
}

Density figure1_truth() { return gaussian_diag({0.0, 0.0}, {4.0, 1.0}); }

std::vector<std::pair<std::string, Density>> figure1_candidates() {
    return {{"candidate1", gaussian_diag({0.0, 0.0}, {4.0, 2.25})},
            {"candidate2", gaussian_diag({0.0, 0.0}, {9.0, 2.25})},
            {"candidate3", gaussian_diag({0.0, 0.0}, {2.25, 9.0})}};
}

} // namespace conserv
