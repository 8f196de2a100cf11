#include "conserv/experiments.hpp"
#include "conserv/serialize.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace conserv;

namespace {

struct Options {
    std::string resolution;
    std::string alpha_grid;
    std::optional<double> tol_mass;
    std::optional<double> tol_curve;
    std::string out = "out";
    std::uint64_t seed = 20240601;
    std::string definition = "weak";
};

std::vector<double> parse_alpha_grid(const std::string& spec) {
    double v[3];
    std::istringstream in(spec);
    char sep1 = 0, sep2 = 0;
    if (!(in >> v[0] >> sep1 >> v[1] >> sep2 >> v[2]) || sep1 != ':' || sep2 != ':' || !in.eof())
        throw InputError("--alpha-grid: expected start:stop:step, got '" + spec + "'");
    const double start = v[0], stop = v[1], step = v[2];
    if (!(start > 0.0 && stop < 1.0 && start <= stop && step > 0.0))
        throw InputError("--alpha-grid: need 0 < start <= stop < 1 and step > 0");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
}

Settings settings_from(const Options& o) {
    Settings s;
    if (!o.resolution.empty()) {
        // N or N1D,N2D
        const auto comma = o.resolution.find(',');
        try {
            s.cells_1d = std::stoi(o.resolution.substr(0, comma));
            s.cells_2d = comma == std::string::npos ? s.cells_1d : std::stoi(o.resolution.substr(comma + 1));
        } catch (const std::exception&) {
            throw InputError("--resolution: expected N or N1D,N2D, got '" + o.resolution + "'");
        }
        if (s.cells_1d < 8 || s.cells_2d < 8) throw InputError("--resolution: need at least 8 cells per axis");
    }
    if (!o.alpha_grid.empty()) s.alphas = parse_alpha_grid(o.alpha_grid);
    if (o.tol_mass) {
        if (!(*o.tol_mass > 0.0)) throw InputError("--tol-mass: must be positive");
        s.mass_slack = o.tol_mass;
    }
    if (o.tol_curve) {
        if (!(*o.tol_curve > 0.0)) throw InputError("--tol-curve: must be positive");
        s.curve_tol = o.tol_curve;
    }
    return s;
}

bool verdict_for(const ConservativenessReport& r, const std::string& def) {
    auto gaussian_only = [&](const std::optional<bool>& v) {
        if (!v) throw InputError("--definition " + def + ": only defined when both densities are Gaussian");
        return *v;
    };
    if (def == "pd") return gaussian_only(r.verdict_pd);
    if (def == "psd") return gaussian_only(r.verdict_psd);
    if (def == "strict") return r.strict.verdict;
    if (def == "weak") return r.weak.verdict;
    if (def == "geop") return r.geop.verdict;
    if (def == "gekl") return r.gekl.verdict;
    // all: every definition that applies
    bool v = r.strict.verdict && r.weak.verdict && r.geop.verdict && r.gekl.verdict;
    if (r.verdict_pd) v = v && *r.verdict_pd && *r.verdict_psd;
    return v;
}

void print_summary(const ConservativenessReport& r) {
    auto yn = [](bool b) { return b ? "true" : "false"; };
    if (r.verdict_pd) std::cout << "p.d.    " << yn(*r.verdict_pd) << "\np.s.d.  " << yn(*r.verdict_psd) << '\n';
    std::cout << "strict  " << yn(r.strict.verdict) << '\n'
              << "weak    " << yn(r.weak.verdict);
    if (r.weak.alpha_prime) std::cout << "  (alpha' = " << format_number(*r.weak.alpha_prime) << ")";
    std::cout << "\ngeop    " << yn(r.geop.verdict) << "\ngekl    " << yn(r.gekl.verdict) << '\n';
}

int cmd_check(const std::string& pc, const std::string& pt, const Options& o) {
    const Settings s = settings_from(o);
    const Density c = density_from_json(read_json_file(pc));
    const Density t = density_from_json(read_json_file(pt));
    const auto rep = full_report(c, t, s);
    const bool v = verdict_for(rep, o.definition);
    fs::create_directories(o.out);
    write_text_file((fs::path(o.out) / "report.json").string(), report_to_json(rep).dump(2) + "\n");
    write_text_file((fs::path(o.out) / "curves.csv").string(), curves_csv(rep.weak.curve2, rep.weak.curve3));
    print_summary(rep);
    return v ? 0 : 1;
}

int cmd_fuse(const std::string& scenario, const Options& o) {
    const Settings s = settings_from(o);
    const FusionScenario sc = scenario_from_json(read_json_file(scenario));
    const auto fr = fusion_conservativeness(sc, s);
    const bool v = verdict_for(fr.report, o.definition);
    fs::create_directories(o.out);
    // Grid descriptors, so either file can be fed back into `check`.
    const Json fused = {{"family", "grid"}, {"params", grid_to_json(fr.result.fused)},
                        {"normalizer", fr.result.normalizer_fused}};
    const Json oracle = {{"family", "grid"}, {"params", grid_to_json(fr.result.oracle)},
                         {"normalizer", fr.result.normalizer_oracle}};
    write_text_file((fs::path(o.out) / "fused.json").string(), fused.dump(2) + "\n");
    write_text_file((fs::path(o.out) / "oracle.json").string(), oracle.dump(2) + "\n");
    write_text_file((fs::path(o.out) / "report.json").string(), report_to_json(fr.report).dump(2) + "\n");
    print_summary(fr.report);
    return v ? 0 : 1;
}

void print_result(const ExperimentResult& r) {
    for (const auto& c : r.checks)
        std::cout << (c.pass ? "PASS" : "FAIL") << "  " << r.id << ": " << c.name << "  [" << c.detail << "]\n";
}

int cmd_reproduce(const std::string& id, const Options& o) {
    RunConfig cfg{settings_from(o), o.out, o.seed};
    std::vector<std::string> ids;
    if (id == "all") ids = experiment_ids();
    else ids = {id};
    const auto& valid = experiment_ids();
    for (const auto& i : ids)
        if (std::find(valid.begin(), valid.end(), i) == valid.end()) {
            std::string all;
            for (const auto& v : valid) all += "\n  " + v;
            throw InputError("unknown experiment id '" + i + "'; valid ids:" + all);
        }
    std::vector<std::future<ExperimentResult>> jobs;
    for (const auto& i : ids) jobs.push_back(std::async(std::launch::async, run_experiment, i, cfg));
    bool ok = true;
    for (auto& j : jobs) {
        const ExperimentResult r = j.get();
        print_result(r);
        ok = ok && r.pass();
    }
    return ok ? 0 : 1;
}

int cmd_table_gauss(const Options& o) {
    RunConfig cfg{settings_from(o), o.out, o.seed};
    const auto rows = gauss_table_rows();
    const auto v = table_gauss(cfg, o.out);
    static const char* cols[6] = {"GEOP", "SC", "WC", "p.d.", "p.s.d.", "GEKL"};
    bool ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::cout << rows[i].label << '\n';
        for (std::size_t c = 0; c < 6; ++c) {
            const char e = rows[i].expected[c];
            const bool match = e == '/' || v[i].at(c) == (e == '1');
            ok = ok && match;
            std::cout << "  " << cols[c] << ' ' << (v[i].at(c) ? "✓" : "X") << (e == '/' ? " (instance-dependent)" : "")
                      << (match ? "" : "  MISMATCH") << '\n';
        }
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conservativeness checks for probability densities and fusion rules"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--resolution", o.resolution, "Cells per axis: N, or N1D,N2D");
        sub->add_option("--alpha-grid", o.alpha_grid, "Alpha grid start:stop:step");
        sub->add_option("--tol-mass", o.tol_mass, "MV-set mass slack");
        sub->add_option("--tol-curve", o.tol_curve, "Condition-curve tolerance");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seed", o.seed, "Seed for randomized trials");
        sub->add_option("--definition", o.definition, "Verdict that sets the exit status")
            ->check(CLI::IsMember({"pd", "psd", "strict", "weak", "geop", "gekl", "all"}));
    };

    std::string pc, pt, scenario, id;
    auto* check = app.add_subcommand("check", "Compare a candidate density against a reference");
    check->add_option("pc", pc, "Candidate density descriptor (JSON)")->required();
    check->add_option("pt", pt, "Reference density descriptor (JSON)")->required();
    common(check);
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse a scenario and check it against the exact fusion");
    fuse_cmd->add_option("scenario", scenario, "Scenario descriptor (JSON)")->required();
    common(fuse_cmd);
    auto* reproduce = app.add_subcommand("reproduce", "Run a built-in experiment, or all of them");
    reproduce->add_option("id", id, "Experiment id or 'all'")->required();
    common(reproduce);
    auto* table = app.add_subcommand("table-gauss", "Gaussian comparison matrix");
    common(table);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*check) return cmd_check(pc, pt, o);
        if (*fuse_cmd) return cmd_fuse(scenario, o);
        if (*reproduce) return cmd_reproduce(id, o);
        return cmd_table_gauss(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
