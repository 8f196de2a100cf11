#pragma once

#include "conserv/fusion.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace conserv {

struct RunConfig {
    Settings settings;
    std::string out_dir = "out";
    std::uint64_t seed = 20240601;
};

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ExperimentResult {
    std::string id;
    std::vector<CheckLine> checks;
    std::vector<std::string> files;
    [[nodiscard]] bool pass() const;
};

const std::vector<std::string>& experiment_ids();

/// Writes artifacts to <out_dir>/<id>/ plus summary.txt. Throws InputError
/// for an unknown id.
ExperimentResult run_experiment(const std::string& id, const RunConfig& cfg);

// Built-in fusion scenarios (weights 0.5/0.5, rule left at power_mean q=1).
FusionScenario figure4_scenario();
FusionScenario exponential_uniques_scenario();
FusionScenario mixture_common_scenario();

struct RuleSpec {
    Rule rule;
    double q;
    std::string label;
};

/// lop, llop and power mean at q in {-inf, -2, 0, 0.5, 1, 2, +inf}.
std::vector<RuleSpec> fusion_rules();
FusionScenario with_rule(FusionScenario s, const RuleSpec& r);

/// One representative Gaussian pair per comparison-table row.
struct GaussRow {
    std::string label;
    Density c;
    Density t;
    /// Expected entries for GEOP, SC, WC, p.d., p.s.d., GEKL: '1', '0' or '/'.
    std::string expected;
};

std::vector<GaussRow> gauss_table_rows();

struct GaussVerdicts {
    bool geop = false, strict = false, weak = false, pd = false, psd = false, gekl = false;
    [[nodiscard]] bool at(std::size_t col) const;
};

GaussVerdicts gauss_verdicts(const Density& c, const Density& t, const Settings& s);

/// Writes table2.csv and table2.json into dir; returns the per-row verdicts.
std::vector<GaussVerdicts> table_gauss(const RunConfig& cfg, const std::string& dir);

/// Candidates 1-3 of the entropy/order-preservation illustration vs the truth diag(4,1).
std::vector<std::pair<std::string, Density>> figure1_candidates();
Density figure1_truth();

} // namespace conserv
