#pragma once

#include "conserv/conservativeness.hpp"

#include <optional>
#include <string>
#include <vector>

namespace conserv {

enum class Rule { lop, llop, power_mean };
std::string to_string(Rule r);
Rule rule_from_string(const std::string& s);

struct FusionScenario {
    /// Common information p_C; nullopt means an improper flat density.
    std::optional<Density> common;
    std::vector<Density> uniques;
    std::vector<double> weights;
    /// Power-mean exponent; +-infinity allowed.
    double q = 1.0;
    Rule rule = Rule::power_mean;
};

/// Throws InputError unless n >= 2, weights lie on the simplex, and every
/// density has the same dimension.
void validate(const FusionScenario& s);

struct FusedResult {
    GridDensity fused;
    GridDensity oracle;
    Rule rule = Rule::power_mean;
    double q = 1.0;
    double normalizer_fused = 1.0;
    double normalizer_oracle = 1.0;
    std::vector<GridDensity> inputs;
};

/// Union of the support boxes of p_C and every unique factor, padded by 10%.
Lattice fusion_lattice(const FusionScenario& s, const Settings& settings = {});

/// p_i proportional to p_C * p_{i\C}, each normalised on the common lattice.
std::vector<GridDensity> inputs_from_scenario(const FusionScenario& s, const Lattice& lattice);

/// Oracle p_t proportional to p_C * prod p_{i\C}; `normalizer` receives eta_t.
GridDensity true_fusion(const FusionScenario& s, const Lattice& lattice, double* normalizer = nullptr);

GridDensity lop(const std::vector<GridDensity>& inputs, const std::vector<double>& weights,
                double* normalizer = nullptr);
GridDensity llop(const std::vector<GridDensity>& inputs, const std::vector<double>& weights,
                 double* normalizer = nullptr);
/// q = 1 is lop, q = 0 is llop, q = +-inf is the cell-wise max/min.
GridDensity power_mean_fusion(const std::vector<GridDensity>& inputs, const std::vector<double>& weights, double q,
                              double* normalizer = nullptr);

/// Unnormalised weighted power mean of non-negative values.
double power_mean(const std::vector<double>& values, const std::vector<double>& weights, double q);

/// Runs the scenario's rule and the oracle on the scenario lattice.
FusedResult fuse(const FusionScenario& s, const Settings& settings = {});

/// prior(x) * likelihood(x), renormalised. The likelihood need not integrate to 1.
GridDensity bayes_update(const GridDensity& prior, const Density& likelihood);

struct FusionReport {
    FusedResult result;
    ConservativenessReport report;
};

FusionReport fusion_conservativeness(const FusionScenario& s, const Settings& settings = {});

} // namespace conserv
