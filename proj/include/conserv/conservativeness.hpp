#pragma once

#include "conserv/mvs.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace conserv {

/// 0.01, 0.02, ..., 0.99, 0.999.
std::vector<double> default_alpha_grid();

struct Settings {
    std::vector<double> alphas = default_alpha_grid();
    int cells_1d = 4096;
    int cells_2d = 512;
    double support_mass_tol = 1e-6;
    /// Defaults to 2 / cells_per_axis.
    std::optional<double> mass_slack;
    /// Defaults to min(2 * mass_slack, 2 * largest single-cell mass of either grid).
    std::optional<double> curve_tol;
    double containment_slack = 1e-3;
    double op_tol = 1e-9;
    int n_op = 2000;
    double support_eps = 1e-12;
    double mode_tol = 0.01;
    double refine_step = 0.001;
    double pd_tol = 1e-10;

    [[nodiscard]] int cells_for(int dim) const { return dim == 1 ? cells_1d : cells_2d; }
};

double mass_slack_for(const GridDensity& g, const Settings& s);
double curve_tol_for(const GridDensity& c, const GridDensity& t, const Settings& s);

/// Grids both densities on the union of their support boxes.
std::pair<GridDensity, GridDensity> common_grid(const Density& c, const Density& t, const Settings& s);

enum class PsdResult { strict_pd, psd, neither };
std::string to_string(PsdResult r);

/// Eigenvalues of sigma_c - sigma_t against +-tol.
PsdResult psd_compare(const Eigen::MatrixXd& sigma_c, const Eigen::MatrixXd& sigma_t, double tol = 1e-10);

/// Condition 1: p_c > eps wherever p_t > eps.
bool check_support(const GridDensity& c, const GridDensity& t, double eps = 1e-12);
/// Exact when p_c is positive everywhere; grid-based otherwise.
bool check_support(const Density& c, const Density& t, const Settings& s = {});

struct ConditionCurve {
    std::vector<double> alphas;
    std::vector<double> values;
    int which = 2;
};

/// curve2 = P_t(M_t) - P_c(M_t); curve3 = P_t(M_c) - P_c(M_c).
std::pair<ConditionCurve, ConditionCurve> condition_curves(const GridDensity& c, const GridDensity& t,
                                                           const std::vector<double>& alphas);

struct StrictResult {
    bool verdict = false;
    bool support = false;
    bool modes_match = false;
    std::optional<double> first_failing_alpha;
    double violation_mass = 0.0;
    std::optional<Box> violation_box;
};

StrictResult check_strict(const GridDensity& c, const GridDensity& t, const Settings& s = {});
StrictResult check_strict(const Density& c, const Density& t, const Settings& s = {});

struct SufficientResult {
    bool applies = false;
    bool set_A_bounded = false;
    bool set_A_empty = true;
    /// inf of p_c over A (0 when A is empty).
    double epsilon = 0.0;
    /// Both densities keep mass below their A-infimum level.
    bool tails_positive = false;
    /// Area level above which the certificate guarantees Conditions 2-3.
    double alpha_prime = 1.0;
    bool certifies = false;
};

/// A = {p_t - p_c > 1e-12} as a cell set.
CellSet set_A(const GridDensity& c, const GridDensity& t);

/// Certificate built on A; bounded iff A touches no open face of the box.
SufficientResult sufficient_condition_test(const GridDensity& c, const GridDensity& t);

struct WeakResult {
    bool verdict = false;
    bool support = false;
    std::optional<double> alpha_prime;
    std::optional<double> curve_alpha_prime;
    bool from_certificate = false;
    double curve_tol = 0.0;
    ConditionCurve curve2;
    ConditionCurve curve3;
    SufficientResult certificate;
};

WeakResult check_weak(const GridDensity& c, const GridDensity& t, const Settings& s = {});
WeakResult check_weak(const Density& c, const Density& t, const Settings& s = {});

struct GeopResult {
    bool verdict = false;
    bool order_preserved = false;
    double op_fraction = 0.0;
    double entropy_c = 0.0;
    double entropy_t = 0.0;
    [[nodiscard]] double entropy_gap() const { return entropy_c - entropy_t; }
};

GeopResult check_geop(const GridDensity& c, const GridDensity& t, const Settings& s = {});

struct GeklResult {
    bool verdict = false;
    bool kl_infinite = false;
    double entropy_gap = 0.0;
    double kl = 0.0;
    /// entropy_gap - KL(p_t || p_c).
    double gap = 0.0;
};

GeklResult check_gekl(const GridDensity& c, const GridDensity& t);

struct ConservativenessReport {
    /// Empty unless both inputs are Gaussian.
    std::optional<bool> verdict_pd;
    std::optional<bool> verdict_psd;
    bool support_condition = false;
    StrictResult strict;
    WeakResult weak;
    GeopResult geop;
    GeklResult gekl;
    SufficientResult sufficient;
};

ConservativenessReport full_report(const GridDensity& c, const GridDensity& t, const Settings& s = {});
ConservativenessReport full_report(const Density& c, const Density& t, const Settings& s = {});

} // namespace conserv
