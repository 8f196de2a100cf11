#include "conserv/conservativeness.hpp"

#include <algorithm>
#include <cmath>

namespace conserv {

namespace {

// Mass of c and t accumulated along each other's canonical order.
class CurveEngine {
public:
    CurveEngine(const GridDensity& c, const GridDensity& t) : sc_(c), st_(t) {
        require_same_lattice(c, t, "condition_curves");
        c_on_t_ = cross(st_, c);
        t_on_c_ = cross(sc_, t);
    }

    [[nodiscard]] double cond2(double alpha) const {
        const std::size_t k = std::max<std::size_t>(st_.prefix_size(alpha), 1);
        return st_.cumulative(k) - c_on_t_[k];
    }
    [[nodiscard]] double cond3(double alpha) const {
        const std::size_t k = std::max<std::size_t>(sc_.prefix_size(alpha), 1);
        return t_on_c_[k] - sc_.cumulative(k);
    }
    [[nodiscard]] bool passes(double alpha, double tol) const {
        return cond2(alpha) >= -tol && cond3(alpha) >= -tol;
    }

    [[nodiscard]] const LevelSweep& sweep_c() const { return sc_; }
    [[nodiscard]] const LevelSweep& sweep_t() const { return st_; }

private:
    static std::vector<double> cross(const LevelSweep& sweep, const GridDensity& other) {
        std::vector<double> acc(sweep.order().size() + 1, 0.0);
        for (std::size_t k = 0; k < sweep.order().size(); ++k)
            acc[k + 1] = acc[k] + other.cell_mass(sweep.order()[k]);
        return acc;
    }

    LevelSweep sc_;
    LevelSweep st_;
    std::vector<double> c_on_t_;
    std::vector<double> t_on_c_;
};

void check_alphas(const std::vector<double>& alphas) {
    if (alphas.empty()) throw InputError("alpha grid is empty");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0 && alphas[i] < 1.0)) throw InputError("alpha grid must lie in (0,1)");
        if (i > 0 && !(alphas[i] > alphas[i - 1])) throw InputError("alpha grid must be strictly ascending");
    }
}

bool positive_everywhere(const Density& d) {
    if (d.as<Gaussian>() || d.as<GaussianMixture>() || d.as<SkewNormal>() || d.as<StudentT>()) return true;
    const auto* p = d.as<Piecewise>();
    if (!p) return false;
    // Between consecutive breakpoints the active piece and the sign of its
    // base are fixed, so probing breakpoints and midpoints is exact.
    std::vector<double> cuts;
    for (const auto& pc : p->pieces) {
        for (double x : {pc.region.lo, pc.region.hi})
            if (std::isfinite(x)) cuts.push_back(x);
        if (const auto* u = pc.base->as<Uniform>()) {
            cuts.push_back(u->lower[0]);
            cuts.push_back(u->upper[0]);
        } else if (pc.base->as<Exponential>()) {
            cuts.push_back(0.0);
        } else if (!positive_everywhere(*pc.base)) {
            return false;
        }
    }
    std::sort(cuts.begin(), cuts.end());
    if (cuts.empty()) cuts.push_back(0.0);
    std::vector<double> probes{cuts.front() - 1.0, cuts.back() + 1.0};
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        probes.push_back(cuts[i]);
        if (i + 1 < cuts.size()) probes.push_back(0.5 * (cuts[i] + cuts[i + 1]));
    }
    return std::all_of(probes.begin(), probes.end(), [&](double x) { return eval(d, x) > 0.0; });
}

StrictResult strict_impl(const GridDensity& c, const GridDensity& t, const Settings& s, bool support) {
    require_same_lattice(c, t, "check_strict");
    check_alphas(s.alphas);
    StrictResult r;
    r.support = support;

    const ModeSet mc = mode_set(c, s.mode_tol);
    const ModeSet mt = mode_set(t, s.mode_tol);
    const CellSet near_c = dilate(mc.cells, 2);
    r.modes_match = true;
    for (std::size_t i = 0; i < mt.cells.member.size(); ++i)
        if (mt.cells.member[i] && !near_c.member[i]) {
            r.modes_match = false;
            break;
        }

    const LevelSweep sc(c);
    const LevelSweep st(t);
    bool all_hold = true;
    for (double a : s.alphas) {
        const Containment k = contains(sc.mv_set(a), st.mv_set(a), c, t, s.containment_slack);
        if (!k.holds) {
            all_hold = false;
            r.first_failing_alpha = a;
            r.violation_mass = k.violation_mass;
            r.violation_box = k.violation_box;
            break;
        }
        r.violation_mass = std::max(r.violation_mass, k.violation_mass);
    }
    r.verdict = support && r.modes_match && all_hold;
    return r;
}

WeakResult weak_impl(const GridDensity& c, const GridDensity& t, const Settings& s, bool support) {
    require_same_lattice(c, t, "check_weak");
    check_alphas(s.alphas);
    WeakResult r;
    r.support = support;
    r.curve_tol = curve_tol_for(c, t, s);

    const CurveEngine eng(c, t);
    const auto& al = s.alphas;
    r.curve2 = {al, {}, 2};
    r.curve3 = {al, {}, 3};
    for (double a : al) {
        r.curve2.values.push_back(eng.cond2(a));
        r.curve3.values.push_back(eng.cond3(a));
    }

    // Smallest grid index from which every tested alpha passes.
    std::size_t first = al.size();
    while (first > 0 && r.curve2.values[first - 1] >= -r.curve_tol && r.curve3.values[first - 1] >= -r.curve_tol)
        --first;
    if (first < al.size()) {
        double ap = al[first];
        if (first > 0) {
            // Tighten between the last failing and first passing grid points.
            std::vector<double> fine;
            for (double a = al[first - 1] + s.refine_step; a < al[first] - 1e-12; a += s.refine_step) fine.push_back(a);
            for (std::size_t j = fine.size(); j > 0 && eng.passes(fine[j - 1], r.curve_tol); --j) ap = fine[j - 1];
        }
        r.curve_alpha_prime = ap;
    }

    r.certificate = sufficient_condition_test(c, t);
    if (r.curve_alpha_prime) {
        r.alpha_prime = r.curve_alpha_prime;
    } else if (r.certificate.certifies) {
        r.alpha_prime = r.certificate.alpha_prime;
        r.from_certificate = true;
    }
    r.verdict = support && r.alpha_prime.has_value() && *r.alpha_prime < 1.0;
    return r;
}

ConservativenessReport report_impl(const GridDensity& c, const GridDensity& t, const Settings& s, bool support) {
    ConservativenessReport rep;
    rep.support_condition = support;
    rep.strict = strict_impl(c, t, s, support);
    rep.weak = weak_impl(c, t, s, support);
    rep.geop = check_geop(c, t, s);
    rep.gekl = check_gekl(c, t);
    rep.sufficient = rep.weak.certificate;
    return rep;
}

} // namespace

std::vector<double> default_alpha_grid() {
    std::vector<double> a;
    for (int i = 1; i <= 99; ++i) a.push_back(i / 100.0);
    a.push_back(0.999);
    return a;
}

double mass_slack_for(const GridDensity& g, const Settings& s) {
    if (s.mass_slack) return *s.mass_slack;
    return 2.0 / g.lattice.cells(0);
}

double curve_tol_for(const GridDensity& c, const GridDensity& t, const Settings& s) {
    if (s.curve_tol) return *s.curve_tol;
    const double by_slack = 2.0 * mass_slack_for(t, s);
    const double by_cell = 2.0 * std::max(c.max_cell_mass(), t.max_cell_mass());
    return std::min(by_slack, by_cell);
}

std::pair<GridDensity, GridDensity> common_grid(const Density& c, const Density& t, const Settings& s) {
    if (c.dim() != t.dim()) throw InputError("densities differ in dimension");
    const auto* gc = c.as<GridDensity>();
    const auto* gt = t.as<GridDensity>();
    if (gc && gt && gc->lattice == gt->lattice) return {*gc, *gt};
    const Box box = box_union(support_box(c, s.support_mass_tol), support_box(t, s.support_mass_tol));
    const std::vector<int> cells(static_cast<std::size_t>(c.dim()), s.cells_for(c.dim()));
    return {to_grid(c, box, cells), to_grid(t, box, cells)};
}

std::string to_string(PsdResult r) {
    switch (r) {
    case PsdResult::strict_pd: return "strict_pd";
    case PsdResult::psd: return "psd";
    case PsdResult::neither: return "neither";
    }
    return "neither";
}

PsdResult psd_compare(const Eigen::MatrixXd& sigma_c, const Eigen::MatrixXd& sigma_t, double tol) {
    if (sigma_c.rows() != sigma_c.cols() || sigma_c.rows() != sigma_t.rows() || sigma_t.rows() != sigma_t.cols())
        throw InputError("psd_compare: matrices must be square and of equal size");
    for (const auto* m : {&sigma_c, &sigma_t})
        if ((*m - m->transpose()).cwiseAbs().maxCoeff() > 1e-10)
            throw InputError("psd_compare: matrix is not symmetric");
    const Eigen::MatrixXd diff = sigma_c - sigma_t;
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (diff + diff.transpose())).eigenvalues();
    if (ev.minCoeff() > tol) return PsdResult::strict_pd;
    if (ev.minCoeff() >= -tol) return PsdResult::psd;
    return PsdResult::neither;
}

bool check_support(const GridDensity& c, const GridDensity& t, double eps) {
    require_same_lattice(c, t, "check_support");
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t.values[i] > eps && !(c.values[i] > eps)) return false;
    return true;
}

bool check_support(const Density& c, const Density& t, const Settings& s) {
    if (c.dim() != t.dim()) throw InputError("check_support: densities differ in dimension");
    if (positive_everywhere(c)) return true;
    const auto [gc, gt] = common_grid(c, t, s);
    return check_support(gc, gt, s.support_eps);
}

std::pair<ConditionCurve, ConditionCurve> condition_curves(const GridDensity& c, const GridDensity& t,
                                                           const std::vector<double>& alphas) {
    check_alphas(alphas);
    const CurveEngine eng(c, t);
    std::pair<ConditionCurve, ConditionCurve> out{{alphas, {}, 2}, {alphas, {}, 3}};
    for (double a : alphas) {
        out.first.values.push_back(eng.cond2(a));
        out.second.values.push_back(eng.cond3(a));
    }
    return out;
}

StrictResult check_strict(const GridDensity& c, const GridDensity& t, const Settings& s) {
    return strict_impl(c, t, s, check_support(c, t, s.support_eps));
}

StrictResult check_strict(const Density& c, const Density& t, const Settings& s) {
    const bool support = check_support(c, t, s);
    const auto [gc, gt] = common_grid(c, t, s);
    return strict_impl(gc, gt, s, support);
}

CellSet set_A(const GridDensity& c, const GridDensity& t) {
    require_same_lattice(c, t, "set_A");
    CellSet a{c.lattice, std::vector<std::uint8_t>(c.size(), 0)};
    for (std::size_t i = 0; i < c.size(); ++i) a.member[i] = t.values[i] - c.values[i] > 1e-12;
    return a;
}

SufficientResult sufficient_condition_test(const GridDensity& c, const GridDensity& t) {
    require_same_lattice(c, t, "sufficient_condition_test");
    SufficientResult r;
    const OpenFaces open = faces_or(c.open, t.open);
    double eps_c = std::numeric_limits<double>::infinity();
    double eps_t = std::numeric_limits<double>::infinity();
    bool touches = false;
    const CellSet a = set_A(c, t);
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!a.member[i]) continue;
        r.set_A_empty = false;
        eps_c = std::min(eps_c, c.values[i]);
        eps_t = std::min(eps_t, t.values[i]);
        if (c.lattice.on_open_face(i, open)) touches = true;
    }
    r.set_A_bounded = !touches;
    r.applies = r.set_A_bounded;
    if (r.set_A_empty) {
        r.tails_positive = true;
        r.alpha_prime = 0.0;
        r.certifies = true;
        return r;
    }
    r.epsilon = eps_c;
    double above_c = 0.0, below_c = 0.0, above_t = 0.0, below_t = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        (c.values[i] >= eps_c ? above_c : below_c) += c.cell_mass(i);
        (t.values[i] >= eps_t ? above_t : below_t) += t.cell_mass(i);
    }
    r.tails_positive = below_c > 0.0 && below_t > 0.0;
    r.alpha_prime = std::max(above_c, above_t);
    r.certifies = r.set_A_bounded && r.tails_positive && r.alpha_prime < 1.0;
    return r;
}

WeakResult check_weak(const GridDensity& c, const GridDensity& t, const Settings& s) {
    return weak_impl(c, t, s, check_support(c, t, s.support_eps));
}

WeakResult check_weak(const Density& c, const Density& t, const Settings& s) {
    const bool support = check_support(c, t, s);
    const auto [gc, gt] = common_grid(c, t, s);
    return weak_impl(gc, gt, s, support);
}

GeopResult check_geop(const GridDensity& c, const GridDensity& t, const Settings& s) {
    require_same_lattice(c, t, "check_geop");
    const std::size_t n = c.size();
    std::vector<std::size_t> sample;
    if (n <= static_cast<std::size_t>(s.n_op)) {
        for (std::size_t i = 0; i < n; ++i) sample.push_back(i);
    } else {
        // Golden-ratio (Weyl) sequence over the flat cell index.
        constexpr double kGolden = 0.6180339887498949;
        for (int k = 0; k < s.n_op; ++k) {
            const double u = std::fmod(0.5 + kGolden * k, 1.0);
            sample.push_back(std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n))));
        }
    }
    std::size_t pairs = 0, bad = 0;
    for (std::size_t a = 0; a < sample.size(); ++a)
        for (std::size_t b = a + 1; b < sample.size(); ++b) {
            ++pairs;
            const double dt = t.values[sample[a]] - t.values[sample[b]];
            const double dc = c.values[sample[a]] - c.values[sample[b]];
            if (std::abs(dt) > s.op_tol && std::abs(dc) > s.op_tol && (dt > 0) != (dc > 0)) ++bad;
        }
    GeopResult r;
    r.op_fraction = pairs ? static_cast<double>(bad) / static_cast<double>(pairs) : 0.0;
    r.order_preserved = bad == 0;
    r.entropy_c = entropy(c);
    r.entropy_t = entropy(t);
    r.verdict = r.order_preserved && r.entropy_c >= r.entropy_t;
    return r;
}

GeklResult check_gekl(const GridDensity& c, const GridDensity& t) {
    require_same_lattice(c, t, "check_gekl");
    GeklResult r;
    r.entropy_gap = entropy(c) - entropy(t);
    const KlResult kl = kl_divergence(t, c);
    r.kl = kl.value;
    r.kl_infinite = kl.infinite;
    r.gap = kl.infinite ? -std::numeric_limits<double>::infinity() : r.entropy_gap - r.kl;
    r.verdict = !kl.infinite && r.gap >= 0.0;
    return r;
}

ConservativenessReport full_report(const GridDensity& c, const GridDensity& t, const Settings& s) {
    return report_impl(c, t, s, check_support(c, t, s.support_eps));
}

ConservativenessReport full_report(const Density& c, const Density& t, const Settings& s) {
    const bool support = check_support(c, t, s);
    const auto [gc, gt] = common_grid(c, t, s);
    ConservativenessReport rep = report_impl(gc, gt, s, support);
    const auto* nc = c.as<Gaussian>();
    const auto* nt = t.as<Gaussian>();
    if (nc && nt) {
        const PsdResult p = psd_compare(nc->cov(), nt->cov(), s.pd_tol);
        rep.verdict_pd = p == PsdResult::strict_pd;
        rep.verdict_psd = p != PsdResult::neither;
    }
    return rep;
}

} // namespace conserv
