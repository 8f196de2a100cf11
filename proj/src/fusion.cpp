#include "conserv/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace conserv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log p(x), staying finite in Gaussian tails where p(x) underflows.
double log_eval(const Density& d, std::span<const double> x) {
    if (const auto* g = d.as<Gaussian>()) return g->log_pdf(x);
    if (const auto* m = d.as<GaussianMixture>()) {
        double top = kNegInf;
        std::vector<double> terms;
        for (std::size_t i = 0; i < m->weights.size(); ++i) {
            if (m->weights[i] <= 0.0) continue;
            terms.push_back(std::log(m->weights[i]) + m->components[i].log_pdf(x));
            top = std::max(top, terms.back());
        }
        double s = 0.0;
        for (double t : terms) s += std::exp(t - top);
        return top + std::log(s);
    }
    const double v = eval(d, x);
    return v > 0.0 ? std::log(v) : kNegInf;
}

std::vector<double> log_sample(const Density& d, const Lattice& lat) {
    if (d.dim() != lat.dim()) throw InputError("fusion: density dimension does not match the lattice");
    std::vector<double> out(lat.size());
    const auto m = static_cast<std::size_t>(lat.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto c = lat.center_of(i);
        out[i] = log_eval(d, std::span<const double>(c.data(), m));
    }
    return out;
}

// exp(L - max L), normalised; `normalizer` receives the integral of exp(L).
GridDensity from_log(const Lattice& lat, const std::vector<double>& logv, const OpenFaces& open, double* normalizer) {
    const double top = *std::max_element(logv.begin(), logv.end());
    if (!std::isfinite(top)) throw InputError("fusion: product has zero mass on the lattice");
    std::vector<double> raw(logv.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = std::exp(logv[i] - top);
    GridDensity g = make_grid(lat, std::move(raw), open);
    if (normalizer) *normalizer = std::exp(top) / g.renormalization;
    return g;
}

void check_weights(std::size_t n, const std::vector<double>& w) {
    if (w.size() != n) throw InputError("weights: need one weight per input");
    double sum = 0.0;
    for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw InputError("weights: must be non-negative");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InputError("weights: must sum to 1 (simplex constraint)");
}

void check_inputs(const std::vector<GridDensity>& in, const std::vector<double>& w, const char* op) {
    if (in.empty()) throw InputError(std::string(op) + ": no inputs");
    check_weights(in.size(), w);
    for (const auto& g : in) require_same_lattice(in.front(), g, op);
}

// Index of the only input with non-zero weight, if there is exactly one.
std::optional<std::size_t> single_active(const std::vector<double>& w) {
    std::optional<std::size_t> k;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] > 0.0) {
            if (k) return std::nullopt;
            k = i;
        }
    return k;
}

OpenFaces combine_faces(const std::vector<GridDensity>& in, const std::vector<double>& w, bool any) {
    OpenFaces f = any ? kAllClosed : kAllOpen;
    for (std::size_t i = 0; i < in.size(); ++i)
        if (w[i] > 0.0) f = any ? faces_or(f, in[i].open) : faces_and(f, in[i].open);
    return f;
}

} // namespace

std::string to_string(Rule r) {
    switch (r) {
    case Rule::lop: return "lop";
    case Rule::llop: return "llop";
    case Rule::power_mean: return "power_mean";
    }
    return "power_mean";
}

Rule rule_from_string(const std::string& s) {
    if (s == "lop") return Rule::lop;
    if (s == "llop") return Rule::llop;
    if (s == "power_mean") return Rule::power_mean;
    throw InputError("rule: expected lop, llop or power_mean, got '" + s + "'");
}

void validate(const FusionScenario& s) {
    if (s.uniques.size() < 2) throw InputError("uniques: a scenario needs at least 2 inputs");
    check_weights(s.uniques.size(), s.weights);
    if (std::isnan(s.q)) throw InputError("q: must be a number or +-inf");
    const int m = s.uniques.front().dim();
    for (const auto& u : s.uniques)
        if (u.dim() != m) throw InputError("uniques: densities differ in dimension");
    if (s.common && s.common->dim() != m) throw InputError("common: dimension differs from the uniques");
}

Lattice fusion_lattice(const FusionScenario& s, const Settings& settings) {
    if (s.uniques.empty()) throw InputError("uniques: empty");
    Box box = support_box(s.uniques.front(), settings.support_mass_tol);
    for (const auto& u : s.uniques) box = box_union(box, support_box(u, settings.support_mass_tol));
    if (s.common) box = box_union(box, support_box(*s.common, settings.support_mass_tol));
    box = pad_box(box, 0.1);
    const int m = box.dim();
    return Lattice(box, std::vector<int>(static_cast<std::size_t>(m), settings.cells_for(m)));
}

std::vector<GridDensity> inputs_from_scenario(const FusionScenario& s, const Lattice& lattice) {
    std::vector<double> common(lattice.size(), 0.0);
    OpenFaces common_open = kAllOpen;
    if (s.common) {
        common = log_sample(*s.common, lattice);
        common_open = open_faces_on(*s.common, lattice.box());
    }
    std::vector<GridDensity> out;
    for (const auto& u : s.uniques) {
        std::vector<double> l = log_sample(u, lattice);
        for (std::size_t i = 0; i < l.size(); ++i) l[i] += common[i];
        out.push_back(from_log(lattice, l, faces_and(common_open, open_faces_on(u, lattice.box())), nullptr));
    }
    return out;
}

GridDensity true_fusion(const FusionScenario& s, const Lattice& lattice, double* normalizer) {
    if (s.uniques.empty()) throw InputError("uniques: empty");
    std::vector<double> l(lattice.size(), 0.0);
    OpenFaces open = kAllOpen;
    if (s.common) {
        l = log_sample(*s.common, lattice);
        open = open_faces_on(*s.common, lattice.box());
    }
    for (const auto& u : s.uniques) {
        const std::vector<double> lu = log_sample(u, lattice);
        for (std::size_t i = 0; i < l.size(); ++i) l[i] += lu[i];
        open = faces_and(open, open_faces_on(u, lattice.box()));
    }
    return from_log(lattice, l, open, normalizer);
}

GridDensity lop(const std::vector<GridDensity>& inputs, const std::vector<double>& weights, double* normalizer) {
    check_inputs(inputs, weights, "lop");
    if (const auto k = single_active(weights)) {
        if (normalizer) *normalizer = 1.0;
        return inputs[*k];
    }
    std::vector<double> v(inputs.front().size(), 0.0);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        if (weights[k] == 0.0) continue;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += weights[k] * inputs[k].values[i];
    }
    GridDensity g = make_grid(inputs.front().lattice, std::move(v), combine_faces(inputs, weights, true));
    if (normalizer) *normalizer = 1.0 / g.renormalization;
    return g;
}

GridDensity llop(const std::vector<GridDensity>& inputs, const std::vector<double>& weights, double* normalizer) {
    check_inputs(inputs, weights, "llop");
    if (const auto k = single_active(weights)) {
        if (normalizer) *normalizer = 1.0;
        return inputs[*k];
    }
    std::vector<double> l(inputs.front().size(), 0.0);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        if (weights[k] == 0.0) continue;
        for (std::size_t i = 0; i < l.size(); ++i) {
            const double p = inputs[k].values[i];
            l[i] += p > 0.0 ? weights[k] * std::log(p) : kNegInf;
        }
    }
    return from_log(inputs.front().lattice, l, combine_faces(inputs, weights, false), normalizer);
}

double power_mean(const std::vector<double>& values, const std::vector<double>& weights, double q) {
    if (values.size() != weights.size()) throw InputError("power_mean: size mismatch");
    if (std::isinf(q)) {
        double r = q > 0 ? 0.0 : std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < values.size(); ++k)
            if (weights[k] > 0.0) r = q > 0 ? std::max(r, values[k]) : std::min(r, values[k]);
        return r;
    }
    if (q == 0.0) {
        double l = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (weights[k] == 0.0) continue;
            if (values[k] <= 0.0) return 0.0;
            l += weights[k] * std::log(values[k]);
        }
        return std::exp(l);
    }
    // (sum w p^q)^(1/q) as exp(logsumexp(log w + q log p) / q).
    std::vector<double> t;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (weights[k] == 0.0) continue;
        if (values[k] <= 0.0) {
            if (q < 0.0) return 0.0;
            continue;
        }
        t.push_back(std::log(weights[k]) + q * std::log(values[k]));
    }
    if (t.empty()) return 0.0;
    const double top = *std::max_element(t.begin(), t.end());
    double s = 0.0;
    for (double x : t) s += std::exp(x - top);
    return std::exp((top + std::log(s)) / q);
}

GridDensity power_mean_fusion(const std::vector<GridDensity>& inputs, const std::vector<double>& weights, double q,
                              double* normalizer) {
    if (std::isnan(q)) throw InputError("power_mean: q is NaN");
    if (q == 1.0) return lop(inputs, weights, normalizer);
    if (q == 0.0) return llop(inputs, weights, normalizer);
    check_inputs(inputs, weights, "power_mean");
    if (const auto k = single_active(weights)) {
        if (normalizer) *normalizer = 1.0;
        return inputs[*k];
    }
    std::vector<double> v(inputs.front().size());
    std::vector<double> cell(inputs.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t k = 0; k < inputs.size(); ++k) cell[k] = inputs[k].values[i];
        v[i] = power_mean(cell, weights, q);
    }
    GridDensity g = make_grid(inputs.front().lattice, std::move(v), combine_faces(inputs, weights, q > 0.0));
    if (normalizer) *normalizer = 1.0 / g.renormalization;
    return g;
}

FusedResult fuse(const FusionScenario& s, const Settings& settings) {
    validate(s);
    const Lattice lat = fusion_lattice(s, settings);
    FusedResult r;
    r.rule = s.rule;
    r.q = s.q;
    r.inputs = inputs_from_scenario(s, lat);
    switch (s.rule) {
    case Rule::lop: r.fused = lop(r.inputs, s.weights, &r.normalizer_fused); break;
    case Rule::llop: r.fused = llop(r.inputs, s.weights, &r.normalizer_fused); break;
    case Rule::power_mean: r.fused = power_mean_fusion(r.inputs, s.weights, s.q, &r.normalizer_fused); break;
    }
    r.oracle = true_fusion(s, lat, &r.normalizer_oracle);
    return r;
}

GridDensity bayes_update(const GridDensity& prior, const Density& likelihood) {
    std::vector<double> l = sample_on(likelihood, prior.lattice);
    for (std::size_t i = 0; i < l.size(); ++i) l[i] *= prior.values[i];
    double mass = 0.0;
    for (double x : l) mass += x;
    if (!(mass > 0.0)) throw InputError("bayes_update: zero evidence on the lattice");
    return make_grid(prior.lattice, std::move(l), faces_and(prior.open, open_faces_on(likelihood, prior.lattice.box())));
}

FusionReport fusion_conservativeness(const FusionScenario& s, const Settings& settings) {
    FusionReport out;
    out.result = fuse(s, settings);
    out.report = full_report(out.result.fused, out.result.oracle, settings);
    return out;
}

} // namespace conserv
