#include "conserv/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace conserv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw InputError(path + ": " + what); }

const Json& need(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing");
    return *it;
}

double number(const Json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    fail(path, "expected a number");
}

std::vector<double> vec(const Json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) fail(path, "expected a number or an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

Eigen::MatrixXd matrix(const Json& j, const std::string& path) {
    if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty()) fail(path, "expected a number or a square matrix");
    const auto n = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto row = vec(j[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]");
        if (static_cast<Eigen::Index>(row.size()) != n) fail(path, "matrix is not square");
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

Json number_json(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

Json vec_json(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json mat_json(const Eigen::MatrixXd& m) {
    Json a = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
    return a;
}

Gaussian gaussian_from(const Json& p, const std::string& path) {
    const auto mean = vec(need(p, "mean", path), path + ".mean");
    const Eigen::MatrixXd cov = matrix(need(p, "cov", path), path + ".cov");
    Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    try {
        return Gaussian(mu, cov);
    } catch (const InputError& e) {
        fail(path, e.what());
    }
}

Json gaussian_json(const Gaussian& g) { return {{"mean", vec_json(g.mean())}, {"cov", mat_json(g.cov())}}; }

Density parse(const Json& j, const std::string& path) {
    const std::string family = need(j, "family", path).is_string() ? j["family"].get<std::string>() : "";
    if (family.empty()) fail(path + ".family", "expected a string");
    const Json empty = Json::object();
    const Json& p = j.contains("params") ? j["params"] : empty;
    const std::string pp = path + ".params";
    try {
        if (family == "gaussian") return Density(gaussian_from(p, pp));
        if (family == "mixture") {
            GaussianMixture m;
            m.weights = vec(need(p, "weights", pp), pp + ".weights");
            const Json& comps = need(p, "components", pp);
            if (!comps.is_array()) fail(pp + ".components", "expected an array");
            for (std::size_t i = 0; i < comps.size(); ++i)
                m.components.push_back(gaussian_from(comps[i], pp + ".components[" + std::to_string(i) + "]"));
            return Density(std::move(m));
        }
        if (family == "exponential") return exponential(number(need(p, "rate", pp), pp + ".rate"));
        if (family == "uniform")
            return Density(Uniform{vec(need(p, "lower", pp), pp + ".lower"), vec(need(p, "upper", pp), pp + ".upper")});
        if (family == "skew_normal") return skew_normal(number(need(p, "shape", pp), pp + ".shape"));
        if (family == "student_t") return student_t(number(need(p, "dof", pp), pp + ".dof"));
        if (family == "piecewise") {
            Piecewise pw;
            const Json& pieces = need(p, "pieces", pp);
            if (!pieces.is_array()) fail(pp + ".pieces", "expected an array");
            for (std::size_t i = 0; i < pieces.size(); ++i) {
                const std::string ip = pp + ".pieces[" + std::to_string(i) + "]";
                const Json& pc = pieces[i];
                Piece piece;
                piece.region.lo = pc.contains("lo") ? number(pc["lo"], ip + ".lo") : -kInf;
                piece.region.hi = pc.contains("hi") ? number(pc["hi"], ip + ".hi") : kInf;
                piece.scale = number(need(pc, "scale", ip), ip + ".scale");
                piece.base = std::make_shared<const Density>(parse(need(pc, "base", ip), ip + ".base"));
                pw.pieces.push_back(std::move(piece));
            }
            return Density(std::move(pw));
        }
        if (family == "two_sided_gaussian")
            return two_sided_gaussian(p.contains("right_param") ? number(p["right_param"], pp + ".right_param") : 2.0,
                                      p.value("right_is_variance", true));
        if (family == "scaled_tail_exponential")
            return scaled_tail_exponential(number(need(p, "rate", pp), pp + ".rate"));
        if (family == "notch") return notch_density();
        if (family == "grid") return Density(grid_from_json(p));
    } catch (const nlohmann::json::exception& e) {
        fail(pp, e.what());
    } catch (const InputError& e) {
        const std::string msg = e.what();
        if (msg.rfind(path, 0) == 0) throw;
        fail(pp, msg);
    }
    fail(path + ".family", "unknown family '" + family + "'");
}

} // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

Density density_from_json(const Json& j) { return parse(j, "density"); }

Json density_to_json(const Density& d) {
    Json params = std::visit(
        [&](const auto& v) -> Json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                return gaussian_json(v);
            } else if constexpr (std::is_same_v<T, GaussianMixture>) {
                Json comps = Json::array();
                for (const auto& c : v.components) comps.push_back(gaussian_json(c));
                return {{"weights", v.weights}, {"components", comps}};
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return {{"rate", v.rate}};
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return {{"lower", v.lower}, {"upper", v.upper}};
            } else if constexpr (std::is_same_v<T, SkewNormal>) {
                return {{"shape", v.shape}};
            } else if constexpr (std::is_same_v<T, StudentT>) {
                return {{"dof", v.dof}};
            } else if constexpr (std::is_same_v<T, Piecewise>) {
                Json pieces = Json::array();
                for (const auto& pc : v.pieces)
                    pieces.push_back({{"lo", number_json(pc.region.lo)},
                                      {"hi", number_json(pc.region.hi)},
                                      {"scale", pc.scale},
                                      {"base", density_to_json(*pc.base)}});
                return {{"pieces", pieces}};
            } else {
                return grid_to_json(v);
            }
        },
        d.variant());
    return {{"family", d.family()}, {"params", params}};
}

Json grid_to_json(const GridDensity& g) {
    return {{"box", {{"lower", g.lattice.box().lower}, {"upper", g.lattice.box().upper}}},
            {"shape", g.lattice.shape()},
            {"open", g.open},
            {"values", g.values}};
}

GridDensity grid_from_json(const Json& p) {
    const std::string path = "density.params";
    const Json& box = need(p, "box", path);
    Box b{vec(need(box, "lower", path + ".box"), path + ".box.lower"), vec(need(box, "upper", path + ".box.upper"), path + ".box.upper")};
    const Json& shape = need(p, "shape", path);
    if (!shape.is_array()) fail(path + ".shape", "expected an array of cell counts");
    std::vector<int> cells;
    for (const auto& c : shape) {
        if (!c.is_number_integer()) fail(path + ".shape", "expected integers");
        cells.push_back(c.get<int>());
    }
    std::vector<double> values = vec(need(p, "values", path), path + ".values");
    OpenFaces open = kAllOpen;
    if (p.contains("open")) {
        const Json& o = p["open"];
        if (!o.is_array() || o.size() != 4) fail(path + ".open", "expected 4 booleans");
        for (std::size_t i = 0; i < 4; ++i) open[i] = o[i].get<bool>();
    }
    try {
        Lattice lat(b, cells);
        if (values.size() != lat.size()) fail(path + ".values", "length does not match shape");
        return make_grid(std::move(lat), std::move(values), open);
    } catch (const InputError& e) {
        const std::string msg = e.what();
        if (msg.rfind(path, 0) == 0) throw;
        fail(path, msg);
    }
}

Json mvset_to_json(const MVSet& s) {
    Json region = std::visit(
        [](const auto& r) -> Json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, Ellipsoid>) {
                return {{"type", "ellipsoid"}, {"center", vec_json(r.center)}, {"shape", mat_json(r.shape)}, {"radius2", r.radius2}};
            } else if constexpr (std::is_same_v<T, Interval>) {
                return {{"type", "interval"}, {"lo", number_json(r.lo)}, {"hi", number_json(r.hi)}};
            } else if constexpr (std::is_same_v<T, Box>) {
                return {{"type", "box"}, {"lower", r.lower}, {"upper", r.upper}};
            } else {
                Json runs = Json::array();
                std::size_t i = 0;
                while (i < r.member.size()) {
                    if (!r.member[i]) {
                        ++i;
                        continue;
                    }
                    std::size_t j = i;
                    while (j < r.member.size() && r.member[j]) ++j;
                    runs.push_back({i, j - i});
                    i = j;
                }
                return {{"type", "cells"},
                        {"box", {{"lower", r.lattice.box().lower}, {"upper", r.lattice.box().upper}}},
                        {"shape", r.lattice.shape()},
                        {"runs", runs}};
            }
        },
        s.region);
    return {{"alpha", s.alpha}, {"beta", s.beta}, {"achieved_mass", s.achieved_mass}, {"region", region}};
}

Json report_to_json(const ConservativenessReport& r) {
    auto opt = [](const auto& o) -> Json { return o ? Json(*o) : Json(nullptr); };
    Json box = nullptr;
    if (r.strict.violation_box) box = {{"lower", r.strict.violation_box->lower}, {"upper", r.strict.violation_box->upper}};
    const auto& w = r.weak;
    return {
        {"verdict_pd", opt(r.verdict_pd)},
        {"verdict_psd", opt(r.verdict_psd)},
        {"support_condition", r.support_condition},
        {"verdict_strict", r.strict.verdict},
        {"verdict_weak", w.verdict},
        {"verdict_geop", r.geop.verdict},
        {"verdict_gekl", r.gekl.verdict},
        {"alpha_prime", opt(w.alpha_prime)},
        {"strict",
         {{"modes_match", r.strict.modes_match},
          {"first_failing_alpha", opt(r.strict.first_failing_alpha)},
          {"violation_mass", r.strict.violation_mass},
          {"violation_box", box}}},
        {"weak",
         {{"curve_alpha_prime", opt(w.curve_alpha_prime)},
          {"from_certificate", w.from_certificate},
          {"curve_tol", w.curve_tol}}},
        {"geop",
         {{"order_preserved", r.geop.order_preserved},
          {"op_fraction", r.geop.op_fraction},
          {"entropy_c", r.geop.entropy_c},
          {"entropy_t", r.geop.entropy_t},
          {"entropy_gap", r.geop.entropy_gap()}}},
        {"gekl",
         {{"entropy_gap", r.gekl.entropy_gap},
          {"kl", r.gekl.kl_infinite ? Json("inf") : Json(r.gekl.kl)},
          {"kl_infinite", r.gekl.kl_infinite},
          {"gap", r.gekl.kl_infinite ? Json("-inf") : Json(r.gekl.gap)}}},
        {"sufficient",
         {{"applies", r.sufficient.applies},
          {"set_A_bounded", r.sufficient.set_A_bounded},
          {"set_A_empty", r.sufficient.set_A_empty},
          {"epsilon", r.sufficient.epsilon},
          {"alpha_prime", r.sufficient.alpha_prime},
          {"certifies", r.sufficient.certifies}}},
        {"curves", {{"alpha", w.curve2.alphas}, {"cond2", w.curve2.values}, {"cond3", w.curve3.values}}},
    };
}

FusionScenario scenario_from_json(const Json& j) {
    if (!j.is_object()) fail("scenario", "expected an object");
    FusionScenario s;
    if (j.contains("common") && !j["common"].is_null()) s.common = parse(j["common"], "common");
    const Json& u = need(j, "uniques", "scenario");
    if (!u.is_array()) fail("uniques", "expected an array");
    for (std::size_t i = 0; i < u.size(); ++i) s.uniques.push_back(parse(u[i], "uniques[" + std::to_string(i) + "]"));
    s.weights = vec(need(j, "weights", "scenario"), "weights");
    if (j.contains("q")) s.q = number(j["q"], "q");
    if (j.contains("rule")) {
        if (!j["rule"].is_string()) fail("rule", "expected a string");
        s.rule = rule_from_string(j["rule"].get<std::string>());
    }
    validate(s);
    return s;
}

Json scenario_to_json(const FusionScenario& s) {
    Json uniques = Json::array();
    for (const auto& u : s.uniques) uniques.push_back(density_to_json(u));
    return {{"common", s.common ? density_to_json(*s.common) : Json(nullptr)},
            {"uniques", uniques},
            {"weights", s.weights},
            {"q", number_json(s.q)},
            {"rule", to_string(s.rule)}};
}

std::string curves_csv(const ConditionCurve& c2, const ConditionCurve& c3) {
    if (c2.alphas != c3.alphas) throw InputError("curves_csv: curves use different alpha grids");
    std::ostringstream os;
    os << "alpha,cond2,cond3\n";
    for (std::size_t i = 0; i < c2.alphas.size(); ++i)
        os << format_number(c2.alphas[i]) << ',' << format_number(c2.values[i]) << ',' << format_number(c3.values[i]) << '\n';
    return os.str();
}

std::string grid_csv(const GridDensity& g) {
    std::ostringstream os;
    os << (g.dim() == 1 ? "x,density\n" : "x,y,density\n");
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto c = g.lattice.center_of(i);
        os << format_number(c[0]) << ',';
        if (g.dim() == 2) os << format_number(c[1]) << ',';
        os << format_number(g.values[i]) << '\n';
    }
    return os.str();
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path + ": cannot open file");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path + ": malformed JSON (" + std::string(e.what()) + ")");
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot write file");
    out << text;
}

} // namespace conserv
