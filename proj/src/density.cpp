#include "conserv/density.hpp"

#include "conserv/special.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace conserv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& msg) {
    if (!ok) throw InputError(msg);
}

double matrix_scale(const Eigen::MatrixXd& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); }

} // namespace

Gaussian::Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    const auto m = mean_.size();
    require(m >= 1 && m <= 2, "gaussian: dimension must be 1 or 2");
    require(cov_.rows() == m && cov_.cols() == m, "gaussian: covariance shape does not match mean");
    require(mean_.allFinite() && cov_.allFinite(), "gaussian: non-finite parameter");
    require((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * matrix_scale(cov_),
            "gaussian: covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_);
    require(es.eigenvalues().minCoeff() > 0.0, "gaussian: covariance is not positive definite");
    precision_ = cov_.inverse();
    precision_ = 0.5 * (precision_ + precision_.transpose());
    log_norm_ = -0.5 * static_cast<double>(m) * std::log(2.0 * special::kPi) -
                0.5 * std::log(cov_.determinant());
}

double Gaussian::log_pdf(std::span<const double> x) const {
    if (dim() == 1) {
        const double d = x[0] - mean_(0);
        return log_norm_ - 0.5 * d * d * precision_(0, 0);
    }
    const double dx = x[0] - mean_(0);
    const double dy = x[1] - mean_(1);
    const double q = dx * dx * precision_(0, 0) + 2.0 * dx * dy * precision_(0, 1) +
                     dy * dy * precision_(1, 1);
    return log_norm_ - 0.5 * q;
}

Density::Density(Gaussian g) : v_(std::move(g)) {}

namespace {

GaussianMixture checked(GaussianMixture m) {
    require(!m.components.empty(), "mixture: no components");
    require(m.weights.size() == m.components.size(), "mixture: weight count != component count");
    double sum = 0.0;
    for (double w : m.weights) {
        require(w >= 0.0 && std::isfinite(w), "mixture: weights must be non-negative");
        sum += w;
    }
    require(std::abs(sum - 1.0) <= 1e-12, "mixture: weights must sum to 1");
    for (const auto& c : m.components)
        require(c.dim() == m.components.front().dim(), "mixture: components differ in dimension");
    return m;
}

Uniform checked(Uniform u) {
    require(!u.lower.empty() && u.lower.size() <= 2 && u.lower.size() == u.upper.size(),
            "uniform: bounds must have matching dimension 1 or 2");
    for (std::size_t i = 0; i < u.lower.size(); ++i)
        require(std::isfinite(u.lower[i]) && std::isfinite(u.upper[i]) && u.lower[i] < u.upper[i],
                "uniform: need lower < upper on every axis");
    return u;
}

GridDensity checked(GridDensity g) {
    require(g.values.size() == g.lattice.size() && g.lattice.size() > 0, "grid: values do not fill lattice");
    require(std::abs(g.total_mass() - 1.0) <= 1e-9, "grid: total mass must be 1");
    for (double v : g.values) require(v >= 0.0 && std::isfinite(v), "grid: values must be non-negative");
    return g;
}

Piecewise checked(Piecewise p) {
    require(!p.pieces.empty(), "piecewise: no pieces");
    for (const auto& pc : p.pieces) {
        require(pc.base != nullptr, "piecewise: piece without base density");
        require(pc.base->dim() == 1, "piecewise: pieces must be one-dimensional");
        require(pc.scale > 0.0 && std::isfinite(pc.scale), "piecewise: scale must be positive");
        require(pc.region.lo < pc.region.hi, "piecewise: empty region");
    }
    return p;
}

} // namespace

Density::Density(GaussianMixture m) : v_(checked(std::move(m))) {}
Density::Density(Uniform u) : v_(checked(std::move(u))) {}

Density::Density(Exponential e) : v_(e) {
    require(e.rate > 0.0 && std::isfinite(e.rate), "exponential: rate must be positive");
}
Density::Density(GridDensity g) : v_(checked(std::move(g))) {}

Density::Density(SkewNormal s) : v_(s) {
    require(std::isfinite(s.shape), "skew_normal: shape must be finite");
}

Density::Density(StudentT t) : v_(t) {
    require(t.dof > 0.0 && std::isfinite(t.dof), "student_t: dof must be positive");
}

Density::Density(Piecewise p) : v_(checked(std::move(p))) {
    const Box box = support_box(*this, 1e-9);
    const double mass = integrate_1d(*this, box.lower[0], box.upper[0]);
    if (std::abs(mass - 1.0) > 1e-6) {
        std::ostringstream os;
        os << "piecewise: pieces integrate to " << mass << ", not 1";
        throw InputError(os.str());
    }
}

int Density::dim() const {
    return std::visit(Overloaded{
                          [](const Gaussian& g) { return g.dim(); },
                          [](const GaussianMixture& m) { return m.components.front().dim(); },
                          [](const Uniform& u) { return static_cast<int>(u.lower.size()); },
                          [](const GridDensity& g) { return g.dim(); },
                          [](const auto&) { return 1; },
                      },
                      v_);
}

std::string Density::family() const {
    return std::visit(Overloaded{
                          [](const Gaussian&) { return std::string("gaussian"); },
                          [](const GaussianMixture&) { return std::string("mixture"); },
                          [](const Exponential&) { return std::string("exponential"); },
                          [](const Uniform&) { return std::string("uniform"); },
                          [](const SkewNormal&) { return std::string("skew_normal"); },
                          [](const StudentT&) { return std::string("student_t"); },
                          [](const Piecewise&) { return std::string("piecewise"); },
                          [](const GridDensity&) { return std::string("grid"); },
                      },
                      v_);
}

Density gaussian_1d(double mean, double variance) {
    Eigen::VectorXd mu(1);
    mu << mean;
    Eigen::MatrixXd s(1, 1);
    s << variance;
    return Density(Gaussian(mu, s));
}

Density gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    return Density(Gaussian(std::move(mean), std::move(cov)));
}

Density gaussian_diag(std::vector<double> mean, std::vector<double> variances) {
    require(mean.size() == variances.size(), "gaussian_diag: size mismatch");
    const auto m = static_cast<Eigen::Index>(mean.size());
    Eigen::VectorXd mu = Eigen::Map<Eigen::VectorXd>(mean.data(), m);
    Eigen::MatrixXd s = Eigen::Map<Eigen::VectorXd>(variances.data(), m).asDiagonal();
    return Density(Gaussian(mu, s));
}

Density mixture_1d(std::vector<double> weights, std::vector<double> means, std::vector<double> variances) {
    require(means.size() == variances.size(), "mixture_1d: size mismatch");
    GaussianMixture m;
    m.weights = std::move(weights);
    for (std::size_t i = 0; i < means.size(); ++i) {
        Eigen::VectorXd mu(1);
        mu << means[i];
        Eigen::MatrixXd s(1, 1);
        s << variances[i];
        m.components.emplace_back(mu, s);
    }
    return Density(std::move(m));
}

Density exponential(double rate) { return Density(Exponential{rate}); }
Density uniform_1d(double lo, double hi) { return Density(Uniform{{lo}, {hi}}); }
Density skew_normal(double shape) { return Density(SkewNormal{shape}); }
Density student_t(double dof) { return Density(StudentT{dof}); }

Density two_sided_gaussian(double right_param, bool right_is_variance) {
    require(right_param > 0.0, "two_sided_gaussian: parameter must be positive");
    const double right_var = right_is_variance ? right_param : right_param * right_param;
    auto left = std::make_shared<const Density>(gaussian_1d(0.0, 1.0));
    auto right = std::make_shared<const Density>(gaussian_1d(0.0, right_var));
    const double m_left = integrate_1d(*left, -kInf, 0.0);
    const double m_right = integrate_1d(*right, 0.0, kInf);
    // Continuity at 0: k1 * left(0) == k2 * right(0).
    const double ratio = eval(*left, 0.0) / eval(*right, 0.0);
    const double k1 = 1.0 / (m_left + ratio * m_right);
    const double k2 = ratio * k1;
    Piecewise p;
    p.pieces.push_back({{-kInf, 0.0}, k1, left});
    p.pieces.push_back({{0.0, kInf}, k2, right});
    return Density(std::move(p));
}

Density scaled_tail_exponential(double rate) {
    require(rate > 0.0, "scaled_tail_exponential: rate must be positive");
    auto base = std::make_shared<const Density>(exponential(rate));
    // base is rate * e^{-rate x}; scale 1/rate recovers e^{-rate x}.
    const double head = integrate_1d(*base, 0.0, 1.0) / rate;
    const double tail = integrate_1d(*base, 1.0, kInf) / rate;
    const double k = (1.0 - head) / tail;
    require(k > 0.0, "scaled_tail_exponential: head already carries all the mass");
    Piecewise p;
    p.pieces.push_back({{0.0, 1.0}, 1.0 / rate, base});
    p.pieces.push_back({{1.0, kInf}, k / rate, base});
    return Density(std::move(p));
}

Density notch_density() {
    auto normal = std::make_shared<const Density>(gaussian_1d(0.0, 4.0));
    constexpr double kNotchValue = 0.05;
    const double removed = integrate_1d(*normal, 1.0, 2.0) - kNotchValue * 1.0;
    const double plateau = (integrate_1d(*normal, 10.0, 15.0) + removed) / 5.0;
    auto notch_base = std::make_shared<const Density>(uniform_1d(1.0, 2.0));
    auto plateau_base = std::make_shared<const Density>(uniform_1d(10.0, 15.0));
    Piecewise p;
    p.pieces.push_back({{1.0, 2.0}, kNotchValue, notch_base});
    p.pieces.push_back({{10.0, 15.0}, plateau * 5.0, plateau_base});
    p.pieces.push_back({{-kInf, kInf}, 1.0, normal});
    return Density(std::move(p));
}

Density example5_mixture() {
    GaussianMixture m;
    m.weights = {1.0 / 3.0, 2.0 / 3.0};
    Eigen::Vector2d mu1(2.0, 4.0), mu2(1.0, -3.0);
    Eigen::Matrix2d s1, s2;
    s1 << 6.0, 2.0, 2.0, 3.0;
    s2 << 5.0, -1.0, -1.0, 4.0;
    m.components.emplace_back(mu1, s1);
    m.components.emplace_back(mu2, s2);
    // 1/3 + 2/3 rounds to 1 exactly in binary64.
    return Density(std::move(m));
}

double eval(const Density& d, std::span<const double> x) {
    if (static_cast<int>(x.size()) != d.dim()) {
        std::ostringstream os;
        os << "eval: point has dimension " << x.size() << ", density has " << d.dim();
        throw InputError(os.str());
    }
    return std::visit(
        Overloaded{
            [&](const Gaussian& g) { return std::exp(g.log_pdf(x)); },
            [&](const GaussianMixture& m) {
                double s = 0.0;
                for (std::size_t i = 0; i < m.weights.size(); ++i)
                    if (m.weights[i] > 0.0) s += m.weights[i] * std::exp(m.components[i].log_pdf(x));
                return s;
            },
            [&](const Exponential& e) { return x[0] < 0.0 ? 0.0 : e.rate * std::exp(-e.rate * x[0]); },
            [&](const Uniform& u) {
                double vol = 1.0;
                for (std::size_t i = 0; i < u.lower.size(); ++i) {
                    if (x[i] < u.lower[i] || x[i] > u.upper[i]) return 0.0;
                    vol *= u.upper[i] - u.lower[i];
                }
                return 1.0 / vol;
            },
            [&](const SkewNormal& s) {
                return 2.0 * special::normal_pdf(x[0]) * special::normal_cdf(s.shape * x[0]);
            },
            [&](const StudentT& t) { return special::student_t_pdf(t.dof, x[0]); },
            [&](const Piecewise& p) {
                for (const auto& pc : p.pieces)
                    if (x[0] >= pc.region.lo && x[0] <= pc.region.hi) return pc.scale * eval(*pc.base, x);
                return 0.0;
            },
            [&](const GridDensity& g) { return g.eval(x); },
        },
        d.variant());
}

double eval(const Density& d, double x) { return eval(d, std::span<const double>(&x, 1)); }

Box support_box(const Density& d, double mass_tol) {
    if (!(mass_tol > 0.0 && mass_tol < 1.0)) throw InputError("support_box: mass_tol must be in (0,1)");
    return std::visit(
        Overloaded{
            [&](const Gaussian& g) {
                const int m = g.dim();
                const double z = special::normal_quantile(1.0 - mass_tol / (2.0 * m));
                Box b;
                for (int a = 0; a < m; ++a) {
                    const double s = std::sqrt(g.cov()(a, a));
                    b.lower.push_back(g.mean()(a) - z * s);
                    b.upper.push_back(g.mean()(a) + z * s);
                }
                return b;
            },
            [&](const GaussianMixture& m) {
                Box b = support_box(Density(m.components.front()), mass_tol);
                for (std::size_t i = 1; i < m.components.size(); ++i)
                    b = box_union(b, support_box(Density(m.components[i]), mass_tol));
                return b;
            },
            [&](const Exponential& e) { return Box{{0.0}, {-std::log(mass_tol) / e.rate}}; },
            [&](const Uniform& u) { return Box{u.lower, u.upper}; },
            [&](const SkewNormal&) {
                // Each tail is at most twice the standard normal tail.
                const double z = special::normal_quantile(1.0 - mass_tol / 4.0);
                return Box{{-z}, {z}};
            },
            [&](const StudentT& t) {
                const double z = special::student_t_quantile(t.dof, 1.0 - mass_tol / 2.0);
                return Box{{-z}, {z}};
            },
            [&](const Piecewise& p) {
                std::optional<Box> out;
                for (const auto& pc : p.pieces) {
                    Box b = support_box(*pc.base, mass_tol);
                    b.lower[0] = std::max(b.lower[0], pc.region.lo);
                    b.upper[0] = std::min(b.upper[0], pc.region.hi);
                    if (!(b.upper[0] > b.lower[0])) continue;
                    out = out ? box_union(*out, b) : b;
                }
                if (!out) throw InputError("support_box: piecewise density has empty support");
                return *out;
            },
            [&](const GridDensity& g) { return g.lattice.box(); },
        },
        d.variant());
}

OpenFaces open_faces(const Density& d) {
    return std::visit(Overloaded{
                          [](const Exponential&) { return OpenFaces{false, true, false, false}; },
                          [](const Uniform&) { return kAllClosed; },
                          [](const GridDensity& g) { return g.open; },
                          [](const Piecewise& p) {
                              OpenFaces f = kAllClosed;
                              for (const auto& pc : p.pieces) {
                                  const OpenFaces bf = open_faces(*pc.base);
                                  if (std::isinf(pc.region.lo) && bf[0]) f[0] = true;
                                  if (std::isinf(pc.region.hi) && bf[1]) f[1] = true;
                              }
                              return f;
                          },
                          [](const auto&) { return kAllOpen; },
                      },
                      d.variant());
}

OpenFaces open_faces_on(const Density& d, const Box& box) {
    OpenFaces f = open_faces(d);
    const Box sb = support_box(d, 1e-9);
    for (int a = 0; a < box.dim(); ++a) {
        const auto ua = static_cast<std::size_t>(a);
        if (box.lower[ua] > sb.lower[ua]) f[2 * ua] = true;
        if (box.upper[ua] < sb.upper[ua]) f[2 * ua + 1] = true;
    }
    if (box.dim() == 1) f[2] = f[3] = false;
    return f;
}

namespace {

void breakpoints(const Density& d, std::vector<double>& out) {
    std::visit(Overloaded{
                   [&](const Exponential&) { out.push_back(0.0); },
                   [&](const Uniform& u) {
                       out.push_back(u.lower[0]);
                       out.push_back(u.upper[0]);
                   },
                   [&](const Gaussian& g) { out.push_back(g.mean()(0)); },
                   [&](const Piecewise& p) {
                       for (const auto& pc : p.pieces) {
                           if (std::isfinite(pc.region.lo)) out.push_back(pc.region.lo);
                           if (std::isfinite(pc.region.hi)) out.push_back(pc.region.hi);
                           breakpoints(*pc.base, out);
                       }
                   },
                   [&](const auto&) {},
               },
               d.variant());
}

} // namespace

std::vector<double> sample_on(const Density& d, const Lattice& lattice) {
    if (d.dim() != lattice.dim()) throw InputError("sample_on: dimension mismatch");
    std::vector<double> v(lattice.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto c = lattice.center_of(i);
        v[i] = eval(d, std::span<const double>(c.data(), static_cast<std::size_t>(lattice.dim())));
    }
    return v;
}

GridDensity to_grid(const Density& d, const Box& box, const std::vector<int>& cells_per_axis) {
    if (box.dim() != d.dim()) throw InputError("to_grid: box dimension does not match density");
    for (int c : cells_per_axis)
        if (c < 64) throw InputError("to_grid: need at least 64 cells per axis");
    Lattice lattice(box, cells_per_axis);
    std::vector<double> raw = sample_on(d, lattice);
    return make_grid(std::move(lattice), std::move(raw), open_faces_on(d, box));
}

double entropy(const Density& d, int cells_1d, int cells_2d) {
    if (const auto* g = d.as<Gaussian>()) {
        const double m = g->dim();
        return 0.5 * (m * std::log(2.0 * special::kPi * std::exp(1.0)) + std::log(g->cov().determinant()));
    }
    if (const auto* e = d.as<Exponential>()) return 1.0 - std::log(e->rate);
    if (const auto* g = d.as<GridDensity>()) return entropy(*g);
    const int m = d.dim();
    const std::vector<int> cells(static_cast<std::size_t>(m), m == 1 ? cells_1d : cells_2d);
    return entropy(to_grid(d, support_box(d, 1e-6), cells));
}

double integrate_1d(const Density& d, double lo, double hi) {
    if (d.dim() != 1) throw InputError("integrate_1d: density must be one-dimensional");
    if (!(hi > lo)) return 0.0;
    std::vector<double> cuts{lo, hi};
    breakpoints(d, cuts);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (a < lo || b > hi) continue;
        auto f = [&](double x) { return eval(d, x); };
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
    }
    return total;
}

} // namespace conserv
