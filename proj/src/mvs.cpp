#include "conserv/mvs.hpp"

#include "conserv/special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace conserv {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
}

CellSet empty_set(const Lattice& lattice) { return CellSet{lattice, std::vector<std::uint8_t>(lattice.size(), 0)}; }

std::array<double, 2> centroid(const GridDensity& g) {
    std::array<double, 2> c{0.0, 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto x = g.lattice.center_of(i);
        const double m = g.cell_mass(i);
        c[0] += m * x[0];
        c[1] += m * x[1];
    }
    return c;
}

} // namespace

std::size_t CellSet::count() const {
    return static_cast<std::size_t>(std::count(member.begin(), member.end(), std::uint8_t{1}));
}

LevelSweep::LevelSweep(const GridDensity& g) : g_(&g), order_(g.size()) {
    const auto& v = g.values;
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });

    // Reorder flat runs centroid-outward. Distances are quantised so that
    // mirror-image cells tie exactly and fall back to index order.
    const auto c = centroid(g);
    double h = g.lattice.spacing(0);
    if (g.dim() == 2) h = std::min(h, g.lattice.spacing(1));
    const double quantum = 1e-6 * h;
    auto dist_key = [&](std::size_t i) {
        const auto x = g.lattice.center_of(i);
        const double d = std::hypot(x[0] - c[0], g.dim() == 2 ? x[1] - c[1] : 0.0);
        return std::llround(d / quantum);
    };
    std::size_t start = 0;
    while (start < order_.size()) {
        const double top = v[order_[start]];
        std::size_t end = start + 1;
        while (end < order_.size() && top - v[order_[end]] <= 1e-12 * top) ++end;
        if (end - start > 1) {
            std::vector<std::pair<long long, std::size_t>> keyed;
            keyed.reserve(end - start);
            for (std::size_t k = start; k < end; ++k) keyed.emplace_back(dist_key(order_[k]), order_[k]);
            std::sort(keyed.begin(), keyed.end());
            for (std::size_t k = start; k < end; ++k) order_[k] = keyed[k - start].second;
        }
        start = end;
    }

    cum_.assign(order_.size() + 1, 0.0);
    for (std::size_t k = 0; k < order_.size(); ++k) cum_[k + 1] = cum_[k] + g.cell_mass(order_[k]);
}

std::size_t LevelSweep::prefix_size(double alpha) const {
    // Guard against the total falling a rounding error short of 1.
    const double target = std::min(alpha, cum_.back());
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), target);
    return static_cast<std::size_t>(it - cum_.begin());
}

CellSet LevelSweep::prefix(std::size_t k) const {
    CellSet s = empty_set(g_->lattice);
    for (std::size_t j = 0; j < k; ++j) s.member[order_[j]] = 1;
    return s;
}

MVSet LevelSweep::mv_set(double alpha) const {
    check_alpha(alpha);
    const std::size_t k = std::max<std::size_t>(prefix_size(alpha), 1);
    MVSet s;
    s.alpha = alpha;
    s.beta = g_->values[order_[k - 1]];
    s.region = prefix(k);
    s.achieved_mass = cum_[k];
    return s;
}

double level_threshold(const GridDensity& g, double alpha) {
    check_alpha(alpha);
    const double top = g.max_value();
    auto mass_above = [&](double beta) {
        double s = 0.0;
        for (double v : g.values)
            if (v >= beta) s += v;
        return s * g.lattice.cell_volume();
    };
    if (mass_above(top) >= alpha) return top;
    double lo = 0.0;
    double hi = top;
    for (int it = 0; it < 60 && hi - lo >= 1e-12 * top; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mass_above(mid) >= alpha)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

MVSet mv_set_grid(const GridDensity& g, double alpha) { return LevelSweep(g).mv_set(alpha); }

MVSet mv_set_analytic(const Density& d, double alpha) {
    check_alpha(alpha);
    MVSet s;
    s.alpha = alpha;
    s.achieved_mass = alpha;
    if (const auto* g = d.as<Gaussian>()) {
        const double r2 = special::chi_squared_quantile(g->dim(), alpha);
        s.region = Ellipsoid{g->mean(), g->cov(), r2};
        s.beta = g->peak() * std::exp(-0.5 * r2);
        return s;
    }
    if (const auto* e = d.as<Exponential>()) {
        s.region = Interval{0.0, -std::log1p(-alpha) / e->rate};
        s.beta = e->rate * (1.0 - alpha);
        return s;
    }
    if (const auto* u = d.as<Uniform>()) {
        const double f = std::pow(alpha, 1.0 / static_cast<double>(u->lower.size()));
        Box b;
        double vol = 1.0;
        for (std::size_t a = 0; a < u->lower.size(); ++a) {
            const double mid = 0.5 * (u->lower[a] + u->upper[a]);
            const double half = 0.5 * f * (u->upper[a] - u->lower[a]);
            b.lower.push_back(mid - half);
            b.upper.push_back(mid + half);
            vol *= u->upper[a] - u->lower[a];
        }
        s.region = b;
        s.beta = 1.0 / vol;
        return s;
    }
    throw InputError("mv_set_analytic: no closed form for family '" + d.family() + "'; grid it first");
}

CellSet rasterize(const Region& r, const Lattice& lattice) {
    if (const auto* cs = std::get_if<CellSet>(&r)) {
        if (!(cs->lattice == lattice)) throw InputError("rasterize: cell set is on a different lattice");
        return *cs;
    }
    CellSet s = empty_set(lattice);
    const auto m = static_cast<std::size_t>(lattice.dim());
    std::visit(
        [&](const auto& reg) {
            using T = std::decay_t<decltype(reg)>;
            if constexpr (std::is_same_v<T, Ellipsoid>) {
                if (static_cast<std::size_t>(reg.center.size()) != m)
                    throw InputError("rasterize: ellipsoid dimension mismatch");
                const Eigen::MatrixXd prec = reg.shape.inverse();
                for (std::size_t i = 0; i < s.member.size(); ++i) {
                    const auto x = lattice.center_of(i);
                    Eigen::VectorXd d(static_cast<Eigen::Index>(m));
                    for (std::size_t a = 0; a < m; ++a) d(static_cast<Eigen::Index>(a)) = x[a] - reg.center(static_cast<Eigen::Index>(a));
                    s.member[i] = d.dot(prec * d) <= reg.radius2;
                }
            } else if constexpr (std::is_same_v<T, Interval>) {
                if (m != 1) throw InputError("rasterize: interval on a 2-D lattice");
                for (std::size_t i = 0; i < s.member.size(); ++i) {
                    const double x = lattice.center_of(i)[0];
                    s.member[i] = x >= reg.lo && x <= reg.hi;
                }
            } else if constexpr (std::is_same_v<T, Box>) {
                if (static_cast<std::size_t>(reg.dim()) != m) throw InputError("rasterize: box dimension mismatch");
                for (std::size_t i = 0; i < s.member.size(); ++i) {
                    const auto x = lattice.center_of(i);
                    s.member[i] = reg.contains(std::span<const double>(x.data(), m));
                }
            }
        },
        r);
    return s;
}

double mass_on_set(const GridDensity& g, const CellSet& s) {
    if (!(s.lattice == g.lattice)) throw InputError("mass_on_set: lattice mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (s.member[i]) sum += g.values[i];
    return sum * g.lattice.cell_volume();
}

double mass_on_set(const GridDensity& g, const MVSet& s) { return mass_on_set(g, rasterize(s.region, g.lattice)); }

Containment contains(const MVSet& outer, const MVSet& inner, const GridDensity& g_outer,
                     const GridDensity& g_inner, double slack) {
    require_same_lattice(g_outer, g_inner, "contains");
    const Lattice& lat = g_inner.lattice;
    const CellSet out = rasterize(outer.region, lat);
    const CellSet in = rasterize(inner.region, lat);
    Containment c;
    std::array<int, 2> lo{lat.cells(0), lat.dim() == 2 ? lat.cells(1) : 1};
    std::array<int, 2> hi{-1, -1};
    for (std::size_t i = 0; i < in.member.size(); ++i) {
        if (!in.member[i] || out.member[i]) continue;
        c.violation_mass += g_inner.cell_mass(i);
        const auto ij = lat.unravel(i);
        for (std::size_t a = 0; a < 2; ++a) {
            lo[a] = std::min(lo[a], ij[a]);
            hi[a] = std::max(hi[a], ij[a]);
        }
    }
    if (hi[0] >= 0) {
        Box b;
        for (int a = 0; a < lat.dim(); ++a) {
            const auto ua = static_cast<std::size_t>(a);
            b.lower.push_back(lat.box().lower[ua] + lo[ua] * lat.spacing(a));
            b.upper.push_back(lat.box().lower[ua] + (hi[ua] + 1) * lat.spacing(a));
        }
        c.violation_box = b;
    }
    c.holds = c.violation_mass <= slack;
    return c;
}

ModeSet mode_set(const GridDensity& g, double mode_tol) {
    if (!(mode_tol > 0.0 && mode_tol <= 0.05)) throw InputError("mode_set: mode_tol must lie in (0, 0.05]");
    ModeSet m{empty_set(g.lattice), g.max_value()};
    const double cut = (1.0 - mode_tol) * m.max_value;
    for (std::size_t i = 0; i < g.size(); ++i) m.cells.member[i] = g.values[i] >= cut;
    return m;
}

std::vector<std::vector<std::size_t>> connected_components(const CellSet& s) {
    const Lattice& lat = s.lattice;
    const int nx = lat.cells(0);
    const int ny = lat.dim() == 2 ? lat.cells(1) : 1;
    std::vector<int> label(s.member.size(), -1);
    std::vector<std::vector<std::size_t>> comps;
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < s.member.size(); ++seed) {
        if (!s.member[seed] || label[seed] >= 0) continue;
        const int id = static_cast<int>(comps.size());
        comps.emplace_back();
        stack.push_back(seed);
        label[seed] = id;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            comps.back().push_back(i);
            const auto [ix, iy] = lat.unravel(i);
            const int nbr[4][2] = {{ix - 1, iy}, {ix + 1, iy}, {ix, iy - 1}, {ix, iy + 1}};
            for (const auto& n : nbr) {
                if (n[0] < 0 || n[0] >= nx || n[1] < 0 || n[1] >= ny) continue;
                const std::size_t j = lat.index(n[0], n[1]);
                if (s.member[j] && label[j] < 0) {
                    label[j] = id;
                    stack.push_back(j);
                }
            }
        }
        std::sort(comps.back().begin(), comps.back().end());
    }
    return comps;
}

CellSet dilate(const CellSet& s, int layers) {
    const Lattice& lat = s.lattice;
    const int nx = lat.cells(0);
    const int ny = lat.dim() == 2 ? lat.cells(1) : 1;
    const int ly = lat.dim() == 2 ? layers : 0;
    CellSet out = empty_set(lat);
    for (std::size_t i = 0; i < s.member.size(); ++i) {
        if (!s.member[i]) continue;
        const auto [ix, iy] = lat.unravel(i);
        for (int dx = -layers; dx <= layers; ++dx)
            for (int dy = -ly; dy <= ly; ++dy) {
                const int x = ix + dx;
                const int y = iy + dy;
                if (x >= 0 && x < nx && y >= 0 && y < ny) out.member[lat.index(x, y)] = 1;
            }
    }
    return out;
}

} // namespace conserv
