#include "conserv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace conserv {

double Box::volume() const {
    double v = 1.0;
    for (std::size_t a = 0; a < lower.size(); ++a) v *= upper[a] - lower[a];
    return v;
}

bool Box::contains(std::span<const double> x) const {
    if (x.size() != lower.size()) return false;
    for (std::size_t a = 0; a < lower.size(); ++a)
        if (x[a] < lower[a] || x[a] > upper[a]) return false;
    return true;
}

Box box_union(const Box& a, const Box& b) {
    if (a.dim() != b.dim()) throw InputError("box_union: dimension mismatch");
    Box out = a;
    for (std::size_t i = 0; i < a.lower.size(); ++i) {
        out.lower[i] = std::min(a.lower[i], b.lower[i]);
        out.upper[i] = std::max(a.upper[i], b.upper[i]);
    }
    return out;
}

Box pad_box(const Box& b, double fraction) {
    Box out = b;
    for (std::size_t i = 0; i < b.lower.size(); ++i) {
        const double w = b.upper[i] - b.lower[i];
        out.lower[i] -= fraction * w;
        out.upper[i] += fraction * w;
    }
    return out;
}

OpenFaces faces_and(const OpenFaces& a, const OpenFaces& b) {
    OpenFaces r{};
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] && b[i];
    return r;
}

OpenFaces faces_or(const OpenFaces& a, const OpenFaces& b) {
    OpenFaces r{};
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] || b[i];
    return r;
}

Lattice::Lattice(Box box, std::vector<int> cells) : box_(std::move(box)), cells_(std::move(cells)) {
    const int m = box_.dim();
    if (m < 1 || m > 2) throw InputError("lattice dimension must be 1 or 2");
    if (box_.upper.size() != box_.lower.size() || static_cast<int>(cells_.size()) != m)
        throw InputError("lattice: box and cell counts disagree in dimension");
    size_ = 1;
    cell_volume_ = 1.0;
    for (int a = 0; a < m; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        if (!(box_.upper[ua] > box_.lower[ua]) || !std::isfinite(box_.upper[ua] - box_.lower[ua]))
            throw InputError("lattice: box must have positive finite extent on every axis");
        if (cells_[ua] < 1) throw InputError("lattice: cell counts must be positive");
        spacing_.push_back((box_.upper[ua] - box_.lower[ua]) / cells_[ua]);
        size_ *= static_cast<std::size_t>(cells_[ua]);
        cell_volume_ *= spacing_.back();
    }
}

double Lattice::center(int axis, int i) const {
    const auto a = static_cast<std::size_t>(axis);
    return box_.lower[a] + (i + 0.5) * spacing_[a];
}

std::array<int, 2> Lattice::unravel(std::size_t idx) const {
    if (dim() == 1) return {static_cast<int>(idx), 0};
    const auto ny = static_cast<std::size_t>(cells_[1]);
    return {static_cast<int>(idx / ny), static_cast<int>(idx % ny)};
}

std::size_t Lattice::index(int ix, int iy) const {
    if (dim() == 1) return static_cast<std::size_t>(ix);
    return static_cast<std::size_t>(ix) * static_cast<std::size_t>(cells_[1]) +
           static_cast<std::size_t>(iy);
}

std::array<double, 2> Lattice::center_of(std::size_t idx) const {
    const auto [ix, iy] = unravel(idx);
    return {center(0, ix), dim() == 2 ? center(1, iy) : 0.0};
}

std::optional<std::size_t> Lattice::locate(std::span<const double> x) const {
    if (!box_.contains(x)) return std::nullopt;
    std::array<int, 2> ij{0, 0};
    for (int a = 0; a < dim(); ++a) {
        const auto ua = static_cast<std::size_t>(a);
        int i = static_cast<int>(std::floor((x[ua] - box_.lower[ua]) / spacing_[ua]));
        ij[ua] = std::clamp(i, 0, cells_[ua] - 1);
    }
    return index(ij[0], ij[1]);
}

bool Lattice::on_open_face(std::size_t idx, const OpenFaces& open) const {
    const auto ij = unravel(idx);
    for (int a = 0; a < dim(); ++a) {
        const auto ua = static_cast<std::size_t>(a);
        if (open[2 * ua] && ij[ua] == 0) return true;
        if (open[2 * ua + 1] && ij[ua] == cells_[ua] - 1) return true;
    }
    return false;
}

double GridDensity::total_mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * lattice.cell_volume();
}

double GridDensity::max_value() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

double GridDensity::eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim()) throw InputError("grid eval: dimension mismatch");
    const auto idx = lattice.locate(x);
    return idx ? values[*idx] : 0.0;
}

GridDensity make_grid(Lattice lattice, std::vector<double> raw, OpenFaces open) {
    if (raw.size() != lattice.size()) throw InputError("grid: value count does not match lattice");
    double sum = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i]) || raw[i] < 0.0) {
            const auto c = lattice.center_of(i);
            std::ostringstream os;
            os << "grid: invalid density value " << raw[i] << " at x=" << c[0];
            if (lattice.dim() == 2) os << ", y=" << c[1];
            throw InputError(os.str());
        }
        sum += raw[i];
    }
    const double mass = sum * lattice.cell_volume();
    if (!(mass > 0.0)) throw InputError("grid: zero total mass on lattice");
    const double factor = 1.0 / mass;
    for (double& v : raw) v *= factor;
    GridDensity g;
    g.lattice = std::move(lattice);
    g.values = std::move(raw);
    g.renormalization = factor;
    g.open = open;
    if (g.dim() == 1) g.open[2] = g.open[3] = false;
    return g;
}

void require_same_lattice(const GridDensity& a, const GridDensity& b, const char* op) {
    if (!(a.lattice == b.lattice)) throw InputError(std::string(op) + ": lattice mismatch");
}

double entropy(const GridDensity& g) {
    double h = 0.0;
    for (double v : g.values)
        if (v > 0.0) h -= v * std::log(v);
    return h * g.lattice.cell_volume();
}

KlResult kl_divergence(const GridDensity& p, const GridDensity& q) {
    require_same_lattice(p, q, "kl_divergence");
    constexpr double kNegligible = 1e-300;
    KlResult r;
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pv = p.values[i];
        if (pv < kNegligible) continue;
        const double qv = q.values[i];
        if (qv <= 0.0) {
            r.infinite = true;
            r.value = std::numeric_limits<double>::infinity();
            return r;
        }
        s += pv * std::log(pv / qv);
    }
    r.value = s * p.lattice.cell_volume();
    return r;
}

} // namespace conserv
