#pragma once

#include "conserv/density.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace conserv {

/// Indicator over the cells of one lattice.
struct CellSet {
    Lattice lattice;
    std::vector<std::uint8_t> member;

    [[nodiscard]] std::size_t count() const;
    [[nodiscard]] bool has(std::size_t i) const { return member[i] != 0; }
    bool operator==(const CellSet&) const = default;
};

/// {x : (x - center)^T shape^{-1} (x - center) <= radius2}.
struct Ellipsoid {
    Eigen::VectorXd center;
    Eigen::MatrixXd shape;
    double radius2 = 0.0;
};

using Region = std::variant<Ellipsoid, Interval, Box, CellSet>;

struct MVSet {
    double alpha = 0.0;
    /// Super-level cut: the set is {p >= beta} up to ties at beta.
    double beta = 0.0;
    Region region;
    double achieved_mass = 0.0;
};

struct ModeSet {
    CellSet cells;
    double max_value = 0.0;
};

/// Canonical cell order of a grid: by value descending; within a flat run
/// (values equal to 1e-12 relative) by distance from the mass centroid, then
/// by index. Every MV set is a prefix of this order, so nesting is exact.
class LevelSweep {
public:
    explicit LevelSweep(const GridDensity& g);

    [[nodiscard]] const std::vector<std::size_t>& order() const { return order_; }
    /// Mass of the first k cells.
    [[nodiscard]] double cumulative(std::size_t k) const { return cum_[k]; }
    /// Smallest k whose prefix mass reaches alpha.
    [[nodiscard]] std::size_t prefix_size(double alpha) const;
    [[nodiscard]] CellSet prefix(std::size_t k) const;
    [[nodiscard]] MVSet mv_set(double alpha) const;
    [[nodiscard]] const GridDensity& grid() const { return *g_; }

private:
    const GridDensity* g_;
    std::vector<std::size_t> order_;
    std::vector<double> cum_;
};

/// Largest beta with mass{p >= beta} >= alpha, by bisection on [0, max].
double level_threshold(const GridDensity& g, double alpha);

MVSet mv_set_grid(const GridDensity& g, double alpha);

/// Closed-form MV set for Gaussian, Exponential and Uniform densities.
MVSet mv_set_analytic(const Density& d, double alpha);

/// Cells whose centre lies in the region.
CellSet rasterize(const Region& r, const Lattice& lattice);

double mass_on_set(const GridDensity& g, const CellSet& s);
double mass_on_set(const GridDensity& g, const MVSet& s);

struct Containment {
    bool holds = true;
    /// Inner-density mass of inner cells missing from the outer set.
    double violation_mass = 0.0;
    std::optional<Box> violation_box;
};

Containment contains(const MVSet& outer, const MVSet& inner, const GridDensity& g_outer,
                     const GridDensity& g_inner, double slack = 1e-3);

/// Cells with value >= (1 - mode_tol) * max.
ModeSet mode_set(const GridDensity& g, double mode_tol = 0.01);

/// Edge-connected clusters of a cell set, each as a sorted list of indices.
std::vector<std::vector<std::size_t>> connected_components(const CellSet& s);

/// Grows a cell set by `layers` cells in every axis direction (Chebyshev).
CellSet dilate(const CellSet& s, int layers);

} // namespace conserv
