#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace conserv {

/// Thrown for inputs that violate an operation's preconditions.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Axis-aligned box in one or two dimensions.
struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }
    [[nodiscard]] double volume() const;
    [[nodiscard]] bool contains(std::span<const double> x) const;

    bool operator==(const Box&) const = default;
};

/// Smallest box covering both inputs. Dimensions must agree.
Box box_union(const Box& a, const Box& b);
/// Grows every side by `fraction` of the axis width.
Box pad_box(const Box& b, double fraction);

/// Which faces of a lattice box cut through a density's support (index
/// 2*axis for the lower face, 2*axis+1 for the upper face). A closed face is
/// a genuine support edge.
using OpenFaces = std::array<bool, 4>;

inline constexpr OpenFaces kAllOpen{true, true, true, true};
inline constexpr OpenFaces kAllClosed{false, false, false, false};

OpenFaces faces_and(const OpenFaces& a, const OpenFaces& b);
OpenFaces faces_or(const OpenFaces& a, const OpenFaces& b);

/// Regular cell-centred lattice over a box. Cell (ix, iy) has flat index
/// ix * ny + iy (row-major over shape [nx, ny]).
class Lattice {
public:
    Lattice() = default;
    Lattice(Box box, std::vector<int> cells);

    [[nodiscard]] const Box& box() const { return box_; }
    [[nodiscard]] int dim() const { return box_.dim(); }
    [[nodiscard]] const std::vector<int>& shape() const { return cells_; }
    [[nodiscard]] int cells(int axis) const { return cells_[static_cast<std::size_t>(axis)]; }
    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] double spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
    [[nodiscard]] double cell_volume() const { return cell_volume_; }

    [[nodiscard]] double center(int axis, int i) const;
    [[nodiscard]] std::array<double, 2> center_of(std::size_t idx) const;
    [[nodiscard]] std::array<int, 2> unravel(std::size_t idx) const;
    [[nodiscard]] std::size_t index(int ix, int iy = 0) const;
    /// Cell containing x (upper box faces belong to the last cell).
    [[nodiscard]] std::optional<std::size_t> locate(std::span<const double> x) const;
    /// True for cells on a face flagged open.
    [[nodiscard]] bool on_open_face(std::size_t idx, const OpenFaces& open) const;

    bool operator==(const Lattice& o) const { return box_ == o.box_ && cells_ == o.cells_; }

private:
    Box box_;
    std::vector<int> cells_;
    std::vector<double> spacing_;
    std::size_t size_ = 0;
    double cell_volume_ = 0.0;
};

/// Piecewise-constant density on a lattice; values are density heights at
/// cell centres and sum(values) * cell_volume == 1.
struct GridDensity {
    Lattice lattice;
    std::vector<double> values;
    /// Factor applied to the raw samples to reach unit mass.
    double renormalization = 1.0;
    OpenFaces open = kAllOpen;

    [[nodiscard]] int dim() const { return lattice.dim(); }
    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] double cell_mass(std::size_t i) const { return values[i] * lattice.cell_volume(); }
    [[nodiscard]] double total_mass() const;
    [[nodiscard]] double max_value() const;
    [[nodiscard]] double max_cell_mass() const { return max_value() * lattice.cell_volume(); }
    /// Nearest-cell value; zero outside the box.
    [[nodiscard]] double eval(std::span<const double> x) const;
};

/// Rescales raw non-negative samples to unit mass. Throws InputError when the
/// total mass is zero or any sample is negative or non-finite.
GridDensity make_grid(Lattice lattice, std::vector<double> raw, OpenFaces open);

void require_same_lattice(const GridDensity& a, const GridDensity& b, const char* op);

/// -sum p log p * dv, with 0 log 0 = 0.
double entropy(const GridDensity& g);

struct KlResult {
    double value = 0.0;
    /// p has mass where q vanishes.
    bool infinite = false;
};

KlResult kl_divergence(const GridDensity& p, const GridDensity& q);

} // namespace conserv
