#pragma once

#include "conserv/grid.hpp"

#include <Eigen/Dense>

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace conserv {

/// Multivariate normal with cached precision and log-normaliser.
class Gaussian {
public:
    /// Throws InputError unless cov is symmetric (1e-12) and positive definite.
    Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    [[nodiscard]] int dim() const { return static_cast<int>(mean_.size()); }
    [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }
    [[nodiscard]] const Eigen::MatrixXd& cov() const { return cov_; }
    [[nodiscard]] const Eigen::MatrixXd& precision() const { return precision_; }

    [[nodiscard]] double log_pdf(std::span<const double> x) const;
    [[nodiscard]] double peak() const { return std::exp(log_norm_); }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd precision_;
    double log_norm_ = 0.0;
};

struct GaussianMixture {
    std::vector<double> weights;
    std::vector<Gaussian> components;
};

struct Exponential {
    double rate = 1.0;
};

struct Uniform {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// 2 phi(x) Phi(shape x).
struct SkewNormal {
    double shape = 0.0;
};

/// Standard Student-t with `dof` degrees of freedom.
struct StudentT {
    double dof = 1.0;
};

class Density;

/// One-dimensional interval; either end may be infinite.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

struct Piece {
    Interval region;
    double scale = 1.0;
    std::shared_ptr<const Density> base;
};

/// 1-D density defined region by region: the first piece whose closed
/// interval contains x supplies scale * base(x); zero if none does.
struct Piecewise {
    std::vector<Piece> pieces;
};

/// Tagged analytic family or grid-backed density. Immutable once built.
class Density {
public:
    using Variant = std::variant<Gaussian, GaussianMixture, Exponential, Uniform, SkewNormal,
                                 StudentT, Piecewise, GridDensity>;

    // Validating constructors.
    explicit Density(Gaussian g);
    explicit Density(GaussianMixture m);
    explicit Density(Exponential e);
    explicit Density(Uniform u);
    explicit Density(SkewNormal s);
    explicit Density(StudentT t);
    explicit Density(Piecewise p);
    explicit Density(GridDensity g);

    [[nodiscard]] const Variant& variant() const { return v_; }
    [[nodiscard]] int dim() const;
    [[nodiscard]] std::string family() const;

    template <class T>
    [[nodiscard]] const T* as() const {
        return std::get_if<T>(&v_);
    }

private:
    Variant v_;
};

// Convenience builders.
Density gaussian_1d(double mean, double variance);
Density gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);
Density gaussian_diag(std::vector<double> mean, std::vector<double> variances);
Density mixture_1d(std::vector<double> weights, std::vector<double> means,
                   std::vector<double> variances);
Density exponential(double rate);
Density uniform_1d(double lo, double hi);
Density skew_normal(double shape);
Density student_t(double dof);

/// Two halves k1 N(x;0,1) on x<=0 and k2 N(x;0,s) on x>=0, continuous at 0
/// with unit mass. `right_is_variance` selects whether s = right_param is a
/// variance (default) or a standard deviation.
Density two_sided_gaussian(double right_param = 2.0, bool right_is_variance = true);

/// e^{-rate x} on [0,1] and k e^{-rate x} on (1,inf), k fixed by unit mass.
Density scaled_tail_exponential(double rate);

/// N(0,4) with [1,2] lowered to 0.05 and the removed mass spread flat over [10,15].
Density notch_density();

/// Example-5 style 2-D mixture: 1/3 N((2,4),[[6,2],[2,3]]) + 2/3 N((1,-3),[[5,-1],[-1,4]]).
Density example5_mixture();

/// p(x); zero outside the support. Throws InputError on dimension mismatch.
double eval(const Density& d, std::span<const double> x);
double eval(const Density& d, double x);

/// Box carrying at least 1 - mass_tol of the mass; exact for bounded families.
Box support_box(const Density& d, double mass_tol = 1e-6);

/// Faces of support_box(d) that truncate the support.
OpenFaces open_faces(const Density& d);
/// Faces of `box` across which d still has support.
OpenFaces open_faces_on(const Density& d, const Box& box);

/// Samples d at cell centres and renormalises. Each axis needs >= 64 cells.
GridDensity to_grid(const Density& d, const Box& box, const std::vector<int>& cells_per_axis);
/// Same, with no minimum cell count (for likelihood evaluation on coarse lattices).
std::vector<double> sample_on(const Density& d, const Lattice& lattice);

/// Closed form for Gaussian and Exponential, grid quadrature otherwise.
double entropy(const Density& d, int cells_1d = 4096, int cells_2d = 512);

/// Mass of a 1-D density over [lo, hi] by adaptive Gauss-Kronrod quadrature.
double integrate_1d(const Density& d, double lo, double hi);

} // namespace conserv
