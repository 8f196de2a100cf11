#pragma once

// Closed forms used as independent references. Nothing here calls into the
// library: normal quantities come straight from std::erfc.

#include <cmath>
#include <vector>

namespace oracle {

inline constexpr double pi = 3.14159265358979323846;

inline double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * pi); }
inline double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Bisection on Phi; plenty for test tolerances.
inline double Phi_inv(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (Phi(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double normal_pdf(double x, double mean, double var) { return phi((x - mean) / std::sqrt(var)) / std::sqrt(var); }

inline double gaussian_entropy_1d(double var) { return 0.5 * std::log(2.0 * pi * std::exp(1.0) * var); }

// KL(N(m1,v1) || N(m2,v2)).
inline double gaussian_kl_1d(double m1, double v1, double m2, double v2) {
    return 0.5 * (v1 / v2 + (m1 - m2) * (m1 - m2) / v2 - 1.0 + std::log(v2 / v1));
}

// Diagonal 2-D versions.
inline double gaussian_entropy_diag(const std::vector<double>& var) {
    double h = 0.0;
    for (double v : var) h += gaussian_entropy_1d(v);
    return h;
}

inline double gaussian_kl_diag(const std::vector<double>& m1, const std::vector<double>& v1,
                               const std::vector<double>& m2, const std::vector<double>& v2) {
    double k = 0.0;
    for (std::size_t i = 0; i < m1.size(); ++i) k += gaussian_kl_1d(m1[i], v1[i], m2[i], v2[i]);
    return k;
}

// Crossing points of two 1-D normal densities (roots of a quadratic).
inline std::vector<double> normal_crossings(double m1, double v1, double m2, double v2) {
    // log N1 - log N2 = a x^2 + b x + c
    const double a = -0.5 / v1 + 0.5 / v2;
    const double b = m1 / v1 - m2 / v2;
    const double c = -0.5 * m1 * m1 / v1 + 0.5 * m2 * m2 / v2 - 0.5 * std::log(v1 / v2);
    if (std::abs(a) < 1e-15) return {-c / b};
    const double d = b * b - 4 * a * c;
    if (d < 0) return {};
    const double r1 = (-b - std::sqrt(d)) / (2 * a), r2 = (-b + std::sqrt(d)) / (2 * a);
    return r1 < r2 ? std::vector<double>{r1, r2} : std::vector<double>{r2, r1};
}

} // namespace oracle
