#pragma once

// Scalar distribution functions shared by the density families.

namespace conserv::special {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double z);
double normal_cdf(double z);
/// Inverse of the standard normal CDF, p in (0,1).
double normal_quantile(double p);

double chi_squared_quantile(double dof, double p);

double student_t_pdf(double dof, double x);
double student_t_quantile(double dof, double p);

} // namespace conserv::special
