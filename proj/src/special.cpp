#include "conserv/special.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>

namespace conserv::special {

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

double chi_squared_quantile(double dof, double p) {
    return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

double student_t_pdf(double dof, double x) {
    return boost::math::pdf(boost::math::students_t_distribution<double>(dof), x);
}

double student_t_quantile(double dof, double p) {
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

} // namespace conserv::special
