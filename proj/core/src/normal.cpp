#include "esarb/normal.hpp"

#include <boost/math/distributions/normal.hpp>
#include <stdexcept>

namespace esarb {

namespace {
const boost::math::normal_distribution<double> standard{0.0, 1.0};
}

double normal_pdf(double x) { return boost::math::pdf(standard, x); }

double normal_cdf(double x) {
    if (x == -INFINITY) return 0.0;
    if (x == INFINITY) return 1.0;
    return boost::math::cdf(standard, x);
}

double normal_mass(double lo, double hi) {
    if (lo > 0.0) return normal_cdf(-lo) - normal_cdf(-hi);
    return normal_cdf(hi) - normal_cdf(lo);
}

double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::invalid_argument("normal quantile needs u in (0, 1)");
    }
    return boost::math::quantile(standard, u);
}

}  // namespace esarb
