#pragma once

#include <cmath>
#include <span>

namespace esarb::detail {

/// Compensated summation; used wherever weights must total exactly one.
inline double neumaier_sum(std::span<const double> xs) {
    double sum = 0.0;
    double comp = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

}  // namespace esarb::detail
