#pragma once

namespace esarb {

/// Standard normal density.
[[nodiscard]] double normal_pdf(double x);
/// Standard normal distribution function.
[[nodiscard]] double normal_cdf(double x);
/// Phi(hi) - Phi(lo), evaluated on the side that avoids cancellation.
[[nodiscard]] double normal_mass(double lo, double hi);
/// Inverse of normal_cdf on (0, 1).
[[nodiscard]] double normal_quantile(double u);

}  // namespace esarb
