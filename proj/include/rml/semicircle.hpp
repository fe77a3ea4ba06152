#pragma once

// Closed-form semicircle law: density, distribution function, quantiles and
// Stieltjes transform.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "rml/error.hpp"

namespace rml {

using cplx = std::complex<double>;

inline double semicircle_pdf(double x) noexcept {
  if (x <= -2.0 || x >= 2.0) return 0.0;
  return std::sqrt(4.0 - x * x) / (2.0 * std::numbers::pi);
}

/// G(x) = 1/2 + x sqrt(4 - x^2) / (4 pi) + arcsin(x / 2) / pi on [-2, 2].
inline double semicircle_cdf(double x) noexcept {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * std::numbers::pi) + std::asin(0.5 * x) / std::numbers::pi;
}

/// Solves G(x) = q by safeguarded Newton on [-2, 2]; |G(x) - q| <= 1e-12.
inline double semicircle_quantile(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw UsageError("semicircle_quantile: q must lie in (0, 1]");
  if (q == 1.0) return 2.0;
  if (q == 0.5) return 0.0;
  double lo = -2.0, hi = 2.0;
  double x = 4.0 * (q - 0.5);  // crude start, clipped below
  x = std::clamp(x, -1.99, 1.99);
  for (int it = 0; it < 200; ++it) {
    const double g = semicircle_cdf(x) - q;
    if (std::fabs(g) <= 1e-14) return x;
    if (g > 0.0)
      hi = x;
    else
      lo = x;
    const double d = semicircle_pdf(x);
    double next = d > 0.0 ? x - g / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) return x;
    x = next;
  }
  return x;
}

/// Stieltjes transform of the semicircle law: the root of s^2 + z s + 1 = 0
/// with Im s > 0. Evaluated as -2 / (z + sqrt(z - 2) sqrt(z + 2)), which is
/// the same branch as (-z + sqrt(z - 2) sqrt(z + 2)) / 2 without cancellation.
inline cplx s_transform(cplx z) {
  if (!(z.imag() > 0.0)) throw UsageError("s_transform: Im z must be positive");
  const cplx root = std::sqrt(z - 2.0) * std::sqrt(z + 2.0);
  return -2.0 / (z + root);
}

/// The constant a with (1/pi) int_{|u|<=a} du / (1 + u^2) = 3/4, i.e. tan(3 pi / 8).
inline double compute_a_constant() noexcept { return std::tan(0.375 * std::numbers::pi); }

}  // namespace rml
