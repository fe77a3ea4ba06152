#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rml/ensemble.hpp"

namespace oracle {

using cplx = std::complex<double>;

inline Eigen::MatrixXd dense_w(const rml::WignerSample& s) {
  const auto n = static_cast<Eigen::Index>(s.n());
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) w(j, k) = s.x(j, k) / std::sqrt(static_cast<double>(n));
  return w;
}

inline std::vector<double> eigen_values(const Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w, Eigen::EigenvaluesOnly);
  const auto& v = es.eigenvalues();
  return {v.data(), v.data() + v.size()};
}

/// (W - zI)^{-1} by Eigen's full-pivot LU of the explicit complex matrix.
inline Eigen::MatrixXcd inverse_shift(const Eigen::MatrixXd& w, cplx z) {
  Eigen::MatrixXcd a = w.cast<cplx>();
  a.diagonal().array() -= z;
  return a.fullPivLu().inverse();
}

/// W with row/column j removed.
inline Eigen::MatrixXd drop(const Eigen::MatrixXd& w, std::vector<Eigen::Index> removed) {
  std::sort(removed.begin(), removed.end());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    if (!std::binary_search(removed.begin(), removed.end(), i)) keep.push_back(i);
  const auto k = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) out(a, b) = w(keep[a], keep[b]);
  return out;
}

/// G(x) by quadrature of the density.
inline double semicircle_cdf_quad(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([](double t) { return std::sqrt(std::max(0.0, 4.0 - t * t)) / (2.0 * M_PI); }, -2.0, x);
}

/// sup_x |F_n(x) - G(x)| over `points` equally spaced x in [-2.5, 2.5],
/// taking both one-sided limits of F_n at each grid point.
inline double kolmogorov_grid(std::vector<double> lambdas, std::size_t points) {
  std::sort(lambdas.begin(), lambdas.end());
  const double n = static_cast<double>(lambdas.size());
  double best = 0.0;
  std::size_t below = 0;  // #lambda < x
  std::size_t at_most = 0;  // #lambda <= x
  for (std::size_t i = 0; i < points; ++i) {
    const double x = -2.5 + 5.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    while (below < lambdas.size() && lambdas[below] < x) ++below;
    while (at_most < lambdas.size() && lambdas[at_most] <= x) ++at_most;
    double g;
    if (x <= -2.0) g = 0.0;
    else if (x >= 2.0) g = 1.0;
    else g = 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * M_PI) + std::asin(0.5 * x) / M_PI;
    best = std::max({best, std::fabs(at_most / n - g), std::fabs(below / n - g)});
  }
  return best;
}

}  // namespace oracle
