#pragma once

// Spectra of Wigner samples, the empirical spectral distribution, the exact
// Kolmogorov distance to the semicircle law, semicircle quantiles and the
// bulk rigidity statistic.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "rml/eigensolver.hpp"
#include "rml/ensemble.hpp"
#include "rml/error.hpp"
#include "rml/semicircle.hpp"

namespace rml {

struct Spectrum {
  std::size_t n = 0;
  std::vector<double> lambdas;  // ascending
  double max_residual = 0.0;    // max_j |W v_j - lambda_j v_j|_2, validation mode only
  double trace_error = 0.0;     // |sum lambda - Tr W|

  /// Synthetic spectrum from arbitrary values (sorted on entry).
  static Spectrum from_values(std::vector<double> values) {
    if (values.empty()) throw UsageError("Spectrum: no eigenvalues");
    std::sort(values.begin(), values.end());
    Spectrum s;
    s.n = values.size();
    s.lambdas = std::move(values);
    return s;
  }
};

/// Eigenvalues of W = X / sqrt(n). With `validate` the eigenvectors are also
/// formed and the residual max_j |W v_j - lambda_j v_j| is recorded and
/// checked against 1e-9 |W|_F.
inline Spectrum eigenvalues(const WignerSample& sample, bool validate = false) {
  Spectrum s;
  s.n = sample.n();
  if (!validate) {
    s.lambdas = symmetric_eigenvalues(sample.scaled_dense());
  } else {
    const DenseMatrix w = sample.scaled_dense();
    auto sys = symmetric_eigensystem(w);
    const std::size_t n = w.size();
    double frob = 0.0;
    for (double v : w.data()) frob += v * v;
    frob = std::sqrt(frob);
    std::vector<double> r(n);
    for (std::size_t q = 0; q < n; ++q) {
      std::fill(r.begin(), r.end(), 0.0);
      const double* vq = sys.vectors.column(q);
      for (std::size_t c = 0; c < n; ++c) {
        const double* wc = w.column(c);
        for (std::size_t i = 0; i < n; ++i) r[i] += wc[i] * vq[c];
      }
      double norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = r[i] - sys.values[q] * vq[i];
        norm += d * d;
      }
      s.max_residual = std::max(s.max_residual, std::sqrt(norm));
    }
    if (s.max_residual > 1e-9 * std::max(frob, 1.0))
      throw NumericalError("eigenvalues: residual check failed");
    s.lambdas = std::move(sys.values);
  }
  double sum = 0.0;
  for (double l : s.lambdas) sum += l;
  s.trace_error = std::fabs(sum - sample.trace_w());
  return s;
}

/// F_n(x) = #{j : lambda_j <= x} / n.
inline double esd_cdf(const Spectrum& s, double x) {
  const auto it = std::upper_bound(s.lambdas.begin(), s.lambdas.end(), x);
  return static_cast<double>(it - s.lambdas.begin()) / static_cast<double>(s.n);
}

/// sup_x |F_n(x) - G(x)|, attained at a jump: both one-sided limits of F_n at
/// every eigenvalue are compared with G there.
inline double kolmogorov_distance(const Spectrum& s) {
  const double n = static_cast<double>(s.n);
  double best = 0.0;
  for (std::size_t j = 0; j < s.n; ++j) {
    const double g = semicircle_cdf(s.lambdas[j]);
    best = std::max({best, std::fabs((j + 1) / n - g), std::fabs(j / n - g)});
  }
  return best;
}

enum class QuantileConvention {
  upper,     // G(gamma_j) = j / n
  midpoint,  // G(gamma_j) = (2j - 1) / (2n)
};

struct SemicircleQuantiles {
  std::size_t n = 0;
  QuantileConvention convention = QuantileConvention::upper;
  std::vector<double> gammas;  // gammas[j-1] = gamma_{nj}
};

inline SemicircleQuantiles semicircle_quantiles(std::size_t n,
                                                QuantileConvention conv = QuantileConvention::upper) {
  if (n == 0) throw UsageError("semicircle_quantiles: n must be positive");
  SemicircleQuantiles q{n, conv, std::vector<double>(n)};
  const double nd = static_cast<double>(n);
  for (std::size_t j = 1; j <= n; ++j) {
    // level = num / den; the lower half is mirrored from the upper half so the
    // table is exactly antisymmetric.
    const double den = conv == QuantileConvention::upper ? nd : 2.0 * nd;
    const double num = conv == QuantileConvention::upper ? static_cast<double>(j) : 2.0 * j - 1.0;
    if (2.0 * num < den)
      q.gammas[j - 1] = -semicircle_quantile((den - num) / den);
    else
      q.gammas[j - 1] = semicircle_quantile(num / den);
  }
  return q;
}

/// Quantile table cached as <dir>/quantiles_n<n>_<convention>.csv.
inline SemicircleQuantiles cached_quantiles(const std::filesystem::path& dir, std::size_t n,
                                            QuantileConvention conv = QuantileConvention::upper) {
  const std::string tag = conv == QuantileConvention::upper ? "upper" : "midpoint";
  const auto path = dir / ("quantiles_n" + std::to_string(n) + "_" + tag + ".csv");
  if (std::ifstream in(path); in) {
    SemicircleQuantiles q{n, conv, {}};
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      if (comma == std::string::npos) break;
      q.gammas.push_back(std::stod(line.substr(comma + 1)));
    }
    if (q.gammas.size() == n) return q;
  }
  auto q = semicircle_quantiles(n, conv);
  std::filesystem::create_directories(dir);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out.precision(17);
    out << "j,gamma\n";
    for (std::size_t j = 0; j < n; ++j) out << j + 1 << ',' << q.gammas[j] << '\n';
  }
  std::filesystem::rename(tmp, path);
  return q;
}

struct RigidityReport {
  std::size_t n = 0;
  std::size_t window_lo = 0;  // 1-based inclusive
  std::size_t window_hi = 0;
  bool empty_window = true;
  std::vector<std::size_t> violations;  // 1-based indices j
  std::vector<double> rho;              // rho_j for j in [window_lo, window_hi]
  double max_rho = 0.0;
};

/// Bulk rigidity check on j in [c1 log^5 n, n - c1 log^5 n]: flags
/// |lambda_j - gamma_j| > C log^5 n min(j, n-j+1)^{-1/3} n^{-2/3} and reports
/// rho_j = |lambda_j - gamma_j| n^{2/3} min(j, n-j+1)^{1/3} / log^5 n.
inline RigidityReport rigidity_check(const Spectrum& s, const SemicircleQuantiles& q, double C, double c1) {
  if (!(C > 0.0 && c1 > 0.0)) throw UsageError("rigidity_check: C and c1 must be positive");
  if (q.n != s.n) throw UsageError("rigidity_check: quantile table size mismatch");
  RigidityReport r;
  r.n = s.n;
  const double nd = static_cast<double>(s.n);
  const double log5 = std::pow(std::log(nd), 5);
  const double edge = c1 * log5;
  const double lo = std::max(1.0, std::ceil(edge));
  const double hi = std::floor(nd - edge);
  if (!(lo <= hi) || s.n < 2) return r;
  r.empty_window = false;
  r.window_lo = static_cast<std::size_t>(lo);
  r.window_hi = static_cast<std::size_t>(hi);
  const double n23 = std::pow(nd, 2.0 / 3.0);
  for (std::size_t j = r.window_lo; j <= r.window_hi; ++j) {
    const double m = static_cast<double>(std::min(j, s.n - j + 1));
    const double dev = std::fabs(s.lambdas[j - 1] - q.gammas[j - 1]);
    const double rho = dev * n23 * std::cbrt(m) / log5;
    r.rho.push_back(rho);
    r.max_rho = std::max(r.max_rho, rho);
    if (dev > C * log5 / (std::cbrt(m) * n23)) r.violations.push_back(j);
  }
  return r;
}

inline void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
  os << "index,lambda\n";
  os.precision(17);
  for (std::size_t j = 0; j < s.n; ++j) os << j + 1 << ',' << s.lambdas[j] << '\n';
}

inline Spectrum read_spectrum_csv(std::istream& is) {
  std::string line;
  std::getline(is, line);
  std::vector<double> values;
  while (std::getline(is, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  return Spectrum::from_values(std::move(values));
}

}  // namespace rml
