#pragma once

// Monte Carlo L_p estimates of the Kolmogorov distance and of |m_n - s|, the
// term-by-term smoothing inequality, rate regression, the truncation rank
// bound and the rigidity experiment.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rml/ensemble.hpp"
#include "rml/error.hpp"
#include "rml/parallel.hpp"
#include "rml/quadrature.hpp"
#include "rml/rng.hpp"
#include "rml/semicircle.hpp"
#include "rml/spectral.hpp"
#include "rml/stieltjes.hpp"

namespace rml {

inline constexpr std::size_t kBootstrapResamples = 1000;

/// Linear-interpolation quantile of sorted data, level in [0, 1].
inline double sorted_quantile(const std::vector<double>& sorted, double level) {
  if (sorted.empty()) throw UsageError("sorted_quantile: empty input");
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct LpEstimate {
  double p = 1.0;
  std::size_t n = 0;
  std::size_t replicas = 0;
  double mean_pow = 0.0;  // mean of |x|^p
  double root = 0.0;      // mean_pow^{1/p}
  double median = 0.0;
  double max = 0.0;
  double ci_low = 0.0;    // bootstrap 95% percentile interval on root
  double ci_high = 0.0;
  std::vector<double> values;  // replica values in replica order
};

/// Builds the estimate from replica values; the bootstrap draws come from
/// the counter stream keyed by `bootstrap_seed`. The interval is widened to
/// contain root when the percentile interval misses it.
inline LpEstimate make_lp_estimate(std::vector<double> values, double p, std::size_t n,
                                   std::uint64_t bootstrap_seed) {
  if (!(p >= 1.0)) throw UsageError("LpEstimate: p must be at least 1");
  if (values.empty()) throw UsageError("LpEstimate: no replicas");
  LpEstimate e;
  e.p = p;
  e.n = n;
  e.replicas = values.size();
  double acc = 0.0;
  for (double v : values) acc += std::pow(std::fabs(v), p);
  e.mean_pow = acc / static_cast<double>(values.size());
  e.root = std::pow(e.mean_pow, 1.0 / p);
  std::vector<double> sorted = values;
  for (double& v : sorted) v = std::fabs(v);
  std::sort(sorted.begin(), sorted.end());
  e.median = sorted_quantile(sorted, 0.5);
  e.max = sorted.back();
  e.ci_low = e.ci_high = e.root;
  if (values.size() >= 2) {
    CounterStream rng(bootstrap_seed, 0xB007u);
    std::vector<double> roots(kBootstrapResamples);
    for (auto& r : roots) {
      double s = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) s += std::pow(std::fabs(values[rng.next_below(values.size())]), p);
      r = std::pow(s / static_cast<double>(values.size()), 1.0 / p);
    }
    std::sort(roots.begin(), roots.end());
    e.ci_low = std::min(sorted_quantile(roots, 0.025), e.root);
    e.ci_high = std::max(sorted_quantile(roots, 0.975), e.root);
  }
  e.values = std::move(values);
  return e;
}

inline std::uint64_t bootstrap_seed(std::uint64_t seed) { return mix64(seed ^ 0x626f6f7473747261ULL); }

/// Replica r uses sample seed seed_stream(seed, r).
inline std::vector<Spectrum> sample_spectra(const EntryLaw& law, std::size_t n, std::size_t replicas,
                                            std::uint64_t seed, std::size_t jobs = 1) {
  return parallel_map(replicas, jobs,
                      [&](std::size_t r) { return eigenvalues(sample_wigner(law, n, seed_stream(seed, r))); });
}

struct StieltjesScanOptions {
  RegionGParams region;
  double A1 = 1.0;
  bool allow_outside_region = false;
  bool allow_p_above_cap = false;
};

struct StieltjesEstimate {
  LpEstimate estimate;
  double score = 0.0;  // root n v / p
  bool in_region = true;
  double p_cap = 0.0;  // A1 (n v)^{1/4}
  std::vector<std::string> warnings;
};

/// Rejects z outside G and p above A1 (n v)^{1/4} unless overridden; fills
/// in_region, p_cap and warnings.
inline StieltjesEstimate stieltjes_admissibility(std::size_t n, const ComplexPoint& z, double p,
                                                 const StieltjesScanOptions& opt) {
  if (!(p >= 1.0)) throw UsageError("estimate_stieltjes_lp: p must be at least 1");
  StieltjesEstimate out;
  const double nv = static_cast<double>(n) * z.v();
  out.p_cap = opt.A1 * std::pow(nv, 0.25);
  out.in_region = region_contains(opt.region, z);
  if (!out.in_region) {
    if (!opt.allow_outside_region) throw UsageError("estimate_stieltjes_lp: z lies outside the region G");
    out.warnings.push_back("z outside region G (override)");
  }
  if (p > out.p_cap) {
    if (!opt.allow_p_above_cap)
      throw UsageError("estimate_stieltjes_lp: p exceeds A1 (n v)^{1/4} = " + std::to_string(out.p_cap));
    out.warnings.push_back("p above A1 (n v)^{1/4} (override)");
  }
  return out;
}

/// |m_n(z) - s(z)| for replicas with sample seeds seed_stream(seed, r).
inline std::vector<double> stieltjes_deviations(const EntryLaw& law, std::size_t n, const ComplexPoint& z,
                                                std::size_t replicas, std::uint64_t seed, std::size_t jobs = 1) {
  const cplx s = s_transform(z);
  return parallel_map(replicas, jobs, [&](std::size_t r) {
    return std::abs(m_transform(eigenvalues(sample_wigner(law, n, seed_stream(seed, r))), z) - s);
  });
}

inline StieltjesEstimate stieltjes_estimate_from(std::vector<double> deviations, std::size_t n, const ComplexPoint& z,
                                                 double p, std::uint64_t seed, const StieltjesScanOptions& opt) {
  StieltjesEstimate out = stieltjes_admissibility(n, z, p, opt);
  out.estimate = make_lp_estimate(std::move(deviations), p, n, bootstrap_seed(seed));
  out.score = out.estimate.root * static_cast<double>(n) * z.v() / p;
  return out;
}

/// L_p estimate of |m_n(z) - s(z)| and the normalised score root n v / p.
inline StieltjesEstimate estimate_stieltjes_lp(const EntryLaw& law, std::size_t n, const ComplexPoint& z, double p,
                                               std::size_t replicas, std::uint64_t seed,
                                               const StieltjesScanOptions& opt, std::size_t jobs = 1) {
  if (replicas < 2) throw UsageError("estimate_stieltjes_lp: need at least 2 replicas");
  (void)stieltjes_admissibility(n, z, p, opt);
  return stieltjes_estimate_from(stieltjes_deviations(law, n, z, replicas, seed, jobs), n, z, p, seed, opt);
}

/// Kolmogorov distances of replicas with sample seeds seed_stream(seed, r).
inline std::vector<double> delta_replicas(const EntryLaw& law, std::size_t n, std::size_t replicas,
                                          std::uint64_t seed, std::size_t jobs = 1) {
  return parallel_map(replicas, jobs, [&](std::size_t r) {
    return kolmogorov_distance(eigenvalues(sample_wigner(law, n, seed_stream(seed, r))));
  });
}

inline LpEstimate estimate_delta_lp(const EntryLaw& law, std::size_t n, double p, std::size_t replicas,
                                    std::uint64_t seed, std::size_t jobs = 1) {
  if (!(p >= 1.0)) throw UsageError("estimate_delta_lp: p must be at least 1");
  if (replicas < 2) throw UsageError("estimate_delta_lp: need at least 2 replicas");
  return make_lp_estimate(delta_replicas(law, n, replicas, seed, jobs), p, n, bootstrap_seed(seed));
}

struct SmoothingBreakdown {
  double term_horizontal = 0.0;    // 2 int |m_n - s|(u + iV) du, tail bound included
  double term_v0 = 0.0;
  double term_eps = 0.0;           // eps^{3/2}
  double term_vertical_sup = 0.0;  // 2 sup_x |int_{v'(x)}^V (m_n - s)(x + iv) dv|
  double delta_actual = 0.0;
  double implied_constant = 0.0;   // (delta - horizontal - vertical) / (v0 + eps^{3/2})
  double horizontal_tail = 0.0;    // analytic bound on the |u| > U part (before the factor 2)
  double horizontal_cutoff = 0.0;  // U
  double quadrature_error = 0.0;
  double sup_location = 0.0;       // x attaining the vertical sup
  bool converged = true;
};

/// Pathwise evaluation of every term of the smoothing inequality for one
/// spectrum. The horizontal line integral runs over [-U, U] with
///   |m_n - s|(u + iV) <= 2 (E_F|x| + E_G|x|) / u^2   for |u| >= 2 max(2, max|lambda|),
/// which bounds the tail by 4 (E_F|x| + E_G|x|) / U; U is chosen so the tail
/// is at most quad_tol / 4. The vertical integrals use the exact antiderivative
/// for m_n and quadrature for s over k_n + 1 equally spaced x in J'_eps.
inline SmoothingBreakdown smoothing_breakdown(const Spectrum& spec, const RegionGParams& params, double quad_tol,
                                              std::size_t k_n = 1000) {
  if (!(quad_tol > 0.0)) throw UsageError("smoothing_breakdown: quad_tol must be positive");
  if (k_n == 0) throw UsageError("smoothing_breakdown: k_n must be positive");
  params.validate();
  const double V = params.V;
  const double nd = static_cast<double>(spec.n);
  SmoothingBreakdown out;

  auto diff = [&](double u, double v) {
    const cplx z(u, v);
    cplx m = 0.0;
    for (double l : spec.lambdas) m += 1.0 / (l - z);
    return m / nd - s_transform(z);
  };

  double abs_mean = 0.0, lam_max = 0.0;
  for (double l : spec.lambdas) {
    abs_mean += std::fabs(l);
    lam_max = std::max(lam_max, std::fabs(l));
  }
  abs_mean /= nd;
  const double K = abs_mean + 8.0 / (3.0 * std::numbers::pi);
  const double L = 2.0 * std::max(2.0, lam_max);
  const double U = std::max(L, 16.0 * K / quad_tol);
  out.horizontal_cutoff = U;
  out.horizontal_tail = 4.0 * K / U;

  const double part_tol = quad_tol / 12.0;
  auto h = [&](double u) { return std::abs(diff(u, V)); };
  const auto centre = integrate_adaptive(h, -L, L, part_tol);
  // On [L, U] substitute u = L / t, t in [L / U, 1].
  auto outer = [&](double t) { return (h(L / t) + h(-L / t)) * L / (t * t); };
  const auto wings = integrate_adaptive(outer, L / U, 1.0, part_tol);
  out.term_horizontal = 2.0 * (centre.value + wings.value + out.horizontal_tail);
  out.quadrature_error = centre.error + wings.error;
  out.converged = centre.converged && wings.converged;

  out.term_v0 = params.v0;
  out.term_eps = std::pow(params.eps, 1.5);

  const double edge = 2.0 - 0.5 * params.eps;
  double best = 0.0;
  for (std::size_t i = 0; i <= k_n; ++i) {
    const double x = -edge + 2.0 * edge * static_cast<double>(i) / static_cast<double>(k_n);
    const double lo = params.lower_boundary(x);
    if (!(lo < V)) continue;
    // int_lo^V dv / (lambda - x - iv) = i [log(lambda - x - iv)]_lo^V
    cplx m_part = 0.0;
    for (double l : spec.lambdas) m_part += std::log(cplx(l - x, -V)) - std::log(cplx(l - x, -lo));
    m_part *= cplx(0.0, 1.0) / nd;
    const auto s_part = integrate_adaptive<cplx>([&](double v) { return s_transform(cplx(x, v)); }, lo, V,
                                                 0.1 * quad_tol);
    out.converged = out.converged && s_part.converged;
    const double val = std::abs(m_part - s_part.value);
    if (val > best) {
      best = val;
      out.sup_location = x;
    }
  }
  out.term_vertical_sup = 2.0 * best;
  out.delta_actual = kolmogorov_distance(spec);
  out.implied_constant = (out.delta_actual - out.term_horizontal - out.term_vertical_sup) / (out.term_v0 + out.term_eps);
  return out;
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_logcorrected = 0.0;      // slope of log(root n / log^4 n)
  double intercept_logcorrected = 0.0;
};

namespace detail {

inline std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace detail

/// Least-squares fit of log(root) against log(n).
inline RateFit fit_rate(const std::vector<std::size_t>& ns, const std::vector<double>& roots) {
  if (ns.size() != roots.size()) throw UsageError("fit_rate: size mismatch");
  std::vector<std::size_t> distinct = ns;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw UsageError("fit_rate: need at least 3 distinct n");
  std::vector<double> x, y, yc;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(roots[i] > 0.0)) throw UsageError("fit_rate: roots must be positive");
    if (ns[i] < 2) throw UsageError("fit_rate: n must be at least 2");
    const double ln = std::log(static_cast<double>(ns[i]));
    x.push_back(ln);
    y.push_back(std::log(roots[i]));
    yc.push_back(std::log(roots[i]) + ln - 4.0 * std::log(ln));
  }
  RateFit f;
  std::tie(f.slope, f.intercept) = detail::least_squares(x, y);
  std::tie(f.slope_logcorrected, f.intercept_logcorrected) = detail::least_squares(x, yc);
  return f;
}

inline RateFit fit_rate(const std::vector<LpEstimate>& estimates) {
  std::vector<std::size_t> ns;
  std::vector<double> roots;
  for (const auto& e : estimates) {
    ns.push_back(e.n);
    roots.push_back(e.root);
  }
  return fit_rate(ns, roots);
}

struct TruncationImpact {
  double observed = 0.0;  // |m_n(z) - m_hat(z)|
  std::size_t rank = 0;   // rank(X - X_hat)
  std::size_t changed_rows = 0;
  double bound = 0.0;     // rank / (n v)
  double margin = 0.0;    // bound - observed
  bool pass = true;
};

inline std::size_t difference_rank(const WignerSample& a, const WignerSample& b, std::size_t* changed_rows = nullptr) {
  const std::size_t n = a.n();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<bool> touched(n, false);
  bool any = false;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j <= k; ++j) {
      const double v = a.x(j, k) - b.x(j, k);
      if (v != 0.0) {
        d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = v;
        d(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = v;
        touched[j] = touched[k] = true;
        any = true;
      }
    }
  if (changed_rows) *changed_rows = static_cast<std::size_t>(std::count(touched.begin(), touched.end(), true));
  if (!any) return 0;
  return static_cast<std::size_t>(Eigen::FullPivLU<Eigen::MatrixXd>(d).rank());
}

/// |m_n(z) - m_hat(z)| <= rank(X - X_hat) / (n v) for two samples of one lineage.
inline TruncationImpact truncation_impact(const WignerSample& raw, const WignerSample& truncated,
                                          const ComplexPoint& z) {
  if (raw.n() != truncated.n()) throw UsageError("truncation_impact: size mismatch");
  if (raw.seed() != truncated.seed()) throw UsageError("truncation_impact: samples come from different seeds");
  TruncationImpact t;
  t.rank = difference_rank(raw, truncated, &t.changed_rows);
  const double nv = static_cast<double>(raw.n()) * z.v();
  t.bound = static_cast<double>(t.rank) / nv;
  if (t.rank > 0) t.observed = std::abs(m_transform(eigenvalues(raw), z) - m_transform(eigenvalues(truncated), z));
  t.margin = t.bound - t.observed;
  t.pass = t.observed <= t.bound + 1e-10;
  return t;
}

struct RigidityRow {
  std::size_t n = 0;
  std::size_t replicas = 0;
  bool empty_window = false;
  std::size_t window_lo = 0;
  std::size_t window_hi = 0;
  double median_max_rho = 0.0;
  double p95_max_rho = 0.0;
  double max_max_rho = 0.0;
  double violation_fraction = 0.0;  // replicas with at least one flagged j
  std::vector<double> max_rho;      // per replica
};

inline RigidityRow summarize_rigidity(std::size_t n, const std::vector<RigidityReport>& reports) {
  RigidityRow row;
  row.n = n;
  row.replicas = reports.size();
  if (reports.empty()) return row;
  row.empty_window = reports.front().empty_window;
  row.window_lo = reports.front().window_lo;
  row.window_hi = reports.front().window_hi;
  std::size_t flagged = 0;
  for (const auto& r : reports) {
    row.max_rho.push_back(r.max_rho);
    if (!r.violations.empty()) ++flagged;
  }
  row.violation_fraction = static_cast<double>(flagged) / static_cast<double>(reports.size());
  if (!row.empty_window) {
    std::vector<double> sorted = row.max_rho;
    std::sort(sorted.begin(), sorted.end());
    row.median_max_rho = sorted_quantile(sorted, 0.5);
    row.p95_max_rho = sorted_quantile(sorted, 0.95);
    row.max_max_rho = sorted.back();
  }
  return row;
}

/// For each n: replicas with sample seeds seed_stream(seed_stream(seed, n), r),
/// and the distribution of max_j rho_j over replicas.
inline std::vector<RigidityRow> rigidity_experiment(const EntryLaw& law, const std::vector<std::size_t>& n_list,
                                                    std::size_t replicas, double C, double c1, std::uint64_t seed,
                                                    QuantileConvention conv = QuantileConvention::upper,
                                                    std::size_t jobs = 1) {
  if (replicas == 0) throw UsageError("rigidity_experiment: replicas must be positive");
  std::vector<RigidityRow> rows;
  for (std::size_t n : n_list) {
    const SemicircleQuantiles q = semicircle_quantiles(n, conv);
    const std::uint64_t n_seed = seed_stream(seed, n);
    const auto reports = parallel_map(replicas, jobs, [&](std::size_t r) {
      return rigidity_check(eigenvalues(sample_wigner(law, n, seed_stream(n_seed, r))), q, C, c1);
    });
    rows.push_back(summarize_rigidity(n, reports));
  }
  return rows;
}

}  // namespace rml
