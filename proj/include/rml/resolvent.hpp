#pragma once

// Resolvents R(z) = (W - zI)^{-1}, their minors R^{(J)}, the decomposition
//   R_jj = -1/(z + m_n) + eps_j R_jj / (z + m_n),  eps_j = eps_j1 + ... + eps_j4
// and numerical checks of the exact identities and inequalities that the
// resolvent satisfies.
//
// Index sets are 0-based. The minor normalisation follows m_n^{(J)} =
// (1/n) Tr R^{(J)}: the denominator stays n, not n - |J|.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rml/eigensolver.hpp"
#include "rml/ensemble.hpp"
#include "rml/error.hpp"
#include "rml/parallel.hpp"
#include "rml/rng.hpp"
#include "rml/semicircle.hpp"
#include "rml/stieltjes.hpp"

namespace rml {

using ComplexMatrix = Eigen::MatrixXcd;
using IndexSet = std::vector<std::size_t>;

enum class ResolventMethod {
  lu,        // partial-pivot LU of W - zI
  spectral,  // R = sum_q v_q v_q^T / (lambda_q - z)
};

struct MinorResolvent {
  IndexSet removed;  // J, sorted
  IndexSet kept;     // T_J in ascending order; row r of `r` is index kept[r]
  ComplexMatrix r;
  cplx m = 0.0;      // (1/n) Tr R^{(J)}
};

class ResolventBundle {
 public:
  ResolventBundle(ComplexPoint z, std::shared_ptr<const DenseMatrix> w, ComplexMatrix r, double residual)
      : z_(z), w_(std::move(w)), r_(std::move(r)), residual_(residual) {
    m_ = r_.trace() / static_cast<double>(r_.rows());
  }

  const ComplexPoint& z() const noexcept { return z_; }
  std::size_t n() const noexcept { return w_->size(); }
  const DenseMatrix& w() const noexcept { return *w_; }
  std::shared_ptr<const DenseMatrix> w_ptr() const noexcept { return w_; }
  const ComplexMatrix& r() const noexcept { return r_; }
  cplx m() const noexcept { return m_; }
  /// max |(W - zI) R - I|.
  double solve_residual() const noexcept { return residual_; }

  bool has_minor(const IndexSet& j) const { return minors_.count(normalize(j)) > 0; }
  const MinorResolvent& minor(const IndexSet& j) const {
    auto it = minors_.find(normalize(j));
    if (it == minors_.end()) throw UsageError("ResolventBundle: minor not computed");
    return it->second;
  }
  void insert_minor(MinorResolvent m) { minors_[m.removed] = std::move(m); }

  static IndexSet normalize(IndexSet j) {
    std::sort(j.begin(), j.end());
    j.erase(std::unique(j.begin(), j.end()), j.end());
    return j;
  }

 private:
  ComplexPoint z_;
  std::shared_ptr<const DenseMatrix> w_;
  ComplexMatrix r_;
  cplx m_;
  double residual_;
  std::map<IndexSet, MinorResolvent> minors_;
};

namespace detail {

inline ComplexMatrix shifted(const DenseMatrix& w, const IndexSet& kept, cplx z) {
  const auto k = static_cast<Eigen::Index>(kept.size());
  ComplexMatrix a(k, k);
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index r = 0; r < k; ++r) a(r, c) = w(kept[r], kept[c]);
  a.diagonal().array() -= z;
  return a;
}

inline ComplexMatrix invert(const DenseMatrix& w, const IndexSet& kept, cplx z, ResolventMethod method) {
  const auto k = static_cast<Eigen::Index>(kept.size());
  if (k == 0) return ComplexMatrix(0, 0);
  if (method == ResolventMethod::lu) {
    const ComplexMatrix a = shifted(w, kept, z);
    Eigen::PartialPivLU<ComplexMatrix> lu(a);
    return lu.inverse();
  }
  DenseMatrix sub(kept.size());
  for (std::size_t c = 0; c < kept.size(); ++c)
    for (std::size_t r = 0; r < kept.size(); ++r) sub(r, c) = w(kept[r], kept[c]);
  const auto sys = symmetric_eigensystem(std::move(sub));
  ComplexMatrix out = ComplexMatrix::Zero(k, k);
  for (Eigen::Index q = 0; q < k; ++q) {
    const cplx d = 1.0 / (sys.values[q] - z);
    const double* v = sys.vectors.column(q);
    for (Eigen::Index c = 0; c < k; ++c) {
      const cplx dc = d * v[c];
      for (Eigen::Index r = 0; r < k; ++r) out(r, c) += v[r] * dc;
    }
  }
  return out;
}

inline IndexSet complement(std::size_t n, const IndexSet& removed) {
  IndexSet kept;
  kept.reserve(n - removed.size());
  for (std::size_t i = 0, r = 0; i < n; ++i) {
    if (r < removed.size() && removed[r] == i) {
      ++r;
      continue;
    }
    kept.push_back(i);
  }
  return kept;
}

}  // namespace detail

/// Resolvent of the minor of W with rows and columns J removed. The full set
/// is rejected; J must leave at least one index.
inline MinorResolvent minor_resolvent(const DenseMatrix& w, IndexSet j, cplx z,
                                      ResolventMethod method = ResolventMethod::lu) {
  j = ResolventBundle::normalize(std::move(j));
  const std::size_t n = w.size();
  for (std::size_t idx : j)
    if (idx >= n) throw UsageError("minor_resolvent: index out of range");
  if (j.size() >= n) throw UsageError("minor_resolvent: J removes every index");
  MinorResolvent out;
  out.removed = j;
  out.kept = detail::complement(n, j);
  out.r = detail::invert(w, out.kept, z, method);
  out.m = out.r.trace() / static_cast<double>(n);
  return out;
}

inline MinorResolvent minor_resolvent(const ResolventBundle& b, IndexSet j,
                                      ResolventMethod method = ResolventMethod::lu) {
  if (ResolventBundle::normalize(j).empty()) {
    MinorResolvent out;
    out.kept = detail::complement(b.n(), {});
    out.r = b.r();
    out.m = b.m();
    return out;
  }
  return minor_resolvent(b.w(), std::move(j), b.z().z(), method);
}

/// R(z) for W = X / sqrt(n), with the listed minors precomputed.
inline ResolventBundle resolvent(const WignerSample& sample, const ComplexPoint& z,
                                 const std::vector<IndexSet>& minors = {},
                                 ResolventMethod method = ResolventMethod::lu) {
  auto w = std::make_shared<const DenseMatrix>(sample.scaled_dense());
  const IndexSet all = detail::complement(w->size(), {});
  ComplexMatrix r = detail::invert(*w, all, z.z(), method);
  const ComplexMatrix a = detail::shifted(*w, all, z.z());
  const ComplexMatrix check = a * r - ComplexMatrix::Identity(r.rows(), r.cols());
  const double residual = check.cwiseAbs().maxCoeff();
  if (!std::isfinite(residual) || residual > 1e-6)
    throw NumericalError("resolvent: solve residual " + std::to_string(residual));
  ResolventBundle b(z, std::move(w), std::move(r), residual);
  for (const auto& j : minors)
    if (!ResolventBundle::normalize(j).empty() && ResolventBundle::normalize(j).size() < b.n())
      b.insert_minor(minor_resolvent(b.w(), j, z.z(), method));
  return b;
}

inline std::vector<IndexSet> singleton_minors(std::size_t n) {
  std::vector<IndexSet> out;
  for (std::size_t j = 0; j < n; ++j) out.push_back({j});
  return out;
}

struct EpsilonStats {
  std::size_t j = 0;
  cplx eps[4];  // eps_j1 .. eps_j4
  cplx eta[3];  // eta_j0 .. eta_j2
  cplx r_jj;
  cplx lambda_n;        // m_n - s(z)
  cplx t_contribution;  // eps_j R_jj / n; T_n is the sum over j
  double repr_residual = 0.0;        // |R_jj - (-1 + eps_j R_jj) / (z + m_n)|
  double eps4_eta_residual = 0.0;    // |eps_j4 - (1 + eta_0 + eta_1 + eta_2) R_jj / n|

  cplx eps_total() const { return eps[0] + eps[1] + eps[2] + eps[3]; }
};

/// eps_j1 = X_jj / sqrt(n)
/// eps_j2 = -(1/n) sum_{k != l} X_jk X_jl R^{(j)}_kl
/// eps_j3 = -(1/n) sum_k (X_jk^2 - 1) R^{(j)}_kk
/// eps_j4 = (1/n) (Tr R - Tr R^{(j)})
/// eta_j0 = (1/n) sum_l [(R^{(j)})^2]_ll
/// eta_j1 = (1/n) sum_l (X_jl^2 - 1) [(R^{(j)})^2]_ll
/// eta_j2 = (1/n) sum_{k != l} X_jk X_jl [(R^{(j)})^2]_kl
/// with k, l ranging over T_j = {0..n-1} \ {j}.
inline EpsilonStats epsilon_decomposition(const WignerSample& sample, const ResolventBundle& b, std::size_t j) {
  const std::size_t n = b.n();
  if (j >= n) throw UsageError("epsilon_decomposition: index out of range");
  const double nd = static_cast<double>(n);
  const cplx z = b.z().z();
  const cplx zm = z + b.m();
  if (std::abs(zm) < 1e-12) throw NumericalError("epsilon_decomposition: z + m_n is singular");

  EpsilonStats st;
  st.j = j;
  st.r_jj = b.r()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
  st.eps[0] = sample.x(j, j) / std::sqrt(nd);
  cplx minor_trace = 0.0;
  if (n > 1) {
    const MinorResolvent& mr = b.minor({j});
    const auto k = static_cast<Eigen::Index>(mr.kept.size());
    Eigen::VectorXcd x(k);
    for (Eigen::Index i = 0; i < k; ++i) x(i) = sample.x(j, mr.kept[i]);
    const Eigen::VectorXcd y = mr.r * x;  // R^{(j)} x
    // Complex symmetric: x^T R^2 x = (R x)^T (R x), [R^2]_kk = sum_l R_kl^2.
    const cplx quad = x.transpose() * y;
    const cplx quad2 = y.transpose() * y;
    cplx diag = 0.0, diag_centered = 0.0, diag2 = 0.0, diag2_sq = 0.0, diag2_centered = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double xi2 = x(i).real() * x(i).real();
      const cplx rii = mr.r(i, i);
      const cplx r2ii = mr.r.row(i).transpose().cwiseProduct(mr.r.row(i).transpose()).sum();
      diag += xi2 * rii;
      diag_centered += (xi2 - 1.0) * rii;
      diag2 += r2ii;
      diag2_sq += xi2 * r2ii;
      diag2_centered += (xi2 - 1.0) * r2ii;
    }
    st.eps[1] = -(quad - diag) / nd;
    st.eps[2] = -diag_centered / nd;
    st.eta[0] = diag2 / nd;
    st.eta[1] = diag2_centered / nd;
    st.eta[2] = (quad2 - diag2_sq) / nd;
    minor_trace = mr.r.trace();
  }
  st.eps[3] = (b.r().trace() - minor_trace) / nd;
  st.lambda_n = b.m() - s_transform(z);
  st.t_contribution = st.eps_total() * st.r_jj / nd;
  st.repr_residual = std::abs(st.r_jj - (-1.0 + st.eps_total() * st.r_jj) / zm);
  st.eps4_eta_residual = std::abs(st.eps[3] - (1.0 + st.eta[0] + st.eta[1] + st.eta[2]) * st.r_jj / nd);
  return st;
}

/// All j at once; the bundle must hold every singleton minor.
inline std::vector<EpsilonStats> epsilon_decomposition_all(const WignerSample& sample, const ResolventBundle& b) {
  std::vector<EpsilonStats> out;
  for (std::size_t j = 0; j < b.n(); ++j) out.push_back(epsilon_decomposition(sample, b, j));
  return out;
}

struct LambdaIdentityReport {
  cplx lambda_n;  // m_n - s
  cplx t_n;       // (1/n) sum eps_j R_jj
  cplx rhs;       // T_n / (z + m_n + s)
  double residual = 0.0;
};

/// Lambda_n = m_n - s = T_n / (z + m_n + s).
inline LambdaIdentityReport lambda_identity_check(const ResolventBundle& b, const std::vector<EpsilonStats>& stats) {
  if (stats.size() != b.n()) throw UsageError("lambda_identity_check: need stats for every j");
  LambdaIdentityReport rep;
  const cplx z = b.z().z();
  const cplx s = s_transform(z);
  for (const auto& st : stats) rep.t_n += st.t_contribution;
  rep.lambda_n = b.m() - s;
  rep.rhs = rep.t_n / (z + b.m() + s);
  rep.residual = std::abs(rep.lambda_n - rep.rhs);
  return rep;
}

struct TraceSquareReport {
  cplx lhs;  // (1/n) sum_j eps_j4 R_jj
  cplx rhs;  // (1/n^2) Tr R^2
  double residual = 0.0;
};

/// (1/n) sum_j eps_j4 R_jj = (1/n^2) Tr R^2 = m_n'(z) / n.
inline TraceSquareReport trace_square_identity(const ResolventBundle& b, const std::vector<EpsilonStats>& stats) {
  TraceSquareReport rep;
  const double nd = static_cast<double>(b.n());
  for (const auto& st : stats) rep.lhs += st.eps[3] * st.r_jj;
  rep.lhs /= nd;
  rep.rhs = (b.r() * b.r()).trace() / (nd * nd);
  rep.residual = std::abs(rep.lhs - rep.rhs);
  return rep;
}

struct SchurTraceReport {
  cplx trace_difference;  // Tr R - Tr R^{(j)}
  cplx log_derivative;    // R_jj^{-1} dR_jj/dz, Richardson-extrapolated central difference
  cplx central;           // same with the plain central difference at step h
  double residual = 0.0;          // against log_derivative
  double central_residual = 0.0;  // against central
  double step = 0.0;
};

namespace detail {

inline cplx diagonal_entry(const DenseMatrix& w, std::size_t j, cplx z) {
  const IndexSet all = complement(w.size(), {});
  const ComplexMatrix a = shifted(w, all, z);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(a.rows());
  e(static_cast<Eigen::Index>(j)) = 1.0;
  const Eigen::VectorXcd col = Eigen::PartialPivLU<ComplexMatrix>(a).solve(e);
  return col(static_cast<Eigen::Index>(j));
}

}  // namespace detail

/// Tr R - Tr R^{(j)} = R_jj^{-1} dR_jj/dz. The derivative is a central
/// difference along the real direction with step h, and its Richardson
/// extrapolation from steps h and h/2. h <= 0 selects h = 1e-5 max(1, |z|).
inline SchurTraceReport schur_trace_identity(const WignerSample& sample, const ComplexPoint& z, std::size_t j,
                                             double h = 0.0) {
  const DenseMatrix w = sample.scaled_dense();
  const std::size_t n = w.size();
  if (j >= n) throw UsageError("schur_trace_identity: index out of range");
  if (h <= 0.0) h = 1e-5 * std::max(1.0, std::abs(z.z()));
  const IndexSet all = detail::complement(n, {});
  const ComplexMatrix r = detail::invert(w, all, z.z(), ResolventMethod::lu);
  cplx minor_trace = 0.0;
  if (n > 1) minor_trace = minor_resolvent(w, {j}, z.z()).r.trace();
  SchurTraceReport rep;
  rep.step = h;
  rep.trace_difference = r.trace() - minor_trace;
  const cplx rjj = r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
  auto central = [&](double step) {
    return (detail::diagonal_entry(w, j, z.z() + step) - detail::diagonal_entry(w, j, z.z() - step)) / (2.0 * step);
  };
  const cplx d1 = central(h);
  const cplx d2 = central(0.5 * h);
  rep.central = d1 / rjj;
  rep.log_derivative = (4.0 * d2 - d1) / 3.0 / rjj;
  rep.residual = std::abs(rep.trace_difference - rep.log_derivative);
  rep.central_residual = std::abs(rep.trace_difference - rep.central);
  return rep;
}

struct QuadraticForms {
  double q = 0.0;        // (1/n) sum_k |sum_{l<k} X_jl R_kl|^2
  double q_tilde = 0.0;  // same with [R^2]_kl
};

/// Martingale-form quadratic forms over T_{J,j} with R = R^{(J, j)}.
inline QuadraticForms quadratic_form_Q(const WignerSample& sample, const ComplexPoint& z, IndexSet J,
                                       std::size_t j) {
  J = ResolventBundle::normalize(std::move(J));
  if (std::binary_search(J.begin(), J.end(), j)) throw UsageError("quadratic_form_Q: j must not lie in J");
  const DenseMatrix w = sample.scaled_dense();
  const std::size_t n = w.size();
  QuadraticForms out;
  IndexSet removed = J;
  removed.push_back(j);
  removed = ResolventBundle::normalize(removed);
  if (removed.size() >= n) return out;
  const MinorResolvent mr = minor_resolvent(w, removed, z.z());
  const ComplexMatrix r2 = mr.r * mr.r;
  const auto k = static_cast<Eigen::Index>(mr.kept.size());
  for (Eigen::Index a = 0; a < k; ++a) {
    cplx s1 = 0.0, s2 = 0.0;
    for (Eigen::Index l = 0; l < a; ++l) {
      const double x = sample.x(j, mr.kept[l]);
      s1 += x * mr.r(a, l);
      s2 += x * r2(a, l);
    }
    out.q += std::norm(s1);
    out.q_tilde += std::norm(s2);
  }
  out.q /= static_cast<double>(n);
  out.q_tilde /= static_cast<double>(n);
  return out;
}

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;     // rhs - lhs (worst over the family when indexed)
  double tolerance = 0.0;  // allowed negative slack from rounding
  bool report_only = false;
  bool pass = true;
};

struct InequalityReport {
  IndexSet J;
  std::vector<InequalityCheck> checks;
  double empirical_c0 = 0.0;  // |z + m^{(J)} + s| / sqrt|z^2 - 4|

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }
  const InequalityCheck& find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw UsageError("InequalityReport: no check named " + name);
  }
};

inline constexpr double kInequalityRelTol = 1e-10;
inline constexpr double kEqualityTol = 1e-10;

/// Numerical check of the resolvent inequalities for the minor J:
///   ward_trace       (1/n) sum_{l,k} |R_kl|^2          <= v^{-1} Im m^{(J)}   (equality)
///   ward_column      sum_k |R_kl|^2                    <= v^{-1} Im R_ll      for every l
///   ward_column_r2   sum_k |[R^2]_kl|^2                <= v^{-3} Im R_ll      for every l
///   r2_diag_sq       (1/n) sum_l |[R^2]_ll|^2          <= v^{-3} Im m^{(J)}
///   r2_diag_pow      (1/n) sum_l |[R^2]_ll|^p          <= v^{-p} (1/n) sum_l Im^p R_ll
///   r2_frobenius     (1/n) sum_{l,k} |[R^2]_lk|^2      <= v^{-3} Im m^{(J)}
///   r2_entry_pow     (1/n) sum_{l,k} |[R^2]_lk|^{2p}   <= v^{-3p} (1/n) sum_l Im^p R_ll
///   r2_entry_pow_sq  (1/n^2) sum_{l,k} |[R^2]_lk|^{2p} <= v^{-2p} ((1/n) sum_l Im^p R_ll)^2
///   r2_trace         (1/n) |Tr (R^{(J)})^2|      <= v^{-1} Im m^{(J)}
///   stability_lower  |z + m^{(J)} + s|              >= Im m^{(J)}
/// and, for |J| = 1, |m - m^{(J)}| <= 1 / (n v). The ratio
/// |z + m^{(J)} + s| / sqrt|z^2 - 4| is reported as the empirical c0.
inline InequalityReport verify_resolvent_inequalities(const ResolventBundle& b, IndexSet J,
                                                      const std::vector<double>& powers = {1.0, 2.0, 3.0}) {
  J = ResolventBundle::normalize(std::move(J));
  const MinorResolvent mr = J.empty() ? minor_resolvent(b, {}) : (b.has_minor(J) ? b.minor(J) : minor_resolvent(b, J));
  const ComplexMatrix& r = mr.r;
  const double nd = static_cast<double>(b.n());
  const double v = b.z().v();
  const cplx z = b.z().z();
  const auto k = r.rows();
  const ComplexMatrix r2 = r * r;
  const double im_m = mr.m.imag();

  InequalityReport rep;
  rep.J = J;
  auto add = [&](std::string name, double lhs, double rhs, bool upper = true) {
    InequalityCheck c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.margin = upper ? rhs - lhs : lhs - rhs;
    c.tolerance = kInequalityRelTol * std::max({std::fabs(lhs), std::fabs(rhs), 1.0});
    c.pass = c.margin >= -c.tolerance;
    rep.checks.push_back(c);
  };
  // Indexed families keep the entry with the smallest relative margin.
  auto add_worst = [&](std::string name, const std::vector<double>& lhs, const std::vector<double>& rhs) {
    std::size_t worst = 0;
    double worst_rel = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      const double rel = (rhs[i] - lhs[i]) / std::max({std::fabs(lhs[i]), std::fabs(rhs[i]), 1.0});
      if (rel < worst_rel) {
        worst_rel = rel;
        worst = i;
      }
    }
    add(std::move(name), lhs.empty() ? 0.0 : lhs[worst], rhs.empty() ? 0.0 : rhs[worst]);
  };

  const double sum_abs2 = r.cwiseAbs2().sum();
  add("ward_trace", sum_abs2 / nd, im_m / v);
  if (J.empty()) {
    InequalityCheck eq;
    eq.name = "ward_identity";
    eq.lhs = sum_abs2 / nd;
    eq.rhs = im_m / v;
    eq.margin = -std::fabs(eq.lhs - eq.rhs);
    eq.tolerance = kEqualityTol;
    eq.pass = -eq.margin <= kEqualityTol;
    rep.checks.push_back(eq);
  }

  std::vector<double> l2, r2l, l20, r20;
  std::vector<double> im_diag(static_cast<std::size_t>(k));
  for (Eigen::Index l = 0; l < k; ++l) {
    const double im_rll = r(l, l).imag();
    im_diag[static_cast<std::size_t>(l)] = im_rll;
    l2.push_back(r.col(l).cwiseAbs2().sum());
    r2l.push_back(im_rll / v);
    l20.push_back(r2.col(l).cwiseAbs2().sum());
    r20.push_back(im_rll / (v * v * v));
  }
  add_worst("ward_column", l2, r2l);
  add_worst("ward_column_r2", l20, r20);

  double diag_sq = 0.0;
  for (Eigen::Index l = 0; l < k; ++l) diag_sq += std::norm(r2(l, l));
  add("r2_diag_sq", diag_sq / nd, im_m / (v * v * v));
  add("r2_frobenius", r2.cwiseAbs2().sum() / nd, im_m / (v * v * v));

  for (double p : powers) {
    const std::string tag = "(p=" + std::to_string(static_cast<int>(p)) + ")";
    double diag_p = 0.0, im_p = 0.0, full_2p = 0.0;
    for (Eigen::Index l = 0; l < k; ++l) {
      diag_p += std::pow(std::abs(r2(l, l)), p);
      im_p += std::pow(im_diag[static_cast<std::size_t>(l)], p);
      for (Eigen::Index c = 0; c < k; ++c) full_2p += std::pow(std::abs(r2(l, c)), 2.0 * p);
    }
    add("r2_diag_pow" + tag, diag_p / nd, std::pow(v, -p) * im_p / nd);
    add("r2_entry_pow" + tag, full_2p / nd, std::pow(v, -3.0 * p) * im_p / nd);
    add("r2_entry_pow_sq" + tag, full_2p / (nd * nd), std::pow(v, -2.0 * p) * (im_p / nd) * (im_p / nd));
  }

  add("r2_trace", std::abs(r2.trace()) / nd, im_m / v);
  const cplx s = s_transform(z);
  add("stability_lower", std::abs(z + mr.m + s), im_m, false);
  rep.empirical_c0 = std::abs(z + mr.m + s) / std::sqrt(std::abs(z * z - 4.0));
  if (J.size() == 1) add("minor_shift", std::abs(b.m() - mr.m), 1.0 / (nd * v));
  return rep;
}

struct EpsilonMomentRow {
  std::size_t n = 0;
  double q = 0.0;
  std::string statistic;  // eps1, eps2, eps3, eta1, eta2, rjj_minus_s
  double mean_pow = 0.0;  // Monte Carlo E|.|^q
  double normalized = 0.0;  // E|.|^q n^{q/2}; E|R_jj - s|^4 n^2 for rjj_minus_s
};

/// Monte Carlo moments of the correction terms at the first index j = 0
/// (all j are exchangeable). Replica r of size n uses seed
/// seed_stream(seed_stream(seed, n), r). E|R_jj - s|^4 is reported once per n.
inline std::vector<EpsilonMomentRow> epsilon_moment_sweep(const EntryLaw& law, const std::vector<std::size_t>& n_list,
                                                          const ComplexPoint& z, const std::vector<double>& q_list,
                                                          std::size_t replicas, std::uint64_t seed,
                                                          std::size_t jobs = 1) {
  if (replicas == 0) throw UsageError("epsilon_moment_sweep: replicas must be positive");
  for (double q : q_list)
    if (!(q > 0.0 && q <= 8.0)) throw UsageError("epsilon_moment_sweep: q must lie in (0, 8]");
  struct Sample {
    double abs[5];  // eps1, eps2, eps3, eta1, eta2
    double rjj_dev;
  };
  static const char* names[5] = {"eps1", "eps2", "eps3", "eta1", "eta2"};
  const cplx s = s_transform(z);
  std::vector<EpsilonMomentRow> rows;
  for (std::size_t n : n_list) {
    if (n < 2) throw UsageError("epsilon_moment_sweep: n must be at least 2");
    const std::uint64_t n_seed = seed_stream(seed, n);
    const auto draws = parallel_map(replicas, jobs, [&](std::size_t r) {
      const WignerSample w = sample_wigner(law, n, seed_stream(n_seed, r));
      const ResolventBundle b = resolvent(w, z, {{0}});
      const EpsilonStats st = epsilon_decomposition(w, b, 0);
      return Sample{{std::abs(st.eps[0]), std::abs(st.eps[1]), std::abs(st.eps[2]), std::abs(st.eta[1]),
                     std::abs(st.eta[2])},
                    std::abs(st.r_jj - s)};
    });
    const double nd = static_cast<double>(n);
    for (double q : q_list) {
      for (int k = 0; k < 5; ++k) {
        double acc = 0.0;
        for (const auto& d : draws) acc += std::pow(d.abs[k], q);
        EpsilonMomentRow row{n, q, names[k], acc / static_cast<double>(replicas), 0.0};
        row.normalized = row.mean_pow * std::pow(nd, 0.5 * q);
        rows.push_back(row);
      }
    }
    double acc = 0.0;
    for (const auto& d : draws) acc += std::pow(d.rjj_dev, 4);
    EpsilonMomentRow row{n, 4.0, "rjj_minus_s", acc / static_cast<double>(replicas), 0.0};
    row.normalized = row.mean_pow * nd * nd;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rml
