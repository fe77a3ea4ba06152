#pragma once

// Dense real symmetric eigensolver: Householder reduction to tridiagonal form
// followed by the implicit-shift QL iteration (Bowdler, Martin, Reinsch and
// Wilkinson; EISPACK tql1/tql2).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <span>
#include <vector>

#include "rml/error.hpp"

namespace rml {

/// Column-major square matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[c * n_ + r]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[c * n_ + r]; }
  double* column(std::size_t c) noexcept { return data_.data() + c * n_; }
  const double* column(std::size_t c) const noexcept { return data_.data() + c * n_; }
  std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> offdiag;  // offdiag[i] couples i and i+1
};

namespace detail {

// Overwrites x[0..m) with v (v[0] = 1) such that (I - beta v v^T) x = alpha e_1.
inline double make_householder(double* x, std::size_t m, double& alpha) {
  double scale = 0.0;
  for (std::size_t i = 1; i < m; ++i) scale = std::max(scale, std::fabs(x[i]));
  if (scale == 0.0) {
    alpha = x[0];
    x[0] = 1.0;
    return 0.0;
  }
  double sigma = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    const double t = x[i] / scale;
    sigma += t * t;
  }
  const double x0 = x[0] / scale;
  const double norm = std::sqrt(x0 * x0 + sigma);
  const double v0 = x0 <= 0.0 ? x0 - norm : -sigma / (x0 + norm);
  alpha = scale * norm;
  const double beta = 2.0 * v0 * v0 / (sigma + v0 * v0);
  const double inv = 1.0 / (v0 * scale);
  for (std::size_t i = 1; i < m; ++i) x[i] *= inv;
  x[0] = 1.0;
  return beta;
}


// One column of the fused sweep: col -= v*wc + w*vc, then accumulate the next
// symmetric product into pn using the updated values. col[0] is the diagonal.
inline void update_and_accumulate(double* __restrict col, const double* __restrict v,
                                  const double* __restrict w, double vc, double wc,
                                  const double* __restrict x, double* __restrict pn,
                                  std::size_t len) {
  const double xc = x[0];
  col[0] -= v[0] * wc + w[0] * vc;
  double dot0 = col[0] * xc, dot1 = 0.0, dot2 = 0.0, dot3 = 0.0;
  std::size_t r = 1;
  for (; r + 4 <= len; r += 4) {
    const double u0 = col[r] - (v[r] * wc + w[r] * vc);
    const double u1 = col[r + 1] - (v[r + 1] * wc + w[r + 1] * vc);
    const double u2 = col[r + 2] - (v[r + 2] * wc + w[r + 2] * vc);
    const double u3 = col[r + 3] - (v[r + 3] * wc + w[r + 3] * vc);
    col[r] = u0;
    col[r + 1] = u1;
    col[r + 2] = u2;
    col[r + 3] = u3;
    dot0 += u0 * x[r];
    dot1 += u1 * x[r + 1];
    dot2 += u2 * x[r + 2];
    dot3 += u3 * x[r + 3];
    pn[r] += u0 * xc;
    pn[r + 1] += u1 * xc;
    pn[r + 2] += u2 * xc;
    pn[r + 3] += u3 * xc;
  }
  for (; r < len; ++r) {
    const double u = col[r] - (v[r] * wc + w[r] * vc);
    col[r] = u;
    dot0 += u * x[r];
    pn[r] += u * xc;
  }
  pn[0] += (dot0 + dot1) + (dot2 + dot3);
}

}  // namespace detail

/// Reduces a symmetric matrix to tridiagonal form T = Q^T A Q. Only the lower
/// triangle of `a` is referenced; on return its strict lower part holds the
/// Householder vectors (column k, rows k+1..n-1) and `betas[k]` their
/// coefficients, which is what `form_q` consumes.
///
/// The rank-2 update of step k is fused with the symmetric product of step
/// k+1, so each step streams the trailing triangle once.
inline Tridiagonal tridiagonalize(DenseMatrix& a, std::vector<double>& betas) {
  const std::size_t n = a.size();
  Tridiagonal t;
  t.diag.assign(n, 0.0);
  t.offdiag.assign(n > 0 ? n - 1 : 0, 0.0);
  betas.assign(n > 0 ? n - 1 : 0, 0.0);
  if (n == 0) return t;
  if (n == 1) {
    t.diag[0] = a(0, 0);
    return t;
  }

  std::vector<double> p(n), w(n);

  // p <- beta * A[off.., off..] v (lower-triangle symmetric product)
  auto symv = [&](std::size_t off, const double* v, std::size_t m, double beta) {
    std::fill(p.begin(), p.begin() + m, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
      const double* col = a.column(off + c) + off;
      const double vc = v[c];
      double dot = col[c] * vc;
      for (std::size_t r = c + 1; r < m; ++r) {
        dot += col[r] * v[r];
        p[r] += col[r] * vc;
      }
      p[c] += dot;
    }
    for (std::size_t i = 0; i < m; ++i) p[i] *= beta;
  };

  double alpha = 0.0;
  double beta = detail::make_householder(a.column(0) + 1, n - 1, alpha);
  t.offdiag[0] = alpha;
  betas[0] = beta;
  symv(1, a.column(0) + 1, n - 1, beta);

  for (std::size_t k = 0; k + 1 < n; ++k) {
    t.diag[k] = a(k, k);
    const std::size_t m = n - k - 1;
    const double* v = a.column(k) + k + 1;

    double pv = 0.0;
    for (std::size_t i = 0; i < m; ++i) pv += p[i] * v[i];
    const double half = 0.5 * beta * pv;
    for (std::size_t i = 0; i < m; ++i) w[i] = p[i] - half * v[i];

    // First trailing column, which seeds the next reflector.
    double* first = a.column(k + 1) + k + 1;
    for (std::size_t r = 0; r < m; ++r) first[r] -= v[r] * w[0] + w[r] * v[0];
    if (m < 2) break;

    const std::size_t m2 = m - 1;
    double* v2 = first + 1;
    beta = detail::make_householder(v2, m2, alpha);
    t.offdiag[k + 1] = alpha;
    betas[k + 1] = beta;

    std::fill(p.begin(), p.begin() + m2, 0.0);
    for (std::size_t c = 1; c < m; ++c) {
      detail::update_and_accumulate(a.column(k + 1 + c) + k + 1 + c, v + c, w.data() + c, v[c], w[c],
                                    v2 + (c - 1), p.data() + (c - 1), m - c);
    }
    for (std::size_t i = 0; i < m2; ++i) p[i] *= beta;
  }
  t.diag[n - 1] = a(n - 1, n - 1);
  return t;
}

/// Forms the orthogonal factor Q from the output of `tridiagonalize`.
inline DenseMatrix form_q(const DenseMatrix& reduced, const std::vector<double>& betas) {
  const std::size_t n = reduced.size();
  DenseMatrix q(n);
  for (std::size_t i = 0; i < n; ++i) q(i, i) = 1.0;
  // Q = H_0 H_1 ... H_{n-2}; apply from the right end backwards.
  for (std::size_t kk = betas.size(); kk-- > 0;) {
    const double beta = betas[kk];
    if (beta == 0.0) continue;
    const double* v = reduced.column(kk) + kk + 1;
    const std::size_t m = n - kk - 1;
    for (std::size_t c = kk + 1; c < n; ++c) {
      double* qc = q.column(c) + kk + 1;
      double dot = 0.0;
      for (std::size_t r = 0; r < m; ++r) dot += v[r] * qc[r];
      dot *= beta;
      for (std::size_t r = 0; r < m; ++r) qc[r] -= dot * v[r];
    }
  }
  return q;
}

inline constexpr int kMaxQlIterations = 60;

/// Implicit-shift QL on a symmetric tridiagonal matrix. Eigenvalues are
/// returned in `t.diag` (unsorted). When `z` is non-null the plane rotations
/// are accumulated into its columns.
inline void tridiagonal_ql(Tridiagonal& t, DenseMatrix* z = nullptr) {
  auto& d = t.diag;
  const std::size_t n = d.size();
  if (n < 2) return;
  std::vector<double> e(n, 0.0);
  std::copy(t.offdiag.begin(), t.offdiag.end(), e.begin());

  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m = l;
    for (;;) {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m == l) break;
      if (++iter > kMaxQlIterations)
        throw NumericalError("tridiagonal QL failed to converge at index " + std::to_string(l));

      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      std::size_t i = m;
      bool deflated = false;
      while (i-- > l) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        if (z) {
          double* zi = z->column(i);
          double* zi1 = z->column(i + 1);
          const std::size_t nz = z->size();
          for (std::size_t k = 0; k < nz; ++k) {
            f = zi1[k];
            zi1[k] = s * zi[k] + c * f;
            zi[k] = c * zi[k] - s * f;
          }
        }
      }
      if (deflated) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

/// Eigenvalues of a symmetric matrix in ascending order. `a` is consumed.
inline std::vector<double> symmetric_eigenvalues(DenseMatrix a) {
  std::vector<double> betas;
  Tridiagonal t = tridiagonalize(a, betas);
  tridiagonal_ql(t);
  std::sort(t.diag.begin(), t.diag.end());
  return std::move(t.diag);
}

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column q pairs with values[q]
};

/// Full eigendecomposition, eigenvectors orthonormal.
inline EigenDecomposition symmetric_eigensystem(DenseMatrix a) {
  const std::size_t n = a.size();
  std::vector<double> betas;
  Tridiagonal t = tridiagonalize(a, betas);
  DenseMatrix q = form_q(a, betas);
  tridiagonal_ql(t, &q);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return t.diag[x] < t.diag[y]; });
  EigenDecomposition out{std::vector<double>(n), DenseMatrix(n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = t.diag[order[c]];
    std::copy_n(q.column(order[c]), n, out.vectors.column(c));
  }
  return out;
}

}  // namespace rml
