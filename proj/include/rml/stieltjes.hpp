#pragma once

// Empirical Stieltjes transform m_n(z), the region G(A0, n, eps) where the
// moment bound on m_n - s is stated, and the contour geometry (a horizontal
// line at height V plus vertical segments from v0 / sqrt(gamma) to V).

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "rml/error.hpp"
#include "rml/semicircle.hpp"
#include "rml/spectral.hpp"

namespace rml {

/// A point u + iv of the open upper half plane.
class ComplexPoint {
 public:
  ComplexPoint(double u, double v) : u_(u), v_(v) {
    if (!(v > 0.0)) throw UsageError("ComplexPoint: v must be positive");
  }
  double u() const noexcept { return u_; }
  double v() const noexcept { return v_; }
  cplx z() const noexcept { return {u_, v_}; }

 private:
  double u_, v_;
};

inline cplx s_transform(const ComplexPoint& p) { return s_transform(p.z()); }

/// m_n(z) = (1/n) sum_j 1 / (lambda_j - z).
inline cplx m_transform(const Spectrum& s, const ComplexPoint& p) {
  const cplx z = p.z();
  cplx acc = 0.0;
  for (double l : s.lambdas) acc += 1.0 / (l - z);
  return acc / static_cast<double>(s.n);
}

/// gamma(u) = |2 - |u||.
inline double gamma_distance(double u) noexcept { return std::fabs(2.0 - std::fabs(u)); }

struct RegionGParams {
  std::size_t n = 0;
  double A0 = 1.0;
  double v0 = 0.0;
  double a_const = 0.0;
  double eps = 0.0;
  double V = 4.0;

  /// Defaults: v0 = A0 log^4(n) / n (natural log), eps = (2 a v0)^{2/3}.
  static RegionGParams make(std::size_t n, double A0 = 1.0, std::optional<double> v0_override = std::nullopt,
                            double V = 4.0, std::optional<double> eps_override = std::nullopt) {
    if (n == 0) throw UsageError("RegionGParams: n must be positive");
    RegionGParams p;
    p.n = n;
    p.A0 = A0;
    const double logn = std::log(static_cast<double>(n));
    p.v0 = v0_override ? *v0_override : A0 * std::pow(logn, 4) / static_cast<double>(n);
    p.a_const = compute_a_constant();
    p.eps = eps_override ? *eps_override : std::cbrt(std::pow(2.0 * p.a_const * p.v0, 2));
    p.V = V;
    if (!(p.v0 > 0.0)) throw UsageError("RegionGParams: v0 must be positive");
    return p;
  }

  /// Throws unless 0 < eps < 2 and V > eps. At small n the default v0 makes
  /// eps exceed 2 and the region is empty; callers that need a usable contour
  /// call this.
  void validate() const {
    if (!(eps > 0.0 && eps < 2.0))
      throw UsageError("RegionGParams: eps = " + std::to_string(eps) + " outside (0, 2); override v0");
    if (!(V > eps)) throw UsageError("RegionGParams: V must exceed eps");
  }

  /// Lower edge v0 / sqrt(gamma(u)) of the region above u.
  double lower_boundary(double u) const { return v0 / std::sqrt(gamma_distance(u)); }
};

/// z in G iff -2 + eps <= u <= 2 - eps and v >= v0 / sqrt(gamma(u)).
inline bool region_contains(const RegionGParams& p, const ComplexPoint& z) {
  if (z.u() < -2.0 + p.eps || z.u() > 2.0 - p.eps) return false;
  return z.v() >= p.lower_boundary(z.u());
}

struct VerticalSegment {
  double x;
  double v_lo;
  double v_hi;
  std::size_t nodes;
};

/// Node layout of the contour: horizontal nodes k du, |k du| <= u_max, at
/// height V, and vertical segments over a partition of J'_eps = {|x| <= 2 - eps/2}.
struct ContourGrid {
  double V = 4.0;
  double du = 0.0;
  double dv = 0.0;
  double u_max = 0.0;
  std::size_t horizontal_nodes = 0;
  std::vector<VerticalSegment> vertical;

  std::size_t total_nodes() const {
    std::size_t t = horizontal_nodes;
    for (const auto& s : vertical) t += s.nodes;
    return t;
  }

  /// Visits (segment id, u, v); segment 0 is the horizontal line.
  void for_each_node(const std::function<void(std::size_t, double, double)>& visit) const {
    const long long half = static_cast<long long>(horizontal_nodes / 2);
    for (long long k = -half; k <= half; ++k) visit(0, static_cast<double>(k) * du, V);
    for (std::size_t s = 0; s < vertical.size(); ++s) {
      const auto& seg = vertical[s];
      for (std::size_t i = 0; i < seg.nodes; ++i) {
        const double v = seg.nodes == 1 ? seg.v_lo : seg.v_lo + (seg.v_hi - seg.v_lo) * i / (seg.nodes - 1);
        visit(s + 1, seg.x, v);
      }
    }
  }
};

/// Truncation for the horizontal integral: the integrand decays like u^{-2},
/// and int_{|u| > U} u^{-2} du = 2 / U, so U = 2 / tail_tol.
inline double horizontal_cutoff(double tail_tol) { return 2.0 / tail_tol; }

inline constexpr std::size_t kMaxGridNodes = 100'000'000;

inline ContourGrid contour_grid(const RegionGParams& p, double du, double dv, double tail_tol = 1e-6) {
  if (!(du > 0.0 && dv > 0.0)) throw UsageError("contour_grid: du and dv must be positive");
  ContourGrid g;
  g.V = p.V;
  g.du = du;
  g.dv = dv;
  g.u_max = horizontal_cutoff(tail_tol);
  const double half_count = std::floor(g.u_max / du);
  if (2.0 * half_count + 1.0 > static_cast<double>(kMaxGridNodes))
    throw UsageError("contour_grid: more than 1e8 nodes");
  g.horizontal_nodes = 2 * static_cast<std::size_t>(half_count) + 1;

  const double edge = 2.0 - 0.5 * p.eps;
  if (edge > 0.0) {
    const auto steps = static_cast<std::size_t>(std::ceil(2.0 * edge / du));
    for (std::size_t i = 0; i <= steps; ++i) {
      const double x = -edge + 2.0 * edge * i / static_cast<double>(std::max<std::size_t>(steps, 1));
      const double lo = p.lower_boundary(x);
      if (!(lo < p.V)) continue;
      const auto nodes = static_cast<std::size_t>(std::ceil((p.V - lo) / dv)) + 1;
      g.vertical.push_back({x, lo, p.V, nodes});
      if (static_cast<double>(g.total_nodes()) > static_cast<double>(kMaxGridNodes))
        throw UsageError("contour_grid: more than 1e8 nodes");
    }
  }
  return g;
}

inline void write_grid_csv(std::ostream& os, const ContourGrid& g) {
  os << "segment,u,v\n";
  os.precision(17);
  g.for_each_node([&](std::size_t seg, double u, double v) { os << seg << ',' << u << ',' << v << '\n'; });
}

}  // namespace rml
