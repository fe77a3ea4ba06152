#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature. The interval with the
// largest error estimate is bisected until the summed estimate drops below
// max(abs_tol, rel_tol |I|) or the interval budget is exhausted.

#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <vector>

namespace rml {

template <typename T>
struct QuadratureResult {
  T value{};
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

namespace detail {

inline double magnitude(double x) { return std::fabs(x); }
inline double magnitude(const std::complex<double>& x) { return std::abs(x); }

// Nodes on [0, 1]: Kronrod abscissae with Gauss nodes at odd positions.
inline constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename T, typename F>
Segment<T> gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T kronrod = fc * kWgk[7];
  T gauss = fc * kWg[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kXgk[i];
    const T sum = f(center - dx) + f(center + dx);
    kronrod += sum * kWgk[i];
    if (i % 2 == 1) gauss += sum * kWg[i / 2];
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, magnitude(kronrod - gauss)};
}

}  // namespace detail

template <typename T = double, typename F>
QuadratureResult<T> integrate_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                                       std::size_t max_intervals = 20000) {
  std::priority_queue<detail::Segment<T>> heap;
  auto first = detail::gk15<T>(f, a, b);
  T total = first.value;
  double err = first.error;
  heap.push(first);
  while (err > std::max(abs_tol, rel_tol * detail::magnitude(total)) && heap.size() < max_intervals) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    auto left = detail::gk15<T>(f, worst.a, mid);
    auto right = detail::gk15<T>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the incremental updates.
  QuadratureResult<T> out;
  out.intervals = heap.size();
  T sum{};
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  out.value = sum;
  out.error = esum;
  out.converged = esum <= std::max(abs_tol, rel_tol * detail::magnitude(sum));
  return out;
}

}  // namespace rml
