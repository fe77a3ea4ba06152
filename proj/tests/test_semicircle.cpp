#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rml/semicircle.hpp"

using namespace rml;

TEST(Semicircle, TransformKnownValues) {
  EXPECT_NEAR(std::abs(s_transform({0, 2}) - cplx(0, std::sqrt(2.0) - 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s_transform({0, 1}) - cplx(0, (std::sqrt(5.0) - 1) / 2)), 0.0, 1e-15);
  const cplx big = s_transform({0, 100});
  EXPECT_NEAR(big.imag(), 2.0 / (std::sqrt(10004.0) + 100), 1e-17);
  EXPECT_NEAR(big.imag(), 0.00999900019995, 1e-13);
  EXPECT_THROW(s_transform({0.5, 0.0}), UsageError);
}

TEST(Semicircle, TransformSolvesQuadraticOnGrid) {
  for (int a = 0; a < 100; ++a)
    for (int b = 0; b < 100; ++b) {
      const cplx z(-5.0 + 10.0 * a / 99.0, 1e-3 + 5.0 * b / 99.0);
      const cplx s = s_transform(z);
      ASSERT_LT(std::abs(s * s + z * s + 1.0), 1e-12) << z;
      ASSERT_GT(s.imag(), 0.0) << z;
    }
}

TEST(Semicircle, TransformReflection) {
  for (double u : {-3.0, -1.1, 0.0, 0.4, 2.0, 7.0})
    for (double v : {1e-4, 0.1, 1.0}) {
      const cplx a = s_transform({u, v}), b = s_transform({-u, v});
      EXPECT_NEAR(a.real(), -b.real(), 1e-14);
      EXPECT_NEAR(a.imag(), b.imag(), 1e-14);
    }
}

TEST(Semicircle, TransformMatchesDensityIntegral) {
  for (const cplx z : {cplx(0.5, 0.3), cplx(-2.5, 0.1), cplx(1.9, 0.05)}) {
    boost::math::quadrature::tanh_sinh<double> ts;
    const double re = ts.integrate([z](double x) { return (semicircle_pdf(x) / (x - z)).real(); }, -2.0, 2.0);
    const double im = ts.integrate([z](double x) { return (semicircle_pdf(x) / (x - z)).imag(); }, -2.0, 2.0);
    EXPECT_NEAR(std::abs(s_transform(z) - cplx(re, im)), 0.0, 1e-8) << z;
  }
}

TEST(Semicircle, CdfAgainstQuadrature) {
  for (int i = 0; i < 1000; ++i) {
    const double x = -2.2 + 4.4 * i / 999.0;
    ASSERT_NEAR(semicircle_cdf(x), oracle::semicircle_cdf_quad(x), 1e-12) << x;
  }
  EXPECT_NEAR(semicircle_cdf(1.0), 0.8044988905221148, 1e-15);
  EXPECT_EQ(semicircle_cdf(0.0), 0.5);
  EXPECT_EQ(semicircle_cdf(-3.0), 0.0);
  EXPECT_EQ(semicircle_cdf(2.0), 1.0);
}

TEST(Semicircle, DensityIntegratesToOne) {
  boost::math::quadrature::gauss_kronrod<double, 61> gk;
  EXPECT_NEAR(gk.integrate(semicircle_pdf, -2.0, 2.0, 15, 1e-14), 1.0, 1e-12);
}

TEST(Semicircle, QuantileRoundTrip) {
  for (int i = 1; i <= 999; ++i) {
    const double q = i / 1000.0;
    ASSERT_NEAR(semicircle_cdf(semicircle_quantile(q)), q, 1e-12) << q;
  }
  EXPECT_EQ(semicircle_quantile(1.0), 2.0);
  EXPECT_EQ(semicircle_quantile(0.5), 0.0);
  EXPECT_NEAR(semicircle_quantile(0.8044988905221148), 1.0, 1e-11);
  EXPECT_THROW(semicircle_quantile(0.0), UsageError);
  EXPECT_THROW(semicircle_quantile(1.5), UsageError);
}

TEST(Semicircle, CauchyConstant) {
  // Find a with (1/pi) int_{-a}^{a} du / (1 + u^2) = 3/4 by bisection on a quadrature.
  auto mass = [](double a) {
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate([](double u) { return 1.0 / (M_PI * (1 + u * u)); }, -a, a);
  };
  double lo = 0.0, hi = 10.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) < 0.75 ? lo : hi) = mid;
  }
  EXPECT_NEAR(compute_a_constant(), 0.5 * (lo + hi), 1e-9);
  EXPECT_NEAR(compute_a_constant(), 1.0 + std::sqrt(2.0), 1e-14);
}
