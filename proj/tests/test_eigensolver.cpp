#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rml/eigensolver.hpp"
#include "rml/ensemble.hpp"

using namespace rml;

namespace {

DenseMatrix to_dense(const Eigen::MatrixXd& m) {
  DenseMatrix a(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index j = 0; j < m.rows(); ++j)
    for (Eigen::Index k = 0; k < m.cols(); ++k) a(j, k) = m(j, k);
  return a;
}

// Characteristic polynomial coefficients by Faddeev-LeVerrier:
// det(xI - A) = x^n + c[n-1] x^{n-1} + ... + c[0].
std::vector<double> char_poly(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  std::vector<double> c(n + 1, 0.0);
  c[n] = 1.0;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + c[n - k + 1] * Eigen::MatrixXd::Identity(n, n);
    c[n - k] = -(a * m).trace() / static_cast<double>(k);
  }
  return c;
}

double eval_poly(const std::vector<double>& c, double x) {
  double r = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
  return r;
}

}  // namespace

TEST(Eigensolver, TwoByTwoClosedForm) {
  DenseMatrix a(2);
  a(0, 0) = 1.0;
  a(1, 1) = -2.0;
  a(0, 1) = a(1, 0) = 0.5;
  const auto v = symmetric_eigenvalues(a);
  const double m = -0.5, r = std::sqrt(1.5 * 1.5 + 0.25);
  EXPECT_NEAR(v[0], m - r, 1e-15);
  EXPECT_NEAR(v[1], m + r, 1e-15);
}

TEST(Eigensolver, OneByOne) {
  DenseMatrix a(1, 3.5);
  EXPECT_EQ(symmetric_eigenvalues(a), std::vector<double>{3.5});
}

TEST(Eigensolver, DiagonalAlreadySorted) {
  DenseMatrix a(4);
  a(0, 0) = 3;
  a(1, 1) = -1;
  a(2, 2) = 2;
  a(3, 3) = 0;
  EXPECT_EQ(symmetric_eigenvalues(a), (std::vector<double>{-1, 0, 2, 3}));
}

TEST(Eigensolver, FiveByFiveCharacteristicPolynomial) {
  const auto s = sample_wigner(EntryLaw::two_point(0.3), 5, 77);
  const auto w = oracle::dense_w(s);
  const auto c = char_poly(w);
  const auto v = symmetric_eigenvalues(to_dense(w));
  for (double lam : v) {
    // Bisect for a root of the characteristic polynomial near lam.
    double lo = lam - 1e-6, hi = lam + 1e-6;
    const double flo = eval_poly(c, lo), fhi = eval_poly(c, hi);
    ASSERT_LE(flo * fhi, 0.0) << "no sign change around " << lam;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if ((eval_poly(c, mid) <= 0.0) == (flo <= 0.0)) lo = mid;
      else hi = mid;
    }
    EXPECT_NEAR(lam, 0.5 * (lo + hi), 1e-9);
  }
}

class EigenAgreement : public ::testing::TestWithParam<std::size_t> {};

TEST_P(EigenAgreement, MatchesEigen) {
  const std::size_t n = GetParam();
  const auto s = sample_wigner(EntryLaw::truncated_gaussian(3.0), n, 1234 + n);
  const auto w = oracle::dense_w(s);
  const auto ref = oracle::eigen_values(w);
  const auto v = symmetric_eigenvalues(s.scaled_dense());
  ASSERT_EQ(v.size(), ref.size());
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(v[i], ref[i], 1e-11) << i;
}

INSTANTIATE_TEST_SUITE_P(Sizes, EigenAgreement, ::testing::Values(2, 3, 7, 16, 33, 100, 257));

TEST(Eigensolver, ResidualAndOrthogonality) {
  const std::size_t n = 60;
  const auto s = sample_wigner(EntryLaw::rademacher(), n, 5);
  const auto w = oracle::dense_w(s);
  const auto e = symmetric_eigensystem(s.scaled_dense());
  Eigen::MatrixXd q(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) q(j, k) = e.vectors(j, k);
  const Eigen::VectorXd lam = Eigen::Map<const Eigen::VectorXd>(e.values.data(), n);
  EXPECT_LT((w * q - q * lam.asDiagonal()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((q.transpose() * q - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
  for (std::size_t i = 1; i < n; ++i) EXPECT_LE(e.values[i - 1], e.values[i]);
}

TEST(Eigensolver, ShiftMovesEveryEigenvalue) {
  const std::size_t n = 40;
  const auto s = sample_wigner(EntryLaw::rademacher(), n, 9);
  auto a = s.scaled_dense();
  const auto base = symmetric_eigenvalues(a);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += 0.75;
  const auto shifted = symmetric_eigenvalues(a);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(shifted[i], base[i] + 0.75, 1e-12);
}
