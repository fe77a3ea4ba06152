#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "oracles.hpp"
#include "rml/spectral.hpp"

using namespace rml;

TEST(Esd, CountsAtMostX) {
  const auto s = Spectrum::from_values({0.5, -1.0, 0.5, 2.0});
  EXPECT_EQ(esd_cdf(s, -2.0), 0.0);
  EXPECT_EQ(esd_cdf(s, -1.0), 0.25);
  EXPECT_EQ(esd_cdf(s, 0.4999), 0.25);
  EXPECT_EQ(esd_cdf(s, 0.5), 0.75);
  EXPECT_EQ(esd_cdf(s, 3.0), 1.0);
}

TEST(Kolmogorov, SingleAtomAtZero) {
  EXPECT_DOUBLE_EQ(kolmogorov_distance(Spectrum::from_values({0.0})), 0.5);
}

TEST(Kolmogorov, TwoAtoms) {
  EXPECT_NEAR(kolmogorov_distance(Spectrum::from_values({-1.0, 1.0})), 0.3044988905221148, 1e-15);
}

TEST(Kolmogorov, AtomsOutsideSupport) {
  EXPECT_DOUBLE_EQ(kolmogorov_distance(Spectrum::from_values({5.0})), 1.0);
  EXPECT_DOUBLE_EQ(kolmogorov_distance(Spectrum::from_values({-5.0, 5.0})), 0.5);
}

TEST(Kolmogorov, AgreesWithGridOracle) {
  const std::size_t points = 2'000'001;  // spacing 2.5e-6, G' <= 1/pi
  for (int r = 0; r < 50; ++r) {
    const std::size_t n = 20 + 7 * static_cast<std::size_t>(r);
    const auto law = r % 2 ? EntryLaw::rademacher() : EntryLaw::two_point(0.3);
    const auto spec = eigenvalues(sample_wigner(law, n, 500 + r));
    const double exact = kolmogorov_distance(spec);
    const double grid = oracle::kolmogorov_grid(spec.lambdas, points);
    EXPECT_GE(exact, grid - 1e-12) << r;
    EXPECT_NEAR(exact, grid, 2e-6) << r;
  }
}

TEST(Eigenvalues, ValidationModeAgrees) {
  const auto sample = sample_wigner(EntryLaw::rademacher(), 50, 3);
  const auto a = eigenvalues(sample), b = eigenvalues(sample, true);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_NEAR(a.lambdas[i], b.lambdas[i], 1e-12);
  EXPECT_LT(b.max_residual, 1e-12);
  EXPECT_LT(a.trace_error, 1e-11);
}

TEST(Quantiles, Antisymmetric) {
  for (auto conv : {QuantileConvention::upper, QuantileConvention::midpoint}) {
    const auto q = semicircle_quantiles(101, conv);
    for (std::size_t j = 1; j < 101; ++j) EXPECT_LT(q.gammas[j - 1], q.gammas[j]);
  }
  const auto mid = semicircle_quantiles(100, QuantileConvention::midpoint);
  for (std::size_t j = 0; j < 100; ++j) EXPECT_EQ(mid.gammas[j], -mid.gammas[99 - j]);
  const auto up = semicircle_quantiles(100);
  for (std::size_t j = 0; j < 99; ++j) EXPECT_EQ(up.gammas[j], -up.gammas[98 - j]);
  EXPECT_EQ(up.gammas[99], 2.0);
  EXPECT_EQ(up.gammas[49], 0.0);
}

TEST(Quantiles, LevelsMatchCdf) {
  const auto q = semicircle_quantiles(64, QuantileConvention::midpoint);
  for (std::size_t j = 1; j <= 64; ++j) EXPECT_NEAR(semicircle_cdf(q.gammas[j - 1]), (2.0 * j - 1) / 128.0, 1e-12);
}

TEST(Quantiles, CacheRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "rml_quantile_cache_test";
  std::filesystem::remove_all(dir);
  const auto a = cached_quantiles(dir, 77);
  EXPECT_TRUE(std::filesystem::exists(dir / "quantiles_n77_upper.csv"));
  const auto b = cached_quantiles(dir, 77);
  EXPECT_EQ(a.gammas, b.gammas);
  EXPECT_EQ(a.gammas, semicircle_quantiles(77).gammas);
  std::filesystem::remove_all(dir);
}

TEST(Rigidity, QuantilesThemselvesGiveZero) {
  const std::size_t n = 200000;
  const auto q = semicircle_quantiles(n);
  const auto r = rigidity_check(Spectrum::from_values(q.gammas), q, 1.0, 0.01);
  EXPECT_FALSE(r.empty_window);
  EXPECT_EQ(r.max_rho, 0.0);
  EXPECT_TRUE(r.violations.empty());
}

TEST(Rigidity, EmptyWindowAtSmallN) {
  const auto q = semicircle_quantiles(64);
  const auto r = rigidity_check(Spectrum::from_values(q.gammas), q, 1.0, 1.0);
  EXPECT_TRUE(r.empty_window);
  EXPECT_TRUE(r.rho.empty());
}

TEST(Rigidity, FlagsDisplacedEigenvalue) {
  const std::size_t n = 4096;
  const auto q = semicircle_quantiles(n);
  auto values = q.gammas;
  const std::size_t j = 2048;  // 1-based
  values[j - 1] += 0.5 * (values[j] - values[j - 1]);
  const auto r = rigidity_check(Spectrum::from_values(values), q, 1e-6, 0.01);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0], j);
  const double log5 = std::pow(std::log(4096.0), 5);
  const double expected = std::fabs(values[j - 1] - q.gammas[j - 1]) * std::pow(4096.0, 2.0 / 3.0) *
                          std::cbrt(static_cast<double>(std::min(j, n - j + 1))) / log5;
  EXPECT_NEAR(r.max_rho, expected, 1e-12 * expected);
}

TEST(Spectrum, CsvRoundTrip) {
  const auto s = eigenvalues(sample_wigner(EntryLaw::rademacher(), 12, 1));
  std::stringstream ss;
  write_spectrum_csv(ss, s);
  EXPECT_EQ(read_spectrum_csv(ss).lambdas, s.lambdas);
}
