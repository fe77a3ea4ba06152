#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "rml/entry_law.hpp"
#include "rml/rng.hpp"

using namespace rml;

namespace {

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// E[Y^k 1{|Y| <= t}] for standard normal Y, by quadrature.
double normal_partial_moment(int k, double t) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([k](double x) { return std::pow(x, k) * phi(x); }, -t, t);
}

}  // namespace

TEST(EntryLaw, RademacherMoments) {
  const auto law = EntryLaw::rademacher();
  EXPECT_DOUBLE_EQ(law.mean(), 0.0);
  EXPECT_DOUBLE_EQ(law.variance(), 1.0);
  EXPECT_DOUBLE_EQ(law.mu4(), 1.0);
  EXPECT_DOUBLE_EQ(law.mu8(), 1.0);
  EXPECT_DOUBLE_EQ(law.support_bound(), 1.0);
}

TEST(EntryLaw, TableThreePoint) {
  const double r3 = std::sqrt(3.0);
  const auto law = EntryLaw::table({{r3, 1.0 / 6}, {0.0, 2.0 / 3}, {-r3, 1.0 / 6}});
  EXPECT_NEAR(law.variance(), 1.0, 1e-12);
  EXPECT_NEAR(law.mu4(), 3.0, 1e-12);
}

TEST(EntryLaw, TableRejectsUnstandardized) {
  EXPECT_THROW(EntryLaw::table({{1.0, 0.5}, {0.0, 0.5}}), UsageError);
  EXPECT_THROW(EntryLaw::table({{2.0, 0.5}, {-2.0, 0.5}}), UsageError);
}

TEST(EntryLaw, TwoPointStandardized) {
  const auto law = EntryLaw::two_point(0.2);
  EXPECT_NEAR(law.mean(), 0.0, 1e-12);
  EXPECT_NEAR(law.variance(), 1.0, 1e-12);
  // values 2 w.p. 1/5 and -1/2 w.p. 4/5
  EXPECT_NEAR(law.atoms().back().value, 2.0, 1e-15);
  EXPECT_NEAR(law.atoms().front().value, -0.5, 1e-15);
  EXPECT_NEAR(law.mu4(), 0.2 * 16 + 0.8 * 0.0625, 1e-12);
}

TEST(EntryLaw, TwoPointSampleMean) {
  const auto law = EntryLaw::two_point(0.2);
  double s = 0;
  const int N = 1000000;
  for (int i = 0; i < N; ++i) s += law.sample(cell_uniform(2024, static_cast<std::uint32_t>(i), 1));
  EXPECT_NEAR(s / N, 0.0, 3e-3);
}

TEST(EntryLaw, GaussianMoments) {
  const auto law = EntryLaw::truncated_gaussian(std::numeric_limits<double>::infinity());
  EXPECT_NEAR(law.variance(), 1.0, 1e-14);
  EXPECT_NEAR(law.mu4(), 3.0, 1e-12);
  EXPECT_NEAR(law.mu8(), 105.0, 1e-9);
  EXPECT_TRUE(std::isinf(law.support_bound()));
}

TEST(EntryLaw, TruncatedGaussianCutoffTen) {
  const auto law = EntryLaw::truncated_gaussian(10.0);
  EXPECT_NEAR(law.mu4(), 3.0, 1e-6);
  EXPECT_NEAR(law.variance(), 1.0, 1e-12);
}

TEST(EntryLaw, TruncatedGaussianAgainstQuadrature) {
  const double T = 1.5;
  const auto law = EntryLaw::truncated_gaussian(T);
  const double mass = normal_partial_moment(0, T);
  const double var = normal_partial_moment(2, T) / mass;
  EXPECT_NEAR(law.mu4(), normal_partial_moment(4, T) / mass / (var * var), 1e-10);
  EXPECT_NEAR(law.support_bound(), T / std::sqrt(var), 1e-12);
}

TEST(EntryLaw, TruncatedGaussianSampleStaysInSupport) {
  const auto law = EntryLaw::truncated_gaussian(1.5);
  double s2 = 0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double x = law.sample(cell_uniform(1, static_cast<std::uint32_t>(i), 0));
    ASSERT_LE(std::fabs(x), law.support_bound() + 1e-12);
    s2 += x * x;
  }
  EXPECT_NEAR(s2 / N, 1.0, 1e-2);
}

TEST(EntryLaw, RescaledGaussianStageMatchesQuadrature) {
  const auto law = EntryLaw::truncated_gaussian(std::numeric_limits<double>::infinity());
  const auto t = law.truncated_rescaled(1.0);
  const double m2 = normal_partial_moment(2, 1.0);
  EXPECT_NEAR(t.truncation()->scale * t.truncation()->scale, m2, 1e-10);
  EXPECT_NEAR(t.truncation()->shift, 0.0, 1e-15);
  EXPECT_NEAR(t.mean(), 0.0, 1e-10);
  EXPECT_NEAR(t.variance(), 1.0, 1e-10);
}

TEST(EntryLaw, RescaledAsymmetricLawIsStandardized) {
  const auto law = EntryLaw::two_point(0.1);  // values 3 and -1/3
  const auto t = law.truncated_rescaled(2.0);
  // The atom at 3 is zeroed: X_hat is 0 w.p. 0.1, -1/3 w.p. 0.9.
  const double m = -0.3, v = 0.9 / 9.0 - m * m;
  EXPECT_NEAR(t.truncation()->shift, m, 1e-15);
  EXPECT_NEAR(t.truncation()->scale, std::sqrt(v), 1e-15);
  EXPECT_NEAR(t.mean(), 0.0, 1e-12);
  EXPECT_NEAR(t.variance(), 1.0, 1e-12);
}

TEST(EntryLaw, DegenerateTruncationFails) {
  EXPECT_THROW(EntryLaw::rademacher().truncated_rescaled(0.5), NumericalError);
}

TEST(EntryLaw, FromConfig) {
  EXPECT_EQ(law_from_config({{"kind", "rademacher"}}).id(), "rademacher");
  EXPECT_NEAR(law_from_config({{"kind", "two_point"}, {"p", "0.2"}}).mu4(), 3.25, 1e-12);
  EXPECT_NEAR(law_from_config({{"kind", "gaussian"}}).mu4(), 3.0, 1e-12);
  EXPECT_NEAR(law_from_config({{"kind", "table"}, {"values", "1.7320508075688772, 0, -1.7320508075688772"},
                               {"probs", "0.16666666666666666, 0.6666666666666667, 0.16666666666666666"}})
                  .mu4(),
              3.0, 1e-12);
  EXPECT_THROW(law_from_config({{"kind", "cauchy"}}), UsageError);
  EXPECT_THROW(law_from_config({{"kind", "two_point"}}), UsageError);
  EXPECT_THROW(law_from_config({{"kind", "two_point"}, {"p", "x"}}), UsageError);
}
