#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "rml/stieltjes.hpp"

using namespace rml;

TEST(MTransform, SingleAtom) {
  const auto s = Spectrum::from_values({0.0});
  EXPECT_NEAR(std::abs(m_transform(s, {0, 1}) - cplx(0, 1)), 0.0, 1e-15);
  const auto t = Spectrum::from_values({-1.0, 1.0});
  // (1/2)(1/(-1-i) + 1/(1-i)) = i/2
  EXPECT_NEAR(std::abs(m_transform(t, {0, 1}) - cplx(0, 0.5)), 0.0, 1e-15);
}

TEST(MTransform, EqualsNormalizedTraceOfResolvent) {
  const auto sample = sample_wigner(EntryLaw::two_point(0.4), 30, 8);
  const ComplexPoint z(0.3, 0.2);
  const auto inv = oracle::inverse_shift(oracle::dense_w(sample), z.z());
  EXPECT_NEAR(std::abs(m_transform(eigenvalues(sample), z) - inv.trace() / 30.0), 0.0, 1e-12);
}

TEST(MTransform, ImaginaryPartBound) {
  const auto s = eigenvalues(sample_wigner(EntryLaw::rademacher(), 40, 2));
  for (double v : {0.01, 0.3, 2.0}) {
    const cplx m = m_transform(s, {0.1, v});
    EXPECT_GT(m.imag(), 0.0);
    EXPECT_LE(std::abs(m), 1.0 / v + 1e-15);
  }
}

TEST(ComplexPoint, RejectsRealAxis) {
  EXPECT_THROW(ComplexPoint(0.0, 0.0), UsageError);
  EXPECT_THROW(ComplexPoint(0.0, -1.0), UsageError);
}

TEST(Region, DefaultParameters) {
  const auto p = RegionGParams::make(10000);
  const double logn = std::log(1e4);
  EXPECT_NEAR(p.v0, std::pow(logn, 4) / 1e4, 1e-15);
  EXPECT_NEAR(std::pow(p.eps, 1.5), 2.0 * p.v0 * p.a_const, 1e-12);
  EXPECT_NEAR(p.lower_boundary(0.0), 0.50888, 1e-4);
  EXPECT_GT(p.eps, 2.0);
  EXPECT_THROW(p.validate(), UsageError);
}

TEST(Region, Membership) {
  const auto p = RegionGParams::make(10000, 1.0, std::nullopt, 4.0, 0.5);
  const double edge = p.lower_boundary(0.0);
  EXPECT_TRUE(region_contains(p, {0.0, 0.509}));
  EXPECT_FALSE(region_contains(p, {0.0, 0.508}));
  EXPECT_TRUE(region_contains(p, {0.0, edge}));
  EXPECT_FALSE(region_contains(p, {1.6, 10.0}));
  EXPECT_TRUE(region_contains(p, {1.5, p.lower_boundary(1.5)}));
  EXPECT_FALSE(region_contains(p, {-1.51, 10.0}));
}

TEST(Region, MonotoneInV) {
  const auto p = RegionGParams::make(4096, 1.0, 10.0 / 4096);
  p.validate();
  for (double u : {-1.2, 0.0, 0.7, 1.9}) {
    bool seen = false;
    for (int i = 1; i <= 400; ++i) {
      const bool in = region_contains(p, {u, i * 0.001});
      if (seen) EXPECT_TRUE(in) << u << ' ' << i;
      seen = seen || in;
    }
  }
}

TEST(Region, LowerBoundaryFormula) {
  const auto p = RegionGParams::make(512, 2.0, 0.01);
  EXPECT_DOUBLE_EQ(p.lower_boundary(1.0), 0.01);
  EXPECT_DOUBLE_EQ(p.lower_boundary(-1.75), 0.02);
  EXPECT_EQ(gamma_distance(-3.0), 1.0);
}

TEST(Grid, SymmetricAndAnchored) {
  const auto p = RegionGParams::make(1000, 1.0, 0.01, 4.0, 1.0);
  const auto g = contour_grid(p, 0.125, 0.05, 1e-3);
  EXPECT_EQ(g.horizontal_nodes, 2u * 16000u + 1u);
  const auto& seg = g.vertical;
  ASSERT_FALSE(seg.empty());
  for (std::size_t i = 0; i < seg.size(); ++i) {
    EXPECT_NEAR(seg[i].x, -seg[seg.size() - 1 - i].x, 1e-14);
    EXPECT_NEAR(seg[i].v_lo, seg[seg.size() - 1 - i].v_lo, 1e-14);
    EXPECT_EQ(seg[i].v_hi, 4.0);
  }
  bool found = false;
  for (const auto& s : seg)
    if (std::fabs(s.x) < 1e-14) {
      found = true;
      EXPECT_NEAR(s.v_lo, 0.01 / std::sqrt(2.0), 1e-15);
    }
  EXPECT_TRUE(found);
  EXPECT_NEAR(seg.front().x, -1.5, 1e-15);
}

TEST(Grid, NodeVisitsMatchCount) {
  const auto p = RegionGParams::make(1000, 1.0, 0.01, 4.0, 1.0);
  const auto g = contour_grid(p, 0.25, 0.5, 1e-2);
  std::size_t visited = 0;
  g.for_each_node([&](std::size_t, double, double v) {
    ++visited;
    EXPECT_GT(v, 0.0);
  });
  EXPECT_EQ(visited, g.total_nodes());
  std::stringstream ss;
  write_grid_csv(ss, g);
  std::size_t lines = 0;
  for (std::string line; std::getline(ss, line);) ++lines;
  EXPECT_EQ(lines, g.total_nodes() + 1);
}

TEST(Grid, RejectsHugeGrids) {
  const auto p = RegionGParams::make(1000, 1.0, 0.01, 4.0, 1.0);
  EXPECT_THROW(contour_grid(p, 1e-8, 0.1), UsageError);
  EXPECT_THROW(contour_grid(p, 0.0, 0.1), UsageError);
}
