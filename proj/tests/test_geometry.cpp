#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "glsim/geometry.hpp"

using namespace glsim;

namespace {

ErrorKind kind_of(int dim, double r0, double r1, std::size_t M) {
  try {
    build_grid(dim, r0, r1, M);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::validation_error;
}

double weight_sum(const RadialGrid& g) {
  double s = 0.0;
  for (double w : g.volume_weights()) s += w;
  return s;
}

}  // namespace

TEST(BuildGrid, UniformUnitInterval) {
  const RadialGrid g = build_grid(1, 0.0, 1.0, 10);
  ASSERT_EQ(g.size(), 11u);
  EXPECT_EQ(g.cells(), 10u);
  EXPECT_DOUBLE_EQ(g.h(), 0.1);
  for (std::size_t j = 0; j <= 10; ++j) EXPECT_NEAR(g.node(j), 0.1 * j, 1e-15);
  EXPECT_EQ(g.node(10), 1.0);
}

TEST(BuildGrid, RejectsBadInput) {
  EXPECT_EQ(kind_of(2, 0.0, 1.0, 10), ErrorKind::invalid_radii);
  EXPECT_EQ(kind_of(3, 0.0, 1.0, 10), ErrorKind::invalid_radii);
  EXPECT_EQ(kind_of(1, 1.0, 1.0, 10), ErrorKind::invalid_radii);
  EXPECT_EQ(kind_of(1, 1.0, 0.5, 10), ErrorKind::invalid_radii);
  EXPECT_EQ(kind_of(1, -0.5, 0.5, 10), ErrorKind::invalid_radii);
  EXPECT_EQ(kind_of(0, 0.0, 1.0, 10), ErrorKind::invalid_dimension);
  EXPECT_EQ(kind_of(4, 0.5, 1.0, 10), ErrorKind::invalid_dimension);
  EXPECT_EQ(kind_of(1, 0.0, 1.0, 3), ErrorKind::too_coarse);
  EXPECT_NO_THROW(build_grid(1, 0.0, 1.0, 4));
}

TEST(BuildGrid, ShellVolumeConvergesAtOrderTwo) {
  // The trapezoid error for the quadratic density 4 pi r^2 is exactly
  // (r1 - r0) h^2 / 12 * 8 pi.
  const double exact = 4.0 * std::numbers::pi * (1.5 * 1.5 * 1.5 - 0.5 * 0.5 * 0.5) / 3.0;
  double prev_err = 0.0;
  for (std::size_t M : {64u, 128u, 256u}) {
    const RadialGrid g = build_grid(3, 0.5, 1.5, M);
    const double err = weight_sum(g) - exact;
    EXPECT_NEAR(err, g.h() * g.h() / 12.0 * 8.0 * std::numbers::pi, 1e-12);
    if (prev_err != 0.0) {
      EXPECT_NEAR(prev_err / err, 4.0, 1e-6);
    }
    prev_err = err;
  }
}

TEST(BuildGrid, TrapezoidExactOnLinearIntegrands) {
  // N = 1: integral of (2 + 3r) over [0.25, 2]; N = 2: constant integrand on an annulus.
  const RadialGrid g1 = build_grid(1, 0.25, 2.0, 7);
  double s1 = 0.0;
  for (std::size_t j = 0; j < g1.size(); ++j) s1 += g1.weight(j) * (2.0 + 3.0 * g1.node(j));
  EXPECT_NEAR(s1, 2.0 * 1.75 + 1.5 * (4.0 - 0.0625), 1e-13);

  const RadialGrid g2 = build_grid(2, 0.5, 1.5, 9);
  EXPECT_NEAR(weight_sum(g2), std::numbers::pi * (2.25 - 0.25), 1e-13);
  EXPECT_NEAR(weight_sum(g2), g2.exact_volume(), 1e-13);
}

TEST(BuildGrid, WeightsAndNodes) {
  for (int dim : {1, 2, 3}) {
    const RadialGrid g = build_grid(dim, 0.5, 2.0, 33);
    for (std::size_t j = 0; j < g.size(); ++j) {
      EXPECT_GE(g.weight(j), 0.0);
      if (j > 0) {
        EXPECT_GT(g.node(j), g.node(j - 1));
      }
    }
    EXPECT_EQ(g.node(0), 0.5);
    EXPECT_EQ(g.node(g.cells()), 2.0);
  }
}

TEST(BuildGrid, SurfaceMeasure) {
  EXPECT_EQ(build_grid(1, 0.0, 3.0, 8).surface_measure(), 1.0);
  EXPECT_DOUBLE_EQ(build_grid(2, 0.5, 2.0, 8).surface_measure(), 4.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(build_grid(3, 0.5, 2.0, 8).surface_measure(), 16.0 * std::numbers::pi);
}

TEST(GeometricCondition, Examples) {
  const auto annulus = geometric_condition_check(build_grid(2, 0.5, 1.5, 16), 0.0);
  EXPECT_TRUE(annulus.holds);
  EXPECT_DOUBLE_EQ(annulus.inner_max, -0.5);
  EXPECT_DOUBLE_EQ(annulus.outer_min, 1.5);

  const RadialGrid unit = build_grid(1, 0.0, 1.0, 16);
  const auto centered = geometric_condition_check(unit, 0.0);
  EXPECT_TRUE(centered.holds);
  EXPECT_EQ(centered.inner_max, 0.0);
  EXPECT_EQ(centered.outer_min, 1.0);

  const auto far = geometric_condition_check(unit, 2.0);
  EXPECT_FALSE(far.holds);
  EXPECT_EQ(far.outer_min, -1.0);
}

TEST(GeometricCondition, OffsetBeyondInnerRadiusFails) {
  const RadialGrid shell = build_grid(3, 0.5, 1.5, 16);
  EXPECT_TRUE(geometric_condition_check(shell, 0.4).holds);
  EXPECT_FALSE(geometric_condition_check(shell, 0.6).holds);
}
