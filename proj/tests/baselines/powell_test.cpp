#include <gtest/gtest.h>

#include <cmath>

#include "echelon/baselines/powell.hpp"

namespace echelon {
namespace {

TEST(Powell, OneDimensionalQuadratic) {
  const auto r = powell_minimize([](std::span<const double> x) { return (x[0] - 3.0) * (x[0] - 3.0); }, {0.0});
  EXPECT_NEAR(r.x[0], 3.0, 1e-4);
  EXPECT_TRUE(r.converged);
}

TEST(Powell, SeparableQuadratic) {
  const auto r = powell_minimize(
      [](std::span<const double> x) {
        return (x[0] - 1.0) * (x[0] - 1.0) + 10.0 * (x[1] + 2.0) * (x[1] + 2.0);
      },
      {0.0, 0.0});
  EXPECT_NEAR(r.x[0], 1.0, 1e-3);
  EXPECT_NEAR(r.x[1], -2.0, 1e-3);
}

TEST(Powell, Rosenbrock) {
  const auto r = powell_minimize(
      [](std::span<const double> x) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
      },
      {-1.2, 1.0});
  EXPECT_LT(r.f, 1e-4);
  EXPECT_NEAR(r.x[0], 1.0, 2e-2);
}

TEST(Powell, NeverWorseThanStart) {
  // A step function: every move off the start is uphill or flat.
  const auto f = [](std::span<const double> x) { return std::floor(std::abs(x[0]) + std::abs(x[1])); };
  const auto r = powell_minimize(f, {0.25, 0.25});
  EXPECT_LE(r.f, f(std::vector<double>{0.25, 0.25}));
}

TEST(Powell, ProjectsToNonnegative) {
  PowellOptions o;
  o.project_nonnegative = true;
  const auto r = powell_minimize([](std::span<const double> x) { return (x[0] + 5.0) * (x[0] + 5.0); }, {2.0}, o);
  EXPECT_EQ(r.x[0], 0.0);
  EXPECT_DOUBLE_EQ(r.f, 25.0);
}

TEST(Powell, NonFiniteObjectiveAborts) {
  EXPECT_THROW(powell_minimize([](std::span<const double> x) { return x[0] > 0.5 ? NAN : -x[0]; }, {0.0}),
               OptimizationError);
}

TEST(Powell, DirectionSetSpans) {
  const auto r = powell_minimize(
      [](std::span<const double> x) {
        const double u = x[0] + x[1] - 1.0;
        const double v = x[0] - 2.0 * x[1] + x[2];
        return u * u + 3.0 * v * v + (x[2] - 0.5) * (x[2] - 0.5);
      },
      {0.0, 0.0, 0.0});
  ASSERT_EQ(r.state.directions.size(), 3u);
  EXPECT_LT(r.f, 1e-8);
}

}  // namespace
}  // namespace echelon
