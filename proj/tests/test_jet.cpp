#include <cmath>

#include <gtest/gtest.h>

#include "wrinkle/jet.hpp"

using wrinkle::Jet;

TEST(Jet, PolynomialProductIsExact) {
  const auto x = Jet<4>::variable(0.5, 0);
  const auto y = Jet<4>::variable(-1.0, 1);
  const auto f = x * x * y + 3.0 * y * y;
  // f = x^2 y + 3 y^2 at (0.5, -1)
  EXPECT_DOUBLE_EQ(f.value(), 0.25 * -1.0 + 3.0);
  EXPECT_DOUBLE_EQ(f.partial(1, 0), 2.0 * 0.5 * -1.0);
  EXPECT_DOUBLE_EQ(f.partial(0, 1), 0.25 + 6.0 * -1.0);
  EXPECT_DOUBLE_EQ(f.partial(2, 1), 2.0);
  EXPECT_DOUBLE_EQ(f.partial(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(f.partial(0, 2), 6.0);
  EXPECT_DOUBLE_EQ(f.partial(3, 0), 0.0);
}

TEST(Jet, ElementaryFunctionsMatchClosedForms) {
  const double x0 = 0.3, y0 = 0.7;
  const auto x = Jet<4>::variable(x0, 0);
  const auto y = Jet<4>::variable(y0, 1);
  const auto s = sin(2.0 * x + y);
  const double ph = 2.0 * x0 + y0;
  EXPECT_NEAR(s.partial(0, 0), std::sin(ph), 1e-15);
  EXPECT_NEAR(s.partial(1, 0), 2.0 * std::cos(ph), 1e-15);
  EXPECT_NEAR(s.partial(2, 1), -4.0 * std::cos(ph), 1e-14);
  EXPECT_NEAR(s.partial(4, 0), 16.0 * std::sin(ph), 1e-13);

  const auto r = sqrt(1.0 + x * x + y * y);
  const double r0 = std::sqrt(1.0 + x0 * x0 + y0 * y0);
  EXPECT_NEAR(r.value(), r0, 1e-15);
  EXPECT_NEAR(r.partial(1, 0), x0 / r0, 1e-15);
  EXPECT_NEAR(r.partial(1, 1), -x0 * y0 / (r0 * r0 * r0), 1e-15);

  const auto q = x / (1.0 + y);
  EXPECT_NEAR(q.partial(1, 2), 2.0 / std::pow(1.0 + y0, 3), 1e-14);
}

TEST(Jet, DerivativeAndTruncate) {
  const auto x = Jet<3>::variable(1.0, 0);
  const auto y = Jet<3>::variable(2.0, 1);
  const auto f = x * x * x * y;
  const auto fx = wrinkle::derivative(f, 0);
  EXPECT_DOUBLE_EQ(fx.value(), 3.0 * 2.0);
  EXPECT_DOUBLE_EQ(fx.partial(1, 1), 6.0);
  const auto t = wrinkle::truncate<1>(f);
  EXPECT_DOUBLE_EQ(t.partial(0, 1), 1.0);
}
