#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "wrinkle/surface_geometry.hpp"

using namespace wrinkle;

namespace {

std::vector<SurfaceChart> catalog() {
  return {SurfaceChart::plate(), SurfaceChart::cylinder(1.0), SurfaceChart::cylinder(2.5),
          SurfaceChart::graph({{"c11", 1.0}, {"c12", 0.3}, {"c22", -0.5}, {"t111", 0.2}, {"t122", 0.1}}),
          SurfaceChart::wavy(0.2, 2.0, 3.0, 0.1, 0.4)};
}

Vec3 psi(const SurfaceChart& c, double x1, double x2) {
  const auto p = c.position(x1, x2);
  return {p[0], p[1], p[2]};
}

// Independent oracle: tangents and curvature from central differences of psi.
struct FdGeometry {
  Vec3 a1, a2, n;
  Mat2 metric, b;
};

FdGeometry fd_geometry(const SurfaceChart& c, double x1, double x2, double h) {
  FdGeometry g;
  g.a1 = (psi(c, x1 + h, x2) - psi(c, x1 - h, x2)) / (2 * h);
  g.a2 = (psi(c, x1, x2 + h) - psi(c, x1, x2 - h)) / (2 * h);
  g.n = g.a1.cross(g.a2).normalized();
  const Vec3 p0 = psi(c, x1, x2);
  const Vec3 d11 = (psi(c, x1 + h, x2) - 2 * p0 + psi(c, x1 - h, x2)) / (h * h);
  const Vec3 d22 = (psi(c, x1, x2 + h) - 2 * p0 + psi(c, x1, x2 - h)) / (h * h);
  const Vec3 d12 = (psi(c, x1 + h, x2 + h) - psi(c, x1 + h, x2 - h) - psi(c, x1 - h, x2 + h) +
                    psi(c, x1 - h, x2 - h)) /
                   (4 * h * h);
  g.metric << g.a1.dot(g.a1), g.a1.dot(g.a2), g.a2.dot(g.a1), g.a2.dot(g.a2);
  g.b << g.n.dot(d11), g.n.dot(d12), g.n.dot(d12), g.n.dot(d22);
  return g;
}

double fit_slope(const std::vector<double>& h, const std::vector<double>& e) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double lx = std::log(h[i]), ly = std::log(e[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST(SurfaceGeometry, FlatPlate) {
  const auto g = eval_geometry(SurfaceChart::plate(), {0.3, 0.8});
  EXPECT_TRUE(g.metric.isApprox(Mat2::Identity()));
  EXPECT_DOUBLE_EQ(g.sqrt_a, 1.0);
  EXPECT_EQ(g.b.norm(), 0.0);
  EXPECT_EQ(g.christoffel[0].norm() + g.christoffel[1].norm(), 0.0);
  EXPECT_TRUE(g.a3.isApprox(Vec3(0, 0, 1)));
}

TEST(SurfaceGeometry, CylinderAtOrigin) {
  const auto g = eval_geometry(SurfaceChart::cylinder(1.0), {0.0, 0.0});
  EXPECT_NEAR(g.metric(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(g.metric(1, 1), 1.0, 1e-14);
  EXPECT_NEAR(g.metric(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(g.sqrt_a, 1.0, 1e-14);
  EXPECT_NEAR((g.a3 - Vec3(1, 0, 0)).norm(), 0.0, 1e-14);
  EXPECT_NEAR(g.b(0, 0), -1.0, 1e-14);
  EXPECT_NEAR(g.b(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(g.b(1, 1), 0.0, 1e-14);
  const auto fd = fd_geometry(SurfaceChart::cylinder(1.0), 0.0, 0.0, 1e-4);
  EXPECT_NEAR((fd.b - g.b).norm(), 0.0, 1e-6);
}

TEST(SurfaceGeometry, ParabolicGraphAtOrigin) {
  const auto chart = SurfaceChart::graph({{"c11", 1.0}});
  const auto g = eval_geometry(chart, {0.0, 0.0});
  EXPECT_NEAR(g.metric(0, 0), 1.0, 1e-15);
  EXPECT_NEAR((g.a3 - Vec3(0, 0, 1)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(g.b(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(g.b(1, 1), 0.0, 1e-15);
  EXPECT_NEAR(g.b(0, 1), 0.0, 1e-15);
}

TEST(SurfaceGeometry, MatchesFiniteDifferenceOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& chart : catalog()) {
    for (int s = 0; s < 20; ++s) {
      const double x1 = u(rng), x2 = u(rng);
      const auto g = eval_geometry(chart, {x1, x2});
      const auto fd = fd_geometry(chart, x1, x2, 1e-4);
      EXPECT_LT((g.a[0] - fd.a1).norm(), 1e-7) << chart.id();
      EXPECT_LT((g.a[1] - fd.a2).norm(), 1e-7) << chart.id();
      EXPECT_LT((g.metric - fd.metric).norm(), 1e-7) << chart.id();
      EXPECT_LT((g.b - fd.b).norm(), 1e-5) << chart.id();
    }
  }
}

TEST(SurfaceGeometry, PointwiseInvariantsOnRandomPoints) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& chart : catalog()) {
    for (int s = 0; s < 1000; ++s) {
      const Vec2 x(u(rng), u(rng));
      const auto g = eval_geometry(chart, x);
      const Mat2 prod = g.inv_metric * g.metric;
      EXPECT_LT((prod - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT(std::abs(std::abs(g.a3.norm()) - 1.0), 1e-12);
      for (int al = 0; al < 2; ++al) {
        EXPECT_LT(std::abs(g.a3.dot(g.a[al])), 1e-12);
        EXPECT_LT(std::abs(g.a[al].dot(g.k[0][2]) + g.sqrt_a * (al == 1)), 1e-12);
        EXPECT_LT(std::abs(g.a[al].dot(g.k[2][1]) + g.sqrt_a * (al == 0)), 1e-12);
      }
      EXPECT_LT(std::abs(g.b(0, 1) - g.b(1, 0)), 1e-12);
      Mat2 c;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) c(a, b) = g.bmix(0, a) * g.b(0, b) + g.bmix(1, a) * g.b(1, b);
      EXPECT_LT((c - g.c).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_GT(elasticity_tensor(g, 1.3, 0.7).min_rayleigh(), 0.0);
    }
  }
}

TEST(SurfaceGeometry, DerivativesConvergeAtSecondOrder) {
  for (const auto& chart : catalog()) {
    if (chart.kind == ChartKind::Plate) continue;
    const Vec2 x(0.37, 0.61);
    const auto g = eval_geometry(chart, x);
    std::vector<double> hs, err_metric, err_b;
    for (int k = 0; k < 5; ++k) {
      const double h = 0.05 * std::pow(0.5, k);
      double em = 0.0, eb = 0.0;
      for (int al = 0; al < 2; ++al) {
        Vec2 e = Vec2::Zero();
        e[al] = h;
        const auto gp = eval_geometry(chart, x + e);
        const auto gm = eval_geometry(chart, x - e);
        em = std::max(em, ((gp.metric - gm.metric) / (2 * h) - g.dmetric[al]).cwiseAbs().maxCoeff());
        eb = std::max(eb, ((gp.bmix - gm.bmix) / (2 * h) - g.db[al]).cwiseAbs().maxCoeff());
      }
      hs.push_back(h);
      err_metric.push_back(em);
      err_b.push_back(eb);
    }
    if (err_metric.back() > 1e-12) {
      EXPECT_GE(fit_slope(hs, err_metric), 1.8) << chart.id();
    }
    if (err_b.back() > 1e-12) {
      EXPECT_GE(fit_slope(hs, err_b), 1.8) << chart.id();
    }
  }
}

TEST(SurfaceGeometry, DegenerateChartThrows) {
  const SurfaceChart bad = SurfaceChart::cylinder(1.0);
  EXPECT_NO_THROW(eval_geometry(bad, {0.1, 0.1}));
  EXPECT_THROW(eval_geometry(bad, {0.1, 0.1}, 2.0), DegenerateMetric);
}

TEST(ShapeFunction, EggBoxDerivatives) {
  const auto theta = ShapeFunction::egg_box();
  const auto d = theta.eval({0.0, 0.0}, 3);
  const double pi = std::numbers::pi;
  EXPECT_NEAR(d.value, 0.0, 1e-15);
  EXPECT_NEAR(d.grad[0], 0.0, 1e-14);
  EXPECT_NEAR(d.hess(0, 1), 4 * pi * pi, 1e-12);
  // step sweep of central differences on the gradient
  const Vec2 y(0.23, 0.71);
  const auto dy = theta.eval(y, 3);
  double prev = 1e300;
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    const double fd = (theta.eval(y + Vec2(0, h), 1).grad[0] - theta.eval(y - Vec2(0, h), 1).grad[0]) / (2 * h);
    const double err = std::abs(fd - dy.hess(0, 1));
    EXPECT_LT(err, prev);
    prev = err;
    const double fd3 = (theta.eval(y + Vec2(h, 0), 2).hess(0, 1) - theta.eval(y - Vec2(h, 0), 2).hess(0, 1)) / (2 * h);
    EXPECT_NEAR(fd3, dy.third[0](0, 1), 1e-2 * std::abs(dy.third[0](0, 1)) + 1e-6);
  }
}

TEST(ShapeFunction, ZeroOrderGuardPeriodicityAndMeans) {
  const auto z = ShapeFunction::zero();
  const auto d = z.eval({0.4, 0.2}, 3);
  EXPECT_EQ(d.value, 0.0);
  EXPECT_EQ(d.hess.norm(), 0.0);
  EXPECT_THROW(z.eval({0, 0}, 4), OrderTooHigh);

  const ShapeFunction theta({{1, 0, 0.3, 1.0}, {2, -1, 0.0, 0.5}, {0, 3, 0.2, 0.0}});
  const Vec2 y(0.13, 0.77);
  const auto a = theta.eval(y, 3);
  const auto b = theta.eval(y + Vec2(2, -3), 3);
  EXPECT_NEAR(a.value, b.value, 1e-12);
  EXPECT_NEAR((a.hess - b.hess).norm(), 0.0, 1e-10);

  const int m = 16;
  Vec2 mean = Vec2::Zero();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) mean += theta.eval(Vec2(double(i) / m, double(j) / m), 1).grad / (m * m);
  EXPECT_LT(mean.norm(), 1e-13);

  const auto shifted = theta.shifted({0.1, 0.25});
  EXPECT_NEAR(shifted.eval(y, 0).value, theta.eval(y + Vec2(0.1, 0.25), 0).value, 1e-14);
  const auto dth = theta.derivative(1);
  EXPECT_NEAR(dth.eval(y, 0).value, a.grad[1], 1e-12);
}

TEST(ElasticityTensor, ClosedFormValuesAndSymmetry) {
  const auto t = elasticity_tensor(Mat2::Identity(), 1.0, 1.0);
  EXPECT_NEAR(t(0, 0, 0, 0), 16.0 / 3.0, 1e-15);
  EXPECT_EQ(t(0, 0, 0, 1), 0.0);
  const auto g = eval_geometry(SurfaceChart::cylinder(1.0), {0.0, 0.0});
  EXPECT_NEAR(elasticity_tensor(g, 1.0, 1.0)(0, 0, 0, 0), 16.0 / 3.0, 1e-13);

  Mat2 inv;
  inv << 1.4, 0.3, 0.3, 0.8;
  const auto s = elasticity_tensor(inv, 2.0, 0.6);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int r = 0; r < 2; ++r)
        for (int q = 0; q < 2; ++q) {
          EXPECT_DOUBLE_EQ(s(a, b, r, q), s(b, a, r, q));
          EXPECT_DOUBLE_EQ(s(a, b, r, q), s(a, b, q, r));
          EXPECT_DOUBLE_EQ(s(a, b, r, q), s(r, q, a, b));
        }
  EXPECT_GT(s.min_rayleigh(), 0.0);

  // Voigt contraction equals the full sum for non-symmetric arguments.
  Mat2 x, y;
  x << 0.3, -1.2, 0.5, 2.0;
  y << -0.7, 0.4, 1.1, 0.9;
  double full = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int r = 0; r < 2; ++r)
        for (int q = 0; q < 2; ++q) full += s(a, b, r, q) * x(r, q) * y(a, b);
  EXPECT_NEAR(voigt(y).dot(s.voigt() * voigt(x)), full, 1e-12);

  EXPECT_THROW(elasticity_tensor(inv, -1.0, 1.0), NonPositiveLame);
  EXPECT_THROW(elasticity_tensor(inv, 1.0, 0.0), NonPositiveLame);
}
