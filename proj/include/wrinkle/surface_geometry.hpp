#pragma once

/// \file surface_geometry.hpp
/// Mid-surface charts, their differential geometry at a point, and the
/// plane-stress elasticity tensor built from a contravariant metric.

#include <array>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "wrinkle/errors.hpp"
#include "wrinkle/jet.hpp"
#include "wrinkle/shape_function.hpp"

namespace wrinkle {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kDefaultAMin = 1e-8;

enum class ChartKind { Plate, Cylinder, Graph, Wavy };

/// Catalog of mid-surface maps psi with exact derivatives (evaluated through jets).
///
///  - plate:    (x1, x2, 0)
///  - cylinder: (R cos(x1/R), R sin(x1/R), x2)
///  - graph:    (x1, x2, z) with z = c11 x1^2/2 + c12 x1 x2 + c22 x2^2/2
///                              + (t111 x1^3 + 3 t112 x1^2 x2 + 3 t122 x1 x2^2 + t222 x2^3)/6
///  - wavy:     (x1, x2, A cos(w1 x1 + p1) cos(w2 x2 + p2))
struct SurfaceChart {
  ChartKind kind = ChartKind::Plate;
  std::map<std::string, double> params;

  static SurfaceChart plate() { return {ChartKind::Plate, {}}; }
  static SurfaceChart cylinder(double radius) { return {ChartKind::Cylinder, {{"R", radius}}}; }
  static SurfaceChart graph(std::map<std::string, double> coeffs) { return {ChartKind::Graph, std::move(coeffs)}; }
  static SurfaceChart wavy(double amp, double w1, double w2, double p1 = 0.0, double p2 = 0.0) {
    return {ChartKind::Wavy, {{"A", amp}, {"w1", w1}, {"w2", w2}, {"p1", p1}, {"p2", p2}}};
  }

  double param(const std::string& key, double fallback = 0.0) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }

  std::string id() const {
    switch (kind) {
      case ChartKind::Plate: return "plate";
      case ChartKind::Cylinder: return "cylinder";
      case ChartKind::Graph: return "graph";
      case ChartKind::Wavy: return "wavy";
    }
    return "unknown";
  }

  /// psi(x1, x2) for T = double or any Jet<K>.
  template <class T>
  Vec3Of<T> position(const T& x1, const T& x2) const {
    using std::cos;
    using std::sin;
    switch (kind) {
      case ChartKind::Plate: return {x1, x2, T(0.0)};
      case ChartKind::Cylinder: {
        const double r = param("R", 1.0);
        const T t = x1 * (1.0 / r);
        return {r * cos(t), r * sin(t), x2};
      }
      case ChartKind::Graph: {
        const T z = 0.5 * param("c11") * x1 * x1 + param("c12") * x1 * x2 + 0.5 * param("c22") * x2 * x2 +
                    (1.0 / 6.0) * (param("t111") * x1 * x1 * x1 + 3.0 * param("t112") * x1 * x1 * x2 +
                                   3.0 * param("t122") * x1 * x2 * x2 + param("t222") * x2 * x2 * x2);
        return {x1, x2, z};
      }
      case ChartKind::Wavy: {
        const T z = param("A") * cos(param("w1") * x1 + param("p1")) * cos(param("w2") * x2 + param("p2"));
        return {x1, x2, z};
      }
    }
    return {x1, x2, T(0.0)};
  }
};

/// Geometry of a surface at one point. Index conventions (0-based):
///  christoffel[rho](alpha, beta) = Gamma^rho_{alpha beta}
///  bmix(rho, beta)               = b^rho_beta = a^{rho sigma} b_{sigma beta}
///  db[alpha](rho, beta)          = d_alpha b^rho_beta
///  dmetric[g](a, b)              = d_g a_{ab}, likewise dinv_metric
///  da[lambda][beta]              = d_lambda a_beta
///  k[i][j] = a_i ^ a_j, l[i][alpha] = a_i ^ d_alpha a_3 with a_2 := a_3 in 0-based slots.
struct GeometryAtPoint {
  std::array<Vec3, 2> a{};
  Vec3 a3 = Vec3::Zero();
  std::array<Vec3, 2> acontra{};
  Mat2 metric = Mat2::Zero();
  Mat2 inv_metric = Mat2::Zero();
  double sqrt_a = 0.0;
  Mat2 b = Mat2::Zero();
  Mat2 bmix = Mat2::Zero();
  Mat2 c = Mat2::Zero();
  std::array<Mat2, 2> christoffel{};
  std::array<Mat2, 2> db{};
  std::array<Mat2, 2> dmetric{};
  std::array<Mat2, 2> dinv_metric{};
  Vec2 dsqrt_a = Vec2::Zero();
  std::array<std::array<Vec3, 2>, 2> da{};
  std::array<Vec3, 2> da3{};
  std::array<std::array<Vec3, 3>, 3> k{};
  std::array<std::array<Vec3, 2>, 3> l{};
  Vec3 m = Vec3::Zero();

  const Vec3& basis(int i) const { return i == 2 ? a3 : a[i]; }
};

namespace detail {

template <int O>
Vec3 values(const Vec3Of<Jet<O>>& v) {
  return {v[0].value(), v[1].value(), v[2].value()};
}

template <int O>
double first(const Jet<O>& f, int dir) {
  return dir == 0 ? f.coeff(1, 0) : f.coeff(0, 1);
}

template <int O>
Vec3 first(const Vec3Of<Jet<O>>& v, int dir) {
  return {first(v[0], dir), first(v[1], dir), first(v[2], dir)};
}

inline Vec3 to_eigen(const Vec3Of<double>& v) { return {v[0], v[1], v[2]}; }

}  // namespace detail

/// Frame of a surface given as a position jet of order K >= 3.
template <int K>
struct FrameJets {
  static_assert(K >= 3);
  std::array<Vec3Of<Jet<K - 1>>, 2> tangent;
  std::array<std::array<Vec3Of<Jet<K - 2>>, 2>, 2> dtangent;  ///< [alpha][beta] = d_beta a_alpha
  Vec3Of<Jet<K - 1>> normal;
  Jet<K - 1> sqrt_a;
  std::array<std::array<Jet<K - 1>, 2>, 2> metric;
  std::array<std::array<Jet<K - 1>, 2>, 2> inv_metric;
  std::array<std::array<Jet<K - 2>, 2>, 2> b;
  std::array<std::array<Jet<K - 2>, 2>, 2> bmix;
};

template <int K>
FrameJets<K> build_frame(const Vec3Of<Jet<K>>& X) {
  FrameJets<K> f;
  for (int al = 0; al < 2; ++al) f.tangent[al] = derivative(X, al);
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) f.dtangent[al][be] = derivative(f.tangent[al], be);
  const auto n = cross(f.tangent[0], f.tangent[1]);
  f.sqrt_a = sqrt(dot(n, n));
  const auto inv_sqrt = reciprocal(f.sqrt_a);
  f.normal = scale(n, inv_sqrt);
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) f.metric[al][be] = dot(f.tangent[al], f.tangent[be]);
  const auto det = f.metric[0][0] * f.metric[1][1] - f.metric[0][1] * f.metric[1][0];
  const auto inv_det = reciprocal(det);
  f.inv_metric[0][0] = f.metric[1][1] * inv_det;
  f.inv_metric[1][1] = f.metric[0][0] * inv_det;
  f.inv_metric[0][1] = -f.metric[0][1] * inv_det;
  f.inv_metric[1][0] = f.inv_metric[0][1];
  const auto n_low = truncate<K - 2>(f.normal);
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) f.b[al][be] = dot(n_low, f.dtangent[al][be]);
  for (int rho = 0; rho < 2; ++rho)
    for (int be = 0; be < 2; ++be) {
      Jet<K - 2> s;
      for (int sg = 0; sg < 2; ++sg) s += truncate<K - 2>(f.inv_metric[rho][sg]) * f.b[sg][be];
      f.bmix[rho][be] = s;
    }
  return f;
}

/// Point values (and first derivatives where listed) of a frame.
template <int K>
GeometryAtPoint extract_geometry(const FrameJets<K>& f) {
  using detail::first;
  using detail::values;
  GeometryAtPoint g;
  for (int al = 0; al < 2; ++al) g.a[al] = values(f.tangent[al]);
  g.a3 = values(f.normal);
  g.sqrt_a = f.sqrt_a.value();
  for (int al = 0; al < 2; ++al) {
    g.dsqrt_a[al] = first(f.sqrt_a, al);
    g.da3[al] = first(f.normal, al);
  }
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) {
      g.metric(al, be) = f.metric[al][be].value();
      g.inv_metric(al, be) = f.inv_metric[al][be].value();
      g.b(al, be) = f.b[al][be].value();
      g.bmix(al, be) = f.bmix[al][be].value();
      for (int ga = 0; ga < 2; ++ga) {
        g.dmetric[ga](al, be) = first(f.metric[al][be], ga);
        g.dinv_metric[ga](al, be) = first(f.inv_metric[al][be], ga);
        g.db[ga](al, be) = first(f.bmix[al][be], ga);
      }
      g.da[be][al] = values(f.dtangent[al][be]);
    }
  for (int al = 0; al < 2; ++al) g.acontra[al] = g.inv_metric(al, 0) * g.a[0] + g.inv_metric(al, 1) * g.a[1];
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) {
      double s = 0.0;
      for (int la = 0; la < 2; ++la) s += g.bmix(la, al) * g.b(la, be);
      g.c(al, be) = s;
    }
  for (int rho = 0; rho < 2; ++rho)
    for (int al = 0; al < 2; ++al)
      for (int be = 0; be < 2; ++be) g.christoffel[rho](al, be) = g.acontra[rho].dot(g.da[be][al]);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) g.k[i][j] = g.basis(i).cross(g.basis(j));
    for (int al = 0; al < 2; ++al) g.l[i][al] = g.basis(i).cross(g.da3[al]);
  }
  g.m = g.da3[0].cross(g.da3[1]);
  return g;
}

/// Position jet of order 4 at x and the frame built from it. Fourth derivatives of
/// psi are needed so that the normal is available to third order.
struct BaseFrame {
  Vec3Of<Jet<4>> psi;
  FrameJets<4> frame;
};

inline BaseFrame base_frame(const SurfaceChart& chart, const Vec2& x) {
  BaseFrame bf;
  bf.psi = chart.position(Jet<4>::variable(x[0], 0), Jet<4>::variable(x[1], 1));
  bf.frame = build_frame<4>(bf.psi);
  return bf;
}

inline GeometryAtPoint eval_geometry(const SurfaceChart& chart, const Vec2& x, double a_min = kDefaultAMin) {
  const BaseFrame bf = base_frame(chart, x);
  const double sa = bf.frame.sqrt_a.value();
  if (!(sa >= a_min))
    throw DegenerateMetric("sqrt(a) = " + std::to_string(sa) + " at x = (" + std::to_string(x[0]) + ", " +
                           std::to_string(x[1]) + ") for chart " + chart.id());
  return extract_geometry(bf.frame);
}

/// eval_shape with the order guard.
inline ShapeDerivs eval_shape(const ShapeFunction& theta, const Vec2& y, int order) { return theta.eval(y, order); }

/// a^{abrs} = 4 lambda mu/(lambda + 2 mu) a^{ab} a^{rs} + 2 mu (a^{ar} a^{bs} + a^{as} a^{br}).
struct ElasticityTensor {
  double lambda = 1.0;
  double mu = 1.0;
  std::array<double, 16> c{};

  static constexpr int index(int a, int b, int r, int s) { return ((a * 2 + b) * 2 + r) * 2 + s; }
  double operator()(int a, int b, int r, int s) const { return c[index(a, b, r, s)]; }

  /// Matrix D acting on Voigt vectors (X11, X22, X12) of symmetric tensors so that
  /// s(Y)^T D s(X) = a^{abrs} X_rs Y_ab.
  Mat3 voigt() const {
    static constexpr int ia[3] = {0, 1, 0};
    static constexpr int ib[3] = {0, 1, 1};
    Mat3 d;
    for (int I = 0; I < 3; ++I)
      for (int J = 0; J < 3; ++J) {
        const double mult = (I == 2 ? 2.0 : 1.0) * (J == 2 ? 2.0 : 1.0);
        d(I, J) = mult * (*this)(ia[I], ib[I], ia[J], ib[J]);
      }
    return d;
  }

  /// Smallest a^{abrs} M_rs M_ab over symmetric M with Frobenius norm 1.
  double min_rayleigh() const {
    Mat3 d = voigt();
    const Eigen::Vector3d t(1.0, 1.0, 1.0 / std::sqrt(2.0));
    const Mat3 dn = t.asDiagonal() * d * t.asDiagonal();
    return Eigen::SelfAdjointEigenSolver<Mat3>(dn, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  }
};

inline ElasticityTensor elasticity_tensor(const Mat2& inv_metric, double lambda, double mu) {
  if (!(lambda > 0.0) || !(mu > 0.0))
    throw NonPositiveLame("lambda = " + std::to_string(lambda) + ", mu = " + std::to_string(mu));
  ElasticityTensor t;
  t.lambda = lambda;
  t.mu = mu;
  const double lp = 4.0 * lambda * mu / (lambda + 2.0 * mu);
  const Mat2& g = inv_metric;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s)
          t.c[ElasticityTensor::index(a, b, r, s)] =
              lp * g(a, b) * g(r, s) + 2.0 * mu * (g(a, r) * g(b, s) + g(a, s) * g(b, r));
  return t;
}

inline ElasticityTensor elasticity_tensor(const GeometryAtPoint& geom, double lambda, double mu) {
  return elasticity_tensor(geom.inv_metric, lambda, mu);
}

/// Voigt vector (X11, X22, (X12 + X21)/2) of the symmetric part of X.
inline Eigen::Vector3d voigt(const Mat2& x) { return {x(0, 0), x(1, 1), 0.5 * (x(0, 1) + x(1, 0))}; }

}  // namespace wrinkle
