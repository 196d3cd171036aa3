#pragma once

/// \file quadrature.hpp
/// Gauss–Legendre rules, composite rules on intervals and tensor rules on
/// rectangles, plus uniform periodic grids on the unit cell.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "wrinkle/errors.hpp"

namespace wrinkle {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline Rule1D gauss_legendre(int n) {
  Rule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.nodes[n - 1 - i] = x;
    r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

/// Composite Gauss rule of `order` points on each of `cells` equal subintervals of [a, b].
inline Rule1D composite_gauss(double a, double b, int cells, int order) {
  const Rule1D ref = gauss_legendre(order);
  Rule1D r;
  r.nodes.reserve(static_cast<std::size_t>(cells) * order);
  r.weights.reserve(static_cast<std::size_t>(cells) * order);
  const double h = (b - a) / cells;
  for (int c = 0; c < cells; ++c) {
    const double lo = a + c * h;
    for (int q = 0; q < order; ++q) {
      r.nodes.push_back(lo + 0.5 * h * (ref.nodes[q] + 1.0));
      r.weights.push_back(0.5 * h * ref.weights[q]);
    }
  }
  return r;
}

/// Tensor-product rule on (0,L1)x(0,L2).
struct RectRule {
  Rule1D x1;
  Rule1D x2;

  std::size_t size() const { return x1.size() * x2.size(); }
  double length(int dir) const { return dir == 0 ? span1 : span2; }

  double span1 = 1.0;
  double span2 = 1.0;
  int cells1 = 1;
  int cells2 = 1;
  int order = 1;

  /// Smallest number of quadrature points falling in one wrinkle period of length eps.
  double points_per_period(double eps) const {
    return std::min(cells1 * order * eps / span1, cells2 * order * eps / span2);
  }
};

inline RectRule rect_rule(double L1, double L2, int cells1, int cells2, int order) {
  RectRule r;
  r.x1 = composite_gauss(0.0, L1, cells1, order);
  r.x2 = composite_gauss(0.0, L2, cells2, order);
  r.span1 = L1;
  r.span2 = L2;
  r.cells1 = cells1;
  r.cells2 = cells2;
  r.order = order;
  return r;
}

/// Rule resolving a wrinkle period eps with at least `min_points` nodes per period
/// per direction, using `order`-point Gauss cells.
inline RectRule resolved_rule(double L1, double L2, double eps, int min_points, int order) {
  const int per_period = (min_points + order - 1) / order;
  const int c1 = std::max(1, static_cast<int>(std::ceil(per_period * L1 / eps - 1e-9)));
  const int c2 = std::max(1, static_cast<int>(std::ceil(per_period * L2 / eps - 1e-9)));
  return rect_rule(L1, L2, c1, c2, order);
}

inline void require_resolved(const RectRule& rule, double eps, double min_points, const std::string& what) {
  const double ppp = rule.points_per_period(eps);
  if (ppp + 1e-9 < min_points)
    throw QuadratureUnderresolved(what + ": " + std::to_string(ppp) + " quadrature points per wrinkle period at eps=" +
                                  std::to_string(eps) + " (need " + std::to_string(min_points) + ")");
}

/// M uniform nodes on the unit period with equal weights; exact for
/// trigonometric polynomials of degree < M.
inline Rule1D periodic_grid(int m) {
  Rule1D r;
  r.nodes.resize(m);
  r.weights.assign(m, 1.0 / m);
  for (int i = 0; i < m; ++i) r.nodes[i] = static_cast<double>(i) / m;
  return r;
}

}  // namespace wrinkle
