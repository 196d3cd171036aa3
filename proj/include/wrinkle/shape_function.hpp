#pragma once

/// \file shape_function.hpp
/// The Y-periodic wrinkle profile theta as a finite trigonometric series.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wrinkle/errors.hpp"

namespace wrinkle {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

/// One term  cos_amp * cos(2 pi k.y) + sin_amp * sin(2 pi k.y).
struct TrigMode {
  int k1 = 0;
  int k2 = 0;
  double cos_amp = 0.0;
  double sin_amp = 0.0;
};

/// Values of theta and its partial derivatives at one cell point.
struct ShapeDerivs {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();
  std::array<Mat2, 2> third{Mat2::Zero(), Mat2::Zero()};  ///< third[a](b,c) = d_abc theta
};

class ShapeFunction {
 public:
  ShapeFunction() = default;
  explicit ShapeFunction(std::vector<TrigMode> modes, double constant = 0.0)
      : modes_(std::move(modes)), constant_(constant) {}

  static ShapeFunction zero() { return ShapeFunction{}; }

  /// sin(2 pi k1 y1 + 2 pi k2 y2) scaled by `amp`.
  static ShapeFunction single_sine(int k1, int k2, double amp = 1.0) {
    return ShapeFunction({{k1, k2, 0.0, amp}});
  }

  /// amp * sin(2 pi y1) sin(2 pi y2) = amp/2 [cos(2 pi (y1 - y2)) - cos(2 pi (y1 + y2))].
  static ShapeFunction egg_box(double amp = 1.0) {
    return ShapeFunction({{1, -1, 0.5 * amp, 0.0}, {1, 1, -0.5 * amp, 0.0}});
  }

  const std::vector<TrigMode>& modes() const { return modes_; }
  double constant() const { return constant_; }

  bool is_zero() const {
    if (constant_ != 0.0) return false;
    for (const auto& m : modes_)
      if ((m.cos_amp != 0.0 || m.sin_amp != 0.0) && (m.k1 != 0 || m.k2 != 0)) return false;
    return true;
  }

  /// Largest |k_i| among modes with a nonzero amplitude.
  int max_frequency() const {
    int k = 0;
    for (const auto& m : modes_)
      if (m.cos_amp != 0.0 || m.sin_amp != 0.0) k = std::max({k, std::abs(m.k1), std::abs(m.k2)});
    return k;
  }

  /// Derivatives up to `order` (<= 3) at y; higher entries are left zero.
  ShapeDerivs eval(const Vec2& y, int order = 3) const {
    if (order > 3 || order < 0) throw OrderTooHigh("shape function derivatives are available up to order 3");
    constexpr double tau = 2.0 * std::numbers::pi;
    ShapeDerivs d;
    d.value = constant_;
    for (const auto& m : modes_) {
      const double kk[2] = {tau * m.k1, tau * m.k2};
      const double phase = kk[0] * y[0] + kk[1] * y[1];
      const double c = std::cos(phase), s = std::sin(phase);
      const double f = m.cos_amp * c + m.sin_amp * s;
      const double df = -m.cos_amp * s + m.sin_amp * c;  // derivative w.r.t. phase
      d.value += f;
      if (order < 1) continue;
      for (int a = 0; a < 2; ++a) d.grad[a] += kk[a] * df;
      if (order < 2) continue;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) d.hess(a, b) -= kk[a] * kk[b] * f;
      if (order < 3) continue;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int g = 0; g < 2; ++g) d.third[a](b, g) -= kk[a] * kk[b] * kk[g] * df;
    }
    return d;
  }

  /// Derivative d theta / d y_dir as a trigonometric series.
  ShapeFunction derivative(int dir) const {
    constexpr double tau = 2.0 * std::numbers::pi;
    std::vector<TrigMode> out;
    out.reserve(modes_.size());
    for (const auto& m : modes_) {
      const double k = tau * (dir == 0 ? m.k1 : m.k2);
      out.push_back({m.k1, m.k2, k * m.sin_amp, -k * m.cos_amp});
    }
    return ShapeFunction(std::move(out));
  }

  /// theta(. + shift) as a trigonometric series.
  ShapeFunction shifted(const Vec2& shift) const {
    constexpr double tau = 2.0 * std::numbers::pi;
    std::vector<TrigMode> out;
    out.reserve(modes_.size());
    for (const auto& m : modes_) {
      const double phi = tau * (m.k1 * shift[0] + m.k2 * shift[1]);
      const double c = std::cos(phi), s = std::sin(phi);
      // A cos(p + phi) + B sin(p + phi) = (A c + B s) cos p + (B c - A s) sin p
      out.push_back({m.k1, m.k2, m.cos_amp * c + m.sin_amp * s, m.sin_amp * c - m.cos_amp * s});
    }
    return ShapeFunction(std::move(out), constant_);
  }

  /// Linear combination sum_i w_i * f_i of series (used to build fields such as
  /// -a^{rho lambda} d_lambda theta at a frozen macro point).
  static ShapeFunction combine(const std::vector<std::pair<double, ShapeFunction>>& terms) {
    std::vector<TrigMode> out;
    double constant = 0.0;
    for (const auto& [w, f] : terms) {
      constant += w * f.constant_;
      for (auto m : f.modes_) {
        m.cos_amp *= w;
        m.sin_amp *= w;
        out.push_back(m);
      }
    }
    return ShapeFunction(std::move(out), constant);
  }

  std::string describe() const {
    std::string s;
    for (const auto& m : modes_) {
      if (!s.empty()) s += "; ";
      s += std::to_string(m.k1) + " " + std::to_string(m.k2) + " " + std::to_string(m.cos_amp) + " " +
           std::to_string(m.sin_amp);
    }
    return s.empty() ? "0" : s;
  }

 private:
  std::vector<TrigMode> modes_;
  double constant_ = 0.0;
};

}  // namespace wrinkle
