#pragma once

/// \file periodic_field.hpp
/// Zero-mean real trigonometric fields on the unit cell. Storage is real:
/// for every frequency k in a half plane of {-N..N}^2 \ {0} one cosine and one
/// sine coefficient. Complex coefficients are produced on demand.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "wrinkle/errors.hpp"
#include "wrinkle/shape_function.hpp"

namespace wrinkle {

using Freq = std::array<int, 2>;

/// Frequencies with k1 > 0, or k1 == 0 and k2 > 0, |k_i| <= N.
inline std::vector<Freq> half_plane_frequencies(int N) {
  if (N < 1) throw TruncationTooSmall("cell truncation N must be >= 1, got " + std::to_string(N));
  std::vector<Freq> out;
  for (int k1 = 0; k1 <= N; ++k1)
    for (int k2 = -N; k2 <= N; ++k2)
      if (k1 > 0 || k2 > 0) out.push_back({k1, k2});
  return out;
}

/// Values of one scalar basis function (cos or sin of 2 pi k.y) and its derivatives.
struct TrigBasisValue {
  double value;
  Vec2 grad;
  Mat2 hess;
};

inline TrigBasisValue trig_basis(const Freq& k, bool sine, const Vec2& y) {
  constexpr double tau = 2.0 * std::numbers::pi;
  const Vec2 kk(tau * k[0], tau * k[1]);
  const double p = kk.dot(y);
  const double c = std::cos(p), s = std::sin(p);
  const double f = sine ? s : c;
  const double df = sine ? c : -s;
  return {f, kk * df, -(kk * kk.transpose()) * f};
}

class PeriodicField {
 public:
  PeriodicField() = default;
  explicit PeriodicField(int N) : N_(N), freqs_(half_plane_frequencies(N)), c_(Eigen::VectorXd::Zero(2 * freqs_.size())) {}
  PeriodicField(int N, Eigen::VectorXd coeffs) : N_(N), freqs_(half_plane_frequencies(N)), c_(std::move(coeffs)) {
    if (c_.size() != static_cast<Eigen::Index>(2 * freqs_.size()))
      throw std::invalid_argument("PeriodicField: coefficient count does not match N");
  }

  /// Number of real coefficients for truncation N: (2N+1)^2 - 1.
  static int size_for(int N) { return (2 * N + 1) * (2 * N + 1) - 1; }

  int truncation() const { return N_; }
  const std::vector<Freq>& frequencies() const { return freqs_; }
  const Eigen::VectorXd& coeffs() const { return c_; }
  Eigen::VectorXd& coeffs() { return c_; }

  TrigBasisValue eval(const Vec2& y) const {
    TrigBasisValue out{0.0, Vec2::Zero(), Mat2::Zero()};
    for (std::size_t f = 0; f < freqs_.size(); ++f)
      for (int s = 0; s < 2; ++s) {
        const double a = c_[2 * f + s];
        if (a == 0.0) continue;
        const auto b = trig_basis(freqs_[f], s == 1, y);
        out.value += a * b.value;
        out.grad += a * b.grad;
        out.hess += a * b.hess;
      }
    return out;
  }

  /// Complex coefficient c_k of  sum_k c_k exp(2 pi i k.y)  for k in the half plane;
  /// c_{-k} is its conjugate.
  std::complex<double> complex_coeff(std::size_t f) const { return {0.5 * c_[2 * f], -0.5 * c_[2 * f + 1]}; }

  /// Mean over the cell on an M x M grid; zero up to rounding by construction.
  double grid_mean(int M) const {
    double s = 0.0;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) s += eval(Vec2(double(i) / M, double(j) / M)).value;
    return s / (M * M);
  }

  /// Diagonal of the H^1 (or H^2 seminorm added) Gram matrix of the basis.
  static Eigen::VectorXd gram_diagonal(int N, bool second_order) {
    constexpr double tau = 2.0 * std::numbers::pi;
    const auto fr = half_plane_frequencies(N);
    Eigen::VectorXd g(2 * fr.size());
    for (std::size_t f = 0; f < fr.size(); ++f) {
      const double k2 = tau * tau * (fr[f][0] * fr[f][0] + fr[f][1] * fr[f][1]);
      const double v = 0.5 * (1.0 + k2 + (second_order ? k2 * k2 : 0.0));
      g[2 * f] = g[2 * f + 1] = v;
    }
    return g;
  }

 private:
  int N_ = 0;
  std::vector<Freq> freqs_;
  Eigen::VectorXd c_;
};

}  // namespace wrinkle
