#pragma once

/// \file macro_space.hpp
/// Conforming Ritz space on the rectangle (0,L1)x(0,L2): sine products for the
/// in-plane components and clamped polynomial bubbles for the deflection.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "wrinkle/quadrature.hpp"
#include "wrinkle/strain_kinematics.hpp"

namespace wrinkle {

/// Number of kinematic channels a strain operator can read:
/// u1 u2 u3 | d1u1 d2u1 d1u2 d2u2 | d1u3 d2u3 | d11u3 d12u3 d22u3
inline constexpr int kChannels = 12;
using ChannelRow = Eigen::Matrix<double, 1, kChannels>;

inline DisplacementValues unit_channel(int c) {
  DisplacementValues v;
  if (c < 3) v.u[c] = 1.0;
  else if (c < 7) v.grad((c - 3) / 2, (c - 3) % 2) = 1.0;
  else if (c < 9) v.grad3[c - 7] = 1.0;
  else if (c == 9) v.hess3(0, 0) = 1.0;
  else if (c == 10) v.hess3(0, 1) = v.hess3(1, 0) = 1.0;
  else v.hess3(1, 1) = 1.0;
  return v;
}

inline Eigen::Matrix<double, kChannels, 1> channels_of(const DisplacementValues& v) {
  Eigen::Matrix<double, kChannels, 1> c;
  c << v.u[0], v.u[1], v.u[2], v.grad(0, 0), v.grad(0, 1), v.grad(1, 0), v.grad(1, 1), v.grad3[0], v.grad3[1],
      v.hess3(0, 0), v.hess3(0, 1), v.hess3(1, 1);
  return c;
}

/// Matrix of a linear operator f: DisplacementValues -> R^rows in channel coordinates.
template <int Rows, class F>
Eigen::Matrix<double, Rows, kChannels> channel_matrix(F&& f) {
  Eigen::Matrix<double, Rows, kChannels> m;
  for (int c = 0; c < kChannels; ++c) m.col(c) = f(unit_channel(c));
  return m;
}

/// sin(i pi x / L) and its derivative.
inline void sine_mode(int i, double L, double x, double& v, double& d) {
  const double k = i * std::numbers::pi / L;
  v = std::sin(k * x);
  d = k * std::cos(k * x);
}

/// 16 t^2 (1-t)^2 P_k(2t-1), t = x/L, with first and second x-derivatives.
inline void bubble_mode(int k, double L, double x, double& v, double& d, double& dd) {
  const double t = x / L, s = 2.0 * t - 1.0;
  double p0 = 1.0, p1 = s, d0 = 0.0, d1 = 1.0, e0 = 0.0, e1 = 0.0;
  double p = p0, dp = d0, ep = e0;
  if (k >= 1) {
    p = p1;
    dp = d1;
    ep = e1;
  }
  for (int j = 1; j < k; ++j) {
    const double p2 = ((2.0 * j + 1.0) * s * p1 - j * p0) / (j + 1.0);
    const double dq = d0 + (2.0 * j + 1.0) * p1;
    const double eq = e0 + (2.0 * j + 1.0) * d1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = dq;
    e0 = e1;
    e1 = eq;
    p = p1;
    dp = d1;
    ep = e1;
  }
  const double B = 16.0 * t * t * (1 - t) * (1 - t);
  const double Bp = 32.0 * t * (1 - t) * (1 - 2 * t);
  const double Bpp = 32.0 * (1 - 6 * t + 6 * t * t);
  // d/dt P(2t-1) = 2 P'(s)
  v = B * p;
  d = (Bp * p + 2.0 * B * dp) / L;
  dd = (Bpp * p + 4.0 * Bp * dp + 4.0 * B * ep) / (L * L);
}

struct MacroSpace {
  double L1 = 1.0;
  double L2 = 1.0;
  int m1 = 4;  ///< sine modes per direction for u1, u2
  int m3 = 4;  ///< bubble degrees per direction for u3

  int n_inplane() const { return m1 * m1; }
  int n_deflection() const { return m3 * m3; }
  int size() const { return 2 * n_inplane() + n_deflection(); }
  int offset(int component) const { return component < 2 ? component * n_inplane() : 2 * n_inplane(); }
  double length(int dir) const { return dir == 0 ? L1 : L2; }
};

/// Values of the 1D factors at the nodes of a rule.
struct MacroTables1D {
  Eigen::MatrixXd s, ds;        ///< [node][i] sine factors
  Eigen::MatrixXd w, dw, ddw;   ///< [node][k] bubble factors
};

inline MacroTables1D macro_tables(const MacroSpace& sp, const Rule1D& r, int dir) {
  MacroTables1D t;
  const int n = static_cast<int>(r.size());
  t.s.resize(n, sp.m1);
  t.ds.resize(n, sp.m1);
  t.w.resize(n, sp.m3);
  t.dw.resize(n, sp.m3);
  t.ddw.resize(n, sp.m3);
  const double L = sp.length(dir);
  for (int q = 0; q < n; ++q) {
    for (int i = 0; i < sp.m1; ++i) sine_mode(i + 1, L, r.nodes[q], t.s(q, i), t.ds(q, i));
    for (int k = 0; k < sp.m3; ++k) bubble_mode(k, L, r.nodes[q], t.w(q, k), t.dw(q, k), t.ddw(q, k));
  }
  return t;
}

/// Channel values of every basis function at node (q1, q2): a kChannels x size() matrix.
inline void basis_channels(const MacroSpace& sp, const MacroTables1D& t1, const MacroTables1D& t2, int q1, int q2,
                           Eigen::MatrixXd& phi) {
  phi.setZero(kChannels, sp.size());
  for (int a = 0; a < sp.m1; ++a)
    for (int b = 0; b < sp.m1; ++b) {
      const int p = a * sp.m1 + b;
      const double v = t1.s(q1, a) * t2.s(q2, b);
      const double d1 = t1.ds(q1, a) * t2.s(q2, b);
      const double d2 = t1.s(q1, a) * t2.ds(q2, b);
      phi(0, p) = v;
      phi(3, p) = d1;
      phi(4, p) = d2;
      const int p2 = sp.n_inplane() + p;
      phi(1, p2) = v;
      phi(5, p2) = d1;
      phi(6, p2) = d2;
    }
  const int off = sp.offset(2);
  for (int a = 0; a < sp.m3; ++a)
    for (int b = 0; b < sp.m3; ++b) {
      const int p = off + a * sp.m3 + b;
      phi(2, p) = t1.w(q1, a) * t2.w(q2, b);
      phi(7, p) = t1.dw(q1, a) * t2.w(q2, b);
      phi(8, p) = t1.w(q1, a) * t2.dw(q2, b);
      phi(9, p) = t1.ddw(q1, a) * t2.w(q2, b);
      phi(10, p) = t1.dw(q1, a) * t2.dw(q2, b);
      phi(11, p) = t1.w(q1, a) * t2.ddw(q2, b);
    }
}

/// An element of the Ritz space.
class DisplacementField {
 public:
  DisplacementField() = default;
  DisplacementField(MacroSpace space, Eigen::VectorXd coeffs) : space_(space), c_(std::move(coeffs)) {}

  static DisplacementField zero(const MacroSpace& sp) { return {sp, Eigen::VectorXd::Zero(sp.size())}; }
  static DisplacementField basis(const MacroSpace& sp, int j) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(sp.size());
    c[j] = 1.0;
    return {sp, c};
  }

  const MacroSpace& space() const { return space_; }
  const Eigen::VectorXd& coeffs() const { return c_; }

  DisplacementValues eval(const Vec2& x) const {
    const MacroSpace& sp = space_;
    std::vector<double> s1(sp.m1), ds1(sp.m1), s2(sp.m1), ds2(sp.m1);
    std::vector<double> w1(sp.m3), dw1(sp.m3), ddw1(sp.m3), w2(sp.m3), dw2(sp.m3), ddw2(sp.m3);
    for (int i = 0; i < sp.m1; ++i) {
      sine_mode(i + 1, sp.L1, x[0], s1[i], ds1[i]);
      sine_mode(i + 1, sp.L2, x[1], s2[i], ds2[i]);
    }
    for (int k = 0; k < sp.m3; ++k) {
      bubble_mode(k, sp.L1, x[0], w1[k], dw1[k], ddw1[k]);
      bubble_mode(k, sp.L2, x[1], w2[k], dw2[k], ddw2[k]);
    }
    DisplacementValues v;
    for (int rho = 0; rho < 2; ++rho)
      for (int a = 0; a < sp.m1; ++a)
        for (int b = 0; b < sp.m1; ++b) {
          const double c = c_[sp.offset(rho) + a * sp.m1 + b];
          v.u[rho] += c * s1[a] * s2[b];
          v.grad(rho, 0) += c * ds1[a] * s2[b];
          v.grad(rho, 1) += c * s1[a] * ds2[b];
        }
    for (int a = 0; a < sp.m3; ++a)
      for (int b = 0; b < sp.m3; ++b) {
        const double c = c_[sp.offset(2) + a * sp.m3 + b];
        v.u[2] += c * w1[a] * w2[b];
        v.grad3[0] += c * dw1[a] * w2[b];
        v.grad3[1] += c * w1[a] * dw2[b];
        v.hess3(0, 0) += c * ddw1[a] * w2[b];
        v.hess3(0, 1) += c * dw1[a] * dw2[b];
        v.hess3(1, 1) += c * w1[a] * ddw2[b];
      }
    v.hess3(1, 0) = v.hess3(0, 1);
    return v;
  }

 private:
  MacroSpace space_;
  Eigen::VectorXd c_;
};

/// Chunked symmetric accumulation K += sum_rows r^T r and F += phi^T g over
/// quadrature points. The chunk size is fixed, so the floating-point summation
/// order does not depend on anything but the point order.
class RankAccumulator {
 public:
  explicit RankAccumulator(int n, int chunk_rows = 2048) : n_(n), chunk_(chunk_rows) {
    K_.setZero(n, n);
    F_.setZero(n);
    buf_.resize(n, chunk_rows);
  }

  /// rows: r x n block of square-root weighted strains.
  void add_rows(const Eigen::MatrixXd& rows) {
    for (int r = 0; r < rows.rows(); ++r) {
      buf_.col(used_++) = rows.row(r).transpose();
      if (used_ == chunk_) flush();
    }
  }
  void add_load(const Eigen::VectorXd& f) { F_ += f; }

  Eigen::MatrixXd matrix() {
    flush();
    Eigen::MatrixXd K = K_;
    K.triangularView<Eigen::StrictlyUpper>() = K.transpose().triangularView<Eigen::StrictlyUpper>();
    return K;
  }
  const Eigen::VectorXd& load() const { return F_; }

 private:
  void flush() {
    if (used_ == 0) return;
    K_.selfadjointView<Eigen::Lower>().rankUpdate(buf_.leftCols(used_));
    used_ = 0;
  }
  int n_;
  int chunk_;
  int used_ = 0;
  Eigen::MatrixXd K_;
  Eigen::VectorXd F_;
  Eigen::MatrixXd buf_;
};

/// Lower factor L of a symmetric positive semidefinite matrix with A = L L^T.
template <int N>
Eigen::Matrix<double, N, N> psd_factor(const Eigen::Matrix<double, N, N>& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(A);
  const auto ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

/// Walks the tensor rule and calls visit(q1, q2, x, weight, phi).
template <class Visit>
void for_each_point(const MacroSpace& sp, const RectRule& rule, Visit&& visit) {
  const auto t1 = macro_tables(sp, rule.x1, 0);
  const auto t2 = macro_tables(sp, rule.x2, 1);
  Eigen::MatrixXd phi;
  for (std::size_t q1 = 0; q1 < rule.x1.size(); ++q1)
    for (std::size_t q2 = 0; q2 < rule.x2.size(); ++q2) {
      basis_channels(sp, t1, t2, static_cast<int>(q1), static_cast<int>(q2), phi);
      const Vec2 x(rule.x1.nodes[q1], rule.x2.nodes[q2]);
      visit(x, rule.x1.weights[q1] * rule.x2.weights[q2], phi);
    }
}

/// Squared L2 and H1 norms of a field (all three components) on a rule.
struct FieldNorms {
  double l2 = 0.0;
  double h1 = 0.0;
};

inline FieldNorms field_norms(const DisplacementField& u, const RectRule& rule) {
  FieldNorms n;
  double l2 = 0.0, h1 = 0.0;
  for_each_point(u.space(), rule, [&](const Vec2&, double w, const Eigen::MatrixXd& phi) {
    const Eigen::Matrix<double, kChannels, 1> c = phi * u.coeffs();
    const double v2 = c.head<3>().squaredNorm();
    l2 += w * v2;
    h1 += w * (v2 + c.segment<6>(3).squaredNorm());
  });
  n.l2 = std::sqrt(l2);
  n.h1 = std::sqrt(h1);
  return n;
}

}  // namespace wrinkle
