#pragma once

// Independent reference computations used by the unit and acceptance tests.
// They share no assembly code with the library: flat-plate strains and the
// elasticity tensor are written out by hand.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "wrinkle/macro_solver.hpp"

namespace oracle {

using wrinkle::Vec2;

// a^{abrs} on the flat plate (metric = identity).
inline double flat_tensor(double lambda, double mu, int a, int b, int r, int s) {
  const double lp = 4.0 * lambda * mu / (lambda + 2.0 * mu);
  auto dl = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  return lp * dl(a, b) * dl(r, s) + 2.0 * mu * (dl(a, r) * dl(b, s) + dl(a, s) * dl(b, r));
}

// Classical clamped Koiter plate by brute force: every basis function is evaluated
// through DisplacementField, strains are e(u) and d_ab u3.
inline Eigen::VectorXd classical_plate_solution(const wrinkle::MacroSpace& sp, const wrinkle::Material& m,
                                                const wrinkle::ForceDensity& f, int cells, int order) {
  const int n = sp.size();
  const auto r1 = wrinkle::composite_gauss(0.0, sp.L1, cells, order);
  const auto r2 = wrinkle::composite_gauss(0.0, sp.L2, cells, order);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd F = Eigen::VectorXd::Zero(n);
  double C[2][2][2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) C[a][b][r][s] = flat_tensor(m.lambda, m.mu, a, b, r, s);
  std::vector<wrinkle::DisplacementField> basis;
  for (int j = 0; j < n; ++j) basis.push_back(wrinkle::DisplacementField::basis(sp, j));
  std::vector<Eigen::Matrix2d> mem(n), ben(n);
  std::vector<Eigen::Vector3d> val(n);
  const double d = m.d, d3 = d * d * d / 3.0;
  for (std::size_t i = 0; i < r1.size(); ++i)
    for (std::size_t j = 0; j < r2.size(); ++j) {
      const Vec2 x(r1.nodes[i], r2.nodes[j]);
      const double w = r1.weights[i] * r2.weights[j];
      for (int k = 0; k < n; ++k) {
        const auto v = basis[k].eval(x);
        val[k] = v.u;
        mem[k] = 0.5 * (v.grad + v.grad.transpose());
        ben[k] = v.hess3;
      }
      const Eigen::Vector3d fx = f(x, 0.0);
      for (int p = 0; p < n; ++p) {
        F[p] += w * fx.dot(val[p]);
        for (int q = 0; q <= p; ++q) {
          double s = 0.0;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              for (int r = 0; r < 2; ++r)
                for (int t = 0; t < 2; ++t)
                  s += C[a][b][r][t] * (d * mem[q](r, t) * mem[p](a, b) + d3 * ben[q](r, t) * ben[p](a, b));
          K(p, q) += w * s;
        }
      }
    }
  K.triangularView<Eigen::StrictlyUpper>() = K.transpose().triangularView<Eigen::StrictlyUpper>();
  return K.ldlt().solve(F);
}

// 1D cell problem on the flat plate for theta = amp sin(2 pi y1) and xi eta = 11.
// Unknowns v(y1) (the first in-plane corrector) and V(y1), each as
// sum_k a_k cos(2 pi k y1) + b_k sin(2 pi k y1), k = 1..N. Returns the
// coefficients in the order [v: (cos1, sin1, cos2, ...)] [V: ...].
inline Eigen::VectorXd cell_oracle_1d(double amp, double lambda, double mu, double d, int N) {
  constexpr double tau = 2.0 * std::numbers::pi;
  const double E = flat_tensor(lambda, mu, 0, 0, 0, 0);
  const double d3 = d * d * d / 3.0;
  const int nb = 2 * N;
  const int M = 8 * N + 16;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * nb, 2 * nb);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * nb);
  for (int q = 0; q < M; ++q) {
    const double y = double(q) / M;
    const double th2 = -tau * tau * amp * std::sin(tau * y);
    const double th3 = -tau * tau * tau * amp * std::cos(tau * y);
    // per basis: value, first and second derivative
    Eigen::VectorXd f0(nb), f1(nb), f2(nb);
    for (int k = 1; k <= N; ++k) {
      const double c = std::cos(tau * k * y), s = std::sin(tau * k * y), kk = tau * k;
      f0[2 * k - 2] = c;
      f1[2 * k - 2] = -kk * s;
      f2[2 * k - 2] = -kk * kk * c;
      f0[2 * k - 1] = s;
      f1[2 * k - 1] = kk * c;
      f2[2 * k - 1] = -kk * kk * s;
    }
    // membrane row d E (v')^2, bending row d3 E (V'' + th3 v + 2 th2 v')^2
    Eigen::VectorXd mrow = Eigen::VectorXd::Zero(2 * nb), brow = Eigen::VectorXd::Zero(2 * nb),
                    nrow = Eigen::VectorXd::Zero(2 * nb);
    mrow.head(nb) = f1;
    nrow.head(nb) = th3 * f0 + 2.0 * th2 * f1;
    brow = nrow;
    brow.tail(nb) = f2;
    A += (d * E / M) * mrow * mrow.transpose() + (d3 * E / M) * brow * brow.transpose();
    b += (-d3 * E / M) * nrow;
  }
  return A.ldlt().solve(b);
}

}  // namespace oracle
