#pragma once

/// \file cell_solver.hpp
/// Trigonometric Galerkin solver for the periodic local problems on the unit
/// cell, with coefficients frozen at one macro point x0.
///
/// Unknown layout: [v1_1 | v1_2 | V], each block holding the real coefficients
/// of a PeriodicField of truncation N.

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>

#include "wrinkle/macro_space.hpp"
#include "wrinkle/periodic_field.hpp"
#include "wrinkle/strain_kinematics.hpp"

namespace wrinkle {

struct CellContext {
  Vec2 x0 = Vec2::Zero();
  GeometryAtPoint geom;
  ElasticityTensor tensor;
  ShapeFunction theta;
  double d = 0.05;  ///< half thickness
};

inline CellContext make_cell_context(const SurfaceChart& chart, const Vec2& x0, const ShapeFunction& theta,
                                     double lambda, double mu, double d) {
  if (!(d > 0.0)) throw NonPositiveLame("thickness d must be positive, got " + std::to_string(d));
  CellContext c;
  c.x0 = x0;
  c.geom = eval_geometry(chart, x0);
  c.tensor = elasticity_tensor(c.geom, lambda, mu);
  c.theta = theta;
  c.d = d;
  return c;
}

/// Cell channels: v1_1 v1_2 | d1 v1_1  d2 v1_1  d1 v1_2  d2 v1_2 | V11 V12 V22
inline constexpr int kCellChannels = 9;

/// Uniform grid size exact for every product formed during assembly.
inline int cell_grid_size(int N, const ShapeFunction& theta) {
  return std::max(4 * N + 4, 2 * N + 2 * theta.max_frequency() + 1);
}

inline int cell_unknowns(int N) { return 3 * PeriodicField::size_for(N); }

namespace detail {

inline CellVectorValues cell_unit_vector(int c) {
  CellVectorValues v;
  if (c < 2) v.v[c] = 1.0;
  else if (c < 6) v.grad((c - 2) / 2, (c - 2) % 2) = 1.0;
  return v;
}

inline Mat2 cell_unit_hess(int c) {
  Mat2 h = Mat2::Zero();
  if (c == 6) h(0, 0) = 1.0;
  else if (c == 7) h(0, 1) = h(1, 0) = 1.0;
  else if (c == 8) h(1, 1) = 1.0;
  return h;
}

/// Rows 0..2 Voigt e^y, rows 3..5 Voigt (d^y d^y V + N^y(v1)) as linear maps of the channels.
inline Eigen::Matrix<double, 6, kCellChannels> cell_channel_matrix(const GeometryAtPoint& g, const ShapeDerivs& t) {
  Eigen::Matrix<double, 6, kCellChannels> K;
  for (int c = 0; c < kCellChannels; ++c) {
    const CellVectorValues v1 = cell_unit_vector(c);
    K.col(c).head<3>() = voigt(cell_membrane_strain(v1));
    K.col(c).tail<3>() = voigt(cell_unit_hess(c) + n_operator(g, t, v1));
  }
  return K;
}

/// Channel values of all cell basis functions at y: kCellChannels x 3 ns.
inline void cell_basis_channels(const std::vector<Freq>& fr, const Vec2& y, Eigen::MatrixXd& phi) {
  const int ns = static_cast<int>(2 * fr.size());
  phi.setZero(kCellChannels, 3 * ns);
  for (std::size_t f = 0; f < fr.size(); ++f)
    for (int s = 0; s < 2; ++s) {
      const int j = static_cast<int>(2 * f) + s;
      const auto b = trig_basis(fr[f], s == 1, y);
      for (int r = 0; r < 2; ++r) {
        phi(r, r * ns + j) = b.value;
        phi(2 + 2 * r, r * ns + j) = b.grad[0];
        phi(3 + 2 * r, r * ns + j) = b.grad[1];
      }
      phi(6, 2 * ns + j) = b.hess(0, 0);
      phi(7, 2 * ns + j) = b.hess(0, 1);
      phi(8, 2 * ns + j) = b.hess(1, 1);
    }
}

}  // namespace detail

/// Galerkin data of the cell form plus the cell averages needed by the
/// homogenized and coupled macro problems.
struct CellSystem {
  int N = 0;
  int M = 0;
  Eigen::MatrixXd A;                  ///< Galerkin matrix of the cell form
  Eigen::Matrix<double, 3, Eigen::Dynamic> mean_e;     ///< <Voigt e^y> per basis function
  Eigen::Matrix<double, 3, Eigen::Dynamic> mean_bend;  ///< <Voigt (d^y d^y V + N^y)>
  std::array<Eigen::Matrix<double, 3, Eigen::Dynamic>, 3> hess_bend;  ///< <d_a theta * bend>, a = 11, 12, 22
  Eigen::Matrix<double, 3, Eigen::Dynamic> mean_N;     ///< <Voigt N^y(v1)>
};

inline CellSystem assemble_cell_matrix(const CellContext& ctx, int N) {
  const auto fr = half_plane_frequencies(N);
  CellSystem sys;
  sys.N = N;
  sys.M = cell_grid_size(N, ctx.theta);
  const int n = cell_unknowns(N);
  const int M = sys.M;
  const double wpt = 1.0 / (double(M) * M);

  const Mat3 D = ctx.tensor.voigt();
  Eigen::Matrix<double, 6, 6> W = Eigen::Matrix<double, 6, 6>::Zero();
  W.topLeftCorner<3, 3>() = ctx.d * D;
  W.bottomRightCorner<3, 3>() = (ctx.d * ctx.d * ctx.d / 3.0) * D;
  W *= ctx.geom.sqrt_a * wpt;
  const Eigen::Matrix<double, 6, 6> Lt = psd_factor<6>(W).transpose();

  sys.mean_e.setZero(3, n);
  sys.mean_bend.setZero(3, n);
  sys.mean_N.setZero(3, n);
  for (auto& h : sys.hess_bend) h.setZero(3, n);

  RankAccumulator acc(n, 6 * 256);
  Eigen::MatrixXd phi;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const Vec2 y(double(i) / M, double(j) / M);
      const ShapeDerivs t = ctx.theta.eval(y, 3);
      const auto K = detail::cell_channel_matrix(ctx.geom, t);
      detail::cell_basis_channels(fr, y, phi);
      const Eigen::MatrixXd S = K * phi;  // 6 x n
      acc.add_rows(Lt * S);
      sys.mean_e += wpt * S.topRows<3>();
      sys.mean_bend += wpt * S.bottomRows<3>();
      // N^y part alone: drop the V channels
      sys.mean_N += wpt * (K.bottomLeftCorner<3, 6>() * phi.topRows<6>());
      const double hv[3] = {t.hess(0, 0), t.hess(0, 1), t.hess(1, 1)};
      for (int a = 0; a < 3; ++a) sys.hess_bend[a] += (wpt * hv[a]) * S.bottomRows<3>();
    }
  sys.A = acc.matrix();
  return sys;
}

/// Index of the Voigt slot for xi_eta in {11, 12, 22}.
inline int voigt_slot(int xi_eta) {
  switch (xi_eta) {
    case 11: return 0;
    case 22: return 1;
    case 12:
    case 21: return 2;
    default: throw std::invalid_argument("xi_eta must be one of 11, 12, 22");
  }
}

/// F_{xi eta}(z) = -(d^3/3) sqrt(a) a^{xi eta rho sigma} <N^y_{rho sigma}(z)>, one entry per basis function.
inline Eigen::VectorXd cell_rhs(const CellContext& ctx, const CellSystem& sys, int xi_eta) {
  const int I = voigt_slot(xi_eta);
  const Mat3 D = ctx.tensor.voigt();
  const double mult = I == 2 ? 2.0 : 1.0;
  const Eigen::RowVector3d row = D.row(I) / mult;
  const double c = -(ctx.d * ctx.d * ctx.d / 3.0) * ctx.geom.sqrt_a;
  return c * (row * sys.mean_N).transpose();
}

/// Direct form (d^3/3) sqrt(a) a^{xi eta rho sigma} <[a^{kl} d_{rho l sigma} theta + d_rho b^k_sigma + d_sigma b^k_rho] z_k>
/// evaluated by grid quadrature for the in-plane part z of a cell field.
inline double cell_rhs_direct(const CellContext& ctx, int xi_eta, const PeriodicField& z1, const PeriodicField& z2) {
  const int I = voigt_slot(xi_eta);
  const int xi = I == 1 ? 1 : 0, eta = I == 0 ? 0 : 1;
  const int M = cell_grid_size(std::max(z1.truncation(), z2.truncation()), ctx.theta);
  const GeometryAtPoint& g = ctx.geom;
  double total = 0.0;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const Vec2 y(double(i) / M, double(j) / M);
      const ShapeDerivs t = ctx.theta.eval(y, 3);
      const double z[2] = {z1.eval(y).value, z2.eval(y).value};
      double s = 0.0;
      for (int r = 0; r < 2; ++r)
        for (int sg = 0; sg < 2; ++sg) {
          double inner = 0.0;
          for (int k = 0; k < 2; ++k) {
            double coef = g.db[r](k, sg) + g.db[sg](k, r);
            for (int l = 0; l < 2; ++l) coef += g.inv_metric(k, l) * t.third[r](l, sg);
            inner += coef * z[k];
          }
          s += ctx.tensor(xi, eta, r, sg) * inner;
        }
      total += s;
    }
  return (ctx.d * ctx.d * ctx.d / 3.0) * g.sqrt_a * total / (double(M) * M);
}

struct CellSolution {
  int xi_eta = 11;
  int N = 0;
  PeriodicField phi_vec[2];
  PeriodicField phi_scal;
  Eigen::VectorXd coeffs;
  double solver_residual = 0.0;
  double energy = 0.0;
};

inline PeriodicField cell_block(const Eigen::VectorXd& c, int N, int block) {
  const int ns = PeriodicField::size_for(N);
  return PeriodicField(N, c.segment(block * ns, ns));
}

inline double relative_residual(const Eigen::MatrixXd& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double nb = b.norm();
  const double r = (A * x - b).norm();
  return nb > 0.0 ? r / nb : r;
}

/// Dense Cholesky up to N = 16, conjugate gradients (tolerance 1e-12) above.
inline Eigen::VectorXd solve_spd(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, bool iterative,
                                 const std::string& what) {
  if (!iterative) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw NotSPD(what + ": Cholesky factorization failed");
    return llt.solve(b);
  }
  Eigen::ConjugateGradient<Eigen::MatrixXd, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(static_cast<int>(10 * A.rows()));
  cg.compute(A);
  Eigen::VectorXd x = cg.solve(b);
  if (cg.info() != Eigen::Success) throw NotSPD(what + ": conjugate gradients did not converge");
  return x;
}

inline CellSolution solve_local(const CellContext& ctx, const CellSystem& sys, int xi_eta, bool iterative = false) {
  CellSolution s;
  s.xi_eta = xi_eta;
  s.N = sys.N;
  const Eigen::VectorXd F = cell_rhs(ctx, sys, xi_eta);
  s.coeffs = solve_spd(sys.A, F, iterative || sys.N > 16, "cell_solver");
  s.solver_residual = relative_residual(sys.A, s.coeffs, F);
  s.energy = 0.5 * s.coeffs.dot(sys.A * s.coeffs) - F.dot(s.coeffs);
  s.phi_vec[0] = cell_block(s.coeffs, sys.N, 0);
  s.phi_vec[1] = cell_block(s.coeffs, sys.N, 1);
  s.phi_scal = cell_block(s.coeffs, sys.N, 2);
  return s;
}

inline CellSolution solve_local(const CellContext& ctx, int xi_eta, int N) {
  return solve_local(ctx, assemble_cell_matrix(ctx, N), xi_eta);
}

/// Cell form evaluated directly from field values on a grid (independent of the matrix).
inline double cell_form_value(const CellContext& ctx, const PeriodicField (&v)[2], const PeriodicField& V,
                              const PeriodicField (&z)[2], const PeriodicField& Z) {
  const int N = std::max({v[0].truncation(), v[1].truncation(), V.truncation(), z[0].truncation(),
                          z[1].truncation(), Z.truncation()});
  const int M = cell_grid_size(N, ctx.theta);
  const double d = ctx.d, d3 = d * d * d / 3.0;
  double total = 0.0;
  auto pack = [](const PeriodicField (&f)[2], const Vec2& y) {
    CellVectorValues c;
    for (int r = 0; r < 2; ++r) {
      const auto e = f[r].eval(y);
      c.v[r] = e.value;
      c.grad.row(r) = e.grad.transpose();
    }
    return c;
  };
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const Vec2 y(double(i) / M, double(j) / M);
      const ShapeDerivs t = ctx.theta.eval(y, 3);
      const CellVectorValues a = pack(v, y), b = pack(z, y);
      const Mat2 ea = cell_membrane_strain(a), eb = cell_membrane_strain(b);
      const Mat2 ba = V.eval(y).hess + n_operator(ctx.geom, t, a);
      const Mat2 bb = Z.eval(y).hess + n_operator(ctx.geom, t, b);
      double s = 0.0;
      for (int al = 0; al < 2; ++al)
        for (int be = 0; be < 2; ++be)
          for (int r = 0; r < 2; ++r)
            for (int sg = 0; sg < 2; ++sg)
              s += ctx.tensor(al, be, r, sg) * (d * ea(r, sg) * eb(al, be) + d3 * ba(r, sg) * bb(al, be));
      total += s;
    }
  return ctx.geom.sqrt_a * total / (double(M) * M);
}

/// Diagonal of the Gram matrix of the product norm |v1|_{H^1}^2 + |V|_{H^2}^2.
inline Eigen::VectorXd cell_gram_diagonal(int N) {
  const Eigen::VectorXd h1 = PeriodicField::gram_diagonal(N, false);
  const Eigen::VectorXd h2 = PeriodicField::gram_diagonal(N, true);
  Eigen::VectorXd g(3 * h1.size());
  g << h1, h1, h2;
  return g;
}

/// Smallest eigenvalue of A preconditioned by the product-norm Gram matrix.
inline double cell_coercivity(const CellSystem& sys) {
  const Eigen::VectorXd s = cell_gram_diagonal(sys.N).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd P = s.asDiagonal() * sys.A * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Number of eigenvalues of the preconditioned matrix below tol * largest.
inline int cell_kernel_dimension(const CellSystem& sys, double tol = 1e-12) {
  const Eigen::VectorXd s = cell_gram_diagonal(sys.N).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd P = s.asDiagonal() * sys.A * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  int k = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] <= tol * top) ++k;
  return k;
}

inline double symmetry_defect(const Eigen::MatrixXd& A) {
  const double m = A.cwiseAbs().maxCoeff();
  return m > 0.0 ? (A - A.transpose()).cwiseAbs().maxCoeff() / m : 0.0;
}

/// CSV rows (xi_eta, k1, k2, component, real_coeff, imag_coeff) for the half-plane
/// frequencies and their conjugates.
inline void write_cell_csv(std::ostream& os, const std::vector<CellSolution>& sols) {
  os << "xi_eta,k1,k2,component,real_coeff,imag_coeff\n";
  for (const auto& s : sols) {
    const PeriodicField* comps[3] = {&s.phi_vec[0], &s.phi_vec[1], &s.phi_scal};
    for (int c = 0; c < 3; ++c) {
      const auto& fr = comps[c]->frequencies();
      for (std::size_t f = 0; f < fr.size(); ++f) {
        const auto z = comps[c]->complex_coeff(f);
        os << s.xi_eta << ',' << fr[f][0] << ',' << fr[f][1] << ',' << c << ',' << z.real() << ',' << z.imag()
           << '\n';
        os << s.xi_eta << ',' << -fr[f][0] << ',' << -fr[f][1] << ',' << c << ',' << z.real() << ','
           << -z.imag() << '\n';
      }
    }
  }
}

/// Summary rows (xi_eta, energy, residual, N).
inline void write_cell_summary_csv(std::ostream& os, const std::vector<CellSolution>& sols) {
  os << "xi_eta,energy,residual,N\n";
  for (const auto& s : sols) os << s.xi_eta << ',' << s.energy << ',' << s.solver_residual << ',' << s.N << '\n';
}

}  // namespace wrinkle
