#pragma once

/// \file macro_solver.hpp
/// Ritz solvers on the macro rectangle: the eps-problem on the wrinkled surface,
/// the homogenized macro problem and the coupled two-scale problem.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wrinkle/cell_solver.hpp"
#include "wrinkle/macro_space.hpp"

namespace wrinkle {

struct Material {
  double lambda = 1.0;
  double mu = 1.0;
  double d = 0.05;  ///< half thickness
};

inline void validate_material(const Material& m) {
  if (!(m.lambda > 0.0) || !(m.mu > 0.0) || !(m.d > 0.0))
    throw NonPositiveLame("lambda, mu and d must be positive");
}

/// Force density f(x; eps) in the component convention of the displacement.
struct ForceDensity {
  std::string id = "zero";
  std::function<Vec3(const Vec2&, double)> f = [](const Vec2&, double) { return Vec3::Zero(); };
  bool eps_dependent = false;

  Vec3 operator()(const Vec2& x, double eps) const { return f(x, eps); }
};

/// Catalog: zero, uniform (normal load), bump (sin sin normal load), mixed
/// (all three components), oscillating (normal load modulated at scale eps).
inline ForceDensity force_catalog(const std::string& name, double amp, double L1, double L2) {
  ForceDensity F;
  F.id = name;
  constexpr double pi = std::numbers::pi;
  if (name == "zero") {
  } else if (name == "uniform") {
    F.f = [amp](const Vec2&, double) { return Vec3(0.0, 0.0, amp); };
  } else if (name == "bump") {
    F.f = [=](const Vec2& x, double) {
      return Vec3(0.0, 0.0, amp * std::sin(pi * x[0] / L1) * std::sin(pi * x[1] / L2));
    };
  } else if (name == "mixed") {
    F.f = [=](const Vec2& x, double) {
      const double s = std::sin(pi * x[0] / L1) * std::sin(pi * x[1] / L2);
      return Vec3(0.3 * amp * s * std::cos(pi * x[1] / L2), -0.2 * amp * s, amp * (0.5 + s));
    };
  } else if (name == "oscillating") {
    F.eps_dependent = true;
    F.f = [amp](const Vec2& x, double eps) {
      return Vec3(0.0, 0.0, amp * (1.0 + 0.5 * std::sin(2.0 * pi * x[0] / eps)));
    };
  } else {
    throw ConfigError("unknown force '" + name + "' (zero, uniform, bump, mixed, oscillating)");
  }
  return F;
}

struct MacroProblem {
  SurfaceChart chart;
  ShapeFunction theta;
  Material material;
  MacroSpace space;
};

/// Result of one Galerkin solve with its algebraic checks.
struct GalerkinSolution {
  DisplacementField u;
  Eigen::MatrixXd K;
  Eigen::VectorXd F;
  double residual = 0.0;        ///< |K c - F| / |F|
  double orthogonality = 0.0;   ///< max_j |(K c - F)_j| / |F|
  double energy_defect = 0.0;   ///< |c.K c - F.c| / |F.c|
  double symmetry = 0.0;
};

inline GalerkinSolution finish_solve(const MacroSpace& sp, Eigen::MatrixXd K, Eigen::VectorXd F,
                                     const std::string& what) {
  GalerkinSolution s;
  s.symmetry = symmetry_defect(K);
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw NotSPD(what + ": Galerkin matrix is not positive definite");
  Eigen::VectorXd c = llt.solve(F);
  // one step of refinement keeps the residual at rounding level for stiff bending blocks
  c += llt.solve(F - K * c);
  const Eigen::VectorXd r = K * c - F;
  const double nf = F.norm();
  s.residual = nf > 0.0 ? r.norm() / nf : r.norm();
  s.orthogonality = nf > 0.0 ? r.cwiseAbs().maxCoeff() / nf : r.cwiseAbs().maxCoeff();
  const double fc = F.dot(c);
  s.energy_defect = fc != 0.0 ? std::abs(c.dot(K * c) - fc) / std::abs(fc) : std::abs(c.dot(K * c));
  s.u = DisplacementField(sp, c);
  s.K = std::move(K);
  s.F = std::move(F);
  return s;
}

namespace detail {

/// Square-root weight R with R^T R = scale * D.
inline Mat3 sqrt_weight(const Mat3& D, double scale) {
  Eigen::LLT<Mat3> llt(D);
  if (llt.info() != Eigen::Success) throw NotSPD("elasticity tensor is not positive definite");
  return std::sqrt(scale) * Mat3(llt.matrixU());
}

inline Eigen::Matrix<double, 6, kChannels> koiter_channels(const GeometryAtPoint& g) {
  return channel_matrix<6>([&](const DisplacementValues& u) {
    Eigen::Matrix<double, 6, 1> v;
    v << voigt(membrane_strain(g, u)), voigt(bending_strain(g, u));
    return v;
  });
}

/// T^a(u): the part of M^y(u) multiplying the cell Hessian entry a (11, 12, 22).
inline std::array<Eigen::Matrix<double, 3, kChannels>, 3> m_channels(const GeometryAtPoint& g) {
  std::array<Eigen::Matrix<double, 3, kChannels>, 3> out;
  for (int a = 0; a < 3; ++a) {
    ShapeDerivs t;
    if (a == 0) t.hess(0, 0) = 1.0;
    else if (a == 1) t.hess(0, 1) = t.hess(1, 0) = 1.0;
    else t.hess(1, 1) = 1.0;
    out[a] = channel_matrix<3>([&](const DisplacementValues& u) {
      return Eigen::Vector3d(voigt(m_operator(g, t, u.u.head<2>())));
    });
  }
  return out;
}

}  // namespace detail

/// Default wrinkle-resolved rule: order-6 cells, at least `min_points` nodes per
/// period and never fewer than `min_cells` cells per direction. At eps = 1/4 the
/// exact wrinkled geometry is far from polynomial and 8 nodes per period are not
/// enough; 18 per period plus the floor are converged to ~1e-5.
inline RectRule eps_rule(const MacroSpace& sp, double eps, int min_points = 18, int order = 6, int min_cells = 24) {
  RectRule r = resolved_rule(sp.L1, sp.L2, eps, min_points, order);
  if (r.cells1 < min_cells || r.cells2 < min_cells)
    r = rect_rule(sp.L1, sp.L2, std::max(r.cells1, min_cells), std::max(r.cells2, min_cells), order);
  return r;
}

/// Galerkin matrix and load of B^eps on the given rule.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_eps_system(const MacroProblem& pb, double eps,
                                                                       const ForceDensity& f, const RectRule& rule,
                                                                       double min_points = 8.0) {
  validate_material(pb.material);
  if (!(eps > 0.0)) throw InvalidSchedule("eps must be positive");
  require_resolved(rule, eps, min_points, "macro_solver");
  const double d = pb.material.d;
  RankAccumulator acc(pb.space.size());
  Eigen::VectorXd F = Eigen::VectorXd::Zero(pb.space.size());
  Eigen::Matrix<double, 6, 6> R = Eigen::Matrix<double, 6, 6>::Zero();
  for_each_point(pb.space, rule, [&](const Vec2& x, double w, const Eigen::MatrixXd& phi) {
    const BaseFrame bf = base_frame(pb.chart, x);
    const EpsGeometryAtPoint ge = eval_exact_eps(bf, pb.theta, x, eps);
    const GeometryAtPoint& g = ge.surface;
    const Mat3 D = elasticity_tensor(g, pb.material.lambda, pb.material.mu).voigt();
    const double ws = w * g.sqrt_a;
    R.topLeftCorner<3, 3>() = detail::sqrt_weight(D, d * ws);
    R.bottomRightCorner<3, 3>() = detail::sqrt_weight(D, d * d * d / 3.0 * ws);
    acc.add_rows((R * detail::koiter_channels(g)) * phi);
    F.noalias() += phi.topRows<3>().transpose() * (ws * f(x, eps));
  });
  return {acc.matrix(), F};
}

inline GalerkinSolution solve_eps_problem(const MacroProblem& pb, double eps, const ForceDensity& f,
                                          const RectRule& rule) {
  auto [K, F] = assemble_eps_system(pb, eps, f, rule);
  return finish_solve(pb.space, std::move(K), std::move(F), "macro_solver(eps)");
}

inline GalerkinSolution solve_eps_problem(const MacroProblem& pb, double eps, const ForceDensity& f) {
  return solve_eps_problem(pb, eps, f, eps_rule(pb.space, eps));
}

/// Gram matrix of |v|_{H^1}^2 + sum_ab |d_ab v3 + eps^-1 a^{rl} d_alb theta(x/eps) v_r|^2.
inline Eigen::MatrixXd eps_norm_gram(const MacroProblem& pb, double eps, const RectRule& rule) {
  RankAccumulator acc(pb.space.size());
  for_each_point(pb.space, rule, [&](const Vec2& x, double w, const Eigen::MatrixXd& phi) {
    const GeometryAtPoint g = eval_geometry(pb.chart, x);
    const ShapeDerivs t = pb.theta.eval(x / eps, 3);
    Eigen::Matrix<double, 12, kChannels> C = Eigen::Matrix<double, 12, kChannels>::Zero();
    C.topLeftCorner<9, 9>().setIdentity();
    C.bottomRows<3>() = channel_matrix<3>([&](const DisplacementValues& u) {
      const Mat2 m = u.hess3 + third_derivative_term(g, t, u.u.head<2>()) / eps;
      // m is symmetric, so the 12 and 21 terms fold into one weighted row
      return Eigen::Vector3d(m(0, 0), m(1, 1), std::sqrt(0.5) * (m(0, 1) + m(1, 0)));
    });
    acc.add_rows(std::sqrt(w) * (C * phi));
  });
  return acc.matrix();
}

/// Smallest generalized eigenvalue of (B^eps matrix, ||.||_eps^2 Gram).
inline double coercivity_probe(const MacroProblem& pb, double eps, const RectRule& rule) {
  const auto [K, F] = assemble_eps_system(pb, eps, ForceDensity{}, rule);
  const Eigen::MatrixXd G = eps_norm_gram(pb, eps, rule);
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw NotSPD("macro_solver(coercivity): norm Gram matrix is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, G, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double coercivity_probe(const MacroProblem& pb, double eps) {
  return coercivity_probe(pb, eps, eps_rule(pb.space, eps));
}

/// <d_a theta d_b theta> over the cell for a, b in (11, 12, 22).
inline Mat3 hessian_moments(const ShapeFunction& theta) {
  const int M = std::max(4, 2 * theta.max_frequency() + 2);
  Mat3 G = Mat3::Zero();
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const Mat2 h = theta.eval(Vec2(double(i) / M, double(j) / M), 2).hess;
      const Eigen::Vector3d v(h(0, 0), h(0, 1), h(1, 1));
      G += v * v.transpose();
    }
  return G / (double(M) * M);
}

struct HomogenizedParts {
  bool membrane = true;
  bool bending = true;
  bool mm = true;  ///< (d^3/3) int_Y M^y M^y
};

/// Smooth rule for eps-independent forms.
inline RectRule smooth_rule(const MacroSpace& sp, int cells = 8, int order = 8) {
  return rect_rule(sp.L1, sp.L2, cells, cells, order);
}

inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_homogenized(const MacroProblem& pb, const ForceDensity& f0,
                                                                        const RectRule& rule,
                                                                        HomogenizedParts parts = {}) {
  validate_material(pb.material);
  const double d = pb.material.d, d3 = d * d * d / 3.0;
  const Mat3 Cm = psd_factor<3>(hessian_moments(pb.theta));
  RankAccumulator acc(pb.space.size());
  Eigen::VectorXd F = Eigen::VectorXd::Zero(pb.space.size());
  Eigen::Matrix<double, 15, kChannels> S;
  for_each_point(pb.space, rule, [&](const Vec2& x, double w, const Eigen::MatrixXd& phi) {
    const GeometryAtPoint g = eval_geometry(pb.chart, x);
    const Mat3 D = elasticity_tensor(g, pb.material.lambda, pb.material.mu).voigt();
    const double ws = w * g.sqrt_a;
    const auto kc = detail::koiter_channels(g);
    S.setZero();
    if (parts.membrane) S.topRows<3>() = detail::sqrt_weight(D, d * ws) * kc.topRows<3>();
    if (parts.bending) S.middleRows<3>(3) = detail::sqrt_weight(D, d3 * ws) * kc.bottomRows<3>();
    if (parts.mm) {
      const auto T = detail::m_channels(g);
      const Mat3 Rb = detail::sqrt_weight(D, d3 * ws);
      for (int c = 0; c < 3; ++c) {
        Eigen::Matrix<double, 3, kChannels> mc = Eigen::Matrix<double, 3, kChannels>::Zero();
        for (int a = 0; a < 3; ++a) mc += Cm(a, c) * T[a];
        S.middleRows<3>(6 + 3 * c) = Rb * mc;
      }
    }
    acc.add_rows(S * phi);
    F.noalias() += phi.topRows<3>().transpose() * (ws * f0(x, 0.0));
  });
  return {acc.matrix(), F};
}

inline GalerkinSolution solve_homogenized(const MacroProblem& pb, const ForceDensity& f0, const RectRule& rule) {
  auto [K, F] = assemble_homogenized(pb, f0, rule);
  return finish_solve(pb.space, std::move(K), std::move(F), "macro_solver(homogenized)");
}

inline GalerkinSolution solve_homogenized(const MacroProblem& pb, const ForceDensity& f0) {
  return solve_homogenized(pb, f0, smooth_rule(pb.space));
}

/// Orthonormal Legendre factor sqrt((2a+1)/L) P_a(2x/L - 1).
inline double legendre_factor(int a, double L, double x) {
  const double s = 2.0 * x / L - 1.0;
  double p0 = 1.0, p1 = s;
  double p = a == 0 ? p0 : p1;
  for (int k = 1; k < a; ++k) {
    const double p2 = ((2.0 * k + 1.0) * s * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
    p = p2;
  }
  return std::sqrt((2.0 * a + 1.0) / L) * p;
}

struct CoupledOptions {
  int N = 2;               ///< cell truncation
  int degree = 3;          ///< Legendre factors per direction for the corrector coefficients
  double tikhonov = 1e-12;
  int rule_cells = 4;
  int rule_order = 8;
};

/// (u0, u1, U) on the discretized product space. Corrector coefficients are laid
/// out as [p = 0 .. P-1][cell unknown], with p = a * degree + b.
struct TwoScaleTriple {
  DisplacementField u0;
  int N = 0;
  int degree = 0;
  double L1 = 1.0, L2 = 1.0;
  Eigen::VectorXd corrector;
  double residual = 0.0;            ///< relative residual of the regularized system
  double unregularized_residual = 0.0;
  double symmetry = 0.0;

  Eigen::VectorXd cell_coeffs_at(const Vec2& x) const {
    const int nc = cell_unknowns(N);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nc);
    for (int a = 0; a < degree; ++a)
      for (int b = 0; b < degree; ++b) {
        const double phi = legendre_factor(a, L1, x[0]) * legendre_factor(b, L2, x[1]);
        c += phi * corrector.segment((a * degree + b) * nc, nc);
      }
    return c;
  }

  /// u1(x, .) and its y-gradient at y.
  CellVectorValues u1(const Vec2& x, const Vec2& y) const {
    const Eigen::VectorXd c = cell_coeffs_at(x);
    CellVectorValues v;
    for (int r = 0; r < 2; ++r) {
      const auto e = cell_block(c, N, r).eval(y);
      v.v[r] = e.value;
      v.grad.row(r) = e.grad.transpose();
    }
    return v;
  }

  TrigBasisValue U(const Vec2& x, const Vec2& y) const { return cell_block(cell_coeffs_at(x), N, 2).eval(y); }
};

inline TwoScaleTriple solve_coupled_two_scale(const MacroProblem& pb, const ForceDensity& f0,
                                              const CoupledOptions& opt = {}) {
  validate_material(pb.material);
  const MacroSpace& sp = pb.space;
  const RectRule rule = rect_rule(sp.L1, sp.L2, opt.rule_cells, opt.rule_cells, opt.rule_order);
  const int n = sp.size();
  const int nc = cell_unknowns(opt.N);
  const int q = opt.degree;
  const int P = q * q;
  const int total = n + P * nc;
  const double d = pb.material.d, d3 = d * d * d / 3.0;

  auto [Kuu, Fu] = assemble_homogenized(pb, f0, rule);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(total, total);
  A.topLeftCorner(n, n) = Kuu;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);
  rhs.head(n) = Fu;

  const bool constant_geometry = pb.chart.kind == ChartKind::Plate;
  std::optional<CellSystem> cached;
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(P, P);
  Eigen::VectorXd phiP(P);
  for_each_point(sp, rule, [&](const Vec2& x, double w, const Eigen::MatrixXd& phi) {
    const GeometryAtPoint g = eval_geometry(pb.chart, x);
    CellContext ctx;
    ctx.x0 = x;
    ctx.geom = g;
    ctx.tensor = elasticity_tensor(g, pb.material.lambda, pb.material.mu);
    ctx.theta = pb.theta;
    ctx.d = d;
    if (!constant_geometry || !cached) cached = assemble_cell_matrix(ctx, opt.N);
    const CellSystem& cs = *cached;
    const Mat3 D = ctx.tensor.voigt();
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) phiP[a * q + b] = legendre_factor(a, sp.L1, x[0]) * legendre_factor(b, sp.L2, x[1]);

    const auto kc = detail::koiter_channels(g);
    const Eigen::MatrixXd Bm = kc.topRows<3>() * phi;     // 3 x n
    const Eigen::MatrixXd Bb = kc.bottomRows<3>() * phi;  // 3 x n
    const auto T = detail::m_channels(g);
    Eigen::MatrixXd X = (d * g.sqrt_a) * (Bm.transpose() * (D * cs.mean_e));
    X.noalias() += (d3 * g.sqrt_a) * (Bb.transpose() * (D * cs.mean_bend));
    for (int a = 0; a < 3; ++a) {
      const Eigen::MatrixXd Ta = T[a] * phi;
      X.noalias() += (d3 * g.sqrt_a) * (Ta.transpose() * (D * cs.hess_bend[a]));
    }
    for (int p = 0; p < P; ++p) A.block(0, n + p * nc, n, nc) += (w * phiP[p]) * X;

    if (constant_geometry) {
      mass.noalias() += w * phiP * phiP.transpose();
    } else {
      for (int p = 0; p < P; ++p)
        for (int pp = 0; pp <= p; ++pp)
          A.block(n + p * nc, n + pp * nc, nc, nc) += (w * phiP[p] * phiP[pp]) * cs.A;
    }
  });
  if (constant_geometry) {
    for (int p = 0; p < P; ++p)
      for (int pp = 0; pp <= p; ++pp) A.block(n + p * nc, n + pp * nc, nc, nc) = mass(p, pp) * cached->A;
  }
  // mirror the lower corrector blocks and the coupling block
  for (int p = 0; p < P; ++p)
    for (int pp = 0; pp < p; ++pp)
      A.block(n + pp * nc, n + p * nc, nc, nc) = A.block(n + p * nc, n + pp * nc, nc, nc).transpose();
  A.block(n, 0, P * nc, n) = A.block(0, n, n, P * nc).transpose();

  TwoScaleTriple out;
  out.N = opt.N;
  out.degree = q;
  out.L1 = sp.L1;
  out.L2 = sp.L2;
  out.symmetry = symmetry_defect(A);

  Eigen::MatrixXd Areg = A;
  const Eigen::VectorXd gram = cell_gram_diagonal(opt.N);
  for (int p = 0; p < P; ++p)
    for (int k = 0; k < nc; ++k) Areg(n + p * nc + k, n + p * nc + k) += opt.tikhonov * gram[k];

  Eigen::LLT<Eigen::MatrixXd> llt(Areg);
  if (llt.info() != Eigen::Success)
    throw SingularSystem("coupled two-scale system is not positive definite after regularization");
  Eigen::VectorXd x = llt.solve(rhs);
  x += llt.solve(rhs - Areg * x);
  out.residual = relative_residual(Areg, x, rhs);
  out.unregularized_residual = relative_residual(A, x, rhs);
  if (!(out.residual < 1e-8))
    throw SingularSystem("coupled two-scale residual " + std::to_string(out.residual) + " exceeds 1e-8");
  out.u0 = DisplacementField(sp, x.head(n));
  out.corrector = x.tail(P * nc);
  return out;
}

/// Relative L2 distance |u - v| / |v| on a rule.
inline double relative_l2_gap(const DisplacementField& u, const DisplacementField& v, const RectRule& rule) {
  const DisplacementField diff(u.space(), u.coeffs() - v.coeffs());
  const double nv = field_norms(v, rule).l2;
  const double nd = field_norms(diff, rule).l2;
  return nv > 0.0 ? nd / nv : nd;
}

/// CSV (index, component, a, b, coeff) of a Ritz solution.
inline void write_coefficients_csv(std::ostream& os, const DisplacementField& u) {
  const MacroSpace& sp = u.space();
  os << "index,component,i,j,coeff\n";
  for (int c = 0; c < 3; ++c) {
    const int m = c < 2 ? sp.m1 : sp.m3;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const int k = sp.offset(c) + a * m + b;
        os << k << ',' << c + 1 << ',' << a << ',' << b << ',' << u.coeffs()[k] << '\n';
      }
  }
}

/// CSV (x1, x2, u1, u2, u3) on a uniform grid with `points` samples per direction.
inline void write_sampled_csv(std::ostream& os, const DisplacementField& u, int points) {
  const MacroSpace& sp = u.space();
  os << "x1,x2,u1,u2,u3\n";
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      const Vec2 x(sp.L1 * i / (points - 1.0), sp.L2 * j / (points - 1.0));
      const auto v = u.eval(x);
      os << x[0] << ',' << x[1] << ',' << v.u[0] << ',' << v.u[1] << ',' << v.u[2] << '\n';
    }
}

}  // namespace wrinkle
