#pragma once

/// \file strain_kinematics.hpp
/// Linearized Koiter strains on a surface, the wrinkle correction terms and the
/// two-scale strain operators. Every operator is linear in the displacement.

#include <array>

#include "wrinkle/wrinkle_geometry.hpp"

namespace wrinkle {

/// Pointwise values of a displacement (u_1, u_2, u_3) and the derivatives the
/// strains need. grad(rho, alpha) = d_alpha u_rho.
struct DisplacementValues {
  Vec3 u = Vec3::Zero();
  Mat2 grad = Mat2::Zero();
  Vec2 grad3 = Vec2::Zero();
  Mat2 hess3 = Mat2::Zero();

  DisplacementValues& operator+=(const DisplacementValues& o) {
    u += o.u;
    grad += o.grad;
    grad3 += o.grad3;
    hess3 += o.hess3;
    return *this;
  }
  friend DisplacementValues operator*(double s, DisplacementValues v) {
    v.u *= s;
    v.grad *= s;
    v.grad3 *= s;
    v.hess3 *= s;
    return v;
  }
};

/// A y-periodic in-plane field v^1 = (v^1_1, v^1_2) at one cell point. grad(rho, alpha) = d^y_alpha v^1_rho.
struct CellVectorValues {
  Vec2 v = Vec2::Zero();
  Mat2 grad = Mat2::Zero();
};

/// gamma_ab = e_ab(u) - Gamma^r_ab u_r - b_ab u_3
inline Mat2 membrane_strain(const GeometryAtPoint& g, const DisplacementValues& u) {
  Mat2 s;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double v = 0.5 * (u.grad(b, a) + u.grad(a, b)) - g.b(a, b) * u.u[2];
      for (int r = 0; r < 2; ++r) v -= g.christoffel[r](a, b) * u.u[r];
      s(a, b) = v;
    }
  return s;
}

/// Gamma_ab = d_ab u_3 - Gamma^r_ab d_r u_3 + b^r_b (d_a u_r - Gamma^s_ra u_s) - c_ab u_3
///          + b^r_a (d_b u_r - Gamma^s_rb u_s) + (d_a b^r_b + Gamma^r_as b^s_b - Gamma^s_ab b^r_s) u_r
inline Mat2 bending_strain(const GeometryAtPoint& g, const DisplacementValues& u) {
  // covariant gradient D(r, a) = d_a u_r - Gamma^s_ra u_s
  Mat2 D;
  for (int r = 0; r < 2; ++r)
    for (int a = 0; a < 2; ++a) {
      double v = u.grad(r, a);
      for (int s = 0; s < 2; ++s) v -= g.christoffel[s](r, a) * u.u[s];
      D(r, a) = v;
    }
  Mat2 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double v = u.hess3(a, b) - g.c(a, b) * u.u[2];
      for (int r = 0; r < 2; ++r) {
        v -= g.christoffel[r](a, b) * u.grad3[r];
        v += g.bmix(r, b) * D(r, a) + g.bmix(r, a) * D(r, b);
        double cov = g.db[a](r, b);
        for (int s = 0; s < 2; ++s) cov += g.christoffel[r](a, s) * g.bmix(s, b) - g.christoffel[s](a, b) * g.bmix(r, s);
        v += cov * u.u[r];
      }
      out(a, b) = v;
    }
  return out;
}

/// (d_{a2} theta k_13 + d_{a1} theta k_32) / sqrt(a) . a^{rl} d_l a_b, indexed [a](b, r).
inline std::array<Mat2, 2> cross_product_coupling(const GeometryAtPoint& g, const Mat2& hess) {
  std::array<Mat2, 2> out{};
  for (int a = 0; a < 2; ++a) {
    const Vec3 w = (hess(a, 1) * g.k[0][2] + hess(a, 0) * g.k[2][1]) / g.sqrt_a;
    for (int b = 0; b < 2; ++b)
      for (int r = 0; r < 2; ++r) {
        double v = 0.0;
        for (int l = 0; l < 2; ++l) v += g.inv_metric(r, l) * w.dot(g.da[l][b]);
        out[a](b, r) = v;
      }
  }
  return out;
}

/// a^{rl} d_{alb} theta u_r (multiplied by 1/eps in the bending expansion).
inline Mat2 third_derivative_term(const GeometryAtPoint& g, const ShapeDerivs& t, const Vec2& ur) {
  Mat2 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double v = 0.0;
      for (int r = 0; r < 2; ++r)
        for (int l = 0; l < 2; ++l) v += g.inv_metric(r, l) * t.third[a](l, b) * ur[r];
      out(a, b) = v;
    }
  return out;
}

/// Q^eps_ab(u) with theta derivatives taken at y = x/eps.
inline Mat2 q_correction(const GeometryAtPoint& g, const ShapeDerivs& t, const DisplacementValues& u) {
  const Mat2& h = t.hess;
  const auto coupling = cross_product_coupling(g, h);
  Mat2 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double v = 0.0;
      for (int r = 0; r < 2; ++r)
        for (int l = 0; l < 2; ++l) {
          const double arl = g.inv_metric(r, l);
          v += arl * (h(l, b) * u.grad(r, a) + h(l, a) * u.grad(r, b));
          v -= arl * h(r, a) * h(l, b) * u.u[2];
          v += g.dinv_metric[a](r, l) * h(l, b) * u.u[r];
          for (int s = 0; s < 2; ++s)
            v -= arl * (h(l, s) * g.christoffel[s](a, b) * u.u[r] + h(l, a) * g.christoffel[s](r, b) * u.u[s]);
        }
      for (int l = 0; l < 2; ++l) v -= (g.bmix(l, a) * h(l, b) + g.bmix(l, b) * h(l, a)) * u.u[2];
      for (int r = 0; r < 2; ++r) v += coupling[a](b, r) * u.u[r];
      out(a, b) = v;
    }
  return out;
}

struct MembraneStrains {
  Mat2 gamma_eps;
  Mat2 gamma;
  Mat2 P;
};

struct BendingStrains {
  Mat2 Gamma_eps;
  Mat2 Gamma;
  Mat2 Q;
  Mat2 R;
};

/// gamma^eps from the exact wrinkled geometry, gamma from the base surface and
/// P^eps := (gamma^eps - gamma + d_ab theta u_3) / eps.
inline MembraneStrains membrane_strains(const DisplacementValues& u, const EpsGeometryAtPoint& ge,
                                        const GeometryAtPoint& g) {
  MembraneStrains m;
  m.gamma_eps = membrane_strain(ge.surface, u);
  m.gamma = membrane_strain(g, u);
  m.P = (m.gamma_eps - m.gamma + ge.shape.hess * u.u[2]) / ge.eps;
  return m;
}

/// Gamma^eps exact, Gamma base, Q^eps closed form and
/// R^eps := (Gamma^eps - Gamma - eps^-1 a^{rl} d_alb theta u_r - Q^eps) / eps.
inline BendingStrains bending_strains(const DisplacementValues& u, const EpsGeometryAtPoint& ge,
                                      const GeometryAtPoint& g) {
  BendingStrains s;
  s.Gamma_eps = bending_strain(ge.surface, u);
  s.Gamma = bending_strain(g, u);
  s.Q = q_correction(g, ge.shape, u);
  const Mat2 cubic = third_derivative_term(g, ge.shape, u.u.head<2>());
  s.R = (s.Gamma_eps - s.Gamma - cubic / ge.eps - s.Q) / ge.eps;
  return s;
}

/// e^y_ab(v1) = (d^y_a v1_b + d^y_b v1_a) / 2
inline Mat2 cell_membrane_strain(const CellVectorValues& v1) {
  Mat2 e;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) e(a, b) = 0.5 * (v1.grad(b, a) + v1.grad(a, b));
  return e;
}

/// M^y_ab(v) = -a^{rl} d_la theta Gamma^s_rb v_s + d_a a^{rl} d_lb theta v_r - d_b a^{rl} d_al theta v_r
///           + (d_a2 theta k_13 + d_a1 theta k_32)/sqrt(a) . a^{rl} d_l a_b v_r
inline Mat2 m_operator(const GeometryAtPoint& g, const ShapeDerivs& t, const Vec2& v) {
  const Mat2& h = t.hess;
  const auto coupling = cross_product_coupling(g, h);
  Mat2 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double s = 0.0;
      for (int r = 0; r < 2; ++r) {
        for (int l = 0; l < 2; ++l) {
          for (int q = 0; q < 2; ++q) s -= g.inv_metric(r, l) * h(l, a) * g.christoffel[q](r, b) * v[q];
          s += g.dinv_metric[a](r, l) * h(l, b) * v[r];
          s -= g.dinv_metric[b](r, l) * h(a, l) * v[r];
        }
        s += coupling[a](b, r) * v[r];
      }
      out(a, b) = s;
    }
  return out;
}

/// N^y_ab(v1) = a^{rl} d_alb theta v1_r + a^{rl}[d_lb theta d^y_a v1_r + d_la theta d^y_b v1_r]
///            + b^r_b d^y_a v1_r + b^r_a d^y_b v1_r
inline Mat2 n_operator(const GeometryAtPoint& g, const ShapeDerivs& t, const CellVectorValues& v1) {
  Mat2 out = third_derivative_term(g, t, v1.v);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double s = 0.0;
      for (int r = 0; r < 2; ++r) {
        for (int l = 0; l < 2; ++l)
          s += g.inv_metric(r, l) * (t.hess(l, b) * v1.grad(r, a) + t.hess(l, a) * v1.grad(r, b));
        s += g.bmix(r, b) * v1.grad(r, a) + g.bmix(r, a) * v1.grad(r, b);
      }
      out(a, b) += s;
    }
  return out;
}

struct CellStrains {
  Mat2 e_y;
  Mat2 M;
  Mat2 N;
  Mat2 gamma0;
  Mat2 Gamma0;
};

/// Two-scale strain operators at (x, y): v is the macro displacement at x, v1 the
/// in-plane corrector and hessV = d^y_ab V at y.
inline CellStrains cell_strain_ops(const GeometryAtPoint& g, const ShapeDerivs& t, const DisplacementValues& v,
                                   const CellVectorValues& v1, const Mat2& hessV) {
  CellStrains c;
  c.e_y = cell_membrane_strain(v1);
  c.M = m_operator(g, t, v.u.head<2>());
  c.N = n_operator(g, t, v1);
  c.gamma0 = membrane_strain(g, v) + c.e_y;
  c.Gamma0 = bending_strain(g, v) + hessV + c.N + c.M;
  return c;
}

struct TwoScaleLimits {
  Mat2 membrane;
  Mat2 bending;
};

/// Claimed two-scale limits of gamma^eps(u^eps) and Gamma^eps(u^eps):
///  gamma0 - d_ab theta u0_3  and  Gamma0 - a^{lr} d_ra theta d_lb theta u0_3 - [b^l_a d_lb theta + b^r_b d_ra theta] u0_3.
inline TwoScaleLimits two_scale_targets(const GeometryAtPoint& g, const ShapeDerivs& t, const DisplacementValues& u0,
                                        const CellVectorValues& u1, const Mat2& hessW) {
  const CellStrains c = cell_strain_ops(g, t, u0, u1, hessW);
  const Mat2& h = t.hess;
  TwoScaleLimits out;
  out.membrane = c.gamma0 - h * u0.u[2];
  Mat2 extra;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double s = 0.0;
      for (int l = 0; l < 2; ++l) {
        for (int r = 0; r < 2; ++r) s += g.inv_metric(l, r) * h(r, a) * h(l, b);
        s += g.bmix(l, a) * h(l, b) + g.bmix(l, b) * h(l, a);
      }
      extra(a, b) = s;
    }
  out.bending = c.Gamma0 - extra * u0.u[2];
  return out;
}

}  // namespace wrinkle
