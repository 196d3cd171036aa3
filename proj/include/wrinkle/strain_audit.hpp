#pragma once

/// \file strain_audit.hpp
/// Norms of the residual fields P^eps and R^eps over a battery of macro fields
/// and an eps schedule, and the decomposition identity check.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "wrinkle/macro_space.hpp"
#include "wrinkle/strain_kinematics.hpp"

namespace wrinkle {

/// Five fixed smooth fields in the Ritz space: a pure deflection, two in-plane
/// fields, and two mixed fields with higher modes.
inline std::vector<DisplacementField> strain_battery(const MacroSpace& sp) {
  std::vector<DisplacementField> out;
  auto idx = [&](int comp, int a, int b) {
    const int m = comp < 2 ? sp.m1 : sp.m3;
    return sp.offset(comp) + std::min(a, m - 1) * m + std::min(b, m - 1);
  };
  auto field = [&](std::vector<std::pair<int, double>> terms) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(sp.size());
    for (auto [k, v] : terms) c[k] += v;
    out.emplace_back(sp, c);
  };
  field({{idx(2, 0, 0), 1.0}});
  field({{idx(0, 0, 0), 1.0}});
  field({{idx(1, 1, 0), 1.0}, {idx(0, 0, 1), -0.5}});
  field({{idx(0, 0, 0), 0.4}, {idx(1, 0, 0), -0.3}, {idx(2, 0, 0), 1.0}, {idx(2, 1, 1), 0.5}});
  field({{idx(0, 2, 1), 0.7}, {idx(1, 1, 2), 0.6}, {idx(2, 2, 0), 0.8}, {idx(2, 0, 1), -0.4}});
  return out;
}

struct StrainAuditRow {
  int field = 0;
  double eps = 0.0;
  double norm_u_l2 = 0.0;
  double norm_u_h1 = 0.0;
  double norm_P = 0.0;
  double norm_R = 0.0;
  double ratio_P = 0.0;  ///< |P|_{L2} / |u|_{L2}
  double ratio_R = 0.0;  ///< |R|_{L2} / |u|_{H1}
  double decomposition_defect = 0.0;  ///< max |gamma - d2theta u3 + eps P - gamma^eps| relative
  double symmetry_defect = 0.0;       ///< max |gamma^eps_12 - gamma^eps_21|
};

struct StrainAuditReport {
  std::vector<StrainAuditRow> rows;
  std::vector<double> spread_P;  ///< per field, max/min of ratio_P over the schedule
  std::vector<double> spread_R;
  double max_spread = 0.0;
  double bound = 2.0;
  bool pass = false;
};

/// Quadrature for the audit: order-4 cells, >= 8 nodes per period, >= 24 cells.
inline RectRule audit_rule(double L1, double L2, double eps) {
  RectRule r = resolved_rule(L1, L2, eps, 8, 4);
  if (r.cells1 < 24 || r.cells2 < 24) r = rect_rule(L1, L2, std::max(r.cells1, 24), std::max(r.cells2, 24), 4);
  return r;
}

inline StrainAuditReport strain_audit(const SurfaceChart& chart, const ShapeFunction& theta, const MacroSpace& sp,
                                      const std::vector<double>& schedule, double bound = 2.0) {
  if (schedule.empty()) throw InvalidSchedule("strain audit needs a non-empty eps schedule");
  const auto battery = strain_battery(sp);
  const int nf = static_cast<int>(battery.size());
  Eigen::MatrixXd C(sp.size(), nf);
  for (int k = 0; k < nf; ++k) C.col(k) = battery[k].coeffs();

  StrainAuditReport rep;
  rep.bound = bound;
  for (double eps : schedule) {
    const RectRule rule = audit_rule(sp.L1, sp.L2, eps);
    require_resolved(rule, eps, 8.0, "strain_kinematics");
    std::vector<double> u2(nf, 0.0), h1(nf, 0.0), p2(nf, 0.0), r2(nf, 0.0), dec(nf, 0.0), sym(nf, 0.0),
        scale(nf, 0.0);
    for_each_point(sp, rule, [&](const Vec2& x, double w, const Eigen::MatrixXd& phi) {
      const BaseFrame bf = base_frame(chart, x);
      const GeometryAtPoint g = extract_geometry(bf.frame);
      const EpsGeometryAtPoint ge = eval_exact_eps(bf, theta, x, eps);
      const Eigen::MatrixXd ch = phi * C;  // channels x fields
      for (int k = 0; k < nf; ++k) {
        DisplacementValues u;
        u.u = ch.col(k).head<3>();
        u.grad << ch(3, k), ch(4, k), ch(5, k), ch(6, k);
        u.grad3 = ch.col(k).segment<2>(7);
        u.hess3 << ch(9, k), ch(10, k), ch(10, k), ch(11, k);
        const MembraneStrains m = membrane_strains(u, ge, g);
        const BendingStrains b = bending_strains(u, ge, g);
        u2[k] += w * u.u.squaredNorm();
        h1[k] += w * (u.u.squaredNorm() + u.grad.squaredNorm() + u.grad3.squaredNorm());
        p2[k] += w * m.P.squaredNorm();
        r2[k] += w * b.R.squaredNorm();
        const Mat2 rebuilt = m.gamma - ge.shape.hess * u.u[2] + eps * m.P;
        dec[k] = std::max(dec[k], (rebuilt - m.gamma_eps).cwiseAbs().maxCoeff());
        scale[k] = std::max(scale[k], m.gamma_eps.cwiseAbs().maxCoeff());
        sym[k] = std::max(sym[k], std::abs(m.gamma_eps(0, 1) - m.gamma_eps(1, 0)));
      }
    });
    for (int k = 0; k < nf; ++k) {
      StrainAuditRow row;
      row.field = k;
      row.eps = eps;
      row.norm_u_l2 = std::sqrt(u2[k]);
      row.norm_u_h1 = std::sqrt(h1[k]);
      row.norm_P = std::sqrt(p2[k]);
      row.norm_R = std::sqrt(r2[k]);
      row.ratio_P = row.norm_P / row.norm_u_l2;
      row.ratio_R = row.norm_R / row.norm_u_h1;
      row.decomposition_defect = scale[k] > 0.0 ? dec[k] / scale[k] : dec[k];
      row.symmetry_defect = sym[k];
      rep.rows.push_back(row);
    }
  }
  rep.pass = true;
  for (int k = 0; k < nf; ++k) {
    double pmin = 1e300, pmax = 0.0, rmin = 1e300, rmax = 0.0;
    for (const auto& r : rep.rows)
      if (r.field == k) {
        pmin = std::min(pmin, r.ratio_P);
        pmax = std::max(pmax, r.ratio_P);
        rmin = std::min(rmin, r.ratio_R);
        rmax = std::max(rmax, r.ratio_R);
      }
    // a residual that vanishes identically is trivially bounded
    const double sp_P = pmax <= 1e-14 ? 1.0 : pmax / pmin;
    const double sp_R = rmax <= 1e-14 ? 1.0 : rmax / rmin;
    rep.spread_P.push_back(sp_P);
    rep.spread_R.push_back(sp_R);
    rep.max_spread = std::max({rep.max_spread, sp_P, sp_R});
    if (!(sp_P <= bound) || !(sp_R <= bound)) rep.pass = false;
  }
  return rep;
}

inline void write_strain_audit_csv(std::ostream& os, const StrainAuditReport& rep) {
  os << "field,eps,norm_u_l2,norm_u_h1,norm_P,norm_R,ratio_P,ratio_R,decomposition_defect,symmetry_defect\n";
  for (const auto& r : rep.rows)
    os << r.field << ',' << r.eps << ',' << r.norm_u_l2 << ',' << r.norm_u_h1 << ',' << r.norm_P << ',' << r.norm_R
       << ',' << r.ratio_P << ',' << r.ratio_R << ',' << r.decomposition_defect << ',' << r.symmetry_defect << '\n';
}

}  // namespace wrinkle
