#pragma once

/// \file convergence_harness.hpp
/// Numerical two-scale pairings, the corrector identity check and eps -> 0
/// studies linking the eps-problem to the two-scale limit.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "wrinkle/macro_solver.hpp"

namespace wrinkle {

struct ReportRow {
  std::string study_id;
  double eps = 0.0;
  std::string metric_id;
  double value = 0.0;
  double claimed_limit = 0.0;
  double gap = 0.0;
};

struct ConvergenceReport {
  std::string study_id;
  std::vector<ReportRow> rows;
  std::map<std::string, bool> flags;
  std::map<std::string, double> metrics;

  void add(double eps, const std::string& metric, double value, double limit) {
    rows.push_back({study_id, eps, metric, value, limit, std::abs(value - limit)});
  }
  bool pass() const {
    for (const auto& [k, v] : flags)
      if (!v) return false;
    return true;
  }
};

inline void write_report_csv(std::ostream& os, const std::vector<ConvergenceReport>& reps) {
  os << "study_id,eps,metric_id,value,claimed_limit,gap\n";
  for (const auto& r : reps)
    for (const auto& row : r.rows)
      os << row.study_id << ',' << row.eps << ',' << row.metric_id << ',' << row.value << ',' << row.claimed_limit
         << ',' << row.gap << '\n';
}

/// Every step may grow by at most `band`, and the last entry must be below the first.
inline bool decreasing_within_band(const std::vector<double>& e, double band = 0.1) {
  if (e.size() < 2) return false;
  for (std::size_t k = 0; k + 1 < e.size(); ++k)
    if (!(e[k + 1] <= (1.0 + band) * e[k])) return false;
  return e.back() < e.front();
}

using MacroFn = std::function<double(const Vec2&, double)>;         ///< f^eps(x)
using TestFn = std::function<double(const Vec2&, const Vec2&)>;     ///< phi(x, y)

struct TwoScaleTest {
  std::string id;
  MacroFn f_eps;
  TestFn phi;
  double claimed_limit = 0.0;
  std::vector<double> eps_schedule;
  /// strong variant: claimed |f|_{L2(Omega x Y)}; negative disables the check
  double claimed_norm = -1.0;
};

/// sum_q w_q f^eps(x_q) phi(x_q, x_q/eps) on a period-resolved rule.
inline double pairing(const MacroFn& f, const TestFn& phi, double eps, const RectRule& rule) {
  require_resolved(rule, eps, 8.0, "convergence_harness");
  double s = 0.0;
  for (std::size_t i = 0; i < rule.x1.size(); ++i)
    for (std::size_t j = 0; j < rule.x2.size(); ++j) {
      const Vec2 x(rule.x1.nodes[i], rule.x2.nodes[j]);
      const double w = rule.x1.weights[i] * rule.x2.weights[j];
      s += w * (f(x, eps) * phi(x, x / eps));
    }
  return s;
}

/// Plain weak L2 pairing sum_q w_q f^eps(x_q) psi(x_q), same node order as `pairing`.
inline double weak_pairing(const MacroFn& f, const std::function<double(const Vec2&)>& psi, double eps,
                           const RectRule& rule) {
  double s = 0.0;
  for (std::size_t i = 0; i < rule.x1.size(); ++i)
    for (std::size_t j = 0; j < rule.x2.size(); ++j) {
      const Vec2 x(rule.x1.nodes[i], rule.x2.nodes[j]);
      const double w = rule.x1.weights[i] * rule.x2.weights[j];
      s += w * (f(x, eps) * psi(x));
    }
  return s;
}

inline RectRule pairing_rule(double L1, double L2, double eps) {
  RectRule r = resolved_rule(L1, L2, eps, 16, 8);
  if (r.cells1 < 16 || r.cells2 < 16) r = rect_rule(L1, L2, std::max(r.cells1, 16), std::max(r.cells2, 16), 8);
  return r;
}

/// Evaluates the pairing along the schedule and compares with the claimed limit.
inline ConvergenceReport two_scale_pairing(const TwoScaleTest& t, double L1 = 1.0, double L2 = 1.0) {
  if (t.eps_schedule.empty()) throw InvalidSchedule("pairing needs a non-empty eps schedule");
  ConvergenceReport rep;
  rep.study_id = t.id;
  std::vector<double> gaps;
  for (double eps : t.eps_schedule) {
    const RectRule rule = pairing_rule(L1, L2, eps);
    const double v = pairing(t.f_eps, t.phi, eps, rule);
    rep.add(eps, "pairing", v, t.claimed_limit);
    gaps.push_back(std::abs(v - t.claimed_limit));
    if (t.claimed_norm >= 0.0) {
      const double n2 = pairing([&](const Vec2& x, double e) { return t.f_eps(x, e) * t.f_eps(x, e); },
                                [](const Vec2&, const Vec2&) { return 1.0; }, eps, rule);
      rep.add(eps, "strong_norm", std::sqrt(n2), t.claimed_norm);
    }
  }
  rep.metrics["final_gap"] = gaps.back();
  rep.flags["monotone"] = decreasing_within_band(gaps, 0.0) || gaps.back() < 1e-13;
  return rep;
}

/// Compactly supported macro factor normalized to unit integral on (0,L1)x(0,L2).
inline double unit_bump(const Vec2& x, double L1, double L2) {
  constexpr double pi = std::numbers::pi;
  return (pi * pi / (4.0 * L1 * L2)) * std::sin(pi * x[0] / L1) * std::sin(pi * x[1] / L2);
}

/// The sin/sin benchmark: f^eps = sin(2 pi x1/eps), phi = g(x) sin(2 pi y1) with
/// g the unit bump, limit 1/2.
inline TwoScaleTest sin_sin_benchmark(const std::vector<double>& schedule) {
  constexpr double tau = 2.0 * std::numbers::pi;
  TwoScaleTest t;
  t.id = "pairing_sin_sin";
  t.f_eps = [](const Vec2& x, double eps) { return std::sin(tau * x[0] / eps); };
  t.phi = [](const Vec2& x, const Vec2& y) { return unit_bump(x, 1.0, 1.0) * std::sin(tau * y[0]); };
  t.claimed_limit = 0.5;
  t.eps_schedule = schedule;
  t.claimed_norm = std::sqrt(0.5);
  return t;
}

/// Product rule benchmark: (x1 + eps) sin(2 pi x1/eps) against g(x) sin(2 pi y1); limit 1/2 int x1 g = 1/4.
inline TwoScaleTest product_benchmark(const std::vector<double>& schedule) {
  constexpr double tau = 2.0 * std::numbers::pi;
  TwoScaleTest t;
  t.id = "pairing_product";
  t.f_eps = [](const Vec2& x, double eps) { return (x[0] + eps) * std::sin(tau * x[0] / eps); };
  t.phi = [](const Vec2& x, const Vec2& y) { return unit_bump(x, 1.0, 1.0) * std::sin(tau * y[0]); };
  t.claimed_limit = 0.25;
  t.eps_schedule = schedule;
  return t;
}

/// Weak limit against a y-independent test: sin(2 pi x1/eps) against g(x) tends to 0.
inline TwoScaleTest weak_limit_benchmark(const std::vector<double>& schedule) {
  constexpr double tau = 2.0 * std::numbers::pi;
  TwoScaleTest t;
  t.id = "pairing_weak_limit";
  t.f_eps = [](const Vec2& x, double eps) { return 1.0 + std::sin(tau * x[0] / eps); };
  t.phi = [](const Vec2& x, const Vec2&) { return unit_bump(x, 1.0, 1.0); };
  t.claimed_limit = 1.0;
  t.eps_schedule = schedule;
  return t;
}

struct PairingChecks {
  double linearity_defect = 0.0;
  double constant_test_defect = 0.0;  ///< exact zero expected
};

/// Linearity of the pairing and the constant-in-y test consistency on a schedule.
inline PairingChecks pairing_identities(const std::vector<double>& schedule) {
  constexpr double tau = 2.0 * std::numbers::pi;
  const MacroFn f = [](const Vec2& x, double eps) { return std::sin(tau * x[0] / eps) * x[1]; };
  const MacroFn g = [](const Vec2& x, double eps) { return std::cos(tau * (x[0] + x[1]) / eps) + x[0]; };
  const TestFn phi = [](const Vec2& x, const Vec2& y) {
    return unit_bump(x, 1.0, 1.0) * (1.0 + std::sin(tau * y[0]) * std::cos(tau * y[1]));
  };
  const auto psi = [](const Vec2& x) { return x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]); };
  const double a = 1.7, b = -0.6;
  PairingChecks c;
  for (double eps : schedule) {
    const RectRule rule = pairing_rule(1.0, 1.0, eps);
    const double pf = pairing(f, phi, eps, rule), pg = pairing(g, phi, eps, rule);
    const double pc = pairing([&](const Vec2& x, double e) { return a * f(x, e) + b * g(x, e); }, phi, eps, rule);
    c.linearity_defect = std::max(c.linearity_defect, std::abs(pc - (a * pf + b * pg)) /
                                                          std::max(1.0, std::abs(a * pf) + std::abs(b * pg)));
    const double p1 = pairing(f, [&](const Vec2& x, const Vec2&) { return psi(x); }, eps, rule);
    const double p2 = weak_pairing(f, psi, eps, rule);
    c.constant_test_defect = std::max(c.constant_test_defect, std::abs(p1 - p2));
  }
  return c;
}

struct CorrectorCheck {
  double max_derivative_error = 0.0;
  double max_mean = 0.0;
  int samples = 0;
};

/// Builds u1_3(x, .) = -a^{rl} d_l theta u0_r(x) as a series, differentiates it
/// spectrally and compares with -a^{rl} d_{al} theta u0_r from the closed form.
inline CorrectorCheck corrector_check(const DisplacementField& u0, const SurfaceChart& chart,
                                      const ShapeFunction& theta, int macro_samples = 5, int cell_samples = 8) {
  CorrectorCheck out;
  const MacroSpace& sp = u0.space();
  const ShapeFunction dth[2] = {theta.derivative(0), theta.derivative(1)};
  for (int i = 0; i < macro_samples; ++i)
    for (int j = 0; j < macro_samples; ++j) {
      const Vec2 x(sp.L1 * (i + 0.5) / macro_samples, sp.L2 * (j + 0.5) / macro_samples);
      const GeometryAtPoint g = eval_geometry(chart, x);
      const Vec3 u = u0.eval(x).u;
      std::vector<std::pair<double, ShapeFunction>> terms;
      for (int r = 0; r < 2; ++r)
        for (int l = 0; l < 2; ++l) terms.emplace_back(-g.inv_metric(r, l) * u[r], dth[l]);
      const ShapeFunction u13 = ShapeFunction::combine(terms);
      const ShapeFunction du[2] = {u13.derivative(0), u13.derivative(1)};
      double mean = u13.constant();
      for (int a = 0; a < cell_samples; ++a)
        for (int b = 0; b < cell_samples; ++b) {
          const Vec2 y((a + 0.25) / cell_samples, (b + 0.6) / cell_samples);
          const Mat2 h = theta.eval(y, 2).hess;
          for (int al = 0; al < 2; ++al) {
            double expect = 0.0;
            for (int r = 0; r < 2; ++r)
              for (int l = 0; l < 2; ++l) expect -= g.inv_metric(r, l) * h(al, l) * u[r];
            const double got = du[al].eval(y, 0).value;
            out.max_derivative_error = std::max(out.max_derivative_error, std::abs(got - expect));
          }
          ++out.samples;
        }
      // grid mean of the series, exact for its degree
      const int M = 2 * theta.max_frequency() + 2;
      for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) mean += (u13.eval(Vec2(double(a) / M, double(b) / M), 0).value - u13.constant()) / (M * M);
      out.max_mean = std::max(out.max_mean, std::abs(mean));
    }
  return out;
}

/// Twelve separable test functions g_i(x) h_j(y): three compactly supported macro
/// factors times four cell factors.
struct TestBattery {
  static constexpr int size = 12;
  double L1 = 1.0, L2 = 1.0;

  double macro(int i, const Vec2& x) const {
    constexpr double pi = std::numbers::pi;
    const double s1 = std::sin(pi * x[0] / L1), s2 = std::sin(pi * x[1] / L2);
    if (i == 0) return s1 * s2;
    if (i == 1) return std::sin(2 * pi * x[0] / L1) * s2;
    return s1 * std::sin(2 * pi * x[1] / L2);
  }
  double cell(int j, const Vec2& y) const {
    constexpr double tau = 2.0 * std::numbers::pi;
    if (j == 0) return 1.0;
    if (j == 1) return std::sin(tau * y[0]);
    if (j == 2) return std::cos(tau * y[0]);
    return std::cos(tau * y[1]);
  }
  double operator()(int k, const Vec2& x, const Vec2& y) const { return macro(k / 4, x) * cell(k % 4, y); }
};

struct LimitStudyOptions {
  std::vector<double> schedule{0.25, 0.125, 0.0625, 0.03125};
  CoupledOptions coupled;
  double band = 0.1;
  int cell_grid = 12;  ///< y-grid for the claimed-limit integrals
};

/// Metrics sampled per (x, y) or per x for one study point. Layout of the pairing
/// vector: [dalpha u3 (2)] [combination (4: 11, 12, 21, 22)] [gamma (3)] [Gamma (3)], each times the battery.
inline constexpr int kPairingGroups = 2 + 4 + 3 + 3;

namespace detail {

inline std::string pairing_name(int group, int k) {
  static const char* names[kPairingGroups] = {"d1u3", "d2u3", "comb11", "comb12", "comb21", "comb22",
                                              "gamma11", "gamma22", "gamma12", "Gamma11", "Gamma22", "Gamma12"};
  return std::string(names[group]) + "_phi" + std::to_string(k);
}

/// Claimed second-derivative limit as printed, for one (alpha, beta):
/// d_ab u0_3 + d^y_ab W + a^{rl} d_abl theta u1_r - a^{rl} d_bl theta d_a u0_r
/// - a^{rl} d_al theta d_b u0_r - d_b a^{rl} d_al theta u0_r
inline double combination_limit(const GeometryAtPoint& g, const ShapeDerivs& t, const DisplacementValues& u0,
                                const CellVectorValues& u1, const Mat2& hessW, int a, int b) {
  double v = u0.hess3(a, b) + hessW(a, b);
  for (int r = 0; r < 2; ++r)
    for (int l = 0; l < 2; ++l) {
      const double arl = g.inv_metric(r, l);
      v += arl * t.third[a](b, l) * u1.v[r];
      v -= arl * t.hess(b, l) * u0.grad(r, a);
      v -= arl * t.hess(a, l) * u0.grad(r, b);
      v -= g.dinv_metric[b](r, l) * t.hess(a, l) * u0.u[r];
    }
  return v;
}

}  // namespace detail

/// eps -> 0 study: |u^eps - u0|_{L2} against the coupled reference plus the
/// pairings (ii)-(iv) against the battery.
inline ConvergenceReport eps_to_limit_study(const MacroProblem& pb, const ForceDensity& f,
                                            const LimitStudyOptions& opt = {}) {
  if (opt.schedule.empty()) throw InvalidSchedule("study needs a non-empty eps schedule");
  ConvergenceReport rep;
  rep.study_id = "eps_to_limit";
  const MacroSpace& sp = pb.space;
  TestBattery bat{sp.L1, sp.L2};
  const TwoScaleTriple ref = solve_coupled_two_scale(pb, f, opt.coupled);
  const GalerkinSolution hom = solve_homogenized(pb, f);
  const RectRule smooth = smooth_rule(sp);
  const double ref_norm = field_norms(ref.u0, smooth).l2;
  rep.metrics["coupled_residual"] = ref.residual;
  rep.metrics["coupled_vs_homogenized_gap"] = relative_l2_gap(hom.u, ref.u0, smooth);

  // claimed limits: integrals over Omega x Y on the smooth rule times a uniform cell grid
  const int G = kPairingGroups * TestBattery::size;
  std::vector<double> limit(G, 0.0);
  double asym = 0.0, asym_scale = 0.0;
  {
    const int M = opt.cell_grid;
    for_each_point(sp, smooth, [&](const Vec2& x, double w, const Eigen::MatrixXd&) {
      const GeometryAtPoint g = eval_geometry(pb.chart, x);
      const DisplacementValues u0 = ref.u0.eval(x);
      const Eigen::VectorXd cc = ref.cell_coeffs_at(x);
      const PeriodicField f1 = cell_block(cc, ref.N, 0), f2 = cell_block(cc, ref.N, 1), fU = cell_block(cc, ref.N, 2);
      for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
          const Vec2 y((a + 0.5) / M, (b + 0.5) / M);
          const ShapeDerivs t = pb.theta.eval(y, 3);
          CellVectorValues u1;
          const auto e1 = f1.eval(y), e2 = f2.eval(y);
          u1.v << e1.value, e2.value;
          u1.grad.row(0) = e1.grad.transpose();
          u1.grad.row(1) = e2.grad.transpose();
          const Mat2 hW = fU.eval(y).hess;
          const double wy = w / (M * M);
          double vals[kPairingGroups];
          for (int al = 0; al < 2; ++al) {
            double v = u0.grad3[al];
            for (int r = 0; r < 2; ++r)
              for (int l = 0; l < 2; ++l) v -= g.inv_metric(r, l) * t.hess(al, l) * u0.u[r];
            vals[al] = v;
          }
          const double c12 = detail::combination_limit(g, t, u0, u1, hW, 0, 1);
          const double c21 = detail::combination_limit(g, t, u0, u1, hW, 1, 0);
          vals[2] = detail::combination_limit(g, t, u0, u1, hW, 0, 0);
          vals[3] = c12;
          vals[4] = c21;
          vals[5] = detail::combination_limit(g, t, u0, u1, hW, 1, 1);
          asym = std::max(asym, std::abs(c12 - c21));
          asym_scale = std::max(asym_scale, std::abs(c12) + std::abs(c21));
          const TwoScaleLimits lim = two_scale_targets(g, t, u0, u1, hW);
          const Eigen::Vector3d gm = voigt(lim.membrane), bm = voigt(lim.bending);
          for (int c = 0; c < 3; ++c) {
            vals[6 + c] = gm[c];
            vals[9 + c] = bm[c];
          }
          for (int k = 0; k < TestBattery::size; ++k) {
            const double ph = bat(k, x, y) * wy;
            for (int gi = 0; gi < kPairingGroups; ++gi) limit[gi * TestBattery::size + k] += vals[gi] * ph;
          }
        }
    });
  }
  rep.metrics["combination_asymmetry"] = asym_scale > 0.0 ? asym / asym_scale : 0.0;

  std::vector<double> errors;
  std::vector<std::vector<double>> gaps(G);
  for (double eps : opt.schedule) {
    const RectRule rule = eps_rule(sp, eps);
    const GalerkinSolution ue = solve_eps_problem(pb, eps, f, rule);
    const double err = field_norms(DisplacementField(sp, ue.u.coeffs() - ref.u0.coeffs()), smooth).l2;
    errors.push_back(ref_norm > 0.0 ? err / ref_norm : err);
    rep.add(eps, "l2_error_vs_coupled", err, 0.0);
    rep.add(eps, "rel_l2_error_vs_coupled", errors.back(), 0.0);
    rep.add(eps, "rel_l2_error_vs_homogenized", relative_l2_gap(ue.u, hom.u, smooth), 0.0);
    rep.add(eps, "eps_solve_residual", ue.residual, 0.0);

    std::vector<double> pair(G, 0.0);
    for_each_point(sp, rule, [&](const Vec2& x, double w, const Eigen::MatrixXd& phi) {
      const BaseFrame bf = base_frame(pb.chart, x);
      const GeometryAtPoint g = extract_geometry(bf.frame);
      const EpsGeometryAtPoint ge = eval_exact_eps(bf, pb.theta, x, eps);
      const Eigen::Matrix<double, kChannels, 1> ch = phi * ue.u.coeffs();
      DisplacementValues u;
      u.u = ch.head<3>();
      u.grad << ch[3], ch[4], ch[5], ch[6];
      u.grad3 = ch.segment<2>(7);
      u.hess3 << ch[9], ch[10], ch[10], ch[11];
      double vals[kPairingGroups];
      vals[0] = u.grad3[0];
      vals[1] = u.grad3[1];
      const Mat2 comb = u.hess3 + third_derivative_term(g, ge.shape, u.u.head<2>()) / eps;
      vals[2] = comb(0, 0);
      vals[3] = comb(0, 1);
      vals[4] = comb(1, 0);
      vals[5] = comb(1, 1);
      const Eigen::Vector3d gm = voigt(membrane_strain(ge.surface, u)), bm = voigt(bending_strain(ge.surface, u));
      for (int c = 0; c < 3; ++c) {
        vals[6 + c] = gm[c];
        vals[9 + c] = bm[c];
      }
      const Vec2 y = x / eps;
      for (int k = 0; k < TestBattery::size; ++k) {
        const double ph = bat(k, x, y) * w;
        for (int gi = 0; gi < kPairingGroups; ++gi) pair[gi * TestBattery::size + k] += vals[gi] * ph;
      }
    });
    for (int gi = 0; gi < kPairingGroups; ++gi)
      for (int k = 0; k < TestBattery::size; ++k) {
        const int idx = gi * TestBattery::size + k;
        rep.add(eps, detail::pairing_name(gi, k), pair[idx], limit[idx]);
        gaps[idx].push_back(std::abs(pair[idx] - limit[idx]));
      }
  }
  rep.flags["l2_error_decreasing"] = decreasing_within_band(errors, opt.band);
  rep.metrics["final_rel_l2_error"] = errors.back();
  int dec = 0;
  for (int k = 0; k < TestBattery::size; ++k)
    for (int al = 0; al < 2; ++al) dec += decreasing_within_band(gaps[al * TestBattery::size + k], opt.band);
  rep.metrics["dalpha_u3_pairings_decreasing"] = dec;
  rep.metrics["dalpha_u3_pairings_total"] = 2 * TestBattery::size;
  return rep;
}

}  // namespace wrinkle
