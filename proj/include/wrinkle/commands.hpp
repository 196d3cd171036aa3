#pragma once

/// \file commands.hpp
/// The batch commands behind the `wrinkle` executable. Every command renders its
/// reports into memory first; files are written only after the whole command
/// succeeded, so an error never leaves partial reports behind.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <locale>
#include <memory>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wrinkle/convergence_harness.hpp"
#include "wrinkle/run_config.hpp"
#include "wrinkle/strain_audit.hpp"

namespace wrinkle {

/// Reports of one command, kept in insertion order.
struct CommandOutput {
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<std::pair<std::string, bool>> flags;

  std::ostringstream& open(const std::string& name) {
    buffers_.emplace_back(name, std::make_unique<std::ostringstream>());
    auto& os = *buffers_.back().second;
    os.imbue(std::locale::classic());
    os.precision(17);
    return os;
  }
  void value(const std::string& key, double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    summary.emplace_back(key, os.str());
  }
  void text(const std::string& key, const std::string& v) { summary.emplace_back(key, v); }
  void flag(const std::string& key, bool ok) { flags.emplace_back(key, ok); }
  bool pass() const {
    return std::all_of(flags.begin(), flags.end(), [](const auto& f) { return f.second; });
  }
  /// Moves the buffered streams into `files`.
  void seal() {
    for (auto& [name, os] : buffers_) files.emplace_back(name, os->str());
    buffers_.clear();
  }
  void merge(CommandOutput&& o) {
    o.seal();
    for (auto& f : o.files) files.push_back(std::move(f));
    for (auto& s : o.summary) summary.push_back(std::move(s));
    for (auto& f : o.flags) flags.push_back(std::move(f));
  }

 private:
  std::vector<std::pair<std::string, std::unique_ptr<std::ostringstream>>> buffers_;
};

/// The eps-problem rule used by the CLI: the library default, capped at
/// `max_cells` cells per direction. Below the cap's resolution the assembly
/// guard reports QuadratureUnderresolved.
inline RectRule capped_eps_rule(const RunConfig& c, double eps) {
  RectRule r = eps_rule(c.space, eps);
  if (r.cells1 > c.max_cells || r.cells2 > c.max_cells)
    r = rect_rule(c.space.L1, c.space.L2, std::min(r.cells1, c.max_cells), std::min(r.cells2, c.max_cells), r.order);
  return r;
}

namespace commands {

inline CommandOutput geometry_check(const RunConfig& c) {
  CommandOutput out;
  auto& os = out.open("geometry_check.csv");
  os << "seed,sample,x1,x2,eps,inverse_defect,normal_defect,tangent_orthogonality,b_symmetry,c_identity,"
        "tensor_min_eig,duality_defect,determinant_defect\n";
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_geom = 0.0, worst_dual = 0.0, worst_det = 0.0, min_eig = 1e300;
  constexpr int samples = 1000;
  for (int s = 0; s < samples; ++s) {
    const Vec2 x(c.space.L1 * U(rng), c.space.L2 * U(rng));
    const double eps = std::ldexp(1.0, -2) * std::pow(2.0, -6.0 * U(rng));
    const GeometryAtPoint g = eval_geometry(c.chart, x);
    const double inv = (g.inv_metric * g.metric - Mat2::Identity()).cwiseAbs().maxCoeff();
    const double nrm = std::abs(g.a3.norm() - 1.0);
    const double orth = std::max(std::abs(g.a3.dot(g.a[0])), std::abs(g.a3.dot(g.a[1])));
    const double bsym = std::abs(g.b(0, 1) - g.b(1, 0));
    const double cid = (g.c - g.bmix.transpose() * g.b).cwiseAbs().maxCoeff();
    const double eig = elasticity_tensor(g, c.material.lambda, c.material.mu).min_rayleigh();
    const EpsGeometryAtPoint ge = eval_exact_eps(c.chart, c.theta, x, eps);
    Mat3 d;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) d(i, j) = ge.contra[i].dot(ge.surface.basis(j));
    const double dual = (d - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double det = std::abs(ge.surface.sqrt_a - ge.triple);
    os << c.seed << ',' << s << ',' << x[0] << ',' << x[1] << ',' << eps << ',' << inv << ',' << nrm << ',' << orth
       << ',' << bsym << ',' << cid << ',' << eig << ',' << dual << ',' << det << '\n';
    worst_geom = std::max({worst_geom, inv, nrm, orth, bsym, cid / (1.0 + g.c.norm())});
    worst_dual = std::max(worst_dual, dual);
    worst_det = std::max(worst_det, det);
    min_eig = std::min(min_eig, eig);
  }
  out.value("geometry.max_invariant_defect", worst_geom);
  out.value("geometry.max_duality_defect", worst_dual);
  out.value("geometry.max_determinant_defect", worst_det);
  out.value("geometry.min_tensor_eigenvalue", min_eig);
  out.flag("geometry.invariants", worst_geom < 1e-10 && min_eig > 0.0);
  out.flag("geometry.eps_duality", worst_dual < 1e-10);
  out.flag("geometry.eps_determinant", worst_det < 1e-10);
  return out;
}

inline CommandOutput expand(const RunConfig& c) {
  CommandOutput out;
  const auto reps = verify_expansion_suite(c.chart, c.theta, default_expansion_study(c.space.L1, c.space.L2));
  auto& os = out.open("expansion.csv");
  os << "quantity_id,eps,residual,printed_residual,predicted_order,fitted_slope,exact,pass\n";
  for (const auto& r : reps) {
    for (std::size_t k = 0; k < r.eps_schedule.size(); ++k)
      os << r.quantity_id << ',' << r.eps_schedule[k] << ',' << r.residual_norms[k] << ','
         << r.printed_residual_norms[k] << ',' << r.predicted_order << ',' << r.fitted_slope << ','
         << (r.exact ? "true" : "false") << ',' << (r.pass ? "true" : "false") << '\n';
    out.value("expand." + r.quantity_id + ".slope", r.fitted_slope);
    out.flag("expand." + r.quantity_id, r.pass);
  }
  return out;
}

inline CommandOutput strain_audit_cmd(const RunConfig& c, const std::vector<double>& schedule) {
  CommandOutput out;
  const auto rep = strain_audit(c.chart, c.theta, c.space, schedule);
  write_strain_audit_csv(out.open("strain_audit.csv"), rep);
  for (std::size_t k = 0; k < rep.spread_P.size(); ++k) {
    out.value("strain_audit.field" + std::to_string(k) + ".spread_P", rep.spread_P[k]);
    out.value("strain_audit.field" + std::to_string(k) + ".spread_R", rep.spread_R[k]);
  }
  out.value("strain_audit.max_spread", rep.max_spread);
  out.flag("strain_audit.residual_bounds", rep.pass);
  return out;
}

inline CommandOutput cell(const RunConfig& c) {
  CommandOutput out;
  const Vec2 x0(0.5 * c.space.L1, 0.5 * c.space.L2);
  const CellContext ctx = make_cell_context(c.chart, x0, c.theta, c.material.lambda, c.material.mu, c.material.d);
  const CellSystem sys = assemble_cell_matrix(ctx, c.cell_N);
  std::vector<CellSolution> sols;
  for (int xe : {11, 12, 22}) sols.push_back(solve_local(ctx, sys, xe));
  write_cell_csv(out.open("cell_coefficients.csv"), sols);
  write_cell_summary_csv(out.open("cell_summary.csv"), sols);

  // seeded equivalence battery for the two forms of the right-hand side
  auto& os = out.open("cell_checks.csv");
  os << "seed,trial,xi_eta,assembled,direct,defect\n";
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> G(0.0, 1.0);
  double worst = 0.0;
  const int ns = PeriodicField::size_for(c.cell_N);
  for (int trial = 0; trial < 20; ++trial) {
    PeriodicField z1(c.cell_N), z2(c.cell_N), Z(c.cell_N);
    for (PeriodicField* p : {&z1, &z2, &Z})
      for (int k = 0; k < ns; ++k) p->coeffs()[k] = G(rng);
    Eigen::VectorXd v(3 * ns);
    v << z1.coeffs(), z2.coeffs(), Z.coeffs();
    for (int xe : {11, 12, 22}) {
      const double a = cell_rhs(ctx, sys, xe).dot(v);
      const double b = cell_rhs_direct(ctx, xe, z1, z2);
      const double defect = std::abs(a - b) / (1.0 + std::abs(b));
      worst = std::max(worst, defect);
      os << c.seed << ',' << trial << ',' << xe << ',' << a << ',' << b << ',' << defect << '\n';
    }
  }
  double resid = 0.0;
  for (const auto& s : sols) resid = std::max(resid, s.solver_residual);
  const double coerc = cell_coercivity(sys);
  out.value("cell.coercivity", coerc);
  out.value("cell.kernel_dimension", cell_kernel_dimension(sys));
  out.value("cell.symmetry_defect", symmetry_defect(sys.A));
  out.value("cell.max_solver_residual", resid);
  out.value("cell.max_form_defect", worst);
  out.flag("cell.spd", coerc > 0.0);
  out.flag("cell.forms_agree", worst < 1e-10);
  out.flag("cell.residual", resid < 1e-10);
  return out;
}

inline CommandOutput solve_eps(const RunConfig& c) {
  CommandOutput out;
  const MacroProblem pb = c.problem();
  const ForceDensity f = force_catalog(c.force, c.force_amp, c.space.L1, c.space.L2);
  auto& coef = out.open("solve_eps_coefficients.csv");
  coef << "eps,index,component,i,j,coeff\n";
  auto& chk = out.open("solve_eps_checks.csv");
  chk << "eps,cells,residual,orthogonality,energy_defect,symmetry,coercivity\n";
  double cmin = 1e300, cmax = 0.0, worst = 0.0;
  for (double eps : c.schedule) {
    const RectRule rule = capped_eps_rule(c, eps);
    const GalerkinSolution s = solve_eps_problem(pb, eps, f, rule);
    const double alpha = coercivity_probe(pb, eps, rule);
    std::ostringstream tmp;
    tmp.precision(17);
    write_coefficients_csv(tmp, s.u);
    std::istringstream rows(tmp.str());
    std::string line;
    std::getline(rows, line);  // header
    while (std::getline(rows, line)) coef << eps << ',' << line << '\n';
    chk << eps << ',' << rule.cells1 << ',' << s.residual << ',' << s.orthogonality << ',' << s.energy_defect << ','
        << s.symmetry << ',' << alpha << '\n';
    cmin = std::min(cmin, alpha);
    cmax = std::max(cmax, alpha);
    worst = std::max({worst, s.residual, s.energy_defect});
  }
  out.value("solve_eps.coercivity_min", cmin);
  out.value("solve_eps.coercivity_max", cmax);
  out.value("solve_eps.max_galerkin_defect", worst);
  out.flag("solve_eps.coercivity_stable", cmin > 0.0 && cmax <= 3.0 * cmin);
  out.flag("solve_eps.galerkin", worst < 1e-10);
  return out;
}

inline CommandOutput solve_macro(const RunConfig& c) {
  CommandOutput out;
  const ForceDensity f = force_catalog(c.force, c.force_amp, c.space.L1, c.space.L2);
  const GalerkinSolution s = solve_homogenized(c.problem(), f);
  write_coefficients_csv(out.open("homogenized_coefficients.csv"), s.u);
  write_sampled_csv(out.open("homogenized_sampled.csv"), s.u, 21);
  out.value("solve_macro.residual", s.residual);
  out.value("solve_macro.energy_defect", s.energy_defect);
  out.flag("solve_macro.galerkin", s.residual < 1e-10 && s.energy_defect < 1e-10);
  return out;
}

inline CoupledOptions coupled_options(const RunConfig& c) {
  CoupledOptions o;
  o.N = c.cell_N;
  o.degree = c.coupled_degree;
  return o;
}

inline CommandOutput solve_coupled(const RunConfig& c) {
  CommandOutput out;
  const MacroProblem pb = c.problem();
  const ForceDensity f = force_catalog(c.force, c.force_amp, c.space.L1, c.space.L2);
  const TwoScaleTriple t = solve_coupled_two_scale(pb, f, coupled_options(c));
  const GalerkinSolution h = solve_homogenized(pb, f);
  write_coefficients_csv(out.open("coupled_coefficients.csv"), t.u0);
  write_sampled_csv(out.open("coupled_sampled.csv"), t.u0, 21);
  auto& cor = out.open("coupled_corrector.csv");
  cor << "p,a,b,cell_index,coeff\n";
  const int nc = cell_unknowns(t.N);
  for (int a = 0; a < t.degree; ++a)
    for (int b = 0; b < t.degree; ++b) {
      const int p = a * t.degree + b;
      for (int k = 0; k < nc; ++k) cor << p << ',' << a << ',' << b << ',' << k << ',' << t.corrector[p * nc + k] << '\n';
    }
  const double gap = relative_l2_gap(h.u, t.u0, smooth_rule(c.space));
  auto& dec = out.open("decoupling.csv");
  dec << "metric_id,value\n";
  dec << "coupled_residual," << t.residual << '\n';
  dec << "unregularized_residual," << t.unregularized_residual << '\n';
  dec << "symmetry," << t.symmetry << '\n';
  dec << "coupled_vs_homogenized_rel_l2_gap," << gap << '\n';
  out.value("solve_coupled.residual", t.residual);
  out.value("solve_coupled.gap", gap);
  out.flag("solve_coupled.residual", t.residual < 1e-8);
  return out;
}

/// Schedule of the pairing benchmarks: 1/8 down to 1/64.
inline std::vector<double> pairing_schedule() { return {0.125, 0.0625, 0.03125, 0.015625}; }

inline CommandOutput two_scale_study(const RunConfig& c) {
  CommandOutput out;
  const MacroProblem pb = c.problem();
  const ForceDensity f = force_catalog(c.force, c.force_amp, c.space.L1, c.space.L2);
  std::vector<ConvergenceReport> reps;
  for (const auto& bench :
       {sin_sin_benchmark(pairing_schedule()), product_benchmark(pairing_schedule()),
        weak_limit_benchmark(pairing_schedule())}) {
    reps.push_back(two_scale_pairing(bench));
    out.value(bench.id + ".final_gap", reps.back().metrics.at("final_gap"));
    out.flag(bench.id + ".monotone", reps.back().flags.at("monotone"));
  }
  const PairingChecks id = pairing_identities(pairing_schedule());
  out.value("pairing.linearity_defect", id.linearity_defect);
  out.value("pairing.constant_test_defect", id.constant_test_defect);
  out.flag("pairing.constant_test_exact", id.constant_test_defect == 0.0);

  LimitStudyOptions opt;
  opt.schedule = c.schedule;
  opt.coupled = coupled_options(c);
  reps.push_back(eps_to_limit_study(pb, f, opt));
  const auto& st = reps.back();
  for (const auto& [k, v] : st.metrics) out.value("eps_to_limit." + k, v);
  for (const auto& [k, v] : st.flags) out.flag("eps_to_limit." + k, v);

  // corrector identity on the coupled macro field
  const TwoScaleTriple t = solve_coupled_two_scale(pb, f, opt.coupled);
  const CorrectorCheck cc = corrector_check(t.u0, c.chart, c.theta);
  out.value("corrector.max_derivative_error", cc.max_derivative_error);
  out.value("corrector.max_mean", cc.max_mean);
  out.flag("corrector.identity", cc.max_derivative_error < 1e-10 && cc.max_mean < 1e-12);

  write_report_csv(out.open("two_scale_report.csv"), reps);
  return out;
}

}  // namespace commands

/// Runs one command; numerical failures propagate as wrinkle::Error.
inline CommandOutput execute(const RunConfig& c, const std::string& command) {
  CommandOutput out;
  auto add = [&](CommandOutput&& o) { out.merge(std::move(o)); };
  const bool all = command == "all";
  if (all || command == "geometry-check") add(commands::geometry_check(c));
  if (all || command == "expand") add(commands::expand(c));
  if (all || command == "strain-audit") add(commands::strain_audit_cmd(c, c.schedule));
  if (all || command == "cell") add(commands::cell(c));
  if (all || command == "solve-eps") add(commands::solve_eps(c));
  if (all || command == "solve-macro") add(commands::solve_macro(c));
  if (all || command == "solve-coupled") add(commands::solve_coupled(c));
  if (all || command == "two-scale-study") add(commands::two_scale_study(c));
  if (out.files.empty() && out.flags.empty()) throw ConfigError("unknown command '" + command + "'");
  return out;
}

/// key=value summary; the pass flags come last.
inline std::string render_summary(const RunConfig& c, const std::string& command, const CommandOutput& out) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "command=" << command << '\n';
  os << "seed=" << c.seed << '\n';
  os << "chart=" << c.chart.id() << '\n';
  for (const auto& [k, v] : out.summary) os << k << '=' << v << '\n';
  for (const auto& [k, v] : out.flags) os << "pass." << k << '=' << (v ? "true" : "false") << '\n';
  os << "pass=" << (out.pass() ? "true" : "false") << '\n';
  return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace wrinkle
