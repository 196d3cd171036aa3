#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wrinkle/macro_solver.hpp"

using namespace wrinkle;

namespace {

MacroProblem problem(SurfaceChart chart, ShapeFunction theta, int m = 3) {
  MacroProblem pb;
  pb.chart = std::move(chart);
  pb.theta = std::move(theta);
  pb.material = Material{1.0, 1.0, 0.05};
  pb.space = MacroSpace{1.0, 1.0, m, m};
  return pb;
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST(MacroSpace, ClampedBoundaryValues) {
  const MacroSpace sp{1.5, 0.8, 3, 3};
  for (int j = 0; j < sp.size(); ++j) {
    const auto u = DisplacementField::basis(sp, j);
    for (double s : {0.0, 0.23, 0.71, 1.0}) {
      for (const Vec2& x : {Vec2(0.0, s * sp.L2), Vec2(sp.L1, s * sp.L2), Vec2(s * sp.L1, 0.0), Vec2(s * sp.L1, sp.L2)}) {
        const auto v = u.eval(x);
        EXPECT_LT(v.u.cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT(v.grad3.cwiseAbs().maxCoeff(), 1e-13);
      }
    }
  }
}

TEST(MacroSpace, ChannelsMatchFiniteDifferences) {
  const MacroSpace sp{1.0, 1.0, 3, 3};
  Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(sp.size(), -1.0, 1.0);
  const DisplacementField u(sp, c);
  const Vec2 x(0.31, 0.62);
  const double h = 1e-5;
  const auto v = u.eval(x);
  for (int a = 0; a < 2; ++a) {
    const Vec2 e = h * Vec2::Unit(a);
    const auto p = u.eval(x + e), m = u.eval(x - e);
    for (int r = 0; r < 2; ++r) EXPECT_NEAR(v.grad(r, a), (p.u[r] - m.u[r]) / (2 * h), 1e-7);
    EXPECT_NEAR(v.grad3[a], (p.u[2] - m.u[2]) / (2 * h), 1e-7);
    for (int b = 0; b < 2; ++b) EXPECT_NEAR(v.hess3(a, b), (p.grad3[b] - m.grad3[b]) / (2 * h), 1e-6);
  }
}

TEST(MacroSolver, ConfigurationErrors) {
  EXPECT_THROW(force_catalog("gravity", 1.0, 1.0, 1.0), ConfigError);
  EXPECT_THROW(validate_material(Material{1.0, -1.0, 0.1}), NonPositiveLame);
  EXPECT_THROW(validate_material(Material{1.0, 1.0, 0.0}), NonPositiveLame);
  const auto pb = problem(SurfaceChart::plate(), ShapeFunction::single_sine(1, 0), 2);
  EXPECT_THROW(assemble_eps_system(pb, 0.0, ForceDensity{}, eps_rule(pb.space, 0.25)), InvalidSchedule);
}

TEST(MacroSolver, QuadratureGuard) {
  const auto pb = problem(SurfaceChart::plate(), ShapeFunction::single_sine(1, 0), 2);
  // 4 cells of order 4 are 16 nodes on [0, 1]: 4 per period at eps = 1/4
  const RectRule coarse = rect_rule(1.0, 1.0, 4, 4, 4);
  EXPECT_THROW(assemble_eps_system(pb, 0.25, ForceDensity{}, coarse), QuadratureUnderresolved);
  EXPECT_NO_THROW(assemble_eps_system(pb, 0.25, ForceDensity{}, rect_rule(1.0, 1.0, 8, 8, 4)));
}

TEST(MacroSolver, ZeroLoadGivesZeroSolution) {
  const auto pb = problem(SurfaceChart::cylinder(1.0), ShapeFunction::egg_box(0.5), 2);
  const auto f = force_catalog("zero", 1.0, 1.0, 1.0);
  EXPECT_EQ(solve_eps_problem(pb, 0.25, f).u.coeffs().norm(), 0.0);
  EXPECT_EQ(solve_homogenized(pb, f).u.coeffs().norm(), 0.0);
}

TEST(MacroSolver, UnwrinkledPlateMatchesClassicalOracle) {
  const auto pb = problem(SurfaceChart::plate(), ShapeFunction::zero(), 3);
  for (const char* name : {"bump", "mixed"}) {
    const auto f = force_catalog(name, 1.0, 1.0, 1.0);
    const Eigen::VectorXd ref = oracle::classical_plate_solution(pb.space, pb.material, f, 8, 8);
    ASSERT_GT(ref.norm(), 0.0);
    const auto se = solve_eps_problem(pb, 0.25, f);
    EXPECT_LT(rel(se.u.coeffs(), ref), 1e-10) << name;
    const auto sh = solve_homogenized(pb, f);
    EXPECT_LT(rel(sh.u.coeffs(), ref), 1e-10) << name;
    const auto tri = solve_coupled_two_scale(pb, f, CoupledOptions{2, 2});
    EXPECT_LT(rel(tri.u0.coeffs(), ref), 1e-10) << name;
    EXPECT_LT(tri.corrector.cwiseAbs().maxCoeff(), 1e-12) << name;
  }
}

TEST(MacroSolver, UnwrinkledCurvedShellAgreesAcrossSolvers) {
  // theta = 0 on a cylinder: the eps problem is the Koiter shell itself
  const auto pb = problem(SurfaceChart::cylinder(1.5), ShapeFunction::zero(), 3);
  const auto f = force_catalog("mixed", 1.0, 1.0, 1.0);
  const auto se = solve_eps_problem(pb, 0.25, f, smooth_rule(pb.space));
  const auto sh = solve_homogenized(pb, f);
  EXPECT_LT(rel(se.u.coeffs(), sh.u.coeffs()), 1e-10);
}

TEST(MacroSolver, GalerkinIdentities) {
  const auto pb = problem(SurfaceChart::graph({{"c11", 0.5}, {"c22", -0.3}}), ShapeFunction::egg_box(0.4), 3);
  const auto f = force_catalog("mixed", 1.0, 1.0, 1.0);
  for (const auto& s : {solve_eps_problem(pb, 0.25, f), solve_homogenized(pb, f)}) {
    EXPECT_LT(s.symmetry, 1e-13);
    EXPECT_LT(s.residual, 1e-10);
    EXPECT_LT(s.orthogonality, 1e-10);
    EXPECT_LT(s.energy_defect, 1e-10);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.K, Eigen::EigenvaluesOnly);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(MacroSolver, ManufacturedLoadRecoversField) {
  // load functional of a known coefficient vector, then solve it back
  const auto pb = problem(SurfaceChart::cylinder(1.0), ShapeFunction::single_sine(1, 1, 0.3), 3);
  auto [K, F] = assemble_eps_system(pb, 0.25, ForceDensity{}, eps_rule(pb.space, 0.25));
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(pb.space.size(), 0.5, -0.5);
  const auto s = finish_solve(pb.space, K, K * c, "test");
  EXPECT_LT(rel(s.u.coeffs(), c), 1e-8);
}

TEST(MacroSolver, CoercivityAndAprioriBound) {
  const auto small = problem(SurfaceChart::plate(), ShapeFunction::single_sine(1, 0), 2);
  const auto large = problem(SurfaceChart::plate(), ShapeFunction::single_sine(1, 0), 3);
  const double eps = 0.25;
  const RectRule rule = eps_rule(large.space, eps);
  const double a2 = coercivity_probe(small, eps, rule);
  const double a3 = coercivity_probe(large, eps, rule);
  EXPECT_GT(a3, 0.0);
  // nested Ritz spaces: the minimum Rayleigh quotient can only go down
  EXPECT_LE(a3, a2 * (1.0 + 1e-10));

  const auto f = force_catalog("mixed", 1.0, 1.0, 1.0);
  const auto s = solve_eps_problem(large, eps, f, rule);
  const Eigen::MatrixXd G = eps_norm_gram(large, eps, rule);
  const Eigen::VectorXd& c = s.u.coeffs();
  EXPECT_GE(s.F.dot(c), a3 * c.dot(G * c) * (1.0 - 1e-10));
}

TEST(MacroSolver, HessianMomentsOracle) {
  const double amp = 0.7, tau = 2.0 * std::numbers::pi;
  const Mat3 G = hessian_moments(ShapeFunction::single_sine(1, 0, amp));
  EXPECT_NEAR(G(0, 0), std::pow(tau, 4) * amp * amp / 2.0, 1e-9);
  EXPECT_NEAR(G.cwiseAbs().sum() - std::abs(G(0, 0)), 0.0, 1e-9);
  const Mat3 E = hessian_moments(ShapeFunction::egg_box(0.5));
  // theta = 0.5 sin sin: all three second derivatives have mean square (2pi)^4 / 16
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(E(a, a), std::pow(tau, 4) * 0.25 / 4.0, 1e-9);
  const Eigen::SelfAdjointEigenSolver<Mat3> es(E);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(MacroSolver, HomogenizedBlocksArePositive) {
  const auto pb = problem(SurfaceChart::cylinder(1.2), ShapeFunction::egg_box(0.5), 2);
  const RectRule rule = smooth_rule(pb.space, 4, 6);
  auto [Kmm, F1] = assemble_homogenized(pb, ForceDensity{}, rule, HomogenizedParts{false, false, true});
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Kmm, Eigen::EigenvaluesOnly);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12 * es.eigenvalues().maxCoeff());
  EXPECT_GT(es.eigenvalues().maxCoeff(), 0.0);
  auto [Kall, F2] = assemble_homogenized(pb, ForceDensity{}, rule);
  auto [Knomm, F3] = assemble_homogenized(pb, ForceDensity{}, rule, HomogenizedParts{true, true, false});
  EXPECT_LT((Kall - Knomm - Kmm).norm(), 1e-12 * Kall.norm());
}

TEST(MacroSolver, CoupledSystemIsConsistent) {
  const auto pb = problem(SurfaceChart::plate(), ShapeFunction::single_sine(1, 0, 0.5), 2);
  const auto f = force_catalog("bump", 1.0, 1.0, 1.0);
  const auto tri = solve_coupled_two_scale(pb, f, CoupledOptions{2, 2});
  EXPECT_LT(tri.residual, 1e-10);
  EXPECT_LT(tri.symmetry, 1e-12);
  const auto sh = solve_homogenized(pb, f);
  // the corrector relaxes the energy, so the coupled deflection is larger
  EXPECT_GT(tri.u0.coeffs().norm(), 0.0);
  EXPECT_GT(tri.corrector.norm(), 0.0);
  EXPECT_GE(tri.u0.coeffs().dot(sh.F), sh.u.coeffs().dot(sh.F) * (1.0 - 1e-10));
}
