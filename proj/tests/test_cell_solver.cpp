#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wrinkle/cell_solver.hpp"

using namespace wrinkle;

namespace {

CellContext flat(const ShapeFunction& theta) {
  return make_cell_context(SurfaceChart::plate(), Vec2(0.5, 0.5), theta, 1.0, 1.0, 0.1);
}

CellContext curved() {
  return make_cell_context(SurfaceChart::graph({{"c11", 0.8}, {"c12", 0.3}, {"c22", -0.4}, {"t111", 0.5}}),
                           Vec2(0.3, 0.6), ShapeFunction({{1, 0, 0.3, 0.2}, {1, 1, 0.0, 0.25}}), 1.2, 0.8, 0.1);
}

PeriodicField random_field(int N, std::mt19937_64& rng) {
  PeriodicField f(N);
  std::normal_distribution<double> G(0.0, 1.0);
  for (Eigen::Index k = 0; k < f.coeffs().size(); ++k) f.coeffs()[k] = G(rng) / (1.0 + k / 4.0);
  return f;
}

}  // namespace

TEST(PeriodicField, ZeroMeanAndConjugateSymmetry) {
  std::mt19937_64 rng(1);
  const auto f = random_field(3, rng);
  EXPECT_LT(std::abs(f.grid_mean(16)), 1e-14);
  EXPECT_EQ(PeriodicField::size_for(3), 48);
  // value from complex coefficients sum_k c_k e^{2 pi i k.y} over the full set
  const Vec2 y(0.31, 0.77);
  std::complex<double> s = 0.0;
  for (std::size_t k = 0; k < f.frequencies().size(); ++k) {
    const auto& fr = f.frequencies()[k];
    const double p = 2.0 * std::numbers::pi * (fr[0] * y[0] + fr[1] * y[1]);
    s += f.complex_coeff(k) * std::exp(std::complex<double>(0, p)) +
         std::conj(f.complex_coeff(k)) * std::exp(std::complex<double>(0, -p));
  }
  EXPECT_NEAR(s.real(), f.eval(y).value, 1e-12);
  EXPECT_NEAR(s.imag(), 0.0, 1e-12);
  EXPECT_THROW(PeriodicField(0), TruncationTooSmall);
}

TEST(CellSolver, SymmetricAndPositiveDefinite) {
  for (const auto& ctx : {flat(ShapeFunction::single_sine(1, 0)), flat(ShapeFunction::egg_box(0.5)), curved()}) {
    const auto sys = assemble_cell_matrix(ctx, 3);
    EXPECT_LT(symmetry_defect(sys.A), 1e-12);
    EXPECT_GT(cell_coercivity(sys), 0.0);
    EXPECT_EQ(cell_kernel_dimension(sys), 0);
    for (int xe : {11, 12, 22}) {
      const auto sol = solve_local(ctx, sys, xe);
      EXPECT_LT(sol.solver_residual, 1e-10);
      EXPECT_LE(sol.energy, 0.0);
      EXPECT_LT(std::abs(sol.phi_vec[0].grid_mean(16)), 1e-14);
    }
  }
}

TEST(CellSolver, UnwrinkledFlatPlateHasZeroCorrector) {
  const auto ctx = flat(ShapeFunction::zero());
  const auto sys = assemble_cell_matrix(ctx, 3);
  for (int xe : {11, 12, 22}) {
    EXPECT_EQ(cell_rhs(ctx, sys, xe).cwiseAbs().maxCoeff(), 0.0);
    const auto sol = solve_local(ctx, sys, xe);
    EXPECT_EQ(sol.coeffs.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(CellSolver, RhsOnlyOnY1Frequencies) {
  const auto ctx = flat(ShapeFunction::single_sine(1, 0));
  const auto sys = assemble_cell_matrix(ctx, 3);
  const auto F = cell_rhs(ctx, sys, 11);
  const auto fr = half_plane_frequencies(3);
  const int ns = PeriodicField::size_for(3);
  bool any = false;
  for (int blk = 0; blk < 3; ++blk)
    for (std::size_t f = 0; f < fr.size(); ++f)
      for (int s = 0; s < 2; ++s) {
        const double v = F[blk * ns + 2 * f + s];
        if (fr[f][1] != 0) EXPECT_LT(std::abs(v), 1e-14);
        any = any || std::abs(v) > 1e-8;
      }
  EXPECT_TRUE(any);
}

TEST(CellSolver, MatchesOneDimensionalOracle) {
  const double amp = 0.7;
  const auto ctx = flat(ShapeFunction::single_sine(1, 0, amp));
  const int N = 4;
  const auto sol = solve_local(ctx, 11, N);
  const auto ref = oracle::cell_oracle_1d(amp, 1.0, 1.0, 0.1, N);
  const auto fr = half_plane_frequencies(N);
  const int ns = PeriodicField::size_for(N);
  double worst = 0.0;
  for (std::size_t f = 0; f < fr.size(); ++f)
    for (int s = 0; s < 2; ++s) {
      double e1 = 0.0, eV = 0.0;
      if (fr[f][1] == 0) {
        const int k = fr[f][0];
        e1 = ref[2 * (k - 1) + s];
        eV = ref[2 * N + 2 * (k - 1) + s];
      }
      worst = std::max({worst, std::abs(sol.coeffs[2 * f + s] - e1), std::abs(sol.coeffs[ns + 2 * f + s]),
                        std::abs(sol.coeffs[2 * ns + 2 * f + s] - eV)});
    }
  EXPECT_LT(worst, 1e-8);
  EXPECT_GT(ref.cwiseAbs().maxCoeff(), 1e-4);
}

TEST(CellSolver, RhsFormsAgree) {
  std::mt19937_64 rng(42);
  for (const auto& ctx : {flat(ShapeFunction::egg_box(0.8)), curved()}) {
    const int N = 3;
    const auto sys = assemble_cell_matrix(ctx, N);
    for (int xe : {11, 12, 22}) {
      const auto F = cell_rhs(ctx, sys, xe);
      for (int trial = 0; trial < 5; ++trial) {
        const auto z1 = random_field(N, rng), z2 = random_field(N, rng), Z = random_field(N, rng);
        Eigen::VectorXd c(3 * z1.coeffs().size());
        c << z1.coeffs(), z2.coeffs(), Z.coeffs();
        const double parts = F.dot(c);
        const double direct = cell_rhs_direct(ctx, xe, z1, z2);
        EXPECT_NEAR(parts, direct, 1e-10 * (1.0 + std::abs(direct)));
      }
    }
  }
}

TEST(CellSolver, FormValueMatchesMatrix) {
  std::mt19937_64 rng(8);
  const auto ctx = curved();
  const int N = 2;
  const auto sys = assemble_cell_matrix(ctx, N);
  const PeriodicField v[2] = {random_field(N, rng), random_field(N, rng)};
  const PeriodicField z[2] = {random_field(N, rng), random_field(N, rng)};
  const auto V = random_field(N, rng), Z = random_field(N, rng);
  Eigen::VectorXd a(cell_unknowns(N)), b(cell_unknowns(N));
  a << v[0].coeffs(), v[1].coeffs(), V.coeffs();
  b << z[0].coeffs(), z[1].coeffs(), Z.coeffs();
  const double direct = cell_form_value(ctx, v, V, z, Z);
  EXPECT_NEAR(direct, a.dot(sys.A * b), 1e-12 * (1.0 + std::abs(direct)));
  EXPECT_NEAR(direct, cell_form_value(ctx, z, Z, v, V), 1e-12 * (1.0 + std::abs(direct)));
  const PeriodicField zero[2] = {PeriodicField(N), PeriodicField(N)};
  EXPECT_EQ(cell_form_value(ctx, zero, PeriodicField(N), z, Z), 0.0);
}

TEST(CellSolver, PureBendingFormOracle) {
  // theta = 0 on the flat plate, v = 0: (d^3/3) <a^{abrs} V_rs V_ab>
  std::mt19937_64 rng(17);
  const auto ctx = flat(ShapeFunction::zero());
  const int N = 2;
  const auto V = random_field(N, rng);
  const PeriodicField zero[2] = {PeriodicField(N), PeriodicField(N)};
  const int M = 32;
  double s = 0.0;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const Mat2 h = V.eval(Vec2(double(i) / M, double(j) / M)).hess;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int r = 0; r < 2; ++r)
            for (int t = 0; t < 2; ++t) s += oracle::flat_tensor(1.0, 1.0, a, b, r, t) * h(r, t) * h(a, b);
    }
  const double expect = 0.1 * 0.1 * 0.1 / 3.0 * s / (M * M);
  EXPECT_GT(expect, 0.0);
  EXPECT_NEAR(cell_form_value(ctx, zero, V, zero, V), expect, 1e-12 * expect);
}

TEST(CellSolver, SolversAgreeAndTruncationConverges) {
  const auto ctx = flat(ShapeFunction::egg_box(0.3));
  const auto sys = assemble_cell_matrix(ctx, 3);
  const auto direct = solve_local(ctx, sys, 12, false);
  const auto cg = solve_local(ctx, sys, 12, true);
  EXPECT_LT((direct.coeffs - cg.coeffs).norm(), 1e-10 * (1.0 + direct.coeffs.norm()));

  // N -> 2N: coercivity stable, low modes agree
  const auto s4 = assemble_cell_matrix(ctx, 4);
  const auto s8 = assemble_cell_matrix(ctx, 8);
  const double c4 = cell_coercivity(s4), c8 = cell_coercivity(s8);
  EXPECT_GT(c8, 0.0);
  EXPECT_LT(std::max(c4, c8) / std::min(c4, c8), 2.0);
  const auto a = solve_local(ctx, s4, 11), b = solve_local(ctx, s8, 11);
  for (int comp = 0; comp < 3; ++comp) {
    const PeriodicField& fa = comp < 2 ? a.phi_vec[comp] : a.phi_scal;
    const PeriodicField& fb = comp < 2 ? b.phi_vec[comp] : b.phi_scal;
    for (std::size_t f = 0; f < fa.frequencies().size(); ++f) {
      const auto k = fa.frequencies()[f];
      if (std::max(std::abs(k[0]), std::abs(k[1])) > 2) continue;
      const auto& fb_fr = fb.frequencies();
      const auto it = std::find(fb_fr.begin(), fb_fr.end(), k);
      ASSERT_NE(it, fb_fr.end());
      const std::size_t g = static_cast<std::size_t>(it - fb_fr.begin());
      EXPECT_LT(std::abs(fa.complex_coeff(f) - fb.complex_coeff(g)), 1e-6);
    }
  }
}
