#include <afem/constraints.hpp>
#include <afem/mesh_generators.hpp>
#include <afem/newton.hpp>

#include <gtest/gtest.h>

#include <oracles.hpp>

#include <cmath>
#include <random>

using namespace afem;

namespace {

std::shared_ptr<CoefficientSet> flat_with(std::initializer_list<std::pair<const char*, ScalarField>> extra) {
  auto c = std::make_shared<CoefficientSet>(*flat_trivial_coefficients());
  for (const auto& [name, f] : extra) c->set(name, f);
  return c;
}

ScalarField expr(const std::string& e) { return parse_scalar_field(e); }

NewtonConfig tight() {
  NewtonConfig c;
  c.forcing = ForcingRule::fixed;
  c.fixed_eta = 1e-12;
  return c;
}

// Nontrivial but admissible data touching every coefficient of the coupled form.
std::shared_ptr<CoefficientSet> rich_coefficients() {
  return flat_with({{"Rhat", expr("0.3")},
                    {"trK", expr("poly(0.5, 0.4, -0.3, 0.2)")},
                    {"rho", expr("gaussian(0.2, 0.3, 0.5, 0.5, 0.5)")},
                    {"Ahat_xx", expr("0.2")},
                    {"Ahat_xy", expr("trig(0.1, 1, 2, 0)")},
                    {"Ahat_yy", expr("-0.15")},
                    {"jhat_x", expr("0.05")},
                    {"jhat_y", expr("trig(0.04, 0, 3, 1)")},
                    {"metric_xx", expr("1.2")},
                    {"metric_xy", expr("0.1")}});
}

SolutionField random_admissible_state(const Mesh& m, int ncomp, const ProblemDefinition& pb, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-1, 1);
  SolutionField u(m.num_vertices(), ncomp);
  for (int v = 0; v < m.num_vertices(); ++v) {
    u.at(v, 0) = 1.0 + 0.3 * U(rng);
    for (int c = 1; c < ncomp; ++c) u.at(v, c) = 0.2 * U(rng);
  }
  apply_dirichlet(m, pb, u);
  return u;
}

}  // namespace

TEST(Pprime, HandValues) {
  ConstraintPoint c;
  for (double phi : {1e-3, 0.5, 1.0, 3.0}) EXPECT_EQ(hamiltonian_Pprime(phi, c, 0.0), 0.0);
  c.Rhat = 8;
  EXPECT_NEAR(hamiltonian_Pprime(1.0, c, 0.0), 1.0, 1e-15);
  c = {};
  c.trK = std::sqrt(12.0);
  EXPECT_NEAR(hamiltonian_Pprime(1.0, c, 0.0), 1.0, 1e-14);
}

TEST(Pprime, LinearizationMassCoefficient) {
  ConstraintPoint c;
  c.trK = std::sqrt(12.0 / 5.0);
  EXPECT_NEAR(hamiltonian_Pprime_derivative(1.0, c, 0.0), 1.0, 1e-14);
}

TEST(Pprime, FullFormulaAndDerivative) {
  ConstraintPoint c;
  c.Rhat = 0.7;
  c.trK = 1.3;
  c.rho = 0.4;
  const double M2 = 0.9, phi = 1.1;
  const double expect = c.Rhat * phi / 8 + c.trK * c.trK * std::pow(phi, 5) / 12 - M2 * std::pow(phi, -7) / 8 -
                        2 * M_PI * c.rho * std::pow(phi, -3);
  EXPECT_NEAR(hamiltonian_Pprime(phi, c, M2), expect, 1e-14);
  const double h = 1e-6;
  const double fd = (hamiltonian_Pprime(phi + h, c, M2) - hamiltonian_Pprime(phi - h, c, M2)) / (2 * h);
  EXPECT_NEAR(hamiltonian_Pprime_derivative(phi, c, M2), fd, 1e-7);
}

TEST(Pprime, BelowFloorIsClampedAndFinite) {
  ConstraintPoint c;
  c.rho = 1.0;
  const double v = hamiltonian_Pprime(-0.5, c, 1.0);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(v, hamiltonian_Pprime(kPhiFloor, c, 1.0));
}

TEST(ConformalKilling, LinearShearFreeField) {
  double ginv[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::array<Vec3, kMaxComponents> dW{};
  dW[0] = {1, 0, 0};  // W = (x, 0, 0)
  double LW[3][3];
  conformal_killing(3, ginv, dW, LW);
  const double expect[3][3] = {{4.0 / 3, 0, 0}, {0, -2.0 / 3, 0}, {0, 0, -2.0 / 3}};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) EXPECT_NEAR(LW[a][b], expect[a][b], 1e-15);
  // Deformation tensor E = (LW + (2/3) g div W) / 2 has only E^11 = 1.
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) EXPECT_NEAR((LW[a][b] + (a == b ? 2.0 / 3 : 0.0)) / 2, a == 0 && b == 0 ? 1 : 0, 1e-15);
}

TEST(ConformalKilling, TracelessAndSymmetric) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> U(-1, 1);
  double ginv[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::array<Vec3, kMaxComponents> dW{};
  for (int b = 0; b < 3; ++b) dW[b] = {U(rng), U(rng), U(rng)};
  double LW[3][3];
  conformal_killing(3, ginv, dW, LW);
  EXPECT_NEAR(LW[0][0] + LW[1][1] + LW[2][2], 0.0, 1e-15);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) EXPECT_EQ(LW[a][b], LW[b][a]);
}

TEST(Hamiltonian, TrivialDataGivesUnitConformalFactor) {
  const Mesh m = unit_square(6);
  const auto pb = hamiltonian_forms(2, flat_trivial_coefficients());
  SolutionField u = initial_field(m, pb, 0.5);
  const auto rep = newton_solve(m, pb, u, tight());
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.iterations, 2);
  EXPECT_LE(rep.final_residual, 1e-10);
  for (double x : u.values) EXPECT_NEAR(x, 1.0, 1e-10);
  EXPECT_EQ(*pb.clamp_events, 0);
}

TEST(Hamiltonian, ClampEventsAreCounted) {
  const Mesh m = unit_square(3);
  const auto pb = hamiltonian_forms(2, flat_with({{"rho", expr("1")}}));
  SolutionField u = initial_field(m, pb, -0.2);
  assemble_residual(m, pb, u);
  EXPECT_GT(*pb.clamp_events, 0);
}

TEST(Hamiltonian, JacobianMatchesFiniteDifferences) {
  std::mt19937 rng(4);
  const Mesh m = unit_square(4, [](const Vec3& c) { return c[0] < 1e-12 ? BoundaryClass::neumann : BoundaryClass::dirichlet; });
  auto coeffs = rich_coefficients();
  coeffs->set("robin_c", expr("0.5"));
  const auto pb = hamiltonian_forms(2, coeffs);
  const SolutionField u = random_admissible_state(m, 1, pb, rng);
  const auto w = oracle::random_free_direction(m, 1, rng), v = oracle::random_free_direction(m, 1, rng);
  const double r = oracle::fd_discrepancy(m, pb, u, w, v, 1e-4) / oracle::fd_discrepancy(m, pb, u, w, v, 5e-5);
  EXPECT_GT(r, 1.5);
  EXPECT_LT(r, 2.5);
}

TEST(Hamiltonian, ManufacturedSolutionConvergesAtFirstOrder) {
  const auto b = manufactured_hamiltonian();
  Mesh m = unit_square(4);
  std::vector<double> h1;
  for (int level = 0; level < 4; ++level) {
    SolutionField u = initial_field(m, b.problem, 1.0);
    const auto rep = newton_solve(m, b.problem, u);
    ASSERT_TRUE(rep.converged);
    h1.push_back(measure_error(m, u, b.exact).h1);
    refine_uniform(m);
  }
  for (double r : oracle::log2_rates(h1)) EXPECT_NEAR(r, 1.0, 0.2);
  EXPECT_EQ(*b.problem.clamp_events, 0);
}

TEST(Momentum, ZeroDataGivesZeroField) {
  const Mesh m = unit_cube(2);
  const auto pb = momentum_forms(3, flat_trivial_coefficients());
  SolutionField u = initial_field(m, pb);
  newton_solve(m, pb, u, tight());
  for (double x : u.values) EXPECT_EQ(x, 0.0);
}

TEST(Momentum, MatrixIsSymmetricPositiveDefinite) {
  const Mesh m = unit_cube(2);
  const auto pb = momentum_forms(3, flat_trivial_coefficients());
  const SparseMatrix A = assemble_jacobian(m, pb, initial_field(m, pb));
  EXPECT_TRUE(A.is_symmetric(1e-13));
  EXPECT_TRUE(oracle::cholesky_succeeds(oracle::dense(A)));
}

TEST(Momentum, ManufacturedSolutionConvergesAtFirstOrder) {
  // From unit_cube(2) the first rate is still 0.79; one more coarse cell per axis is asymptotic.
  const auto b = manufactured_momentum();
  Mesh m = unit_cube(3);
  std::vector<double> h1;
  for (int level = 0; level < 3; ++level) {
    SolutionField u = initial_field(m, b.problem);
    ASSERT_TRUE(newton_solve(m, b.problem, u).converged);
    h1.push_back(measure_error(m, u, b.exact).h1);
    refine_uniform(m);
  }
  for (double r : oracle::log2_rates(h1)) EXPECT_NEAR(r, 1.0, 0.2);
}

TEST(Coupled, TrivialDataGivesUnitFactorAndZeroShift) {
  for (int d : {2, 3}) {
    const Mesh m = d == 2 ? unit_square(4) : unit_cube(2);
    const auto pb = coupled_forms(d, flat_trivial_coefficients());
    ASSERT_EQ(pb.n_unknowns, d + 1);
    SolutionField u = initial_field(m, pb);
    for (int v = 0; v < m.num_vertices(); ++v) u.at(v, 0) = 1.0 - (m.vertex(v).bclass == BoundaryClass::interior) * 0.3;
    const auto rep = newton_solve(m, pb, u, tight());
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.final_residual, 1e-10);
    for (int v = 0; v < m.num_vertices(); ++v) {
      EXPECT_NEAR(u.at(v, 0), 1.0, 1e-10);
      for (int c = 1; c <= d; ++c) EXPECT_NEAR(u.at(v, c), 0.0, 1e-10);
    }
  }
}

TEST(Coupled, JacobianMatchesFiniteDifferencesAtRandomStates) {
  std::mt19937 rng(8);
  for (int d : {2, 3}) {
    const Mesh m = d == 2 ? unit_square(3, [](const Vec3& c) {
      return c[1] < 1e-12 ? BoundaryClass::neumann : BoundaryClass::dirichlet;
    })
                          : unit_cube(2);
    auto coeffs = rich_coefficients();
    coeffs->set("robin_c", expr("0.4"));
    coeffs->set("robin_C_xx", expr("0.3"));
    coeffs->set("robin_C_yy", expr("0.2"));
    const auto pb = coupled_forms(d, coeffs);
    for (int trial = 0; trial < 5; ++trial) {
      const SolutionField u = random_admissible_state(m, d + 1, pb, rng);
      const auto w = oracle::random_free_direction(m, d + 1, rng), v = oracle::random_free_direction(m, d + 1, rng);
      const double e1 = oracle::fd_discrepancy(m, pb, u, w, v, 1e-4);
      const double e2 = oracle::fd_discrepancy(m, pb, u, w, v, 5e-5);
      EXPECT_GT(e1 / e2, 1.5) << "dim " << d << " state " << trial;
      EXPECT_LT(e1 / e2, 2.5) << "dim " << d << " state " << trial;
    }
  }
}

TEST(Coupled, ConstantTrKDecouplesConformalFactorFromShift) {
  const Mesh m = unit_square(4);
  const auto coeffs = flat_with({{"trK", expr("0.7")}, {"rho", expr("0.2")}, {"Ahat_xx", expr("0.1")}});
  const auto pb = coupled_forms(2, coeffs);
  std::mt19937 rng(12);
  const SolutionField u = random_admissible_state(m, 3, pb, rng);
  const SparseMatrix A = assemble_jacobian(m, pb, u);
  const auto mask = dirichlet_mask(m, 3);
  for (int i = 0; i < A.rows; ++i) {
    if (mask[i] || i % 3 == 0) continue;
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      if (A.col[k] % 3 == 0) EXPECT_EQ(A.val[k], 0.0) << "row " << i << " col " << A.col[k];
  }
}

TEST(Coupled, AgreesWithHamiltonianWhenMomentumDecouples) {
  const Mesh m = unit_square(6);
  const auto coeffs = flat_with({{"trK", expr("0.9")}, {"rho", expr("gaussian(0.5, 0.2, 0.5, 0.5)")},
                                 {"Ahat_xx", expr("0.3")}, {"Ahat_yy", expr("-0.3")}, {"Rhat", expr("0.2")}});
  const auto ham = hamiltonian_forms(2, coeffs);
  const auto cpl = coupled_forms(2, coeffs);
  SolutionField uh = initial_field(m, ham, 1.0), uc = initial_field(m, cpl);
  for (int v = 0; v < m.num_vertices(); ++v) uc.at(v, 0) = 1.0;
  apply_dirichlet(m, cpl, uc);
  ASSERT_TRUE(newton_solve(m, ham, uh, tight()).converged);
  ASSERT_TRUE(newton_solve(m, cpl, uc, tight()).converged);
  for (int v = 0; v < m.num_vertices(); ++v) {
    EXPECT_NEAR(uc.at(v, 0), uh.at(v, 0), 1e-8);
    EXPECT_NEAR(uc.at(v, 1), 0.0, 1e-10);
  }
}

TEST(ConstraintData, ValidationNamesTheField) {
  const Mesh m = unit_square(2);
  auto expect_field = [&](std::shared_ptr<CoefficientSet> c, const std::string& field) {
    try {
      validate_constraint_data(m, *c);
      ADD_FAILURE() << "expected ConfigError for " << field;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  EXPECT_NO_THROW(validate_constraint_data(m, *flat_trivial_coefficients()));
  expect_field(flat_with({{"rho", expr("-0.1")}}), "rho");
  expect_field(flat_with({{"dirichlet_f", expr("0")}}), "dirichlet_f");
  expect_field(flat_with({{"metric_xy", expr("2")}}), "metric");
}

TEST(TwoHoles, AnnulusSolutionIsPositive) {
  const Mesh m = annulus(3, 24, 0.5, 2.0);
  const auto pb = hamiltonian_forms(2, two_holes_coefficients(2));
  validate_constraint_data(m, *pb.coefficients);
  SolutionField u = initial_field(m, pb, 1.0);
  ASSERT_TRUE(newton_solve(m, pb, u).converged);
  for (double x : u.values) EXPECT_GT(x, 0.0);
  EXPECT_EQ(*pb.clamp_events, 0);
}

TEST(Constraints, DefaultStartIsUnitConformalFactor) {
  const Mesh m = unit_square(3);
  const auto u = initial_field(m, coupled_forms(2, flat_trivial_coefficients()));
  for (int v = 0; v < m.num_vertices(); ++v) {
    EXPECT_EQ(u.at(v, 0), 1.0);
    EXPECT_EQ(u.at(v, 1), 0.0);
    EXPECT_EQ(u.at(v, 2), 0.0);
  }
  const auto w = initial_field(m, momentum_forms(2, flat_trivial_coefficients()));
  for (double x : w.values) EXPECT_EQ(x, 0.0);
}
