#pragma once

#include <afem/benchmarks.hpp>
#include <afem/problem.hpp>

#include <memory>
#include <string>
#include <vector>

namespace afem {

inline constexpr double kPhiFloor = 1e-6;

/// Coefficient names understood by the constraint problems. Tensor entries
/// use lowercase axis suffixes: Ahat_xy, metric_yy, robin_C_xz (C^x_z), jhat_y.
///   Rhat trK rho Ahat_ij jhat_i robin_c robin_z robin_C_ij robin_Z_i
///   dirichlet_f dirichlet_F_i metric_ij phi source_phi source_W_i
/// `phi` is the frozen conformal factor of the decoupled momentum problem;
/// the source_* fields are subtracted from the residual (manufactured solutions).
const std::vector<std::string>& constraint_coefficient_names();

/// Flat-space trivial data: all zero except dirichlet_f = 1, phi = 1, metric = identity.
std::shared_ptr<CoefficientSet> flat_trivial_coefficients();

/// Pointwise coefficient values used by the constraint integrands.
struct ConstraintPoint {
  double Rhat = 0, trK = 0, rho = 0;
  Vec3 dtrK{};
  double Ahat[3][3]{};  // lower indices
  Vec3 jhat{};
  double robin_c = 0, robin_z = 0;
  double robin_C[3][3]{};
  Vec3 robin_Z{};
  double g[3][3]{}, ginv[3][3]{}, sqrt_det = 1.0;
  double phi = 1.0;
  double source_phi = 0;
  Vec3 source_W{};
};

/// (1/8) R phi + (1/12) trK^2 phi^5 - (1/8) M2 phi^-7 - 2 pi rho phi^-3, where
/// M2 = (Ahat + LW)^2. `phi` is clamped to kPhiFloor.
double hamiltonian_Pprime(double phi, const ConstraintPoint& c, double M2);
/// d/dphi of hamiltonian_Pprime.
double hamiltonian_Pprime_derivative(double phi, const ConstraintPoint& c, double M2);

/// Conformal Killing operator LW^{ab} = D^a W^b + D^b W^a - (2/3) g^{ab} D_c W^c
/// for the coordinate gradient dW[b][c] = d_c W^b under a constant metric.
void conformal_killing(int dim, const double ginv[3][3], const std::array<Vec3, kMaxComponents>& dW,
                       double LW[3][3]);

ProblemDefinition hamiltonian_forms(int dim, std::shared_ptr<const CoefficientSet> coeffs);
/// Decoupled momentum problem; phi is read from the `phi` coefficient.
ProblemDefinition momentum_forms(int dim, std::shared_ptr<const CoefficientSet> coeffs);
/// Components (phi, W^1..W^d).
ProblemDefinition coupled_forms(int dim, std::shared_ptr<const CoefficientSet> coeffs);

/// Checks rho >= 0, dirichlet_f > 0, robin_c >= 0 and metric SPD at the mesh
/// vertices. Throws ConfigError naming the first violated field.
void validate_constraint_data(const Mesh& mesh, const CoefficientSet& coeffs);

/// Manufactured Hamiltonian on the unit square: phi* = 1 + sin(pi x) sin(pi y) / 4
/// with R = 0, trK^2 = 12, rho = 1, Ahat_xx = -Ahat_yy = 1/2.
Benchmark manufactured_hamiltonian();
/// Manufactured momentum on the unit cube: W* = (sin(pi x) sin(pi y) sin(pi z), 0, 0), phi = 1.
Benchmark manufactured_momentum();

/// Desk-scale two-holes demonstration data: constant trK, Gaussian rho around
/// each hole centre, Dirichlet f = 1.
std::shared_ptr<CoefficientSet> two_holes_coefficients(int dim);

}  // namespace afem
