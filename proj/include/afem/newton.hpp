#pragma once

#include <afem/assembly.hpp>
#include <afem/multilevel.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace afem {

enum class ForcingRule { fixed, residual_scaled };

struct NewtonConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_iters = 30;
  ForcingRule forcing = ForcingRule::residual_scaled;
  /// Linear relative tolerance for ForcingRule::fixed.
  double fixed_eta = 1e-10;
  bool damping = true;
  int max_halvings = 12;
  KrylovMethod krylov = KrylovMethod::automatic;
  MultilevelOptions multilevel;
  AssemblyOptions assembly;
  /// Nested vertex counts (ascending, last = current mesh) for the multilevel
  /// preconditioner; empty means a single level (direct solve).
  std::vector<int> level_vertex_counts;
};

struct NewtonStep {
  int iteration = 0;
  double residual = 0.0;
  double lambda = 0.0;
  int linear_iters = 0;
  double linear_residual = 0.0;
};

struct NewtonReport {
  int iterations = 0;
  bool converged = false;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::string message;
  /// Row 0 is the initial state.
  std::vector<NewtonStep> history;
};

/// Damped inexact Newton: solve DF(u) w = -F(u) to the forcing tolerance,
/// then u += lambda w with lambda halved until the residual norm decreases.
/// `u` must already satisfy the Dirichlet data; it is updated in place.
NewtonReport newton_solve(const Mesh& mesh, const ProblemDefinition& problem, SolutionField& u,
                          const NewtonConfig& config = {});

/// CSV: iteration,residual,lambda,linear_iters
void write_history_csv(std::ostream& os, const NewtonReport& report);

}  // namespace afem
