#pragma once

#include <afem/assembly.hpp>
#include <afem/multilevel.hpp>

#include <vector>

namespace afem {

/// Per-simplex indicator indexed by simplex slot; dead slots hold 0.
struct IndicatorField {
  std::vector<double> eta;
  double p = 2.0;
  std::vector<char> marked;
  /// Number of live simplices N used by equidistribution; 0 means eta.size().
  int simplex_count = 0;

  double sum_p() const;
  /// (sum eta^p)^(1/p)
  double total() const;
};

/// eta_s^p = h_s^p ||SF_0||^p_s + 1/2 sum_interior h_f ||jump SF_2||^p_f + sum_neumann h_f ||SF_1||^p_f,
/// with h the inscribed-sphere diameters.
IndicatorField residual_indicator(const Mesh& mesh, const ProblemDefinition& problem, const SolutionField& u,
                                  double p = 2.0, const AssemblyOptions& opt = {});

enum class DualEnrichment {
  /// Dual solved on one uniform refinement of a copy of the mesh.
  refined,
  /// Dual solved on the mesh itself; phi - P phi from edge-bubble quadratic recovery.
  recovery,
};

struct DualOptions {
  DualEnrichment enrichment = DualEnrichment::refined;
  double tol = 1e-10;
  /// Nested vertex counts of the primal mesh (see NewtonConfig); the dual
  /// hierarchy appends the enriched mesh.
  std::vector<int> level_vertex_counts;
  MultilevelOptions multilevel;
  AssemblyOptions assembly;
};

struct DualWeights {
  DualEnrichment enrichment = DualEnrichment::refined;
  /// Mesh the dual lives on: a refined copy (roots = primal simplex ids) or a copy of the primal mesh.
  Mesh mesh;
  SolutionField phi;
  VectorFunction psi;
  int linear_iterations = 0;
};

/// Solves DF(u_h)^T phi = <psi, v>. Throws SolverError if the adjoint system cannot be solved.
DualWeights solve_dual(const Mesh& mesh, const ProblemDefinition& problem, const SolutionField& u,
                       const VectorFunction& psi, const DualOptions& opt = {});

struct DualEstimate {
  /// |element contributions|, p = 1.
  IndicatorField field;
  /// Signed estimate of <u - u_h, psi>.
  double estimate = 0.0;
};

DualEstimate dual_indicator(const Mesh& mesh, const ProblemDefinition& problem, const SolutionField& u,
                            const DualWeights& weights, const AssemblyOptions& opt = {});

enum class MarkStrategy {
  equidistribution,
  maximum,
  /// Equidistribution, then the largest remaining until the marked set carries half of sum eta^p.
  hybrid,
};

/// Marks simplices of `field` (ids ascending) and records them in field.marked.
std::vector<int> mark(IndicatorField& field, MarkStrategy strategy, double theta);

}  // namespace afem
