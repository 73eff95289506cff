#pragma once

#include <afem/benchmarks.hpp>
#include <afem/indicators.hpp>
#include <afem/newton.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace afem {

enum class IndicatorKind { residual, dual };

struct LevelRecord {
  int level = 0;
  int vertices = 0;
  int simplices = 0;
  double total_indicator = 0.0;
  /// NaN when no exact solution is known.
  double l2_error = 0.0;
  double h1_error = 0.0;
  double dual_estimate = 0.0;
  int newton_iterations = 0;
  int linear_iterations = 0;
  bool newton_converged = false;
  double newton_residual = 0.0;
  long clamp_events = 0;
  int marked = 0;
  double seconds = 0.0;
};

struct AdaptiveOptions {
  /// Stop once the mesh has at least this many vertices; refinement steps are
  /// truncated so the cap is not exceeded.
  int max_vertices = 10000;
  /// Stop when the total indicator falls below this (0 disables).
  double target_indicator = 0.0;
  int max_levels = 50;
  IndicatorKind indicator = IndicatorKind::residual;
  MarkStrategy strategy = MarkStrategy::hybrid;
  double theta = 1.0;
  double p = 2.0;
  /// Mark every (markable) simplex for dim bisection rounds per level (h halves).
  bool uniform = false;
  NewtonConfig newton;
  DualOptions dual;
  /// Goal functional density for the dual indicator.
  VectorFunction psi;
  std::optional<ExactSolution> exact;
  /// Restricts marking to simplices whose root (see Mesh::reset_roots) passes.
  std::function<bool(int root)> markable;
  /// Newton failures end the loop with an error status when false; otherwise the
  /// unconverged iterate is estimated and refined.
  bool continue_on_newton_failure = false;
  /// Called after each level's estimate, before refinement.
  std::function<void(const LevelRecord&, const Mesh&, const SolutionField&, const IndicatorField&)> on_level;
};


struct AdaptiveResult {
  Mesh mesh;
  SolutionField u;
  IndicatorField indicator;
  std::vector<LevelRecord> levels;
  /// Vertex count after each level (ascending).
  std::vector<int> level_vertex_counts;
  std::string status;
  bool ok = true;
};

/// Adaptive loop: Newton solve, estimate, mark, refine, until the vertex cap or
/// the indicator target is reached. `u0` (optional) must match `mesh`.
AdaptiveResult run_adaptive_loop(Mesh mesh, const ProblemDefinition& problem, const AdaptiveOptions& opt,
                                 const SolutionField* u0 = nullptr);

/// Refines `mesh` with the longest prefix of `candidates` (sorted by decreasing
/// eta) whose refinement stays within `max_vertices`, found by bisection on the
/// prefix length over trial copies. Returns the number of candidates used.
int refine_within_cap(Mesh& mesh, std::vector<int> candidates, int max_vertices);

}  // namespace afem
