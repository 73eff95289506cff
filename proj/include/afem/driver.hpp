#pragma once

#include <afem/config.hpp>
#include <afem/ppum.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace afem {

struct ProblemSetup {
  ProblemDefinition problem;
  std::optional<ExactSolution> exact;
  VectorFunction psi;
};

/// Problem, exact solution (benchmarks) and goal density for a config on `mesh`.
ProblemSetup build_problem(const RunConfig& cfg, const Mesh& mesh);

struct SubdomainSummary {
  int part = 0;
  int owned = 0;
  int overlap = 0;
  int vertices = 0;
  int levels = 0;
  double h1_error = 0.0;
  double l2_error = 0.0;
  std::string status;
  double seconds = 0.0;
};

struct RunReport {
  std::vector<LevelRecord> levels;
  long clamp_events = 0;
  std::string status;
  bool ok = true;
  // PPUM runs only.
  bool ppum = false;
  int parts = 0;
  int overlap_layers = 0;
  int max_overlap = 0;
  int max_support = 0;
  int local_budget = 0;
  int blend_vertices = 0;
  double blend_l2_error = 0.0;
  double blend_h1_error = 0.0;
  double partition_sum_deviation = 0.0;
  std::vector<SubdomainSummary> subdomains;
  double seconds = 0.0;
};

/// Header line identifying the CSV schema.
inline constexpr const char* kConvergenceCsvHeader = "# afem-convergence v1";

/// level,vertices,simplices,total_indicator,l2_error,h1_error,dual_estimate,
/// newton_iterations,linear_iterations,newton_residual,clamp_events,marked
void write_convergence_csv(std::ostream& os, const std::vector<LevelRecord>& levels);

/// Solve-estimate-mark-refine run writing convergence.csv, report.json,
/// final.afem and (optionally) level_<k>.vtk under cfg.output_dir.
RunReport run_adaptive(const RunConfig& cfg);
/// Coarse solve, decomposition, local runs, blend; artifacts under cfg.output_dir
/// with one sub<i>/ directory per subdomain.
RunReport run_ppum(const RunConfig& cfg);

}  // namespace afem
