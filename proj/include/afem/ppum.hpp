#pragma once

#include <afem/adaptive.hpp>

#include <vector>

namespace afem {

struct Decomposition {
  int parts = 1;
  /// Owning subdomain per coarse simplex slot; -1 for dead slots.
  std::vector<int> owner;
  /// Coarse simplices of each overlap region (ascending), owned set plus `overlap_layers` layers.
  std::vector<std::vector<int>> overlap;
  int overlap_layers = 2;
  /// Largest number of overlap regions containing one coarse simplex.
  int max_overlap = 1;

  bool in_overlap(int part, int coarse_simplex) const;
};

/// Error-weighted recursive coordinate bisection of the live simplices: each
/// split gives both sides their share of sum eta^p (uniform weights when the
/// field is zero). Overlap regions grow by vertex-adjacent simplex layers.
Decomposition decompose(const Mesh& mesh, const IndicatorField& indicators, int parts, int overlap_layers = 2);

/// Per-vertex weights on a mesh, one SolutionField component per subdomain.
struct PartitionOfUnity {
  int parts = 1;
  /// weights[i][v]
  std::vector<std::vector<double>> weights;
  /// Largest number of subdomains with a positive weight at one vertex.
  int max_support = 1;
};

/// Weights on the coarse mesh: w_i(v) = max(0, 1 - d_i(v) / L) with d_i the
/// layer distance from subdomain i's owned vertices and L the overlap width,
/// normalized to sum to one.
PartitionOfUnity coarse_partition_of_unity(const Mesh& coarse, const Decomposition& dec);
/// Extends coarse weights to a refinement of the coarse mesh (linear along
/// bisected edges) and renormalizes.
PartitionOfUnity extend_partition_of_unity(const Mesh& fine, const PartitionOfUnity& coarse_pou);

/// Adaptive run on a copy of `coarse` marking only simplices rooted in subdomain
/// i's overlap region, from `u_coarse`, up to `budget` vertices.
/// `coarse` must have had reset_roots() called. Errors carry the subdomain id.
AdaptiveResult local_solve(const ProblemDefinition& problem, const Mesh& coarse, const SolutionField& u_coarse,
                           const Decomposition& dec, int part, int budget, AdaptiveOptions opt);

/// Union refinement of `coarse`: each coarse simplex is refined as in the local
/// mesh of its owner, closure restores conformity.
Mesh blend_mesh(const Mesh& coarse, const Decomposition& dec, const std::vector<const Mesh*>& local_meshes);

/// u_pp(v) = sum_i phi_i(v) u_i(v) on `mesh`, locating each vertex in every
/// local mesh with positive weight. Throws Error naming the vertex on failure.
SolutionField blend(const Mesh& mesh, const PartitionOfUnity& pou, const std::vector<const Mesh*>& local_meshes,
                    const std::vector<const SolutionField*>& locals);

struct PpumOptions {
  int parts = 4;
  int overlap_layers = 2;
  /// Vertex budget of each local solve.
  int local_budget = 2000;
  AdaptiveOptions adaptive;
  /// Run local solves concurrently.
  Execution exec = Execution::parallel;
};

struct PpumResult {
  Mesh coarse;
  SolutionField u_coarse;
  Decomposition decomposition;
  std::vector<AdaptiveResult> locals;
  /// Wall time of each local solve.
  std::vector<double> local_seconds;
  Mesh mesh;
  SolutionField u;
  PartitionOfUnity pou;
  bool ok = true;
  std::string status;
};

/// Coarse solve, decomposition, independent local solves, blend.
PpumResult run_ppum_pipeline(Mesh coarse, const ProblemDefinition& problem, const PpumOptions& opt);

}  // namespace afem
