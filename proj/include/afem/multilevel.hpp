#pragma once

#include <afem/dense.hpp>
#include <afem/mesh.hpp>
#include <afem/sparse.hpp>

#include <memory>
#include <variant>
#include <vector>

namespace afem {

/// Scalar P1 prolongation from `coarse` to `fine`, where `fine` was produced
/// from `coarse` by refinement (vertex ids shared). Throws SolverError when the
/// vertex genealogy does not connect the two meshes.
SparseMatrix prolongation_from_refinement(const Mesh& coarse, const Mesh& fine);
/// Same, given only the coarse vertex count.
SparseMatrix prolongation_from_vertices(const Mesh& fine, int coarse_vertices);

/// Kronecker expansion P (x) I_ncomp for interleaved components.
SparseMatrix expand_components(const SparseMatrix& P, int ncomp);
/// Keeps A_c = P^T A P consistent with identity Dirichlet rows: Dirichlet fine
/// rows reduce to injection of the same dof (or vanish for new vertices) and
/// Dirichlet coarse columns are removed from all other rows.
SparseMatrix constrain_prolongation(const SparseMatrix& P, const std::vector<char>& fine_dirichlet,
                                    const std::vector<char>& coarse_dirichlet);
/// Constrained, expanded prolongations for nested meshes with the given vertex
/// counts (ascending, last = fine mesh), returned finest first.
std::vector<SparseMatrix> nested_prolongations(const Mesh& fine, const std::vector<int>& vertex_counts, int ncomp);
/// Walking from the finest level down, drops intermediate levels that the next
/// kept finer level does not exceed by `min_ratio`. The coarsest and finest are always kept.
std::vector<int> merge_levels(const std::vector<int>& vertex_counts, double min_ratio = 1.5);

enum class SweepDirection { forward, backward };

/// One Gauss-Seidel sweep. `active` (optional) restricts the sweep to rows with a nonzero flag.
void smoother_sweep(const SparseMatrix& A, std::vector<double>& x, const std::vector<double>& b,
                    SweepDirection dir, const std::vector<char>* active = nullptr);

struct MultilevelOptions {
  int pre_sweeps = 1;
  int post_sweeps = 1;
  int max_iters = 500;
  int dense_limit = 500;
  /// Smooth only the dofs introduced at each level (plain hierarchical splitting).
  bool hierarchical_basis = false;
  Execution exec = Execution::parallel;
};

/// Levels A_1 (finest) .. A_J with A_{k+1} = P_k^T A_k P_k.
class MultilevelHierarchy {
 public:
  MultilevelHierarchy() = default;
  const SparseMatrix& matrix(int k) const { return A_[k]; }
  const SparseMatrix& prolongation(int k) const { return P_[k]; }
  int levels() const { return static_cast<int>(A_.size()); }
  const MultilevelOptions& options() const { return opt_; }

  /// One V-cycle applied to b with zero initial guess.
  std::vector<double> vcycle(const std::vector<double>& b) const { return cycle(0, b); }
  std::vector<double> coarse_solve(const std::vector<double>& b) const;

 private:
  friend MultilevelHierarchy build_hierarchy(const SparseMatrix&, const std::vector<SparseMatrix>&,
                                             const MultilevelOptions&);
  std::vector<double> cycle(int k, const std::vector<double>& b) const;

  std::vector<SparseMatrix> A_;
  std::vector<SparseMatrix> P_;
  std::vector<std::vector<char>> active_;
  std::variant<std::monostate, DenseLU, SkylineLU> coarse_;
  MultilevelOptions opt_;
};

MultilevelHierarchy build_hierarchy(const SparseMatrix& A, const std::vector<SparseMatrix>& prolongations,
                                    const MultilevelOptions& opt = {});

enum class KrylovMethod { automatic, cg, tfqmr };

struct LinearSolveResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Thrown when the iteration cap is reached; carries the best iterate found.
class LinearSolveError : public SolverError {
 public:
  LinearSolveError(const std::string& msg, LinearSolveResult best) : SolverError(msg), best_(std::move(best)) {}
  const LinearSolveResult& best() const { return best_; }

 private:
  LinearSolveResult best_;
};

/// V-cycle preconditioned CG (symmetric) or right-preconditioned TFQMR.
/// automatic selects CG when `symmetric` is true.
LinearSolveResult solve(const MultilevelHierarchy& h, const std::vector<double>& b, double tol,
                        bool symmetric = true, KrylovMethod method = KrylovMethod::automatic);

}  // namespace afem
