#pragma once

#include <afem/mesh.hpp>
#include <afem/problem.hpp>
#include <afem/solution.hpp>
#include <afem/sparse.hpp>

#include <vector>

namespace afem {

struct AssemblyOptions {
  int quad_degree = 2;
  Execution exec = Execution::parallel;
};

/// Residual vector <F(u), psi_i>; entries at Dirichlet dofs are zero.
std::vector<double> assemble_residual(const Mesh& mesh, const ProblemDefinition& problem, const SolutionField& u,
                                      const AssemblyOptions& opt = {});

/// Jacobian <DF(u) phi_j, psi_i>; Dirichlet rows and columns replaced by identity.
SparseMatrix assemble_jacobian(const Mesh& mesh, const ProblemDefinition& problem, const SolutionField& u,
                               const AssemblyOptions& opt = {});

struct LinearSystem {
  SparseMatrix A;
  std::vector<double> F;
};
/// Residual and Jacobian in one element pass.
LinearSystem assemble_system(const Mesh& mesh, const ProblemDefinition& problem, const SolutionField& u,
                             const AssemblyOptions& opt = {});

/// Load vector <psi, v_i> over all components; Dirichlet entries zeroed when requested.
std::vector<double> assemble_load(const Mesh& mesh, int ncomp, const VectorFunction& psi, bool zero_dirichlet,
                                  const AssemblyOptions& opt = {});

/// <u, psi> = integral of sum_c u_c psi_c.
double evaluate_functional(const Mesh& mesh, const SolutionField& u, const VectorFunction& psi,
                           const AssemblyOptions& opt = {});

/// Euclidean norm over non-Dirichlet dofs.
double residual_norm(const Mesh& mesh, int ncomp, const std::vector<double>& F);

/// Shared CSR pattern of the vertex adjacency graph expanded over components.
SparseMatrix sparsity_pattern(const Mesh& mesh, int ncomp);

}  // namespace afem
