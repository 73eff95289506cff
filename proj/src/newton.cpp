#include <afem/newton.hpp>

#include <afem/kernels.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace afem {

namespace {

void check_config(const NewtonConfig& c) {
  if (!(c.abs_tol > 0) || !(c.rel_tol > 0)) throw ConfigError("newton: tolerances must be positive");
  if (c.max_iters < 1) throw ConfigError("newton: max_iters must be at least 1");
  if (c.forcing == ForcingRule::fixed && !(c.fixed_eta > 0 && c.fixed_eta < 1))
    throw ConfigError("newton: fixed forcing term must lie in (0, 1)");
}

double checked_norm(const Mesh& mesh, int nc, const std::vector<double>& F) {
  const double r = residual_norm(mesh, nc, F);
  if (!std::isfinite(r)) throw SolverError("newton: non-finite residual");
  return r;
}

}  // namespace

NewtonReport newton_solve(const Mesh& mesh, const ProblemDefinition& pb, SolutionField& u, const NewtonConfig& cfg) {
  check_config(cfg);
  const int nc = pb.n_unknowns;
  NewtonReport rep;
  std::vector<SparseMatrix> prolongations;
  if (cfg.level_vertex_counts.size() > 1) prolongations = nested_prolongations(mesh, cfg.level_vertex_counts, nc);

  LinearSystem sys = assemble_system(mesh, pb, u, cfg.assembly);
  double rnorm = checked_norm(mesh, nc, sys.F);
  rep.initial_residual = rnorm;
  rep.history.push_back({0, rnorm, 0.0, 0, 0.0});
  const double target = std::max(cfg.abs_tol, cfg.rel_tol * rnorm);

  for (int it = 1; it <= cfg.max_iters + 1; ++it) {
    if (rnorm <= target) {
      rep.converged = true;
      break;
    }
    if (it > cfg.max_iters) {
      rep.message = "maximum Newton iterations reached";
      break;
    }
    double eta = cfg.forcing == ForcingRule::fixed ? cfg.fixed_eta : std::min(0.5, std::sqrt(rnorm));
    // Affine problems: one solve to below the Newton target.
    if (pb.linear) eta = std::clamp(0.1 * target / rnorm, 1e-14, eta);
    std::vector<double> rhs(sys.F.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -sys.F[i];
    const MultilevelHierarchy h = build_hierarchy(sys.A, prolongations, cfg.multilevel);
    LinearSolveResult lin;
    try {
      lin = solve(h, rhs, eta, pb.symmetric, cfg.krylov);
    } catch (const LinearSolveError& e) {
      // Fall back to the best iterate; damping decides whether it helps.
      lin = e.best();
    }

    SolutionField trial = u;
    double lambda = 1.0, trial_norm = 0.0;
    LinearSystem trial_sys;
    bool accepted = false;
    for (int halving = 0; halving <= (cfg.damping ? cfg.max_halvings : 0); ++halving) {
      for (std::size_t i = 0; i < u.values.size(); ++i) trial.values[i] = u.values[i] + lambda * lin.x[i];
      trial_sys = assemble_system(mesh, pb, trial, cfg.assembly);
      trial_norm = checked_norm(mesh, nc, trial_sys.F);
      if (!cfg.damping || trial_norm < rnorm) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      rep.message = "damping exhausted without residual decrease";
      break;
    }
    u = std::move(trial);
    sys = std::move(trial_sys);
    rnorm = trial_norm;
    rep.iterations = it;
    rep.history.push_back({it, rnorm, lambda, lin.iterations, lin.relative_residual});
  }
  rep.final_residual = rnorm;
  if (rep.converged) rep.message = "converged";
  return rep;
}

void write_history_csv(std::ostream& os, const NewtonReport& report) {
  os << "iteration,residual,lambda,linear_iters\n";
  os << std::setprecision(10);
  for (const auto& s : report.history)
    os << s.iteration << ',' << s.residual << ',' << s.lambda << ',' << s.linear_iters << '\n';
}

}  // namespace afem
