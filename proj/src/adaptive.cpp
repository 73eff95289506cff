#include <afem/adaptive.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

namespace afem {

int refine_within_cap(Mesh& mesh, std::vector<int> candidates, int max_vertices) {
  if (candidates.empty()) return 0;
  auto trial = [&](int k) {
    Mesh m = mesh;
    std::vector<int> marks(candidates.begin(), candidates.begin() + k);
    std::sort(marks.begin(), marks.end());
    m.refine_marked(marks);
    return m;
  };
  const int n = static_cast<int>(candidates.size());
  Mesh full = trial(n);
  if (full.num_vertices() <= max_vertices) {
    mesh = std::move(full);
    return n;
  }
  int lo = 0, hi = n;  // largest k with vertices(k) <= cap lies in [lo, hi)
  std::optional<Mesh> best;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    Mesh m = trial(mid);
    if (m.num_vertices() <= max_vertices) {
      lo = mid;
      best = std::move(m);
    } else {
      hi = mid;
    }
  }
  if (lo == 0) return 0;
  mesh = std::move(*best);
  return lo;
}

AdaptiveResult run_adaptive_loop(Mesh mesh, const ProblemDefinition& problem, const AdaptiveOptions& opt,
                                 const SolutionField* u0) {
  using clock = std::chrono::steady_clock;
  AdaptiveResult res;
  SolutionField u = u0 ? *u0 : initial_field(mesh, problem);
  if (u.num_vertices() != mesh.num_vertices() || u.ncomp != problem.n_unknowns)
    throw Error("initial field does not match the mesh");
  std::vector<int> counts{mesh.num_vertices()};
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int level = 0;; ++level) {
    const auto t0 = clock::now();
    LevelRecord rec;
    rec.level = level;
    rec.vertices = mesh.num_vertices();
    rec.simplices = mesh.num_simplices();
    apply_dirichlet(mesh, problem, u);

    NewtonConfig ncfg = opt.newton;
    ncfg.level_vertex_counts = merge_levels(counts);
    NewtonReport nrep;
    try {
      nrep = newton_solve(mesh, problem, u, ncfg);
    } catch (const Error& e) {
      res.ok = false;
      res.status = "level " + std::to_string(level) + ": " + e.what();
      break;
    }
    rec.newton_iterations = nrep.iterations;
    rec.newton_converged = nrep.converged;
    rec.newton_residual = nrep.final_residual;
    for (const auto& s : nrep.history) rec.linear_iterations += s.linear_iters;

    // Clamps on the accepted state: one residual evaluation with a fresh count.
    {
      const long before = problem.clamp_events->exchange(0);
      try {
        assemble_residual(mesh, problem, u, opt.newton.assembly);
      } catch (const Error&) {
      }
      rec.clamp_events = problem.clamp_events->exchange(before + problem.clamp_events->load());
    }
    IndicatorField field;
    try {
      if (opt.indicator == IndicatorKind::residual) {
        field = residual_indicator(mesh, problem, u, opt.p, opt.newton.assembly);
      } else {
        DualOptions dopt = opt.dual;
        dopt.level_vertex_counts = merge_levels(counts);
        const DualWeights w = solve_dual(mesh, problem, u, opt.psi, dopt);
        DualEstimate est = dual_indicator(mesh, problem, u, w, opt.newton.assembly);
        field = std::move(est.field);
        rec.dual_estimate = est.estimate;
      }
    } catch (const Error& e) {
      res.ok = false;
      res.status = "level " + std::to_string(level) + ": " + e.what();
      break;
    }
    rec.total_indicator = field.total();
    if (opt.exact) {
      const ErrorNorms e = measure_error(mesh, u, *opt.exact);
      rec.l2_error = e.l2;
      rec.h1_error = e.h1;
    } else {
      rec.l2_error = rec.h1_error = nan;
    }

    const bool newton_failed = !nrep.converged && !opt.continue_on_newton_failure;
    std::string stop;
    if (newton_failed) stop = "newton: " + nrep.message;
    else if (mesh.num_vertices() >= opt.max_vertices) stop = "vertex cap reached";
    else if (opt.target_indicator > 0 && rec.total_indicator <= opt.target_indicator) stop = "indicator target reached";
    else if (level + 1 >= opt.max_levels) stop = "level limit reached";

    if (opt.on_level) opt.on_level(rec, mesh, u, field);
    if (stop.empty() && opt.uniform) {
      // dim bisection rounds so h halves per level.
      for (int round = 0; round < mesh.dim(); ++round) {
        std::vector<int> all;
        for (int s : mesh.live_simplices())
          if (!opt.markable || opt.markable(mesh.simplex(s).root)) all.push_back(s);
        const int used = all.empty() ? 0 : refine_within_cap(mesh, all, opt.max_vertices);
        rec.marked += used;
        if (used < static_cast<int>(all.size())) break;
      }
      if (rec.marked == 0) stop = "vertex cap reached";
    } else if (stop.empty()) {
      std::vector<int> marked;
      if (opt.markable) {
        // Mark as if the region were the whole domain.
        IndicatorField local = field;
        local.simplex_count = 0;
        for (int s = 0; s < static_cast<int>(local.eta.size()); ++s) {
          if (mesh.is_live(s) && opt.markable(mesh.simplex(s).root)) ++local.simplex_count;
          else local.eta[s] = 0.0;
        }
        if (local.simplex_count > 0) marked = mark(local, opt.strategy, opt.theta);
        field.marked = local.marked;
      } else {
        marked = mark(field, opt.strategy, opt.theta);
      }
      std::stable_sort(marked.begin(), marked.end(),
                       [&](int a, int b) { return field.eta[a] > field.eta[b]; });
      if (marked.empty()) {
        stop = "no simplices marked";
      } else {
        rec.marked = refine_within_cap(mesh, marked, opt.max_vertices);
        if (rec.marked == 0) stop = "vertex cap reached";
      }
    }
    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    res.levels.push_back(rec);
    res.indicator = std::move(field);
    if (!stop.empty()) {
      res.status = stop;
      res.ok = !newton_failed;
      break;
    }
    prolongate(mesh, u);
    counts.push_back(mesh.num_vertices());
  }
  res.level_vertex_counts = counts;
  res.mesh = std::move(mesh);
  res.u = std::move(u);
  return res;
}

}  // namespace afem
