#include <afem/ppum.hpp>

#include <afem/point_locator.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <set>

namespace afem {

bool Decomposition::in_overlap(int part, int coarse_simplex) const {
  const auto& o = overlap[part];
  return std::binary_search(o.begin(), o.end(), coarse_simplex);
}

namespace {

void bisect_parts(const Mesh& mesh, std::vector<int> ids, const std::vector<double>& w, int parts, int label,
                  std::vector<int>& owner) {
  if (parts == 1) {
    for (int s : ids) owner[s] = label;
    return;
  }
  const int p1 = parts / 2, p2 = parts - p1;
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  std::vector<Vec3> bc(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    bc[k] = mesh.barycenter(ids[k]);
    for (int a = 0; a < mesh.dim(); ++a) {
      lo[a] = std::min(lo[a], bc[k][a]);
      hi[a] = std::max(hi[a], bc[k][a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < mesh.dim(); ++a)
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  std::vector<std::size_t> order(ids.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (bc[a][axis] != bc[b][axis]) return bc[a][axis] < bc[b][axis];
    return ids[a] < ids[b];
  });
  std::vector<int> sorted(ids.size());
  for (std::size_t k = 0; k < order.size(); ++k) sorted[k] = ids[order[k]];

  double total = 0.0;
  for (int s : sorted) total += w[s];
  const double target = total * p1 / parts;
  const int n = static_cast<int>(sorted.size());
  int best_k = p1;
  double best_gap = 1e300, cum = 0.0;
  for (int k = 1; k <= n - p2; ++k) {
    cum += w[sorted[k - 1]];
    if (k < p1) continue;
    const double gap = std::abs(cum - target);
    if (gap < best_gap) {
      best_gap = gap;
      best_k = k;
    }
  }
  bisect_parts(mesh, {sorted.begin(), sorted.begin() + best_k}, w, p1, label, owner);
  bisect_parts(mesh, {sorted.begin() + best_k, sorted.end()}, w, p2, label + p1, owner);
}

/// Simplices sharing a vertex with `region` (including it).
std::vector<int> grow(const Mesh& mesh, const std::vector<int>& region) {
  std::set<int> out(region.begin(), region.end());
  for (int s : region)
    for (int i = 0; i <= mesh.dim(); ++i)
      for (int t : mesh.vertex(mesh.simplex(s).verts[i]).ring) out.insert(t);
  return {out.begin(), out.end()};
}

using SimplexKey = std::array<double, 12>;

SimplexKey key_of(const Mesh& mesh, const std::array<int, 4>& verts) {
  const int d = mesh.dim();
  std::array<Vec3, 4> pts{};
  for (int i = 0; i <= d; ++i) pts[i] = mesh.vertex(verts[i]).x;
  std::sort(pts.begin(), pts.begin() + d + 1);
  SimplexKey k{};
  for (int i = 0; i <= d; ++i)
    for (int a = 0; a < 3; ++a) k[3 * i + a] = pts[i][a];
  return k;
}

}  // namespace

Decomposition decompose(const Mesh& mesh, const IndicatorField& indicators, int parts, int overlap_layers) {
  if (parts < 1) throw ConfigError("ppum: subdomain count must be at least 1");
  if (overlap_layers < 1) throw ConfigError("ppum: overlap_layers must be at least 1");
  const std::vector<int> live = mesh.live_simplices();
  if (parts > static_cast<int>(live.size()))
    throw Error("ppum: " + std::to_string(parts) + " subdomains exceed the " + std::to_string(live.size()) +
                " simplices of the coarse mesh");
  std::vector<double> w(mesh.num_slots(), 0.0);
  double total = 0.0;
  for (int s : live) {
    const double e = s < static_cast<int>(indicators.eta.size()) ? indicators.eta[s] : 0.0;
    w[s] = std::pow(e, indicators.p);
    total += w[s];
  }
  if (!(total > 0))
    for (int s : live) w[s] = 1.0;

  Decomposition dec;
  dec.parts = parts;
  dec.overlap_layers = overlap_layers;
  dec.owner.assign(mesh.num_slots(), -1);
  bisect_parts(mesh, live, w, parts, 0, dec.owner);

  dec.overlap.resize(parts);
  std::vector<int> count(mesh.num_slots(), 0);
  for (int i = 0; i < parts; ++i) {
    std::vector<int> region;
    for (int s : live)
      if (dec.owner[s] == i) region.push_back(s);
    for (int l = 0; l < overlap_layers; ++l) region = grow(mesh, region);
    for (int s : region) ++count[s];
    dec.overlap[i] = std::move(region);
  }
  dec.max_overlap = *std::max_element(count.begin(), count.end());
  return dec;
}

PartitionOfUnity coarse_partition_of_unity(const Mesh& coarse, const Decomposition& dec) {
  const int nv = coarse.num_vertices(), L = dec.overlap_layers, d = coarse.dim();
  PartitionOfUnity pou;
  pou.parts = dec.parts;
  pou.weights.assign(dec.parts, std::vector<double>(nv, 0.0));
  const std::vector<int> live = coarse.live_simplices();
  for (int i = 0; i < dec.parts; ++i) {
    std::vector<int> dist(nv, -1);
    std::vector<int> front;
    for (int s : live)
      if (dec.owner[s] == i)
        for (int k = 0; k <= d; ++k) {
          const int v = coarse.simplex(s).verts[k];
          if (dist[v] < 0) {
            dist[v] = 0;
            front.push_back(v);
          }
        }
    for (int layer = 1; layer <= L && !front.empty(); ++layer) {
      std::vector<int> next;
      for (int v : front)
        for (int s : coarse.vertex(v).ring)
          for (int k = 0; k <= d; ++k) {
            const int u = coarse.simplex(s).verts[k];
            if (dist[u] < 0) {
              dist[u] = layer;
              next.push_back(u);
            }
          }
      front = std::move(next);
    }
    for (int v = 0; v < nv; ++v)
      if (dist[v] >= 0) pou.weights[i][v] = std::max(0.0, 1.0 - static_cast<double>(dist[v]) / L);
  }
  for (int v = 0; v < nv; ++v) {
    double sum = 0.0;
    for (int i = 0; i < dec.parts; ++i) sum += pou.weights[i][v];
    // Vertices of unused (isolated) slots keep zero weights.
    if (sum > 0)
      for (int i = 0; i < dec.parts; ++i) pou.weights[i][v] /= sum;
  }
  pou.max_support = 0;
  for (int v = 0; v < nv; ++v) {
    int m = 0;
    for (int i = 0; i < dec.parts; ++i) m += pou.weights[i][v] > 0;
    pou.max_support = std::max(pou.max_support, m);
  }
  return pou;
}

PartitionOfUnity extend_partition_of_unity(const Mesh& fine, const PartitionOfUnity& coarse_pou) {
  PartitionOfUnity pou;
  pou.parts = coarse_pou.parts;
  const int nc = static_cast<int>(coarse_pou.weights.empty() ? 0 : coarse_pou.weights[0].size());
  const int nv = fine.num_vertices();
  pou.weights.assign(pou.parts, std::vector<double>(nv, 0.0));
  for (int v = 0; v < nv; ++v) {
    if (v < nc) {
      for (int i = 0; i < pou.parts; ++i) pou.weights[i][v] = coarse_pou.weights[i][v];
      continue;
    }
    const auto [a, b] = fine.vertex(v).parents;
    if (a < 0) throw Error("partition of unity: vertex " + std::to_string(v) + " is not a refinement vertex");
    double sum = 0.0;
    for (int i = 0; i < pou.parts; ++i) {
      pou.weights[i][v] = 0.5 * (pou.weights[i][a] + pou.weights[i][b]);
      sum += pou.weights[i][v];
    }
    for (int i = 0; i < pou.parts; ++i) pou.weights[i][v] /= sum;
  }
  pou.max_support = 0;
  for (int v = 0; v < nv; ++v) {
    int m = 0;
    for (int i = 0; i < pou.parts; ++i) m += pou.weights[i][v] > 0;
    pou.max_support = std::max(pou.max_support, m);
  }
  return pou;
}

AdaptiveResult local_solve(const ProblemDefinition& problem, const Mesh& coarse, const SolutionField& u_coarse,
                           const Decomposition& dec, int part, int budget, AdaptiveOptions opt) {
  std::vector<char> in(coarse.num_slots(), 0);
  for (int s : dec.overlap[part]) in[s] = 1;
  opt.max_vertices = budget;
  opt.markable = [in = std::move(in)](int root) { return root >= 0 && root < static_cast<int>(in.size()) && in[root]; };
  AdaptiveResult res;
  try {
    res = run_adaptive_loop(coarse, problem, opt, &u_coarse);
  } catch (const std::exception& e) {
    throw Error("subdomain " + std::to_string(part) + ": " + e.what());
  }
  if (!res.ok) res.status = "subdomain " + std::to_string(part) + ": " + res.status;
  return res;
}

Mesh blend_mesh(const Mesh& coarse, const Decomposition& dec, const std::vector<const Mesh*>& local_meshes) {
  std::vector<std::set<SimplexKey>> bisected(local_meshes.size());
  for (std::size_t i = 0; i < local_meshes.size(); ++i) {
    const Mesh& m = *local_meshes[i];
    for (const auto& rec : m.lineage())
      if (rec.parent >= 0) bisected[i].insert(key_of(m, m.lineage(rec.parent).verts));
  }
  Mesh out = coarse;
  for (;;) {
    std::vector<int> marks;
    for (int s : out.live_simplices()) {
      const int own = dec.owner.at(out.simplex(s).root);
      if (bisected[own].count(key_of(out, out.simplex(s).verts))) marks.push_back(s);
    }
    if (marks.empty()) break;
    out.refine_marked(marks);
  }
  return out;
}

SolutionField blend(const Mesh& mesh, const PartitionOfUnity& pou, const std::vector<const Mesh*>& local_meshes,
                    const std::vector<const SolutionField*>& locals) {
  if (locals.size() != static_cast<std::size_t>(pou.parts) || local_meshes.size() != locals.size())
    throw Error("blend: one local field and mesh per subdomain required");
  const int nc = locals.empty() ? 1 : locals[0]->ncomp;
  const int nv = mesh.num_vertices();
  SolutionField out(nv, nc, 0.0);
  for (int i = 0; i < pou.parts; ++i) {
    const Mesh& lm = *local_meshes[i];
    const SolutionField& lu = *locals[i];
    const PointLocator loc(lm);
    for (int v = 0; v < nv; ++v) {
      const double w = pou.weights[i][v];
      if (w == 0.0) continue;
      const Location l = loc.locate(mesh.vertex(v).x);
      if (!l.found())
        throw Error("blend: vertex " + std::to_string(v) + " not found in the mesh of subdomain " + std::to_string(i));
      const auto& sx = lm.simplex(l.simplex);
      for (int c = 0; c < nc; ++c) {
        double val = 0.0;
        for (int k = 0; k <= lm.dim(); ++k) val += l.bary[k] * lu.at(sx.verts[k], c);
        out.at(v, c) += w * val;
      }
    }
  }
  return out;
}

PpumResult run_ppum_pipeline(Mesh coarse, const ProblemDefinition& problem, const PpumOptions& opt) {
  PpumResult res;
  coarse.reset_roots();
  res.u_coarse = initial_field(coarse, problem);
  NewtonConfig ncfg = opt.adaptive.newton;
  ncfg.level_vertex_counts.clear();
  const NewtonReport nrep = newton_solve(coarse, problem, res.u_coarse, ncfg);
  if (!nrep.converged) throw SolverError("ppum: coarse solve failed: " + nrep.message);
  const IndicatorField eta = residual_indicator(coarse, problem, res.u_coarse, opt.adaptive.p, ncfg.assembly);
  res.decomposition = decompose(coarse, eta, opt.parts, opt.overlap_layers);
  res.coarse = coarse;

  const int P = opt.parts;
  res.locals.resize(P);
  res.local_seconds.assign(P, 0.0);
  std::vector<std::string> errors(P);
  AdaptiveOptions aopt = opt.adaptive;
  if (opt.exec == Execution::parallel) aopt.newton.assembly.exec = Execution::serial;
  const bool par = opt.exec == Execution::parallel;
#pragma omp parallel for schedule(dynamic, 1) if (par)
  for (int i = 0; i < P; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ProblemDefinition own = problem;  // private clamp counter
      own.clamp_events = std::make_shared<std::atomic<long>>(0);
      res.locals[i] = local_solve(own, res.coarse, res.u_coarse, res.decomposition, i, opt.local_budget, aopt);
      if (!res.locals[i].ok) errors[i] = res.locals[i].status;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
    res.local_seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  for (int i = 0; i < P; ++i)
    if (!errors[i].empty()) {
      res.ok = false;
      res.status += (res.status.empty() ? "" : "; ") + errors[i];
    }
  if (!res.ok) return res;  // blend skipped

  std::vector<const Mesh*> meshes;
  std::vector<const SolutionField*> fields;
  for (const auto& l : res.locals) {
    meshes.push_back(&l.mesh);
    fields.push_back(&l.u);
  }
  res.mesh = blend_mesh(res.coarse, res.decomposition, meshes);
  res.pou = extend_partition_of_unity(res.mesh, coarse_partition_of_unity(res.coarse, res.decomposition));
  res.u = blend(res.mesh, res.pou, meshes, fields);
  res.status = "blended";
  return res;
}

}  // namespace afem
