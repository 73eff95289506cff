#include <afem/indicators.hpp>

#include <afem/kernels.hpp>
#include <afem/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <unordered_map>

namespace afem {

double IndicatorField::sum_p() const {
  double s = 0.0;
  for (double e : eta) s += std::pow(e, p);
  return s;
}

double IndicatorField::total() const { return std::pow(sum_p(), 1.0 / p); }

namespace {

struct FaceGeom {
  std::array<int, 4> local{};  // local vertex positions on the face
  std::array<Vec3, 4> pts{};
  double measure = 0.0;
  double h = 0.0;
};

FaceGeom face_geom(const Mesh& mesh, int s, int f) {
  const int d = mesh.dim();
  FaceGeom g;
  int n = 0;
  for (int i = 0; i <= d; ++i)
    if (i != f) {
      g.local[n] = i;
      g.pts[n++] = mesh.point(s, i);
    }
  g.measure = face_measure(std::span<const Vec3>(g.pts.data(), d), d);
  g.h = face_inscribed_diameter(std::span<const Vec3>(g.pts.data(), d), d);
  return g;
}

// Barycentrics inside s of face quadrature point q.
std::array<double, 4> face_bary(const FaceGeom& g, const QuadPoint& q, int d) {
  std::array<double, 4> lam{};
  for (int k = 0; k < d; ++k) lam[g.local[k]] = q.bary[k];
  return lam;
}

// The same physical point expressed in the barycentrics of neighbor n.
std::array<double, 4> transfer_bary(const Mesh& mesh, int s, int n, const std::array<double, 4>& lam) {
  std::array<double, 4> out{};
  const int d = mesh.dim();
  for (int i = 0; i <= d; ++i) {
    if (lam[i] == 0.0) continue;
    const int v = mesh.simplex(s).verts[i];
    for (int j = 0; j <= d; ++j)
      if (mesh.simplex(n).verts[j] == v) out[j] = lam[i];
  }
  return out;
}

Vec3 point_at(const Mesh& mesh, int s, const std::array<double, 4>& lam) {
  Vec3 x{0, 0, 0};
  for (int i = 0; i <= mesh.dim(); ++i)
    for (int a = 0; a < 3; ++a) x[a] += lam[i] * mesh.point(s, i)[a];
  return x;
}

double comp_norm(const Components& c, int nc) {
  double s = 0.0;
  for (int k = 0; k < nc; ++k) s += c[k] * c[k];
  return std::sqrt(s);
}

double comp_dot(const Components& a, const Components& b, int nc) {
  double s = 0.0;
  for (int k = 0; k < nc; ++k) s += a[k] * b[k];
  return s;
}

void require_sft(const ProblemDefinition& pb) {
  if (!pb.SFt)
    throw AssemblyError("problem '" + pb.name +
                        "' has no strong-form callback SFt (t=0 interior residual B - div A, t=1 Neumann residual "
                        "C + A.n, t=2 normal flux A.n)");
}

struct Evaluator {
  const Mesh& mesh;
  const ProblemDefinition& pb;
  std::vector<CoeffValue> coeff;

  Evaluator(const Mesh& m, const ProblemDefinition& p) : mesh(m), pb(p), coeff(p.coefficients->size()) {}

  Components strong(int t, int s, const std::array<double, 4>& lam, const Vec3& normal, const SolutionField& u) {
    PointContext ctx;
    ctx.x = point_at(mesh, s, lam);
    ctx.normal = normal;
    ctx.simplex = s;
    ctx.dim = mesh.dim();
    ctx.clamps = pb.clamp_events.get();
    pb.coefficients->evaluate(ctx.x, coeff);
    ctx.coeff = coeff;
    const Components r = pb.SFt(t, ctx, evaluate(mesh, u, s, lam));
    for (int c = 0; c < pb.n_unknowns; ++c)
      if (!std::isfinite(r[c]))
        throw AssemblyError("strong form returned a non-finite value in simplex " + std::to_string(s));
    return r;
  }
};

template <class Body>
void parallel_over(const std::vector<int>& items, Execution ex, Body&& body) {
  std::vector<std::exception_ptr> errors(items.size());
  if (ex == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(items.size()); ++k) {
      try {
        body(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  } else {
    for (std::size_t k = 0; k < items.size(); ++k) {
      try {
        body(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

IndicatorField residual_indicator(const Mesh& mesh, const ProblemDefinition& pb, const SolutionField& u, double p,
                                  const AssemblyOptions& opt) {
  require_sft(pb);
  if (!(p >= 1.0)) throw AssemblyError("indicator exponent p must be >= 1");
  const int d = mesh.dim(), nc = pb.n_unknowns;
  IndicatorField field;
  field.p = p;
  field.eta.assign(mesh.num_slots(), 0.0);
  field.marked.assign(mesh.num_slots(), 0);
  const auto live = mesh.live_simplices();
  field.simplex_count = static_cast<int>(live.size());
  const auto& rule = simplex_rule(d, opt.quad_degree);
  const auto& frule = face_rule(d);

  parallel_over(live, opt.exec, [&](std::ptrdiff_t k) {
    const int s = live[k];
    Evaluator ev(mesh, pb);
    std::array<Vec3, 4> pts{};
    for (int i = 0; i <= d; ++i) pts[i] = mesh.point(s, i);
    const double hs = inscribed_diameter(std::span<const Vec3>(pts.data(), d + 1), d);
    const double scale = mesh.volume(s) / reference_volume(d);
    double vol_term = 0.0;
    for (const auto& q : rule)
      vol_term += q.weight * scale * std::pow(comp_norm(ev.strong(0, s, q.bary, {0, 0, 0}, u), nc), p);
    double total = std::pow(hs, p) * vol_term;

    const auto& sx = mesh.simplex(s);
    for (int f = 0; f <= d; ++f) {
      const FaceGeom g = face_geom(mesh, s, f);
      const double fscale = g.measure / reference_face_measure(d);
      const Vec3 nrm = outward_normal(mesh, s, f);
      double face_term = 0.0;
      if (sx.face[f] == BoundaryClass::interior) {
        const int n = mesh.neighbor(s, f);
        if (n < 0) continue;
        // Normal from the lower simplex id to the higher; jump = lower - higher.
        const int lo = std::min(s, n), hi = std::max(s, n);
        const Vec3 n_lo = lo == s ? nrm : Vec3{-nrm[0], -nrm[1], -nrm[2]};
        for (const auto& q : frule) {
          const auto lam_s = face_bary(g, q, d);
          const auto lam_n = transfer_bary(mesh, s, n, lam_s);
          const auto& lam_lo = lo == s ? lam_s : lam_n;
          const auto& lam_hi = lo == s ? lam_n : lam_s;
          const Components a = ev.strong(2, lo, lam_lo, n_lo, u);
          const Components b = ev.strong(2, hi, lam_hi, n_lo, u);
          Components jump{};
          for (int c = 0; c < nc; ++c) jump[c] = a[c] - b[c];
          face_term += q.weight * fscale * std::pow(comp_norm(jump, nc), p);
        }
        total += 0.5 * g.h * face_term;
      } else if (sx.face[f] == BoundaryClass::neumann) {
        for (const auto& q : frule)
          face_term += q.weight * fscale * std::pow(comp_norm(ev.strong(1, s, face_bary(g, q, d), nrm, u), nc), p);
        total += g.h * face_term;
      }
    }
    field.eta[s] = std::pow(total, 1.0 / p);
  });
  return field;
}

DualWeights solve_dual(const Mesh& mesh, const ProblemDefinition& pb, const SolutionField& u,
                       const VectorFunction& psi, const DualOptions& opt) {
  if (!pb.DFt) throw AssemblyError("problem '" + pb.name + "' has no linearization DFt");
  DualWeights w;
  w.enrichment = opt.enrichment;
  w.psi = psi;
  w.mesh = mesh;
  w.mesh.reset_roots();
  SolutionField uf = u;
  std::vector<int> counts = opt.level_vertex_counts;
  if (counts.empty() || counts.back() != mesh.num_vertices()) counts.push_back(mesh.num_vertices());
  if (opt.enrichment == DualEnrichment::refined) {
    refine_uniform(w.mesh);
    prolongate(w.mesh, uf);
    counts.push_back(w.mesh.num_vertices());
  }
  const int nc = pb.n_unknowns;
  const SparseMatrix At = assemble_jacobian(w.mesh, pb, uf, opt.assembly).transpose();
  const auto rhs = assemble_load(w.mesh, nc, psi, true, opt.assembly);
  std::vector<SparseMatrix> prolongations;
  if (counts.size() > 1) prolongations = nested_prolongations(w.mesh, counts, nc);
  try {
    const MultilevelHierarchy h = build_hierarchy(At, prolongations, opt.multilevel);
    const auto res = solve(h, rhs, opt.tol, pb.symmetric);
    w.phi.ncomp = nc;
    w.phi.values = res.x;
    w.linear_iterations = res.iterations;
  } catch (const SolverError& e) {
    throw SolverError(std::string("dual problem could not be solved (functional not estimable): ") + e.what());
  }
  return w;
}

namespace {

DualEstimate dual_refined(const Mesh& mesh, const ProblemDefinition& pb, const SolutionField& u,
                          const DualWeights& dw, const AssemblyOptions& opt) {
  const Mesh& fine = dw.mesh;
  const int d = mesh.dim(), nc = pb.n_unknowns;
  SolutionField uf = u;
  prolongate(fine, uf);
  // z = phi - P_h phi, with P_h nodal interpolation onto the primal space.
  SolutionField pphi(mesh.num_vertices(), nc);
  for (int v = 0; v < mesh.num_vertices(); ++v)
    for (int c = 0; c < nc; ++c) pphi.at(v, c) = dw.phi.at(v, c);
  prolongate(fine, pphi);
  SolutionField z = dw.phi;
  for (std::size_t i = 0; i < z.values.size(); ++i) z.values[i] -= pphi.values[i];

  const auto live = fine.live_simplices();
  std::vector<double> contrib(live.size(), 0.0);
  const auto& rule = simplex_rule(d, std::max(opt.quad_degree, 2));
  const auto& frule = face_rule(d);
  parallel_over(live, opt.exec, [&](std::ptrdiff_t k) {
    const int e = live[k];
    Evaluator ev(fine, pb);
    const double scale = fine.volume(e) / reference_volume(d);
    double c_e = 0.0;
    for (const auto& q : rule)
      c_e += q.weight * scale * comp_dot(ev.strong(0, e, q.bary, {0, 0, 0}, uf), evaluate(fine, z, e, q.bary).val, nc);
    const auto& sx = fine.simplex(e);
    for (int f = 0; f <= d; ++f) {
      const FaceGeom g = face_geom(fine, e, f);
      const double fscale = g.measure / reference_face_measure(d);
      const Vec3 nrm = outward_normal(fine, e, f);
      if (sx.face[f] == BoundaryClass::interior) {
        const int n = fine.neighbor(e, f);
        if (n < 0 || fine.simplex(n).root == sx.root) continue;
        for (const auto& q : frule) {
          const auto lam_e = face_bary(g, q, d);
          const auto lam_n = transfer_bary(fine, e, n, lam_e);
          const Components a = ev.strong(2, e, lam_e, nrm, uf);
          const Components b = ev.strong(2, n, lam_n, nrm, uf);
          Components jump{};
          for (int c = 0; c < nc; ++c) jump[c] = a[c] - b[c];
          c_e += 0.5 * q.weight * fscale * comp_dot(jump, evaluate(fine, z, e, lam_e).val, nc);
        }
      } else if (sx.face[f] == BoundaryClass::neumann) {
        for (const auto& q : frule) {
          const auto lam = face_bary(g, q, d);
          c_e += q.weight * fscale * comp_dot(ev.strong(1, e, lam, nrm, uf), evaluate(fine, z, e, lam).val, nc);
        }
      }
    }
    contrib[k] = c_e;
  });

  DualEstimate out;
  out.field.p = 1.0;
  out.field.eta.assign(mesh.num_slots(), 0.0);
  out.field.marked.assign(mesh.num_slots(), 0);
  out.field.simplex_count = mesh.num_simplices();
  std::vector<double> signed_sum(mesh.num_slots(), 0.0);
  for (std::size_t k = 0; k < live.size(); ++k) signed_sum[fine.simplex(live[k]).root] -= contrib[k];
  for (int s : mesh.live_simplices()) {
    out.estimate += signed_sum[s];
    out.field.eta[s] = std::abs(signed_sum[s]);
  }
  return out;
}

DualEstimate dual_recovery(const Mesh& mesh, const ProblemDefinition& pb, const SolutionField& u,
                           const DualWeights& dw, const AssemblyOptions& opt) {
  const int d = mesh.dim(), nc = pb.n_unknowns;
  const auto live = mesh.live_simplices();
  // Volume-weighted recovered gradients of phi at vertices.
  std::vector<std::array<Vec3, kMaxComponents>> G(mesh.num_vertices());
  std::vector<double> wsum(mesh.num_vertices(), 0.0);
  for (int s : live) {
    const double vol = mesh.volume(s);
    const FieldValue fv = evaluate(mesh, dw.phi, s, {0.25, 0.25, 0.25, 0.25});
    for (int i = 0; i <= d; ++i) {
      const int v = mesh.simplex(s).verts[i];
      wsum[v] += vol;
      for (int c = 0; c < nc; ++c)
        for (int a = 0; a < 3; ++a) G[v][c][a] += vol * fv.grad[c][a];
    }
  }
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (wsum[v] > 0)
      for (int c = 0; c < nc; ++c)
        for (int a = 0; a < 3; ++a) G[v][c][a] /= wsum[v];

  // Edge bubble coefficients of the quadratic correction, zero on Dirichlet edges.
  auto bubble = [&](int a, int b) {
    Components beta{};
    if (mesh.vertex(a).bclass == BoundaryClass::dirichlet && mesh.vertex(b).bclass == BoundaryClass::dirichlet)
      return beta;
    const Vec3 t = sub3(mesh.vertex(b).x, mesh.vertex(a).x);
    for (int c = 0; c < nc; ++c) beta[c] = dot3(sub3(G[a][c], G[b][c]), t) / 8.0;
    return beta;
  };
  auto zval = [&](int s, const std::array<double, 4>& lam) {
    Components z{};
    for (int e = 0; e < num_edges(d); ++e) {
      const auto le = local_edge(d, e);
      const auto beta = bubble(mesh.simplex(s).verts[le[0]], mesh.simplex(s).verts[le[1]]);
      const double b = 4.0 * lam[le[0]] * lam[le[1]];
      for (int c = 0; c < nc; ++c) z[c] += beta[c] * b;
    }
    return z;
  };

  const auto& rule = simplex_rule(d, 5);
  const auto& frule = face_rule(d);
  std::vector<double> contrib(live.size(), 0.0);
  parallel_over(live, opt.exec, [&](std::ptrdiff_t k) {
    const int s = live[k];
    Evaluator ev(mesh, pb);
    const double scale = mesh.volume(s) / reference_volume(d);
    double c_s = 0.0;
    for (const auto& q : rule) c_s += q.weight * scale * comp_dot(ev.strong(0, s, q.bary, {0, 0, 0}, u), zval(s, q.bary), nc);
    const auto& sx = mesh.simplex(s);
    for (int f = 0; f <= d; ++f) {
      const FaceGeom g = face_geom(mesh, s, f);
      const double fscale = g.measure / reference_face_measure(d);
      const Vec3 nrm = outward_normal(mesh, s, f);
      for (const auto& q : frule) {
        const auto lam = face_bary(g, q, d);
        if (sx.face[f] == BoundaryClass::interior) {
          const int n = mesh.neighbor(s, f);
          if (n < 0) continue;
          const Components a = ev.strong(2, s, lam, nrm, u);
          const Components b = ev.strong(2, n, transfer_bary(mesh, s, n, lam), nrm, u);
          Components jump{};
          for (int c = 0; c < nc; ++c) jump[c] = a[c] - b[c];
          c_s += 0.5 * q.weight * fscale * comp_dot(jump, zval(s, lam), nc);
        } else if (sx.face[f] == BoundaryClass::neumann) {
          c_s += q.weight * fscale * comp_dot(ev.strong(1, s, lam, nrm, u), zval(s, lam), nc);
        }
      }
    }
    contrib[k] = -c_s;
  });
  DualEstimate out;
  out.field.p = 1.0;
  out.field.eta.assign(mesh.num_slots(), 0.0);
  out.field.marked.assign(mesh.num_slots(), 0);
  out.field.simplex_count = static_cast<int>(live.size());
  for (std::size_t k = 0; k < live.size(); ++k) {
    out.estimate += contrib[k];
    out.field.eta[live[k]] = std::abs(contrib[k]);
  }
  return out;
}

}  // namespace

DualEstimate dual_indicator(const Mesh& mesh, const ProblemDefinition& pb, const SolutionField& u,
                            const DualWeights& w, const AssemblyOptions& opt) {
  require_sft(pb);
  if (w.enrichment == DualEnrichment::refined) {
    if (w.mesh.num_vertices() <= mesh.num_vertices())
      throw AssemblyError("dual_indicator: dual weights must live on a refinement of the primal mesh");
    return dual_refined(mesh, pb, u, w, opt);
  }
  return dual_recovery(mesh, pb, u, w, opt);
}

std::vector<int> mark(IndicatorField& field, MarkStrategy strategy, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("marking theta must lie in (0, 1]");
  field.marked.assign(field.eta.size(), 0);
  std::vector<int> ids;
  for (int s = 0; s < static_cast<int>(field.eta.size()); ++s)
    if (field.eta[s] > 0.0) ids.push_back(s);
  std::vector<int> out;
  if (ids.empty()) return out;
  const double n_live = field.simplex_count > 0 ? field.simplex_count : static_cast<double>(field.eta.size());
  const double sum = field.sum_p();
  double max_eta = 0.0;
  for (double e : field.eta) max_eta = std::max(max_eta, e);

  auto equi = [&](double th) {
    // Relative slack so a uniform field does not mark on summation roundoff.
    const double thresh = std::pow(th, field.p) * sum / n_live * (1.0 + 1e-12);
    for (int s : ids)
      if (std::pow(field.eta[s], field.p) > thresh) field.marked[s] = 1;
  };
  if (strategy == MarkStrategy::equidistribution) {
    equi(theta);
  } else if (strategy == MarkStrategy::maximum) {
    for (int s : ids)
      if (field.eta[s] >= theta * max_eta) field.marked[s] = 1;
  } else {
    equi(theta);
    double carried = 0.0;
    for (int s : ids)
      if (field.marked[s]) carried += std::pow(field.eta[s], field.p);
    std::vector<int> order(ids);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return field.eta[a] > field.eta[b]; });
    for (int s : order) {
      if (carried >= 0.5 * sum) break;
      if (field.marked[s]) continue;
      field.marked[s] = 1;
      carried += std::pow(field.eta[s], field.p);
    }
  }
  for (int s = 0; s < static_cast<int>(field.marked.size()); ++s)
    if (field.marked[s]) out.push_back(s);
  return out;
}

}  // namespace afem
