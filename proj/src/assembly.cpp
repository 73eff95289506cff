#include <afem/assembly.hpp>

#include <afem/kernels.hpp>
#include <afem/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

namespace afem {

namespace {

constexpr std::size_t kBlock = 512;

struct ElementBuffers {
  std::vector<double> r, K;
  std::vector<CoeffValue> coeff;
};

FieldValue basis_value(int comp, double lam, const Vec3& grad) {
  FieldValue f;
  f.val[comp] = lam;
  f.grad[comp] = grad;
  return f;
}

void check_finite(double v, int s, int q, const char* what) {
  if (!std::isfinite(v))
    throw AssemblyError(std::string(what) + " returned a non-finite value in simplex " + std::to_string(s) +
                        " at quadrature point " + std::to_string(q));
}

// Volume and Neumann-face contributions of simplex s, in local (vertex, component) order.
void element_contrib(const Mesh& mesh, const ProblemDefinition& pb, const SolutionField& u, int s,
                     const std::vector<QuadPoint>& rule, bool want_r, bool want_K, ElementBuffers& buf) {
  const int d = mesh.dim(), nc = pb.n_unknowns, nloc = (d + 1) * nc;
  const auto& sx = mesh.simplex(s);
  buf.r.assign(want_r ? nloc : 0, 0.0);
  buf.K.assign(want_K ? static_cast<std::size_t>(nloc) * nloc : 0, 0.0);
  buf.coeff.resize(pb.coefficients->size());
  const auto grads = barycentric_gradients(mesh, s);
  std::array<Vec3, 4> p{};
  for (int i = 0; i <= d; ++i) p[i] = mesh.point(s, i);

  PointContext ctx;
  ctx.simplex = s;
  ctx.dim = d;
  ctx.clamps = pb.clamp_events.get();

  auto integrate = [&](int t, const std::array<double, 4>& lam, const std::array<Vec3, 4>& glam, double w, int qid,
                       std::span<const int> active) {
    ctx.x = {0, 0, 0};
    for (int i = 0; i <= d; ++i)
      for (int a = 0; a < 3; ++a) ctx.x[a] += lam[i] * p[i][a];
    pb.coefficients->evaluate(ctx.x, buf.coeff);
    ctx.coeff = buf.coeff;
    FieldValue uv;
    for (int i = 0; i <= d; ++i)
      for (int c = 0; c < nc; ++c) {
        const double ui = u.at(sx.verts[i], c);
        uv.val[c] += lam[i] * ui;
        for (int a = 0; a < 3; ++a) uv.grad[c][a] += glam[i][a] * ui;
      }
    for (int i : active)
      for (int c = 0; c < nc; ++c) {
        const FieldValue v = basis_value(c, lam[i], glam[i]);
        const int row = i * nc + c;
        if (want_r) {
          const double val = pb.Ft(t, ctx, uv, v);
          check_finite(val, s, qid, "residual form");
          buf.r[row] += w * val;
        }
        if (want_K)
          for (int j : active)
            for (int e = 0; e < nc; ++e) {
              const FieldValue wf = basis_value(e, lam[j], glam[j]);
              const double val = pb.DFt(t, ctx, uv, wf, v);
              check_finite(val, s, qid, "jacobian form");
              buf.K[static_cast<std::size_t>(row) * nloc + j * nc + e] += w * val;
            }
      }
  };

  const double scale = mesh.volume(s) / reference_volume(d);
  std::array<int, 4> all{0, 1, 2, 3};
  for (std::size_t q = 0; q < rule.size(); ++q)
    integrate(0, rule[q].bary, grads, rule[q].weight * scale, static_cast<int>(q), std::span<const int>(all.data(), d + 1));

  for (int f = 0; f <= d; ++f) {
    if (sx.face[f] != BoundaryClass::neumann) continue;
    std::array<int, 4> fv{};
    std::array<Vec3, 4> fp{};
    int n = 0;
    for (int i = 0; i <= d; ++i)
      if (i != f) {
        fp[n] = p[i];
        fv[n++] = i;
      }
    const double fscale = face_measure(std::span<const Vec3>(fp.data(), d), d) / reference_face_measure(d);
    ctx.normal = outward_normal(mesh, s, f);
    const auto& frule = face_rule(d);
    for (std::size_t q = 0; q < frule.size(); ++q) {
      std::array<double, 4> lam{};
      for (int k = 0; k < d; ++k) lam[fv[k]] = frule[q].bary[k];
      integrate(1, lam, grads, frule[q].weight * fscale, static_cast<int>(rule.size() + q),
                std::span<const int>(fv.data(), d));
    }
    ctx.normal = {0, 0, 0};
  }
}

// Runs element_contrib over all live simplices in blocks: the block is
// computed (possibly in parallel) and then folded serially in element order.
template <class Scatter>
void element_loop(const Mesh& mesh, const ProblemDefinition& pb, const SolutionField& u, const AssemblyOptions& opt,
                  bool want_r, bool want_K, Scatter&& scatter) {
  if (!pb.Ft || (want_K && !pb.DFt)) throw AssemblyError("problem '" + pb.name + "' is missing Ft/DFt callbacks");
  if (u.num_vertices() != mesh.num_vertices() || u.ncomp != pb.n_unknowns)
    throw AssemblyError("solution field does not match mesh/problem dimensions");
  const auto live = mesh.live_simplices();
  const auto& rule = simplex_rule(mesh.dim(), opt.quad_degree);
  std::vector<ElementBuffers> bufs(std::min(kBlock, live.size()));
  for (std::size_t start = 0; start < live.size(); start += kBlock) {
    const std::size_t n = std::min(kBlock, live.size() - start);
    std::vector<std::exception_ptr> errors(n);
    if (opt.exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
      for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
        try {
          element_contrib(mesh, pb, u, live[start + k], rule, want_r, want_K, bufs[k]);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        try {
          element_contrib(mesh, pb, u, live[start + k], rule, want_r, want_K, bufs[k]);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    for (std::size_t k = 0; k < n; ++k) scatter(live[start + k], bufs[k]);
  }
}

void apply_dirichlet_rows(const std::vector<char>& mask, SparseMatrix& A) {
  for (int i = 0; i < A.rows; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      const int j = A.col[k];
      if (mask[i] || mask[j]) A.val[k] = (i == j) ? 1.0 : 0.0;
    }
}

}  // namespace

SparseMatrix sparsity_pattern(const Mesh& mesh, int nc) {
  const int nv = mesh.num_vertices(), d = mesh.dim();
  SparseMatrix A;
  A.rows = A.cols = nv * nc;
  A.row_ptr.assign(A.rows + 1, 0);
  std::vector<int> nbrs;
  for (int v = 0; v < nv; ++v) {
    nbrs.clear();
    nbrs.push_back(v);
    for (int s : mesh.vertex(v).ring)
      for (int i = 0; i <= d; ++i) nbrs.push_back(mesh.simplex(s).verts[i]);
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    for (int c = 0; c < nc; ++c) {
      for (int w : nbrs)
        for (int e = 0; e < nc; ++e) A.col.push_back(w * nc + e);
      A.row_ptr[v * nc + c + 1] = static_cast<int>(A.col.size());
    }
  }
  A.val.assign(A.col.size(), 0.0);
  return A;
}

LinearSystem assemble_system(const Mesh& mesh, const ProblemDefinition& pb, const SolutionField& u,
                             const AssemblyOptions& opt) {
  const int nc = pb.n_unknowns, d = mesh.dim(), nloc = (d + 1) * nc;
  LinearSystem sys;
  sys.A = sparsity_pattern(mesh, nc);
  sys.F.assign(static_cast<std::size_t>(mesh.num_vertices()) * nc, 0.0);
  element_loop(mesh, pb, u, opt, true, true, [&](int s, const ElementBuffers& b) {
    const auto& sx = mesh.simplex(s);
    for (int li = 0; li < nloc; ++li) {
      const int gi = sx.verts[li / nc] * nc + li % nc;
      sys.F[gi] += b.r[li];
      for (int lj = 0; lj < nloc; ++lj) {
        const int gj = sx.verts[lj / nc] * nc + lj % nc;
        sys.A.val[sys.A.find(gi, gj)] += b.K[static_cast<std::size_t>(li) * nloc + lj];
      }
    }
  });
  const auto mask = dirichlet_mask(mesh, nc);
  for (std::size_t i = 0; i < sys.F.size(); ++i)
    if (mask[i]) sys.F[i] = 0.0;
  apply_dirichlet_rows(mask, sys.A);
  return sys;
}

std::vector<double> assemble_residual(const Mesh& mesh, const ProblemDefinition& pb, const SolutionField& u,
                                      const AssemblyOptions& opt) {
  const int nc = pb.n_unknowns, d = mesh.dim(), nloc = (d + 1) * nc;
  std::vector<double> F(static_cast<std::size_t>(mesh.num_vertices()) * nc, 0.0);
  element_loop(mesh, pb, u, opt, true, false, [&](int s, const ElementBuffers& b) {
    const auto& sx = mesh.simplex(s);
    for (int li = 0; li < nloc; ++li) F[sx.verts[li / nc] * nc + li % nc] += b.r[li];
  });
  const auto mask = dirichlet_mask(mesh, nc);
  for (std::size_t i = 0; i < F.size(); ++i)
    if (mask[i]) F[i] = 0.0;
  return F;
}

SparseMatrix assemble_jacobian(const Mesh& mesh, const ProblemDefinition& pb, const SolutionField& u,
                               const AssemblyOptions& opt) {
  const int nc = pb.n_unknowns, d = mesh.dim(), nloc = (d + 1) * nc;
  SparseMatrix A = sparsity_pattern(mesh, nc);
  element_loop(mesh, pb, u, opt, false, true, [&](int s, const ElementBuffers& b) {
    const auto& sx = mesh.simplex(s);
    for (int li = 0; li < nloc; ++li) {
      const int gi = sx.verts[li / nc] * nc + li % nc;
      for (int lj = 0; lj < nloc; ++lj)
        A.val[A.find(gi, sx.verts[lj / nc] * nc + lj % nc)] += b.K[static_cast<std::size_t>(li) * nloc + lj];
    }
  });
  apply_dirichlet_rows(dirichlet_mask(mesh, nc), A);
  return A;
}

std::vector<double> assemble_load(const Mesh& mesh, int nc, const VectorFunction& psi, bool zero_dirichlet,
                                  const AssemblyOptions& opt) {
  const int d = mesh.dim();
  const auto& rule = simplex_rule(d, opt.quad_degree);
  std::vector<double> b(static_cast<std::size_t>(mesh.num_vertices()) * nc, 0.0);
  for (int s : mesh.live_simplices()) {
    const double scale = mesh.volume(s) / reference_volume(d);
    const auto& sx = mesh.simplex(s);
    for (const auto& q : rule) {
      Vec3 x{0, 0, 0};
      for (int i = 0; i <= d; ++i)
        for (int a = 0; a < 3; ++a) x[a] += q.bary[i] * mesh.point(s, i)[a];
      const Components val = psi(x);
      for (int i = 0; i <= d; ++i)
        for (int c = 0; c < nc; ++c) b[sx.verts[i] * nc + c] += q.weight * scale * q.bary[i] * val[c];
    }
  }
  if (zero_dirichlet) {
    const auto mask = dirichlet_mask(mesh, nc);
    for (std::size_t i = 0; i < b.size(); ++i)
      if (mask[i]) b[i] = 0.0;
  }
  return b;
}

double evaluate_functional(const Mesh& mesh, const SolutionField& u, const VectorFunction& psi,
                           const AssemblyOptions& opt) {
  const int d = mesh.dim();
  const auto& rule = simplex_rule(d, opt.quad_degree);
  double total = 0.0;
  for (int s : mesh.live_simplices()) {
    const double scale = mesh.volume(s) / reference_volume(d);
    double local = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Vec3 x{0, 0, 0};
      for (int i = 0; i <= d; ++i)
        for (int a = 0; a < 3; ++a) x[a] += rule[q].bary[i] * mesh.point(s, i)[a];
      const Components val = psi(x);
      const FieldValue uv = evaluate(mesh, u, s, rule[q].bary);
      double prod = 0.0;
      for (int c = 0; c < u.ncomp; ++c) prod += uv.val[c] * val[c];
      check_finite(prod, s, static_cast<int>(q), "functional");
      local += rule[q].weight * scale * prod;
    }
    total += local;
  }
  return total;
}

double residual_norm(const Mesh& mesh, int nc, const std::vector<double>& F) {
  const auto mask = dirichlet_mask(mesh, nc);
  std::vector<double> r(F);
  for (std::size_t i = 0; i < r.size(); ++i)
    if (mask[i]) r[i] = 0.0;
  return norm2(r, Execution::serial);
}

}  // namespace afem
