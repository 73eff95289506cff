#include <afem/multilevel.hpp>

#include <afem/kernels.hpp>
#include <afem/solution.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace afem {

SparseMatrix prolongation_from_vertices(const Mesh& fine, int nc) {
  const int nf = fine.num_vertices();
  if (nc > nf) throw SolverError("prolongation: coarse mesh has more vertices than the fine mesh");
  std::vector<std::map<int, double>> rows(nf);
  for (int v = 0; v < nf; ++v) {
    if (v < nc) {
      rows[v][v] = 1.0;
      continue;
    }
    const auto& par = fine.vertex(v).parents;
    if (par[0] < 0 || par[1] < 0 || par[0] >= v || par[1] >= v)
      throw SolverError("prolongation: broken genealogy at vertex " + std::to_string(v));
    for (int p : par)
      for (const auto& [c, w] : rows[p]) rows[v][c] += 0.5 * w;
  }
  std::vector<Triplet> t;
  for (int v = 0; v < nf; ++v)
    for (const auto& [c, w] : rows[v]) t.push_back({v, c, w});
  return SparseMatrix::from_triplets(nf, nc, std::move(t));
}

SparseMatrix prolongation_from_refinement(const Mesh& coarse, const Mesh& fine) {
  if (coarse.dim() != fine.dim()) throw SolverError("prolongation: dimension mismatch");
  if (coarse.num_vertices() > fine.num_vertices())
    throw SolverError("prolongation: fine mesh is not a refinement of the coarse mesh");
  for (int v = 0; v < coarse.num_vertices(); ++v)
    if (coarse.vertex(v).x != fine.vertex(v).x)
      throw SolverError("prolongation: broken genealogy (coarse vertex " + std::to_string(v) + " moved or renumbered)");
  return prolongation_from_vertices(fine, coarse.num_vertices());
}

SparseMatrix expand_components(const SparseMatrix& P, int nc) {
  if (nc == 1) return P;
  std::vector<Triplet> t;
  for (int i = 0; i < P.rows; ++i)
    for (int k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k)
      for (int c = 0; c < nc; ++c) t.push_back({i * nc + c, P.col[k] * nc + c, P.val[k]});
  return SparseMatrix::from_triplets(P.rows * nc, P.cols * nc, std::move(t));
}

SparseMatrix constrain_prolongation(const SparseMatrix& P, const std::vector<char>& fine_d,
                                    const std::vector<char>& coarse_d) {
  std::vector<Triplet> t;
  for (int i = 0; i < P.rows; ++i) {
    if (fine_d[i]) {
      if (i < P.cols && coarse_d[i]) t.push_back({i, i, 1.0});
      continue;
    }
    for (int k = P.row_ptr[i]; k < P.row_ptr[i + 1]; ++k)
      if (!coarse_d[P.col[k]]) t.push_back({i, P.col[k], P.val[k]});
  }
  return SparseMatrix::from_triplets(P.rows, P.cols, std::move(t));
}

std::vector<SparseMatrix> nested_prolongations(const Mesh& fine, const std::vector<int>& counts, int ncomp) {
  std::vector<SparseMatrix> out;
  if (counts.empty()) return out;
  if (counts.back() != fine.num_vertices()) throw SolverError("nested_prolongations: last count must be the fine mesh");
  const auto mask = dirichlet_mask(fine, ncomp);
  for (int k = static_cast<int>(counts.size()) - 1; k > 0; --k) {
    const int nf = counts[k], nc = counts[k - 1];
    if (nc >= nf) throw SolverError("nested_prolongations: vertex counts must increase");
    // Row v of the fine-mesh prolongation only depends on vertices <= v, so
    // restricting to the first nf rows gives the level-k operator.
    SparseMatrix full = prolongation_from_vertices(fine, nc);
    std::vector<Triplet> t;
    for (int i = 0; i < nf; ++i)
      for (int q = full.row_ptr[i]; q < full.row_ptr[i + 1]; ++q) t.push_back({i, full.col[q], full.val[q]});
    SparseMatrix P = expand_components(SparseMatrix::from_triplets(nf, nc, std::move(t)), ncomp);
    std::vector<char> fd(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(nf) * ncomp);
    std::vector<char> cd(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(nc) * ncomp);
    out.push_back(constrain_prolongation(P, fd, cd));
  }
  return out;
}

std::vector<int> merge_levels(const std::vector<int>& counts, double min_ratio) {
  if (counts.size() <= 2) return counts;
  std::vector<int> kept{counts.back()};
  for (int k = static_cast<int>(counts.size()) - 2; k >= 1; --k)
    if (static_cast<double>(kept.back()) / counts[k] >= min_ratio) kept.push_back(counts[k]);
  if (kept.back() != counts.front()) kept.push_back(counts.front());
  std::reverse(kept.begin(), kept.end());
  return kept;
}

void smoother_sweep(const SparseMatrix& A, std::vector<double>& x, const std::vector<double>& b, SweepDirection dir,
                    const std::vector<char>* active) {
  const int n = A.rows;
  auto relax = [&](int i) {
    if (active && !(*active)[i]) return;
    double diag = 0.0, s = b[i];
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      if (A.col[k] == i) diag = A.val[k];
      else s -= A.val[k] * x[A.col[k]];
    }
    if (diag == 0.0) throw SolverError("Gauss-Seidel: zero diagonal in row " + std::to_string(i));
    x[i] = s / diag;
  };
  if (dir == SweepDirection::forward)
    for (int i = 0; i < n; ++i) relax(i);
  else
    for (int i = n - 1; i >= 0; --i) relax(i);
}

MultilevelHierarchy build_hierarchy(const SparseMatrix& A, const std::vector<SparseMatrix>& prolongations,
                                    const MultilevelOptions& opt) {
  MultilevelHierarchy h;
  h.opt_ = opt;
  if (A.rows != A.cols) throw SolverError("build_hierarchy: matrix must be square");
  h.A_.push_back(A);
  for (std::size_t k = 0; k < prolongations.size(); ++k) {
    const auto& P = prolongations[k];
    if (P.rows != h.A_.back().rows)
      throw SolverError("build_hierarchy: prolongation " + std::to_string(k) + " has " + std::to_string(P.rows) +
                        " rows, level matrix has " + std::to_string(h.A_.back().rows));
    h.P_.push_back(P);
    h.A_.push_back(galerkin_product(P, h.A_.back()));
  }
  for (std::size_t k = 0; k + 1 < h.A_.size(); ++k) {
    std::vector<char> act(h.A_[k].rows, 1);
    if (opt.hierarchical_basis) {
      // Dofs carried over by injection from the coarser level are left to it.
      const auto& P = h.P_[k];
      for (int i = 0; i < P.rows; ++i)
        if (P.row_ptr[i + 1] - P.row_ptr[i] == 1 && P.val[P.row_ptr[i]] == 1.0) act[i] = 0;
    }
    h.active_.push_back(std::move(act));
  }
  const SparseMatrix& Ac = h.A_.back();
  if (Ac.rows <= opt.dense_limit)
    h.coarse_ = DenseLU(DenseMatrix::from_sparse(Ac));
  else
    h.coarse_ = SkylineLU(Ac);
  return h;
}

std::vector<double> MultilevelHierarchy::coarse_solve(const std::vector<double>& b) const {
  if (const auto* lu = std::get_if<DenseLU>(&coarse_)) return lu->solve(b);
  if (const auto* sl = std::get_if<SkylineLU>(&coarse_)) return sl->solve(b);
  throw SolverError("multilevel hierarchy is empty");
}

std::vector<double> MultilevelHierarchy::cycle(int k, const std::vector<double>& b) const {
  if (k == levels() - 1) return coarse_solve(b);
  const SparseMatrix& A = A_[k];
  const SparseMatrix& P = P_[k];
  const std::vector<char>* act = opt_.hierarchical_basis ? &active_[k] : nullptr;
  std::vector<double> x(A.rows, 0.0), r(A.rows), rc(P.cols), corr(A.rows);
  for (int s = 0; s < opt_.pre_sweeps; ++s) smoother_sweep(A, x, b, SweepDirection::forward, act);
  residual(A, x, b, r, opt_.exec);
  // rc = P^T r, accumulated row by row for a fixed summation order.
  std::fill(rc.begin(), rc.end(), 0.0);
  for (int i = 0; i < P.rows; ++i)
    for (int q = P.row_ptr[i]; q < P.row_ptr[i + 1]; ++q) rc[P.col[q]] += P.val[q] * r[i];
  const auto ec = cycle(k + 1, rc);
  spmv(P, ec, corr, opt_.exec);
  for (int i = 0; i < A.rows; ++i) x[i] += corr[i];
  for (int s = 0; s < opt_.post_sweeps; ++s) smoother_sweep(A, x, b, SweepDirection::backward, act);
  return x;
}

namespace {

LinearSolveResult pcg(const MultilevelHierarchy& h, const std::vector<double>& b, double tol) {
  const SparseMatrix& A = h.matrix(0);
  const Execution ex = h.options().exec;
  const int n = A.rows;
  const double bnorm = norm2(b, ex);
  LinearSolveResult res;
  res.x.assign(n, 0.0);
  std::vector<double> r(b), z = h.vcycle(r), p(z), q(n);
  double rz = dot(r, z, ex);
  double rnorm = bnorm;
  LinearSolveResult best = res;
  best.relative_residual = 1.0;
  for (int it = 1; it <= h.options().max_iters; ++it) {
    spmv(A, p, q, ex);
    const double pq = dot(p, q, ex);
    if (!(pq > 0.0)) throw SolverError("conjugate gradients: matrix or preconditioner is not positive definite");
    const double alpha = rz / pq;
    axpy(alpha, p, res.x, ex);
    axpy(-alpha, q, r, ex);
    rnorm = norm2(r, ex);
    res.iterations = it;
    res.relative_residual = rnorm / bnorm;
    if (res.relative_residual < best.relative_residual) best = res;
    if (res.relative_residual <= tol) return res;
    z = h.vcycle(r);
    const double rz_new = dot(r, z, ex);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw LinearSolveError("conjugate gradients: no convergence in " + std::to_string(h.options().max_iters) +
                             " iterations (relative residual " + std::to_string(best.relative_residual) + ")",
                         best);
}

LinearSolveResult tfqmr(const MultilevelHierarchy& h, const std::vector<double>& b, double tol) {
  const SparseMatrix& A = h.matrix(0);
  const Execution ex = h.options().exec;
  const int n = A.rows;
  const double bnorm = norm2(b, ex);
  LinearSolveResult res;
  res.x.assign(n, 0.0);
  LinearSolveResult best = res;
  best.relative_residual = 1.0;
  auto apply = [&](const std::vector<double>& y, std::vector<double>& yhat, std::vector<double>& out) {
    yhat = h.vcycle(y);
    spmv(A, yhat, out, ex);
  };
  const std::vector<double> r0(b);
  std::vector<double> w(b), y1(b), y2(n), yh1, yh2, u1(n), u2(n), v(n), d(n, 0.0), tmp(n);
  apply(y1, yh1, u1);
  v = u1;
  double theta = 0.0, eta = 0.0, tau = bnorm, rho = bnorm * bnorm;
  for (int k = 1; k <= h.options().max_iters; ++k) {
    const double sigma = dot(r0, v, ex);
    if (sigma == 0.0) break;
    const double alpha = rho / sigma;
    for (int j = 1; j <= 2; ++j) {
      if (j == 2) {
        for (int i = 0; i < n; ++i) y2[i] = y1[i] - alpha * v[i];
        apply(y2, yh2, u2);
      }
      const int m = 2 * k - 2 + j;
      const auto& uj = j == 1 ? u1 : u2;
      const auto& yhj = j == 1 ? yh1 : yh2;
      axpy(-alpha, uj, w, ex);
      const double coef = theta * theta * eta / alpha;
      for (int i = 0; i < n; ++i) d[i] = yhj[i] + coef * d[i];
      theta = norm2(w, ex) / tau;
      const double c = 1.0 / std::sqrt(1.0 + theta * theta);
      tau = tau * theta * c;
      eta = c * c * alpha;
      axpy(eta, d, res.x, ex);
      if (tau * std::sqrt(m + 1.0) <= tol * bnorm) {
        residual(A, res.x, b, tmp, ex);
        res.iterations = k;
        res.relative_residual = norm2(tmp, ex) / bnorm;
        if (res.relative_residual < best.relative_residual) best = res;
        if (res.relative_residual <= tol) return res;
      }
    }
    const double rho_new = dot(r0, w, ex);
    if (rho == 0.0) break;
    const double beta = rho_new / rho;
    rho = rho_new;
    for (int i = 0; i < n; ++i) y1[i] = w[i] + beta * y2[i];
    apply(y1, yh1, u1);
    for (int i = 0; i < n; ++i) v[i] = u1[i] + beta * (u2[i] + beta * v[i]);
  }
  residual(A, res.x, b, tmp, ex);
  res.relative_residual = norm2(tmp, ex) / bnorm;
  if (res.relative_residual < best.relative_residual) best = res;
  throw LinearSolveError("TFQMR: no convergence (relative residual " + std::to_string(best.relative_residual) + ")",
                         best);
}

}  // namespace

LinearSolveResult solve(const MultilevelHierarchy& h, const std::vector<double>& b, double tol, bool symmetric,
                        KrylovMethod method) {
  if (h.levels() == 0) throw SolverError("solve: empty hierarchy");
  const SparseMatrix& A = h.matrix(0);
  if (static_cast<int>(b.size()) != A.rows) throw SolverError("solve: right-hand side size mismatch");
  LinearSolveResult res;
  const double bnorm = norm2(b, h.options().exec);
  if (bnorm == 0.0) {
    res.x.assign(A.rows, 0.0);
    return res;
  }
  if (h.levels() == 1) {
    res.x = h.coarse_solve(b);
    std::vector<double> r(A.rows);
    residual(A, res.x, b, r, h.options().exec);
    res.relative_residual = norm2(r, h.options().exec) / bnorm;
    return res;
  }
  const bool use_cg = method == KrylovMethod::cg || (method == KrylovMethod::automatic && symmetric);
  return use_cg ? pcg(h, b, tol) : tfqmr(h, b, tol);
}

}  // namespace afem
