#include <afem/dense.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace afem {

DenseMatrix DenseMatrix::from_sparse(const SparseMatrix& A) {
  if (A.rows != A.cols) throw SolverError("dense: matrix must be square");
  DenseMatrix D(A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) D(i, A.col[k]) += A.val[k];
  return D;
}

DenseLU::DenseLU(DenseMatrix A) : lu_(std::move(A)), piv_(lu_.n) {
  const int n = lu_.n;
  double scale = 0.0;
  for (double v : lu_.a) scale = std::max(scale, std::abs(v));
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
    if (!(std::abs(lu_(p, k)) > 1e-14 * scale))
      throw SolverError("dense LU: singular matrix (zero pivot in column " + std::to_string(k) + ")");
    piv_[k] = p;
    if (p != k)
      for (int j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
    const double inv = 1.0 / lu_(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double m = lu_(i, k) * inv;
      lu_(i, k) = m;
      if (m == 0.0) continue;
      for (int j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
    }
  }
}

std::vector<double> DenseLU::solve(const std::vector<double>& b) const {
  const int n = lu_.n;
  std::vector<double> x(b);
  for (int k = 0; k < n; ++k) {
    std::swap(x[k], x[piv_[k]]);
    for (int i = k + 1; i < n; ++i) x[i] -= lu_(i, k) * x[k];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
    x[i] = s / lu_(i, i);
  }
  return x;
}

bool cholesky(DenseMatrix A, DenseMatrix* L) {
  const int n = A.n;
  for (int j = 0; j < n; ++j) {
    double d = A(j, j);
    for (int k = 0; k < j; ++k) d -= A(j, k) * A(j, k);
    if (!(d > 0.0)) return false;
    A(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = A(i, j);
      for (int k = 0; k < j; ++k) s -= A(i, k) * A(j, k);
      A(i, j) = s / A(j, j);
    }
  }
  if (L) {
    *L = DenseMatrix(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) (*L)(i, j) = A(i, j);
  }
  return true;
}

namespace {

/// Reverse Cuthill-McKee on the symmetrized pattern. Returns new -> old.
std::vector<int> rcm_order(const SparseMatrix& A) {
  const int n = A.rows;
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      const int j = A.col[k];
      if (j == i) continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  auto deg = [&](int v) { return adj[v].size(); };
  for (auto& a : adj) std::stable_sort(a.begin(), a.end(), [&](int x, int y) { return deg(x) < deg(y); });

  std::vector<int> by_degree(n);
  for (int i = 0; i < n; ++i) by_degree[i] = i;
  std::stable_sort(by_degree.begin(), by_degree.end(), [&](int x, int y) { return deg(x) < deg(y); });

  std::vector<int> order;
  order.reserve(n);
  std::vector<char> seen(n, 0);
  std::deque<int> q;
  for (int start : by_degree) {
    if (seen[start]) continue;
    seen[start] = 1;
    q.push_back(start);
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      order.push_back(v);
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          q.push_back(w);
        }
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace

SkylineLU::SkylineLU(const SparseMatrix& A) : n_(A.rows) {
  if (A.rows != A.cols) throw SolverError("skyline LU: matrix must be square");
  perm_ = rcm_order(A);
  std::vector<int> inv(n_);
  for (int i = 0; i < n_; ++i) inv[perm_[i]] = i;
  // Row i of the permuted matrix is row perm_[i] of A.
  auto for_entries = [&](auto&& f) {
    for (int i = 0; i < n_; ++i) {
      const int r = perm_[i];
      for (int k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) f(i, inv[A.col[k]], A.val[k]);
    }
  };
  lo_.resize(n_);
  top_.resize(n_);
  for (int i = 0; i < n_; ++i) lo_[i] = top_[i] = i;
  for_entries([&](int i, int j, double) {
    if (j < i) lo_[i] = std::min(lo_[i], j);
    if (j > i) top_[j] = std::min(top_[j], i);
  });
  lptr_.resize(n_ + 1, 0);
  uptr_.resize(n_ + 1, 0);
  for (int i = 0; i < n_; ++i) {
    lptr_[i + 1] = lptr_[i] + (i - lo_[i]);
    uptr_[i + 1] = uptr_[i] + (i - top_[i] + 1);
  }
  l_.assign(lptr_[n_], 0.0);
  u_.assign(uptr_[n_], 0.0);
  auto L = [&](int i, int j) -> double& { return l_[lptr_[i] + (j - lo_[i])]; };
  auto U = [&](int r, int j) -> double& { return u_[uptr_[j] + (r - top_[j])]; };
  for_entries([&](int i, int j, double v) {
    if (j < i) L(i, j) += v;
    else U(i, j) += v;
  });
  for (int i = 0; i < n_; ++i) {
    for (int j = lo_[i]; j < i; ++j) {
      double s = L(i, j);
      for (int m = std::max(lo_[i], top_[j]); m < j; ++m) s -= L(i, m) * U(m, j);
      L(i, j) = s / U(j, j);
    }
    for (int r = top_[i]; r <= i; ++r) {
      double s = U(r, i);
      for (int m = std::max(lo_[r], top_[i]); m < r; ++m) s -= L(r, m) * U(m, i);
      U(r, i) = s;
    }
    if (U(i, i) == 0.0) throw SolverError("skyline LU: zero pivot at row " + std::to_string(perm_[i]));
  }
}

std::vector<double> SkylineLU::solve(const std::vector<double>& b) const {
  std::vector<double> y(n_);
  for (int i = 0; i < n_; ++i) y[i] = b[perm_[i]];
  for (int i = 0; i < n_; ++i) {
    double s = y[i];
    for (int j = lo_[i]; j < i; ++j) s -= l_[lptr_[i] + (j - lo_[i])] * y[j];
    y[i] = s;
  }
  for (int j = n_ - 1; j >= 0; --j) {
    y[j] /= u_[uptr_[j] + (j - top_[j])];
    for (int r = top_[j]; r < j; ++r) y[r] -= u_[uptr_[j] + (r - top_[j])] * y[j];
  }
  std::vector<double> x(n_);
  for (int i = 0; i < n_; ++i) x[perm_[i]] = y[i];
  return x;
}

}  // namespace afem
