#pragma once

#include <afem/sparse.hpp>

#include <vector>

namespace afem {

/// Row-major dense square matrix.
struct DenseMatrix {
  int n = 0;
  std::vector<double> a;

  explicit DenseMatrix(int size = 0) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
  static DenseMatrix from_sparse(const SparseMatrix& A);
};

/// LU with partial pivoting. Throws SolverError on a zero pivot.
class DenseLU {
 public:
  DenseLU() = default;
  explicit DenseLU(DenseMatrix A);
  std::vector<double> solve(const std::vector<double>& b) const;
  int size() const { return lu_.n; }

 private:
  DenseMatrix lu_;
  std::vector<int> piv_;
};

/// Returns false if A is not (numerically) symmetric positive definite.
bool cholesky(DenseMatrix A, DenseMatrix* L = nullptr);

/// Banded (skyline) LU without pivoting under a reverse Cuthill-McKee ordering, for coarse
/// operators too large for the dense path. Throws SolverError on a zero pivot.
class SkylineLU {
 public:
  SkylineLU() = default;
  explicit SkylineLU(const SparseMatrix& A);
  std::vector<double> solve(const std::vector<double>& b) const;

 private:
  int n_ = 0;
  std::vector<int> perm_;  // factored row i is input row perm_[i]
  // Row i of L stores columns [lo_[i], i); column j of U stores rows [top_[j], j].
  std::vector<int> lo_, top_;
  std::vector<std::size_t> lptr_, uptr_;
  std::vector<double> l_, u_;
};

}  // namespace afem
