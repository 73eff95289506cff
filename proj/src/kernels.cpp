#include <afem/kernels.hpp>

#include <omp.h>

#include <cmath>

namespace afem {

namespace {

double block_sum(std::span<const double> a, std::span<const double> b, std::size_t blk) {
  const std::size_t lo = blk * kReductionBlock, hi = std::min(a.size(), lo + kReductionBlock);
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

double dot(std::span<const double> a, std::span<const double> b, Execution ex) {
  if (a.size() != b.size()) throw SolverError("dot: size mismatch");
  const std::size_t nblk = (a.size() + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(nblk, 0.0);
  if (ex == Execution::parallel && nblk > 1) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(nblk); ++k) partial[k] = block_sum(a, b, k);
  } else {
    for (std::size_t k = 0; k < nblk; ++k) partial[k] = block_sum(a, b, k);
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double norm2(std::span<const double> a, Execution ex) { return std::sqrt(dot(a, a, ex)); }

void spmv(const SparseMatrix& A, std::span<const double> x, std::span<double> y, Execution ex) {
  if (static_cast<int>(x.size()) != A.cols || static_cast<int>(y.size()) != A.rows)
    throw SolverError("spmv: dimension mismatch");
  auto row = [&](int i) {
    double s = 0.0;
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) s += A.val[k] * x[A.col[k]];
    y[i] = s;
  };
  if (ex == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < A.rows; ++i) row(i);
  } else {
    for (int i = 0; i < A.rows; ++i) row(i);
  }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y, Execution ex) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  if (ex == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
  }
}

void residual(const SparseMatrix& A, std::span<const double> x, std::span<const double> b, std::span<double> r,
              Execution ex) {
  spmv(A, x, r, ex);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(r.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
}

}  // namespace afem
