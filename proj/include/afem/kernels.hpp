#pragma once

#include <afem/sparse.hpp>

#include <span>
#include <vector>

namespace afem {

/// Reductions sum fixed-size blocks sequentially and then the block sums in
/// order, so serial and parallel results are bit-identical for any thread count.
inline constexpr std::size_t kReductionBlock = 4096;

double dot(std::span<const double> a, std::span<const double> b, Execution ex = Execution::parallel);
double norm2(std::span<const double> a, Execution ex = Execution::parallel);
/// y = A x
void spmv(const SparseMatrix& A, std::span<const double> x, std::span<double> y, Execution ex = Execution::parallel);
/// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y, Execution ex = Execution::parallel);
/// r = b - A x
void residual(const SparseMatrix& A, std::span<const double> x, std::span<const double> b, std::span<double> r,
              Execution ex = Execution::parallel);

/// Current OpenMP thread cap (1 without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace afem
