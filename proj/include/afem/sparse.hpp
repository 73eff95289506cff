#pragma once

#include <afem/common.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace afem {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix; column indices strictly increasing per row.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr{0};
  std::vector<int> col;
  std::vector<double> val;

  /// Duplicates are summed in input order; exact zeros are kept.
  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> entries);
  static SparseMatrix identity(int n);

  int nnz() const { return static_cast<int>(col.size()); }
  /// Entry (i, j), 0 when not stored.
  double at(int i, int j) const;
  /// Index into col/val of entry (i, j), or -1.
  int find(int i, int j) const;
  std::vector<double> diagonal() const;
  SparseMatrix transpose() const;
  bool is_symmetric(double rel_tol = 1e-12) const;
};

/// C = A B (row-by-row accumulation, deterministic).
SparseMatrix multiply(const SparseMatrix& A, const SparseMatrix& B);
/// P^T A P.
SparseMatrix galerkin_product(const SparseMatrix& P, const SparseMatrix& A);

/// MatrixMarket coordinate real general.
void write_matrix_market(std::ostream& os, const SparseMatrix& A);
void write_matrix_market(const std::string& path, const SparseMatrix& A);
SparseMatrix read_matrix_market(std::istream& is);

}  // namespace afem
