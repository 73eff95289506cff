#include <afem/sparse.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace afem {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> entries) {
  for (const auto& t : entries)
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw SolverError("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) + ") out of range");
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& t = entries[k];
    if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
      m.val.back() += t.value;
      continue;
    }
    m.col.push_back(t.col);
    m.val.push_back(t.value);
    ++m.row_ptr[t.row + 1];
  }
  for (int i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  SparseMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.resize(n + 1);
  m.col.resize(n);
  m.val.assign(n, 1.0);
  for (int i = 0; i <= n; ++i) m.row_ptr[i] = i;
  for (int i = 0; i < n; ++i) m.col[i] = i;
  return m;
}

int SparseMatrix::find(int i, int j) const {
  const auto b = col.begin() + row_ptr[i], e = col.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(b, e, j);
  return (it != e && *it == j) ? static_cast<int>(it - col.begin()) : -1;
}

double SparseMatrix::at(int i, int j) const {
  const int k = find(i, j);
  return k < 0 ? 0.0 : val[k];
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(std::min(rows, cols), 0.0);
  for (int i = 0; i < static_cast<int>(d.size()); ++i) d[i] = at(i, i);
  return d;
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (int c : col) ++t.row_ptr[c + 1];
  for (int i = 0; i < cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col.resize(col.size());
  t.val.resize(val.size());
  std::vector<int> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const int dst = next[col[k]]++;
      t.col[dst] = i;
      t.val[dst] = val[k];
    }
  return t;
}

bool SparseMatrix::is_symmetric(double rel_tol) const {
  if (rows != cols) return false;
  double scale = 0.0;
  for (double v : val) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      if (std::abs(val[k] - at(col[k], i)) > rel_tol * scale) return false;
  return true;
}

SparseMatrix multiply(const SparseMatrix& A, const SparseMatrix& B) {
  if (A.cols != B.rows) throw SolverError("multiply: dimension mismatch");
  SparseMatrix C;
  C.rows = A.rows;
  C.cols = B.cols;
  C.row_ptr.assign(A.rows + 1, 0);
  std::vector<double> acc(B.cols, 0.0);
  std::vector<int> marker(B.cols, -1), cols_in_row;
  for (int i = 0; i < A.rows; ++i) {
    cols_in_row.clear();
    for (int ka = A.row_ptr[i]; ka < A.row_ptr[i + 1]; ++ka) {
      const int j = A.col[ka];
      const double a = A.val[ka];
      for (int kb = B.row_ptr[j]; kb < B.row_ptr[j + 1]; ++kb) {
        const int c = B.col[kb];
        if (marker[c] != i) {
          marker[c] = i;
          acc[c] = 0.0;
          cols_in_row.push_back(c);
        }
        acc[c] += a * B.val[kb];
      }
    }
    std::sort(cols_in_row.begin(), cols_in_row.end());
    for (int c : cols_in_row) {
      C.col.push_back(c);
      C.val.push_back(acc[c]);
    }
    C.row_ptr[i + 1] = static_cast<int>(C.col.size());
  }
  return C;
}

SparseMatrix galerkin_product(const SparseMatrix& P, const SparseMatrix& A) {
  if (A.rows != A.cols || P.rows != A.rows) throw SolverError("galerkin_product: dimension mismatch");
  return multiply(P.transpose(), multiply(A, P));
}

void write_matrix_market(std::ostream& os, const SparseMatrix& A) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows << ' ' << A.cols << ' ' << A.nnz() << '\n';
  os << std::setprecision(17);
  for (int i = 0; i < A.rows; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) os << i + 1 << ' ' << A.col[k] + 1 << ' ' << A.val[k] << '\n';
}

void write_matrix_market(const std::string& path, const SparseMatrix& A) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_matrix_market(os, A);
}

SparseMatrix read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("%%MatrixMarket matrix coordinate real", 0) != 0)
    throw SolverError("MatrixMarket: expected 'coordinate real' header");
  const bool symmetric = line.find("symmetric") != std::string::npos;
  while (std::getline(is, line) && (line.empty() || line[0] == '%')) {
  }
  std::istringstream hdr(line);
  int rows = 0, cols = 0;
  long nnz = 0;
  if (!(hdr >> rows >> cols >> nnz)) throw SolverError("MatrixMarket: bad size line");
  std::vector<Triplet> t;
  for (long k = 0; k < nnz; ++k) {
    int i = 0, j = 0;
    double v = 0;
    if (!(is >> i >> j >> v)) throw SolverError("MatrixMarket: truncated entries");
    t.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) t.push_back({j - 1, i - 1, v});
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

}  // namespace afem
