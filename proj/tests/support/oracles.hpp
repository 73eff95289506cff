// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls the library routine it is meant to check.
#pragma once

#include <afem/assembly.hpp>
#include <afem/mesh.hpp>
#include <afem/solution.hpp>
#include <afem/sparse.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using afem::Vec3;

/// Exhaustive face matching over all live simplices: interior-flagged faces must
/// appear exactly twice, boundary-flagged faces exactly once. A hanging vertex
/// leaves its coarse face unmatched, so this also catches nonconformity.
inline std::string conformity_violation(const afem::Mesh& mesh) {
  const int d = mesh.dim();
  std::map<std::vector<int>, std::vector<std::pair<int, afem::BoundaryClass>>> faces;
  for (int s : mesh.live_simplices()) {
    const auto& S = mesh.simplex(s);
    for (int f = 0; f <= d; ++f) {
      std::vector<int> key;
      for (int k = 0; k <= d; ++k)
        if (k != f) key.push_back(S.verts[k]);
      std::sort(key.begin(), key.end());
      faces[key].push_back({s, S.face[f]});
    }
  }
  for (const auto& [key, users] : faces) {
    const bool interior = users.front().second == afem::BoundaryClass::interior;
    for (const auto& u : users)
      if ((u.second == afem::BoundaryClass::interior) != interior)
        return "face flags disagree at simplex " + std::to_string(u.first);
    const std::size_t want = interior ? 2 : 1;
    if (users.size() != want)
      return "face of simplex " + std::to_string(users.front().first) + " shared by " +
             std::to_string(users.size()) + " simplices";
  }
  return {};
}

/// Eta(s,d) = 2^(2(1-1/d)) 3^((d-1)/2) |s|^(2/d) / sum |e_ij|^2, signed like the volume.
inline double shape_measure(const std::vector<Vec3>& p, int d) {
  double vol;
  if (d == 2) {
    vol = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
  } else {
    const Vec3 a = afem::sub3(p[1], p[0]), b = afem::sub3(p[2], p[0]), c = afem::sub3(p[3], p[0]);
    vol = (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])) /
          6.0;
  }
  double e2 = 0;
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j) {
      const Vec3 e = afem::sub3(p[i], p[j]);
      e2 += afem::dot3(e, e);
    }
  const double sign = vol < 0 ? -1.0 : 1.0;
  return sign * std::pow(2.0, 2.0 * (1.0 - 1.0 / d)) * std::pow(3.0, (d - 1) / 2.0) *
         std::pow(std::abs(vol), 2.0 / d) / e2;
}

inline std::vector<Vec3> simplex_points(const afem::Mesh& mesh, int s) {
  std::vector<Vec3> p;
  for (int k = 0; k <= mesh.dim(); ++k) p.push_back(mesh.point(s, k));
  return p;
}

inline std::vector<std::vector<double>> dense(const afem::SparseMatrix& A) {
  std::vector<std::vector<double>> D(A.rows, std::vector<double>(A.cols, 0.0));
  for (int i = 0; i < A.rows; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) D[i][A.col[k]] += A.val[k];
  return D;
}

/// Gaussian elimination with partial pivoting on a copy.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
    std::swap(A[k], A[piv]);
    std::swap(b[k], b[piv]);
    for (int i = k + 1; i < n; ++i) {
      const double m = A[i][k] / A[k][k];
      if (m == 0) continue;
      for (int j = k; j < n; ++j) A[i][j] -= m * A[k][j];
      b[i] -= m * b[k];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

/// Textbook Cholesky on a dense copy; false at the first non-positive pivot.
inline bool cholesky_succeeds(std::vector<std::vector<double>> A) {
  const int n = static_cast<int>(A.size());
  for (int j = 0; j < n; ++j) {
    double d = A[j][j];
    for (int k = 0; k < j; ++k) d -= A[j][k] * A[j][k];
    if (!(d > 0)) return false;
    A[j][j] = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = A[i][j];
      for (int k = 0; k < j; ++k) s -= A[i][k] * A[j][k];
      A[i][j] = s / A[j][j];
    }
  }
  return true;
}

/// Plain triple loop (P^T A P)_{ij} = sum_kl P_ki A_kl P_lj on dense copies.
inline std::vector<std::vector<double>> triple_product(const afem::SparseMatrix& P, const afem::SparseMatrix& A) {
  const auto Pd = dense(P), Ad = dense(A);
  const int n = P.cols, m = P.rows;
  std::vector<std::vector<double>> AP(m, std::vector<double>(n, 0.0)), R(n, std::vector<double>(n, 0.0));
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l)
      if (Ad[k][l] != 0)
        for (int j = 0; j < n; ++j) AP[k][j] += Ad[k][l] * Pd[l][j];
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k)
      if (Pd[k][i] != 0)
        for (int j = 0; j < n; ++j) R[i][j] += Pd[k][i] * AP[k][j];
  return R;
}

/// | v . (F(u + eps w) - F(u)) / eps - v . A w | for the assembled residual and Jacobian.
inline double fd_discrepancy(const afem::Mesh& mesh, const afem::ProblemDefinition& pb, const afem::SolutionField& u,
                             const std::vector<double>& w, const std::vector<double>& v, double eps) {
  afem::AssemblyOptions opt;
  const auto F0 = afem::assemble_residual(mesh, pb, u, opt);
  afem::SolutionField up = u;
  for (std::size_t i = 0; i < w.size(); ++i) up.values[i] += eps * w[i];
  const auto F1 = afem::assemble_residual(mesh, pb, up, opt);
  const afem::SparseMatrix A = afem::assemble_jacobian(mesh, pb, u, opt);
  const auto Ad = dense(A);
  double fd = 0, lin = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    fd += v[i] * (F1[i] - F0[i]) / eps;
    double Aw = 0;
    for (std::size_t j = 0; j < w.size(); ++j) Aw += Ad[i][j] * w[j];
    lin += v[i] * Aw;
  }
  return std::abs(fd - lin);
}

/// Random direction vanishing on Dirichlet dofs, unit Euclidean norm.
inline std::vector<double> random_free_direction(const afem::Mesh& mesh, int ncomp, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const auto mask = afem::dirichlet_mask(mesh, ncomp);
  std::vector<double> w(mask.size(), 0.0);
  double n2 = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!mask[i]) {
      w[i] = U(rng);
      n2 += w[i] * w[i];
    }
  for (double& x : w) x /= std::sqrt(n2);
  return w;
}

/// log2(err[k-1] / err[k]) for successive levels.
inline std::vector<double> log2_rates(const std::vector<double>& err) {
  std::vector<double> r;
  for (std::size_t k = 1; k < err.size(); ++k) r.push_back(std::log2(err[k - 1] / err[k]));
  return r;
}

}  // namespace oracle
