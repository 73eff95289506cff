#include <afem/quadrature.hpp>

#include <cmath>
#include <string>

namespace afem {

namespace {

void add_perms3(std::vector<QuadPoint>& r, double a, double b, double w) {
  // Distinct permutations of (a, b, b).
  r.push_back({{a, b, b, 0.0}, w});
  r.push_back({{b, a, b, 0.0}, w});
  r.push_back({{b, b, a, 0.0}, w});
}

void add_perms4(std::vector<QuadPoint>& r, double a, double b, double w) {
  // Distinct permutations of (a, b, b, b).
  for (int i = 0; i < 4; ++i) {
    QuadPoint q{{b, b, b, b}, w};
    q.bary[i] = a;
    r.push_back(q);
  }
}

void add_perms22(std::vector<QuadPoint>& r, double a, double b, double w) {
  // Distinct permutations of (a, a, b, b).
  static constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (const auto& p : pairs) {
    QuadPoint q{{b, b, b, b}, w};
    q.bary[p[0]] = a;
    q.bary[p[1]] = a;
    r.push_back(q);
  }
}

std::vector<QuadPoint> make_tri(int degree) {
  std::vector<QuadPoint> r;
  if (degree == 1) {
    r.push_back({{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0}, 0.5});
  } else if (degree == 2) {
    add_perms3(r, 2.0 / 3, 1.0 / 6, 1.0 / 6);
  } else {
    // Dunavant degree 5, 7 points.
    r.push_back({{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0}, 0.225 / 2});
    add_perms3(r, 0.059715871789770, 0.470142064105115, 0.132394152788506 / 2);
    add_perms3(r, 0.797426985353087, 0.101286507323456, 0.125939180544827 / 2);
  }
  return r;
}

std::vector<QuadPoint> make_tet(int degree) {
  std::vector<QuadPoint> r;
  if (degree == 1) {
    r.push_back({{0.25, 0.25, 0.25, 0.25}, 1.0 / 6});
  } else if (degree == 2) {
    const double a = 0.5854101966249685, b = 0.1381966011250105;
    add_perms4(r, a, b, 1.0 / 24);
  } else {
    // Walkington degree 5, 14 points.
    const double a1 = 0.0927352503108912, a2 = 0.3108859192633006, b = 0.4544962958743504;
    add_perms4(r, 1.0 - 3 * a1, a1, 0.01224884051939366);
    add_perms4(r, 1.0 - 3 * a2, a2, 0.01878132095300264);
    add_perms22(r, b, 0.5 - b, 0.007091003462846911);
  }
  return r;
}

int canonical_degree(int degree) {
  if (degree <= 1) return 1;
  if (degree == 2) return 2;
  if (degree <= 5) return 5;
  throw Error("quadrature degree " + std::to_string(degree) + " is not available (max 5)");
}

}  // namespace

const std::vector<QuadPoint>& simplex_rule(int dim, int degree) {
  static const std::vector<QuadPoint> tri[3] = {make_tri(1), make_tri(2), make_tri(5)};
  static const std::vector<QuadPoint> tet[3] = {make_tet(1), make_tet(2), make_tet(5)};
  const int k = canonical_degree(degree);
  const int slot = k == 1 ? 0 : (k == 2 ? 1 : 2);
  if (dim == 2) return tri[slot];
  if (dim == 3) return tet[slot];
  throw Error("quadrature: dim must be 2 or 3");
}

const std::vector<QuadPoint>& face_rule(int dim) {
  static const std::vector<QuadPoint> seg = [] {
    const double g = 0.5 / std::sqrt(3.0);
    return std::vector<QuadPoint>{{{0.5 - g, 0.5 + g, 0, 0}, 0.5}, {{0.5 + g, 0.5 - g, 0, 0}, 0.5}};
  }();
  static const std::vector<QuadPoint> tri = make_tri(2);
  return dim == 2 ? seg : tri;
}

ElementDef linear_element(int dim, int quad_degree) {
  ElementDef e;
  e.dim = dim;
  e.quad_points = simplex_rule(dim, quad_degree);
  for (const auto& q : e.quad_points) {
    std::vector<BasisSample> row(dim + 1);
    for (int i = 0; i <= dim; ++i) {
      row[i].value = q.bary[i];
      // lambda_0 = 1 - sum xi_a, lambda_i = xi_i.
      for (int a = 0; a < dim; ++a) row[i].ref_grad[a] = i == 0 ? -1.0 : (a == i - 1 ? 1.0 : 0.0);
    }
    e.basis_vals.push_back(std::move(row));
  }
  return e;
}

}  // namespace afem
