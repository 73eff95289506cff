#include <afem/point_locator.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace afem {

std::array<double, 4> barycentric(const Mesh& mesh, int s, const Vec3& x) {
  const int d = mesh.dim();
  std::array<double, 4> lam{};
  std::array<Vec3, 4> p{};
  for (int i = 0; i <= d; ++i) p[i] = mesh.point(s, i);
  const double vol = signed_volume(std::span<const Vec3>(p.data(), d + 1), d);
  double rest = 1.0;
  for (int i = 1; i <= d; ++i) {
    std::array<Vec3, 4> q = p;
    q[i] = x;
    lam[i] = signed_volume(std::span<const Vec3>(q.data(), d + 1), d) / vol;
    rest -= lam[i];
  }
  lam[0] = rest;
  return lam;
}

PointLocator::PointLocator(const Mesh& mesh, double tol) : mesh_(mesh), tol_(tol) {
  const int d = mesh.dim();
  const auto live = mesh.live_simplices();
  lo_ = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(), 0.0};
  hi_ = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(), 0.0};
  if (d == 3) {
    lo_[2] = std::numeric_limits<double>::max();
    hi_[2] = std::numeric_limits<double>::lowest();
  }
  for (int v = 0; v < mesh.num_vertices(); ++v)
    for (int a = 0; a < d; ++a) {
      lo_[a] = std::min(lo_[a], mesh.vertex(v).x[a]);
      hi_[a] = std::max(hi_[a], mesh.vertex(v).x[a]);
    }
  // Roughly two simplices per bin.
  const double per_axis = std::pow(std::max<double>(1.0, live.size() / 2.0), 1.0 / d);
  for (int a = 0; a < d; ++a) n_[a] = std::clamp(static_cast<int>(per_axis), 1, 512);
  bins_.assign(static_cast<std::size_t>(n_[0]) * n_[1] * n_[2], {});
  for (int s : live) {
    std::array<int, 3> b0{0, 0, 0}, b1{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      double mn = std::numeric_limits<double>::max(), mx = std::numeric_limits<double>::lowest();
      for (int i = 0; i <= d; ++i) {
        mn = std::min(mn, mesh.point(s, i)[a]);
        mx = std::max(mx, mesh.point(s, i)[a]);
      }
      Vec3 pmn{}, pmx{};
      pmn[a] = mn;
      pmx[a] = mx;
      b0[a] = bin_index(pmn, a);
      b1[a] = bin_index(pmx, a);
    }
    for (int k = b0[2]; k <= b1[2]; ++k)
      for (int j = b0[1]; j <= b1[1]; ++j)
        for (int i = b0[0]; i <= b1[0]; ++i) bins_[(static_cast<std::size_t>(k) * n_[1] + j) * n_[0] + i].push_back(s);
  }
}

int PointLocator::bin_index(const Vec3& x, int axis) const {
  const double w = hi_[axis] - lo_[axis];
  if (w <= 0.0) return 0;
  const int i = static_cast<int>(std::floor((x[axis] - lo_[axis]) / w * n_[axis]));
  return std::clamp(i, 0, n_[axis] - 1);
}

Location PointLocator::locate(const Vec3& x) const {
  const int d = mesh_.dim();
  std::array<int, 3> b0{0, 0, 0}, b1{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    const double slack = tol_ * std::max(1.0, hi_[a] - lo_[a]);
    if (x[a] < lo_[a] - slack || x[a] > hi_[a] + slack) return {};
    Vec3 lo = x, hi = x;
    lo[a] -= slack;
    hi[a] += slack;
    b0[a] = bin_index(lo, a);
    b1[a] = bin_index(hi, a);
  }
  Location best;
  for (int k = b0[2]; k <= b1[2]; ++k)
    for (int j = b0[1]; j <= b1[1]; ++j)
      for (int i = b0[0]; i <= b1[0]; ++i)
        for (int s : bins_[(static_cast<std::size_t>(k) * n_[1] + j) * n_[0] + i]) {
          if (best.found() && s >= best.simplex) continue;
          const auto lam = barycentric(mesh_, s, x);
          bool inside = true;
          for (int q = 0; q <= d; ++q) inside = inside && lam[q] >= -tol_;
          if (inside) best = {s, lam};
        }
  return best;
}

}  // namespace afem
