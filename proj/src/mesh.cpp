#include <afem/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace afem {

namespace {

constexpr std::array<std::array<int, 2>, 3> kEdges2{{{0, 1}, {0, 2}, {1, 2}}};
constexpr std::array<std::array<int, 2>, 6> kEdges3{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

double dist2(const Vec3& a, const Vec3& b) {
  const Vec3 d = sub3(a, b);
  return dot3(d, d);
}

bool lex_less(const Vec3& a, const Vec3& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

BoundaryClass stronger(BoundaryClass a, BoundaryClass b) {
  if (a == BoundaryClass::dirichlet || b == BoundaryClass::dirichlet) return BoundaryClass::dirichlet;
  if (a == BoundaryClass::neumann || b == BoundaryClass::neumann) return BoundaryClass::neumann;
  return BoundaryClass::interior;
}

}  // namespace

std::array<int, 2> local_edge(int dim, int edge) {
  return dim == 2 ? kEdges2.at(edge) : kEdges3.at(edge);
}

int local_edge_index(int dim, int i, int j) {
  if (i > j) std::swap(i, j);
  for (int e = 0; e < num_edges(dim); ++e) {
    const auto le = local_edge(dim, e);
    if (le[0] == i && le[1] == j) return e;
  }
  return -1;
}

double signed_volume(std::span<const Vec3> p, int dim) {
  if (dim == 2) {
    const double ax = p[1][0] - p[0][0], ay = p[1][1] - p[0][1];
    const double bx = p[2][0] - p[0][0], by = p[2][1] - p[0][1];
    return 0.5 * (ax * by - ay * bx);
  }
  const Vec3 a = sub3(p[1], p[0]), b = sub3(p[2], p[0]), c = sub3(p[3], p[0]);
  const double det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                     a[2] * (b[0] * c[1] - b[1] * c[0]);
  return det / 6.0;
}

double shape_measure(std::span<const Vec3> p, int dim) {
  const double vol = signed_volume(p, dim);
  double edge_sum = 0.0;
  for (int i = 0; i <= dim; ++i)
    for (int j = i + 1; j <= dim; ++j) edge_sum += dist2(p[i], p[j]);
  if (vol == 0.0 || edge_sum == 0.0) return 0.0;
  const double d = dim;
  const double scale = std::pow(2.0, 2.0 * (1.0 - 1.0 / d)) * std::pow(3.0, (d - 1.0) / 2.0);
  const double mag = std::pow(std::abs(vol), 2.0 / d);
  return std::copysign(scale * mag / edge_sum, vol);
}

double shape_measure(const Mesh& mesh, int s) {
  std::array<Vec3, 4> p{};
  for (int i = 0; i <= mesh.dim(); ++i) p[i] = mesh.point(s, i);
  return shape_measure(std::span<const Vec3>(p.data(), mesh.dim() + 1), mesh.dim());
}

double face_measure(std::span<const Vec3> p, int dim) {
  if (dim == 2) return std::sqrt(dist2(p[0], p[1]));
  const Vec3 a = sub3(p[1], p[0]), b = sub3(p[2], p[0]);
  const Vec3 c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  return 0.5 * norm3(c);
}

double inscribed_diameter(std::span<const Vec3> p, int dim) {
  // r = d |s| / (sum of face measures)
  double faces = 0.0;
  std::array<Vec3, 3> f{};
  for (int skip = 0; skip <= dim; ++skip) {
    int k = 0;
    for (int i = 0; i <= dim; ++i)
      if (i != skip) f[k++] = p[i];
    faces += face_measure(std::span<const Vec3>(f.data(), dim), dim);
  }
  if (faces == 0.0) return 0.0;
  return 2.0 * dim * std::abs(signed_volume(p, dim)) / faces;
}

double face_inscribed_diameter(std::span<const Vec3> p, int dim) {
  if (dim == 2) return std::sqrt(dist2(p[0], p[1]));
  const double per = std::sqrt(dist2(p[0], p[1])) + std::sqrt(dist2(p[1], p[2])) + std::sqrt(dist2(p[0], p[2]));
  if (per == 0.0) return 0.0;
  return 4.0 * face_measure(p, dim) / per;
}

Mesh::Mesh(int dim) : dim_(dim) {
  if (dim != 2 && dim != 3) throw MeshError("mesh dimension must be 2 or 3, got " + std::to_string(dim));
}

int Mesh::add_vertex(const Vec3& x, BoundaryClass bclass) {
  Vertex v;
  v.x = x;
  if (dim_ == 2) v.x[2] = 0.0;
  v.bclass = bclass;
  vertices_.push_back(std::move(v));
  return num_vertices() - 1;
}

int Mesh::allocate_slot() {
  if (!free_slots_.empty()) {
    const int s = free_slots_.back();
    free_slots_.pop_back();
    return s;
  }
  simplices_.emplace_back();
  return num_slots() - 1;
}

void Mesh::release_slot(int s) {
  simplices_[s].alive = false;
  pending_free_.push_back(s);
  --live_count_;
}

void Mesh::ring_insert(int v, int s) {
  auto& r = vertices_[v].ring;
  r.insert(std::lower_bound(r.begin(), r.end(), s), s);
}

void Mesh::ring_erase(int v, int s) {
  auto& r = vertices_[v].ring;
  auto it = std::lower_bound(r.begin(), r.end(), s);
  if (it != r.end() && *it == s) r.erase(it);
}

int Mesh::add_simplex(std::span<const int> verts, std::span<const BoundaryClass> faces) {
  const int nv = dim_ + 1;
  if (static_cast<int>(verts.size()) != nv || static_cast<int>(faces.size()) != nv)
    throw MeshError("add_simplex: expected " + std::to_string(nv) + " vertices and face flags");
  Simplex s;
  for (int i = 0; i < nv; ++i) {
    if (verts[i] < 0 || verts[i] >= num_vertices())
      throw MeshError("add_simplex: vertex id " + std::to_string(verts[i]) + " out of range");
    s.verts[i] = verts[i];
    s.face[i] = faces[i];
  }
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j)
      if (s.verts[i] == s.verts[j]) throw MeshError("add_simplex: repeated vertex " + std::to_string(s.verts[i]));
  std::array<Vec3, 4> p{};
  for (int i = 0; i < nv; ++i) p[i] = vertices_[s.verts[i]].x;
  const double vol = signed_volume(std::span<const Vec3>(p.data(), nv), dim_);
  if (vol == 0.0) throw MeshError("add_simplex: degenerate simplex");
  if (vol < 0.0) {
    std::swap(s.verts[0], s.verts[1]);
    std::swap(s.face[0], s.face[1]);
  }
  assign_initial_order(s);
  const int id = allocate_slot();
  s.alive = true;
  s.root = id;
  s.lineage = static_cast<int>(lineage_.size());
  lineage_.push_back({s.verts, -1, 0});
  simplices_[id] = s;
  ++live_count_;
  for (int i = 0; i < nv; ++i) ring_insert(s.verts[i], id);
  return id;
}

void Mesh::assign_initial_order(Simplex& s) const {
  if (dim_ != 3) return;
  // Longest edge, ties broken by the lexicographically smallest (min id, max id) pair.
  int best = -1;
  double best_len = -1.0;
  std::pair<int, int> best_key{0, 0};
  for (int e = 0; e < 6; ++e) {
    const auto [i, j] = kEdges3[e];
    const double len = dist2(vertices_[s.verts[i]].x, vertices_[s.verts[j]].x);
    const std::pair<int, int> key{std::min(s.verts[i], s.verts[j]), std::max(s.verts[i], s.verts[j])};
    const double tol = 1e-12 * std::max(len, best_len);
    if (best < 0 || len > best_len + tol || (std::abs(len - best_len) <= tol && key < best_key)) {
      best = e;
      best_len = len;
      best_key = key;
    }
  }
  auto [i, j] = kEdges3[best];
  if (s.verts[i] > s.verts[j]) std::swap(i, j);
  std::array<int, 2> rest{};
  int k = 0;
  for (int q = 0; q < 4; ++q)
    if (q != i && q != j) rest[k++] = q;
  // The remaining vertex farther from order[0] goes first (face-diagonal edge next).
  const double d0 = dist2(vertices_[s.verts[i]].x, vertices_[s.verts[rest[0]]].x);
  const double d1 = dist2(vertices_[s.verts[i]].x, vertices_[s.verts[rest[1]]].x);
  const double tol = 1e-12 * std::max(d0, d1);
  if (d1 > d0 + tol || (std::abs(d1 - d0) <= tol && s.verts[rest[1]] < s.verts[rest[0]])) std::swap(rest[0], rest[1]);
  s.order = {static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j), static_cast<std::uint8_t>(rest[0]),
             static_cast<std::uint8_t>(rest[1])};
  s.type = 0;
}

std::vector<int> Mesh::live_simplices() const {
  std::vector<int> ids;
  ids.reserve(live_count_);
  for (int s = 0; s < num_slots(); ++s)
    if (simplices_[s].alive) ids.push_back(s);
  return ids;
}

double Mesh::volume(int s) const {
  std::array<Vec3, 4> p{};
  for (int i = 0; i <= dim_; ++i) p[i] = point(s, i);
  return signed_volume(std::span<const Vec3>(p.data(), dim_ + 1), dim_);
}

Vec3 Mesh::barycenter(int s) const {
  Vec3 c{0, 0, 0};
  for (int i = 0; i <= dim_; ++i)
    for (int a = 0; a < 3; ++a) c[a] += point(s, i)[a];
  for (auto& v : c) v /= (dim_ + 1);
  return c;
}

int Mesh::neighbor(int s, int local_face) const {
  const auto& sx = simplices_[s];
  std::array<int, 3> fv{};
  int k = 0;
  for (int i = 0; i <= dim_; ++i)
    if (i != local_face) fv[k++] = sx.verts[i];
  for (int t : vertices_[fv[0]].ring) {
    if (t == s) continue;
    const auto& tv = simplices_[t].verts;
    bool all = true;
    for (int q = 1; q < dim_ && all; ++q) all = std::find(tv.begin(), tv.begin() + dim_ + 1, fv[q]) != tv.begin() + dim_ + 1;
    if (all) return t;
  }
  return -1;
}

std::vector<int> Mesh::edge_star(int a, int b) const {
  std::vector<int> out;
  const auto& ra = vertices_[a].ring;
  const auto& rb = vertices_[b].ring;
  std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(out));
  return out;
}

bool Mesh::is_conforming() const {
  for (int s = 0; s < num_slots(); ++s) {
    const auto& sx = simplices_[s];
    if (!sx.alive) continue;
    for (int f = 0; f <= dim_; ++f) {
      std::array<int, 3> fv{};
      int k = 0;
      for (int i = 0; i <= dim_; ++i)
        if (i != f) fv[k++] = sx.verts[i];
      int matches = 0;
      for (int t : vertices_[fv[0]].ring) {
        if (t == s) continue;
        const auto& tv = simplices_[t].verts;
        bool all = true;
        for (int q = 1; q < dim_ && all; ++q)
          all = std::find(tv.begin(), tv.begin() + dim_ + 1, fv[q]) != tv.begin() + dim_ + 1;
        if (all) ++matches;
      }
      const int expected = sx.face[f] == BoundaryClass::interior ? 1 : 0;
      if (matches != expected) return false;
    }
  }
  return true;
}

int Mesh::longest_edge_2d(int s) const {
  int best = -1;
  double best_len = -1.0;
  std::array<Vec3, 2> best_key{};
  for (int e = 0; e < 3; ++e) {
    const auto [i, j] = kEdges2[e];
    const Vec3& p = point(s, i);
    const Vec3& q = point(s, j);
    const double len = dist2(p, q);
    std::array<Vec3, 2> key = lex_less(p, q) ? std::array<Vec3, 2>{p, q} : std::array<Vec3, 2>{q, p};
    const double tol = 1e-12 * std::max(len, best_len);
    bool take = best < 0 || len > best_len + tol;
    if (!take && std::abs(len - best_len) <= tol)
      take = lex_less(key[0], best_key[0]) || (key[0] == best_key[0] && lex_less(key[1], best_key[1]));
    if (take) {
      best = e;
      best_len = len;
      best_key = key;
    }
  }
  return best;
}

int Mesh::refinement_edge(int s) const {
  if (dim_ == 2) return longest_edge_2d(s);
  const auto& sx = simplices_[s];
  return local_edge_index(3, sx.order[0], sx.order[1]);
}

Mesh::EdgeKey Mesh::edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return {(static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b)};
}

int Mesh::create_midpoint(int a, int b) {
  const EdgeKey key = edge_key(a, b);
  if (auto it = split_edges_.find(key); it != split_edges_.end()) return it->second;
  BoundaryClass bc = BoundaryClass::interior;
  for (int t : edge_star(a, b)) {
    const auto& tx = simplices_[t];
    for (int f = 0; f <= dim_; ++f) {
      const int opp = tx.verts[f];
      if (opp == a || opp == b) continue;
      bc = stronger(bc, tx.face[f]);
    }
  }
  const Vec3& xa = vertices_[a].x;
  const Vec3& xb = vertices_[b].x;
  const Vec3 mid{0.5 * (xa[0] + xb[0]), 0.5 * (xa[1] + xb[1]), 0.5 * (xa[2] + xb[2])};
  const int m = add_vertex(mid, bc);
  vertices_[m].parents = {std::min(a, b), std::max(a, b)};
  split_edges_.emplace(key, m);
  return m;
}

bool Mesh::has_split_edge(int s) const {
  if (split_edges_.empty()) return false;
  const auto& sx = simplices_[s];
  for (int e = 0; e < num_edges(dim_); ++e) {
    const auto [i, j] = local_edge(dim_, e);
    if (split_edges_.count(edge_key(sx.verts[i], sx.verts[j]))) return true;
  }
  return false;
}

BisectResult Mesh::bisect(int s) {
  if (!is_live(s)) throw MeshError("bisect: simplex " + std::to_string(s) + " is not live");
  const Simplex parent = simplices_[s];
  int pa = 0, pb = 1;
  if (dim_ == 2) {
    const auto le = kEdges2[longest_edge_2d(s)];
    pa = le[0];
    pb = le[1];
  } else {
    pa = parent.order[0];
    pb = parent.order[1];
  }
  const int m = create_midpoint(parent.verts[pa], parent.verts[pb]);

  for (int i = 0; i <= dim_; ++i) ring_erase(parent.verts[i], s);
  release_slot(s);

  auto make_child = [&](int replaced, int interior_face) {
    Simplex c = parent;
    c.verts[replaced] = m;
    c.face[interior_face] = BoundaryClass::interior;
    c.generation = parent.generation + 1;
    c.parent = parent.lineage;
    c.alive = true;
    return c;
  };
  // child_a keeps the vertex at pa, child_b the vertex at pb.
  Simplex ca = make_child(pb, pa);
  Simplex cb = make_child(pa, pb);
  if (dim_ == 3) {
    const auto& o = parent.order;
    ca.order = {o[0], o[2], o[3], o[1]};
    cb.order = parent.type == 0 ? std::array<std::uint8_t, 4>{o[1], o[3], o[2], o[0]}
                                : std::array<std::uint8_t, 4>{o[1], o[2], o[3], o[0]};
    ca.type = cb.type = static_cast<std::uint8_t>((parent.type + 1) % 3);
  }
  BisectResult r;
  r.midpoint = m;
  for (Simplex* c : {&ca, &cb}) {
    const int id = allocate_slot();
    c->lineage = static_cast<int>(lineage_.size());
    lineage_.push_back({c->verts, c->parent, c->generation});
    simplices_[id] = *c;
    ++live_count_;
    for (int i = 0; i <= dim_; ++i) ring_insert(c->verts[i], id);
    (c == &ca ? r.child_a : r.child_b) = id;
  }
  return r;
}

RefinementReport Mesh::refine_marked(std::span<const int> marked, int max_passes) {
  RefinementReport rep;
  for (int s : marked)
    if (!is_live(s)) throw MeshError("refine_marked: simplex " + std::to_string(s) + " is not live");

  const int slots_before = num_slots();
  std::vector<char> live_before(slots_before);
  for (int s = 0; s < slots_before; ++s) live_before[s] = simplices_[s].alive;

  std::vector<int> queue(marked.begin(), marked.end());
  std::sort(queue.begin(), queue.end());
  queue.erase(std::unique(queue.begin(), queue.end()), queue.end());
  if (!split_edges_.empty()) {
    for (int s = 0; s < num_slots(); ++s)
      if (simplices_[s].alive && has_split_edge(s) && !std::binary_search(queue.begin(), queue.end(), s))
        queue.push_back(s);
  }

  std::vector<char> queued;
  int pass = 0;
  while (!queue.empty()) {
    if (pass > max_passes)
      throw MeshError("refine_marked: conformity closure exceeded " + std::to_string(max_passes) +
                      " passes; simplex " + std::to_string(queue.front()) + " is still nonconforming");
    std::vector<int> next;
    queued.assign(num_slots() + 2 * queue.size() + 8, 0);
    auto push = [&](int t) {
      if (t >= static_cast<int>(queued.size())) queued.resize(t + 1, 0);
      if (!queued[t]) {
        queued[t] = 1;
        next.push_back(t);
      }
    };
    for (int s : queue) {
      if (!simplices_[s].alive) continue;
      const Simplex& sx = simplices_[s];
      int a, b;
      if (dim_ == 2) {
        const auto le = kEdges2[longest_edge_2d(s)];
        a = sx.verts[le[0]];
        b = sx.verts[le[1]];
      } else {
        a = sx.verts[sx.order[0]];
        b = sx.verts[sx.order[1]];
      }
      const BisectResult r = bisect(s);
      ++rep.bisections;
      for (int t : edge_star(a, b)) push(t);
      if (has_split_edge(r.child_a)) push(r.child_a);
      if (has_split_edge(r.child_b)) push(r.child_b);
    }
    queue.clear();
    for (int t : next)
      if (simplices_[t].alive) queue.push_back(t);
    if (!queue.empty()) ++pass;
  }
  rep.closure_passes = pass;
  split_edges_.clear();

  for (int s = 0; s < num_slots(); ++s) {
    const bool was = s < slots_before && live_before[s];
    if (simplices_[s].alive && !was) rep.created.push_back(s);
    if (!simplices_[s].alive && was) rep.destroyed.push_back(s);
  }
  // Slots freed during this call become reusable only now; smallest id is handed out first.
  std::sort(pending_free_.begin(), pending_free_.end(), std::greater<>());
  free_slots_.insert(free_slots_.begin(), pending_free_.begin(), pending_free_.end());
  std::sort(free_slots_.begin(), free_slots_.end(), std::greater<>());
  pending_free_.clear();
  return rep;
}

void Mesh::reset_roots() {
  for (int s = 0; s < num_slots(); ++s)
    if (simplices_[s].alive) simplices_[s].root = s;
}

void Mesh::classify_vertices() {
  for (auto& v : vertices_) v.bclass = BoundaryClass::interior;
  for (const auto& s : simplices_) {
    if (!s.alive) continue;
    for (int f = 0; f <= dim_; ++f) {
      if (s.face[f] == BoundaryClass::interior) continue;
      for (int i = 0; i <= dim_; ++i)
        if (i != f) vertices_[s.verts[i]].bclass = stronger(vertices_[s.verts[i]].bclass, s.face[f]);
    }
  }
}

void Mesh::check_invariants() const {
  std::vector<BoundaryClass> expected(num_vertices(), BoundaryClass::interior);
  for (int s = 0; s < num_slots(); ++s) {
    const auto& sx = simplices_[s];
    if (!sx.alive) continue;
    if (volume(s) <= 0.0) throw MeshError("simplex " + std::to_string(s) + " has non-positive volume");
    for (int i = 0; i <= dim_; ++i) {
      const auto& r = vertices_[sx.verts[i]].ring;
      if (!std::binary_search(r.begin(), r.end(), s))
        throw MeshError("ring of vertex " + std::to_string(sx.verts[i]) + " misses simplex " + std::to_string(s));
    }
    for (int f = 0; f <= dim_; ++f) {
      if (sx.face[f] == BoundaryClass::interior) continue;
      for (int i = 0; i <= dim_; ++i)
        if (i != f) expected[sx.verts[i]] = stronger(expected[sx.verts[i]], sx.face[f]);
    }
  }
  for (int v = 0; v < num_vertices(); ++v) {
    for (int s : vertices_[v].ring) {
      if (!is_live(s)) throw MeshError("ring of vertex " + std::to_string(v) + " lists dead simplex");
      const auto& tv = simplices_[s].verts;
      if (std::find(tv.begin(), tv.begin() + dim_ + 1, v) == tv.begin() + dim_ + 1)
        throw MeshError("ring of vertex " + std::to_string(v) + " lists a simplex not containing it");
    }
    const bool on_boundary = expected[v] != BoundaryClass::interior;
    const bool flagged = vertices_[v].bclass != BoundaryClass::interior;
    if (!vertices_[v].ring.empty() && on_boundary != flagged)
      throw MeshError("vertex " + std::to_string(v) + " boundary class disagrees with its faces");
  }
}

Vec3 outward_normal(const Mesh& mesh, int s, int local_face) {
  // Outward normal of the face opposite vertex i is -grad(lambda_i) normalized.
  const int d = mesh.dim();
  const Vec3 p = mesh.point(s, local_face);
  std::array<Vec3, 3> f{};
  int k = 0;
  for (int i = 0; i <= d; ++i)
    if (i != local_face) f[k++] = mesh.point(s, i);
  Vec3 n{0, 0, 0};
  if (d == 2) {
    const Vec3 t = sub3(f[1], f[0]);
    n = {t[1], -t[0], 0.0};
  } else {
    const Vec3 a = sub3(f[1], f[0]), b = sub3(f[2], f[0]);
    n = {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  }
  if (dot3(n, sub3(p, f[0])) > 0.0) n = {-n[0], -n[1], -n[2]};
  const double len = norm3(n);
  return {n[0] / len, n[1] / len, n[2] / len};
}

std::vector<BoundaryFace> boundary_faces(const Mesh& mesh) {
  std::vector<BoundaryFace> out;
  for (int s : mesh.live_simplices()) {
    const auto& sx = mesh.simplex(s);
    for (int f = 0; f <= mesh.dim(); ++f)
      if (sx.face[f] != BoundaryClass::interior) out.push_back({s, f, sx.face[f], outward_normal(mesh, s, f)});
  }
  return out;
}

RefinementReport refine_uniform(Mesh& mesh) {
  RefinementReport total;
  for (int round = 0; round < mesh.dim(); ++round) {
    const auto ids = mesh.live_simplices();
    RefinementReport r = mesh.refine_marked(ids);
    total.bisections += r.bisections;
    total.closure_passes += r.closure_passes;
    total.destroyed.insert(total.destroyed.end(), r.destroyed.begin(), r.destroyed.end());
  }
  total.created = mesh.live_simplices();
  return total;
}

}  // namespace afem
