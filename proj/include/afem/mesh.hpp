#pragma once

#include <afem/common.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace afem {

struct Vertex {
  Vec3 x{};
  BoundaryClass bclass = BoundaryClass::interior;
  /// Live simplices listing this vertex, kept sorted.
  std::vector<int> ring;
  /// Endpoints of the bisected edge this vertex is the midpoint of; -1 for input vertices.
  std::array<int, 2> parents{-1, -1};
};

struct Simplex {
  std::array<int, 4> verts{-1, -1, -1, -1};
  /// face[i] classifies the face opposite vertex i.
  std::array<BoundaryClass, 4> face{};
  /// Local positions in refinement order (3D marked bisection). The refinement
  /// edge joins positions order[0] and order[1].
  std::array<std::uint8_t, 4> order{0, 1, 2, 3};
  std::uint8_t type = 0;
  int generation = 0;
  /// Lineage id (permanent) of this simplex and of its parent.
  int lineage = -1;
  int parent = -1;
  /// Simplex id this one descends from as of the last Mesh::reset_roots().
  int root = -1;
  int chart = 0;
  bool alive = false;
};

/// Permanent record of every simplex ever created; slots in the live array are
/// recycled but lineage ids are not.
struct LineageRecord {
  std::array<int, 4> verts{-1, -1, -1, -1};
  int parent = -1;
  int generation = 0;
};

struct BisectResult {
  int child_a = -1;
  int child_b = -1;
  int midpoint = -1;
};

struct RefinementReport {
  std::vector<int> created;
  std::vector<int> destroyed;
  int bisections = 0;
  int closure_passes = 0;
};

/// Local edge enumeration (i<j, lexicographic): 2D (0,1),(0,2),(1,2);
/// 3D (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
std::array<int, 2> local_edge(int dim, int edge);
int local_edge_index(int dim, int i, int j);
inline int num_edges(int dim) { return dim == 2 ? 3 : 6; }

/// Array-backed ringed-vertex simplicial complex of dimension 2 or 3.
///
/// Vertices are never deleted, so vertex ids are stable across refinement and
/// a coarse mesh's vertices keep their ids in every refinement of it.
class Mesh {
 public:
  explicit Mesh(int dim = 2);

  int dim() const { return dim_; }

  int add_vertex(const Vec3& x, BoundaryClass bclass = BoundaryClass::interior);
  /// Adds a simplex; vertices are reordered to positive orientation if needed.
  /// Zero volume is rejected. Face flags follow the (possibly swapped) vertex order.
  int add_simplex(std::span<const int> verts, std::span<const BoundaryClass> faces);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_slots() const { return static_cast<int>(simplices_.size()); }
  int num_simplices() const { return live_count_; }
  const Vertex& vertex(int v) const { return vertices_[v]; }
  const Simplex& simplex(int s) const { return simplices_[s]; }
  bool is_live(int s) const { return s >= 0 && s < num_slots() && simplices_[s].alive; }
  /// Live simplex ids, ascending.
  std::vector<int> live_simplices() const;

  Vec3 point(int s, int local) const { return vertices_[simplices_[s].verts[local]].x; }
  double volume(int s) const;
  Vec3 barycenter(int s) const;

  /// Simplex sharing face `local_face` of `s`, or -1. Uses vertex rings.
  int neighbor(int s, int local_face) const;
  /// Live simplices containing both vertices a and b.
  std::vector<int> edge_star(int a, int b) const;

  /// Every interior face matched by exactly one neighbor, boundary faces by none.
  bool is_conforming() const;
  /// Local edge index of the refinement edge (longest edge in 2D, marked edge in 3D).
  int refinement_edge(int s) const;

  BisectResult bisect(int s);
  RefinementReport refine_marked(std::span<const int> marked, int max_passes = 100);

  /// Sets Simplex::root to the simplex's own id for all live simplices.
  void reset_roots();
  /// Recomputes vertex boundary classes from face flags.
  void classify_vertices();
  /// Replaces face classes: `classify(face_barycenter, current)` is called for every boundary face.
  template <class F>
  void relabel_boundary(F&& classify);

  const std::vector<LineageRecord>& lineage() const { return lineage_; }
  const LineageRecord& lineage(int id) const { return lineage_[id]; }

  /// Moves a vertex without any validity check (used by smoothing and tests).
  void move_vertex(int v, const Vec3& x) { vertices_[v].x = x; }

  /// Vertex-level invariants (ring coherence, boundary class consistency); throws MeshError.
  void check_invariants() const;

 private:
  struct EdgeKey {
    std::uint64_t key;
    bool operator==(const EdgeKey&) const = default;
  };
  struct EdgeHash {
    std::size_t operator()(const EdgeKey& e) const { return std::hash<std::uint64_t>{}(e.key); }
  };
  static EdgeKey edge_key(int a, int b);

  int allocate_slot();
  void release_slot(int s);
  void ring_insert(int v, int s);
  void ring_erase(int v, int s);
  int create_midpoint(int a, int b);
  bool has_split_edge(int s) const;
  void assign_initial_order(Simplex& s) const;
  int longest_edge_2d(int s) const;

  int dim_;
  std::vector<Vertex> vertices_;
  std::vector<Simplex> simplices_;
  std::vector<LineageRecord> lineage_;
  std::vector<int> free_slots_;
  std::vector<int> pending_free_;
  int live_count_ = 0;
  /// Edges bisected since the mesh was last conforming: (min,max) -> midpoint.
  std::unordered_map<EdgeKey, int, EdgeHash> split_edges_;
};

template <class F>
void Mesh::relabel_boundary(F&& classify) {
  for (auto& s : simplices_) {
    if (!s.alive) continue;
    for (int f = 0; f <= dim_; ++f) {
      if (s.face[f] == BoundaryClass::interior) continue;
      Vec3 c{0, 0, 0};
      for (int k = 0; k <= dim_; ++k) {
        if (k == f) continue;
        for (int a = 0; a < 3; ++a) c[a] += vertices_[s.verts[k]].x[a] / dim_;
      }
      s.face[f] = classify(c, s.face[f]);
    }
  }
  classify_vertices();
}

/// Normalized volume-to-edge-length quality: 0 for degenerate, negative if inverted,
/// 1/2 for equilateral triangles under this normalization.
double shape_measure(const Mesh& mesh, int s);
double shape_measure(std::span<const Vec3> points, int dim);
double signed_volume(std::span<const Vec3> points, int dim);

/// Inscribed-sphere diameter of a simplex or of a face (d-1 simplex, given its d vertices).
double inscribed_diameter(std::span<const Vec3> points, int dim);
double face_inscribed_diameter(std::span<const Vec3> points, int dim);
double face_measure(std::span<const Vec3> points, int dim);

struct BoundaryFace {
  int simplex = -1;
  int local_face = -1;
  BoundaryClass bclass = BoundaryClass::interior;
  Vec3 normal{};
};

/// Dirichlet and Neumann faces in ascending (simplex, face) order with outward unit normals.
std::vector<BoundaryFace> boundary_faces(const Mesh& mesh);

/// Outward unit normal of face `local_face` of simplex `s`.
Vec3 outward_normal(const Mesh& mesh, int s, int local_face);

/// One uniform refinement level: every simplex is bisected `dim` times (h halves).
RefinementReport refine_uniform(Mesh& mesh);

struct SmoothingReport {
  int accepted_moves = 0;
  int sweeps = 0;
  double min_quality_before = 0.0;
  double min_quality_after = 0.0;
  std::vector<int> inverted_before;  // simplices with non-positive shape measure
  std::vector<int> inverted_after;
};

/// Ring-local optimization of interior vertex positions. Never decreases the
/// minimum shape measure of any vertex ring; boundary vertices are fixed.
SmoothingReport smooth(Mesh& mesh, int iterations);

}  // namespace afem
