#include <afem/mesh.hpp>
#include <afem/mesh_generators.hpp>

#include <gtest/gtest.h>

#include <oracles.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

using namespace afem;

namespace {

Mesh single_triangle(const std::vector<Vec3>& p) {
  std::vector<std::array<int, 4>> cells{{0, 1, 2, -1}};
  return build_mesh(2, p, cells, all_dirichlet());
}

void expect_ring_coherence(const Mesh& mesh) {
  for (int v = 0; v < mesh.num_vertices(); ++v)
    for (int s : mesh.vertex(v).ring) {
      ASSERT_TRUE(mesh.is_live(s));
      const auto& vs = mesh.simplex(s).verts;
      EXPECT_NE(std::find(vs.begin(), vs.begin() + mesh.dim() + 1, v), vs.begin() + mesh.dim() + 1);
    }
  for (int s : mesh.live_simplices())
    for (int k = 0; k <= mesh.dim(); ++k) {
      const auto& ring = mesh.vertex(mesh.simplex(s).verts[k]).ring;
      EXPECT_TRUE(std::binary_search(ring.begin(), ring.end(), s));
    }
}

}  // namespace

TEST(ShapeMeasure, CollinearTriangleIsZero) {
  const std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  EXPECT_DOUBLE_EQ(shape_measure(std::span<const Vec3>(p), 2), 0.0);
}

TEST(ShapeMeasure, RightAndEquilateralTriangles) {
  const std::vector<Vec3> right{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const std::vector<Vec3> equi{{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}};
  EXPECT_NEAR(shape_measure(std::span<const Vec3>(right), 2), std::sqrt(3.0) / 4, 1e-12);
  EXPECT_NEAR(shape_measure(std::span<const Vec3>(equi), 2), 0.5, 1e-12);
  EXPECT_NEAR(oracle::shape_measure(right, 2), std::sqrt(3.0) / 4, 1e-12);
}

TEST(ShapeMeasure, InvertedIsNegative) {
  const std::vector<Vec3> p{{0, 0, 0}, {0, 1, 0}, {1, 0, 0}};
  EXPECT_NEAR(shape_measure(std::span<const Vec3>(p), 2), -std::sqrt(3.0) / 4, 1e-12);
}

TEST(ShapeMeasure, AgreesWithOracleOnRandomSimplices) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int d : {2, 3})
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Vec3> p(d + 1);
      for (auto& x : p) x = {U(rng), U(rng), d == 3 ? U(rng) : 0.0};
      EXPECT_NEAR(shape_measure(std::span<const Vec3>(p), d), oracle::shape_measure(p, d), 1e-12);
    }
}

TEST(Bisect, RightTriangleSplitsHypotenuse) {
  Mesh m = single_triangle({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  const BisectResult r = m.bisect(0);
  EXPECT_EQ(m.num_simplices(), 2);
  EXPECT_EQ(m.vertex(r.midpoint).x, (Vec3{0.5, 0.5, 0}));
  for (int c : {r.child_a, r.child_b}) {
    EXPECT_GT(m.volume(c), 0);
    EXPECT_EQ(m.simplex(c).generation, 1);
    const auto& vs = m.simplex(c).verts;
    EXPECT_NE(std::find(vs.begin(), vs.begin() + 3, r.midpoint), vs.begin() + 3);
  }
  EXPECT_NEAR(m.volume(r.child_a) + m.volume(r.child_b), 0.5, 1e-15);
}

TEST(Bisect, DeadSimplexThrows) {
  Mesh m = single_triangle({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  m.bisect(0);
  EXPECT_THROW(m.bisect(0), MeshError);
}

TEST(RefineMarked, BothTrianglesOfSquareNeedNoClosure) {
  Mesh m = unit_square(1);
  const auto rep = m.refine_marked(std::vector<int>{0, 1});
  EXPECT_EQ(m.num_simplices(), 4);
  EXPECT_EQ(rep.bisections, 2);
  EXPECT_EQ(m.num_vertices(), 5);
  EXPECT_EQ(oracle::conformity_violation(m), "");
}

TEST(RefineMarked, SingleTriangleTriggersClosureOfNeighbor) {
  Mesh m = unit_square(1);
  const auto rep = m.refine_marked(std::vector<int>{0});
  // The neighbor shares the bisected diagonal, so closure bisects it once.
  EXPECT_EQ(m.num_simplices(), 4);
  EXPECT_EQ(rep.bisections, 2);
  EXPECT_GE(rep.closure_passes, 1);
  EXPECT_EQ(rep.destroyed.size(), 2u);
  EXPECT_EQ(rep.created.size(), 4u);
  EXPECT_EQ(oracle::conformity_violation(m), "");
  EXPECT_TRUE(m.is_conforming());
}

TEST(RefineMarked, EmptyMarkedSetIsNoOp) {
  Mesh m = unit_square(2);
  const auto rep = m.refine_marked(std::vector<int>{});
  EXPECT_EQ(rep.bisections, 0);
  EXPECT_EQ(rep.closure_passes, 0);
  EXPECT_EQ(m.num_simplices(), 8);
}

TEST(RefineMarked, CubeUniformRoundsStayConforming) {
  Mesh m = unit_cube(1);
  for (int round = 0; round < 10; ++round) {
    const auto live = m.live_simplices();
    m.refine_marked(live);
    ASSERT_EQ(oracle::conformity_violation(m), "") << "round " << round;
  }
  EXPECT_EQ(m.num_simplices(), 6 * 1024);
}

TEST(RefineMarked, RandomMarkingKeepsInvariants) {
  std::mt19937 rng(11);
  for (int d : {2, 3}) {
    Mesh m = d == 2 ? unit_square(3) : unit_cube(1);
    double qmin0 = 1e300;
    for (int s : m.live_simplices()) qmin0 = std::min(qmin0, shape_measure(m, s));
    for (int round = 0; round < 8; ++round) {
      std::vector<int> marked;
      for (int s : m.live_simplices())
        if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.2) marked.push_back(s);
      m.refine_marked(marked);
      ASSERT_EQ(oracle::conformity_violation(m), "");
      m.check_invariants();
      expect_ring_coherence(m);
      double qmin = 1e300, vol = 0;
      for (int s : m.live_simplices()) {
        qmin = std::min(qmin, shape_measure(m, s));
        vol += m.volume(s);
      }
      EXPECT_GE(qmin, 0.2 * qmin0);
      EXPECT_NEAR(vol, 1.0, 1e-12);
    }
  }
}

TEST(Bisect, ChildVolumesSumToParent) {
  for (int d : {2, 3}) {
    Mesh m = d == 2 ? unit_square(2) : unit_cube(1);
    for (int round = 0; round < 3; ++round)
      for (int s : m.live_simplices()) {
        if (!m.is_live(s)) continue;
        const double parent = m.volume(s);
        const BisectResult r = m.bisect(s);
        EXPECT_NEAR(m.volume(r.child_a) + m.volume(r.child_b), parent, 1e-12 * parent);
      }
  }
}

TEST(Genealogy, ChildrenDescendFromParent) {
  Mesh m = unit_cube(1);
  for (int round = 0; round < 4; ++round) {
    const auto live = m.live_simplices();
    m.refine_marked(std::vector<int>(live.begin(), live.begin() + live.size() / 2));
  }
  for (int s : m.live_simplices()) {
    const auto& S = m.simplex(s);
    if (S.parent < 0) continue;
    const auto& P = m.lineage(S.parent);
    EXPECT_EQ(S.generation, P.generation + 1);
    // d of the child's vertices are parent vertices; the other is a midpoint of a parent edge.
    int shared = 0;
    for (int k = 0; k < 4; ++k) {
      const int v = S.verts[k];
      if (std::find(P.verts.begin(), P.verts.end(), v) != P.verts.end()) {
        ++shared;
      } else {
        const auto par = m.vertex(v).parents;
        EXPECT_NE(std::find(P.verts.begin(), P.verts.end(), par[0]), P.verts.end());
        EXPECT_NE(std::find(P.verts.begin(), P.verts.end(), par[1]), P.verts.end());
      }
    }
    EXPECT_EQ(shared, 3);
  }
}

TEST(Neighbors, RingLookupMatchesExhaustiveScan) {
  Mesh m = unit_cube(2);
  m.refine_marked(std::vector<int>{0, 5, 17});
  const auto live = m.live_simplices();
  for (int s : live)
    for (int f = 0; f < 4; ++f) {
      std::set<int> face;
      for (int k = 0; k < 4; ++k)
        if (k != f) face.insert(m.simplex(s).verts[k]);
      int expect = -1;
      for (int t : live) {
        if (t == s) continue;
        int hits = 0;
        for (int k = 0; k < 4; ++k) hits += face.count(m.simplex(t).verts[k]);
        if (hits == 3) expect = t;
      }
      EXPECT_EQ(m.neighbor(s, f), expect);
    }
}

TEST(BoundaryFaces, TwoTriangleSquareNormals) {
  const Mesh m = unit_square(1);
  const auto faces = boundary_faces(m);
  ASSERT_EQ(faces.size(), 4u);
  std::set<std::pair<long, long>> normals;
  for (const auto& f : faces) {
    EXPECT_EQ(f.bclass, BoundaryClass::dirichlet);
    EXPECT_NEAR(norm3(f.normal), 1.0, 1e-15);
    normals.insert({std::lround(f.normal[0]), std::lround(f.normal[1])});
  }
  const std::set<std::pair<long, long>> expect{{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
  EXPECT_EQ(normals, expect);
}

TEST(BoundaryFaces, MixedFlags) {
  const Mesh m = unit_square(1, [](const Vec3& c) { return c[1] < 1e-12 ? BoundaryClass::neumann : BoundaryClass::dirichlet; });
  int neu = 0, dir = 0;
  for (const auto& f : boundary_faces(m)) (f.bclass == BoundaryClass::neumann ? neu : dir)++;
  EXPECT_EQ(neu, 1);
  EXPECT_EQ(dir, 3);
}

TEST(BoundaryFaces, NormalsPointAwayFromCube) {
  const Mesh m = unit_cube(2);
  for (const auto& f : boundary_faces(m)) {
    const Vec3 c = m.barycenter(f.simplex);
    Vec3 fc{0, 0, 0};
    for (int k = 0; k < 4; ++k)
      if (k != f.local_face)
        for (int a = 0; a < 3; ++a) fc[a] += m.point(f.simplex, k)[a] / 3;
    EXPECT_GT(dot3(sub3(fc, c), f.normal), 0);
  }
}

TEST(BoundaryFaces, ClosedSurfaceHasNone) {
  // All faces flagged interior: nothing to enumerate.
  Mesh m(2);
  for (const Vec3& x : {Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}}) m.add_vertex(x);
  const std::array<int, 3> v{0, 1, 2};
  const std::array<BoundaryClass, 3> f{};
  m.add_simplex(v, f);
  EXPECT_TRUE(boundary_faces(m).empty());
}

TEST(Smooth, StructuredMeshIsLocalOptimum) {
  Mesh m = unit_square(4);
  const auto rep = smooth(m, 5);
  EXPECT_EQ(rep.accepted_moves, 0);
}

TEST(Smooth, PerturbedVertexImproves) {
  Mesh m = unit_square(4);
  int center = -1;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.vertex(v).x == Vec3{0.5, 0.5, 0}) center = v;
  ASSERT_GE(center, 0);
  m.move_vertex(center, {0.5 + 0.2, 0.5 + 0.05, 0});
  double before = 1e300;
  for (int s : m.vertex(center).ring) before = std::min(before, shape_measure(m, s));
  const auto rep = smooth(m, 3);
  double after = 1e300;
  for (int s : m.vertex(center).ring) after = std::min(after, shape_measure(m, s));
  EXPECT_GT(rep.accepted_moves, 0);
  EXPECT_GT(after, before);
  EXPECT_GE(rep.min_quality_after, rep.min_quality_before);
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.vertex(v).bclass != BoundaryClass::interior) {
      const Vec3 x = m.vertex(v).x;
      EXPECT_TRUE(x[0] == 0 || x[0] == 1 || x[1] == 0 || x[1] == 1);
    }
}

TEST(Smooth, InvertedElementIsReported) {
  Mesh m = unit_square(2);
  int center = -1;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.vertex(v).x == Vec3{0.5, 0.5, 0}) center = v;
  m.move_vertex(center, {1.2, 0.5, 0});
  const auto rep = smooth(m, 2);
  EXPECT_FALSE(rep.inverted_before.empty());
  EXPECT_LE(rep.min_quality_before, 0.0);
}

TEST(UniformRefinement, HalvesMeshSize) {
  Mesh m = unit_square(2);
  refine_uniform(m);
  EXPECT_EQ(m.num_vertices(), 25);
  EXPECT_EQ(m.num_simplices(), 32);
  Mesh c = unit_cube(1);
  refine_uniform(c);
  EXPECT_EQ(c.num_vertices(), 27);
  EXPECT_EQ(oracle::conformity_violation(c), "");
}

TEST(Generators, VolumesAndConformity) {
  const double pi = std::acos(-1.0);
  struct Case {
    Mesh mesh;
    double volume;
    double tol;
  };
  std::vector<Case> cases;
  cases.push_back({unit_square(3), 1.0, 1e-14});
  cases.push_back({unit_cube(2), 1.0, 1e-14});
  cases.push_back({l_shape(2), 3.0, 1e-14});
  cases.push_back({annulus(4, 64, 0.5, 2.0), pi * (4.0 - 0.25), 0.02});
  for (const auto& c : cases) {
    EXPECT_EQ(oracle::conformity_violation(c.mesh), "");
    double vol = 0;
    for (int s : c.mesh.live_simplices()) {
      EXPECT_GT(c.mesh.volume(s), 0);
      vol += c.mesh.volume(s);
    }
    EXPECT_NEAR(vol, c.volume, c.tol * c.volume);
  }
  // Cell centres nearest the origin sit at distance sqrt(3)/4.
  const Mesh sib = sphere_in_box(2, 0.5);
  EXPECT_EQ(oracle::conformity_violation(sib), "");
  EXPECT_LT(sib.num_simplices(), 6 * 64);
}
