#include <afem/mesh_generators.hpp>
#include <afem/mesh_io.hpp>

#include <gtest/gtest.h>

#include <oracles.hpp>

#include <sstream>

using namespace afem;

namespace {

Mesh parse(const std::string& text) {
  std::istringstream is(text);
  return read_mesh(is);
}

const char* kTwoTriangles =
    "AFEM-MESH 1\n"
    "dim 2\n"
    "vertices 4\n"
    "0 0 0 1\n1 1 0 1\n2 0 1 1\n3 1 1 1\n"
    "simplices 2\n"
    "0 0 1 3 1 0 1\n"
    "1 0 3 2 1 1 0\n";

}  // namespace

TEST(MeshIo, RoundTripPreservesGeometryAndFlags) {
  for (int d : {2, 3}) {
    Mesh m = d == 2 ? unit_square(2) : unit_cube(1);
    m.refine_marked(std::vector<int>{0, 3});
    std::ostringstream os;
    write_mesh(os, m);
    const Mesh r = parse(os.str());
    ASSERT_EQ(r.num_vertices(), m.num_vertices());
    ASSERT_EQ(r.num_simplices(), m.num_simplices());
    for (int v = 0; v < m.num_vertices(); ++v) {
      EXPECT_EQ(r.vertex(v).x, m.vertex(v).x);
      EXPECT_EQ(r.vertex(v).bclass, m.vertex(v).bclass);
    }
    EXPECT_EQ(oracle::conformity_violation(r), "");
    std::ostringstream again;
    write_mesh(again, r);
    EXPECT_EQ(again.str(), os.str());
  }
}

TEST(MeshIo, ParsesHandWrittenFile) {
  const Mesh m = parse(kTwoTriangles);
  EXPECT_EQ(m.num_simplices(), 2);
  EXPECT_EQ(boundary_faces(m).size(), 4u);
}

TEST(MeshIo, RejectsBadInput) {
  const std::string good = kTwoTriangles;
  auto with = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  EXPECT_THROW(parse("AFEM-MESH 2\n"), MeshError);
  EXPECT_THROW(parse("MESH 1\n"), MeshError);
  EXPECT_THROW(parse(with("dim 2", "dim 4")), MeshError);
  EXPECT_THROW(parse(with("3 1 1 1\n", "2 1 1 1\n")), MeshError);          // duplicate vertex id
  EXPECT_THROW(parse(with("1 0 3 2 1 1 0", "0 0 3 2 1 1 0")), MeshError);  // duplicate simplex id
  EXPECT_THROW(parse(with("1 0 3 2 1 1 0", "1 0 3 9 1 1 0")), MeshError);  // unknown vertex
  EXPECT_THROW(parse(with("1 0 3 2 1 1 0", "1 0 2 3 1 0 1")), MeshError);  // negative volume
  EXPECT_THROW(parse(with("1 0 3 2 1 1 0", "1 0 3 2 1 1 7")), MeshError);  // bad face code
  EXPECT_THROW(parse(with("simplices 2", "simplices 3")), MeshError);      // truncated
}

TEST(MeshIo, RejectsNonconformingInput) {
  // Triangle 1 uses the midpoint of the diagonal of triangle 0: a hanging vertex.
  const char* text =
      "AFEM-MESH 1\ndim 2\nvertices 5\n"
      "0 0 0 1\n1 1 0 1\n2 0 1 1\n3 1 1 1\n4 0.5 0.5 0\n"
      "simplices 3\n"
      "0 0 1 3 1 0 1\n"
      "1 0 4 2 1 0 0\n"
      "2 4 3 2 1 0 0\n";
  EXPECT_THROW(parse(text), MeshError);
}

TEST(MeshIo, MissingFileIsMeshError) { EXPECT_THROW(read_mesh_file("/nonexistent/x.afem"), MeshError); }
