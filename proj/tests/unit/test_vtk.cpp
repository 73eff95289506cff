#include <afem/mesh_generators.hpp>
#include <afem/vtk.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace afem;

namespace {

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::string render(const Mesh& m, const std::vector<NamedField>& f = {}, const IndicatorField* eta = nullptr) {
  std::ostringstream os;
  write_vtk(os, m, f, eta);
  return os.str();
}

}  // namespace

TEST(Vtk, TwoTriangleSquareWithUnitField) {
  const Mesh m = unit_square(1);
  const SolutionField u(4, 1, 1.0);
  const auto L = lines_of(render(m, {{"u", &u}}));
  ASSERT_GE(L.size(), 4u);
  EXPECT_EQ(L[0], "# vtk DataFile Version 3.0");
  EXPECT_EQ(L[2], "ASCII");
  EXPECT_EQ(L[3], "DATASET UNSTRUCTURED_GRID");
  EXPECT_EQ(L[4], "POINTS 4 double");
  EXPECT_EQ(L[9], "CELLS 2 8");
  EXPECT_EQ(L[12], "CELL_TYPES 2");
  EXPECT_EQ(L[13], "5");
  EXPECT_EQ(L[14], "5");
  EXPECT_EQ(L[15], "POINT_DATA 4");
  EXPECT_EQ(L[16], "SCALARS u double 1");
  EXPECT_EQ(L[17], "LOOKUP_TABLE default");
  for (int k = 18; k < 22; ++k) EXPECT_EQ(L[k], "1");
  EXPECT_EQ(L.size(), 22u);
}

TEST(Vtk, GeometryOnlyWithoutFields) {
  const std::string s = render(unit_cube(1));
  EXPECT_EQ(s.find("POINT_DATA"), std::string::npos);
  EXPECT_EQ(s.find("CELL_DATA"), std::string::npos);
  EXPECT_NE(s.find("CELLS 6 30"), std::string::npos);
  EXPECT_NE(s.find("\n10\n"), std::string::npos);
}

TEST(Vtk, MultiComponentNamesAndIndicatorCells) {
  Mesh m = unit_square(2);
  m.refine_marked(std::vector<int>{0});
  SolutionField w(m.num_vertices(), 2, 0.5);
  IndicatorField eta;
  eta.eta.assign(m.num_slots(), 0.25);
  const std::string s = render(m, {{"W", &w}}, &eta);
  EXPECT_NE(s.find("SCALARS W_0 double 1"), std::string::npos);
  EXPECT_NE(s.find("SCALARS W_1 double 1"), std::string::npos);
  EXPECT_NE(s.find("CELL_DATA " + std::to_string(m.num_simplices()) + "\nSCALARS eta"), std::string::npos);
}

TEST(Vtk, MismatchedFieldRejected) {
  const Mesh m = unit_square(1);
  const SolutionField u(3, 1);
  EXPECT_THROW(render(m, {{"u", &u}}), Error);
}

TEST(Vtk, IndependentReaderRecoversCoordinates) {
  if (std::system("python3 -c 'import meshio' >/dev/null 2>&1") != 0) GTEST_SKIP() << "meshio not available";
  Mesh m = unit_square(3);
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> U(0.02, 0.05);
  // Irrational-looking coordinates exercise full-precision output.
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.vertex(v).bclass == BoundaryClass::interior) {
      Vec3 x = m.vertex(v).x;
      x[0] += U(rng) / 3.0;
      x[1] -= U(rng) / 7.0;
      m.move_vertex(v, x);
    }
  m.refine_marked(std::vector<int>{2, 5});
  const auto dir = std::filesystem::temp_directory_path() / "afem_vtk_test";
  std::filesystem::create_directories(dir);
  const auto vtk = dir / "m.vtk", txt = dir / "pts.txt";
  const SolutionField u = interpolate(m, 1, [](const Vec3& x) { return Components{x[0] * x[1]}; });
  write_vtk(vtk.string(), m, {{"u", &u}});
  const std::string cmd = "python3 -c \"import meshio,sys; m=meshio.read(sys.argv[1]); "
                          "f=open(sys.argv[2],'w'); "
                          "[f.write(' '.join(repr(float(c)) for c in p)+'\\n') for p in m.points]; "
                          "f.write(str(sum(len(b.data) for b in m.cells))+'\\n')\" " +
                          vtk.string() + " " + txt.string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  std::ifstream is(txt);
  for (int v = 0; v < m.num_vertices(); ++v) {
    double x, y, z;
    ASSERT_TRUE(is >> x >> y >> z);
    EXPECT_EQ(x, m.vertex(v).x[0]);
    EXPECT_EQ(y, m.vertex(v).x[1]);
    EXPECT_EQ(z, 0.0);
  }
  int cells = 0;
  is >> cells;
  EXPECT_EQ(cells, m.num_simplices());
}
