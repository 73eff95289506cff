#include <afem/mesh_io.hpp>

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace afem {

namespace {

BoundaryClass parse_class(long code, const std::string& what) {
  if (code < 0 || code > 2) throw MeshError("mesh file: invalid " + what + " code " + std::to_string(code));
  return static_cast<BoundaryClass>(code);
}

struct LineReader {
  std::istream& is;
  int line_no = 0;

  std::istringstream next(const char* context) {
    std::string line;
    while (std::getline(is, line)) {
      ++line_no;
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      return std::istringstream(line);
    }
    throw MeshError(std::string("mesh file: unexpected end of input while reading ") + context);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw MeshError("mesh file line " + std::to_string(line_no) + ": " + msg);
  }
};

}  // namespace

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const int d = mesh.dim();
  os << "AFEM-MESH 1\n";
  os << "dim " << d << "\n";
  os << "vertices " << mesh.num_vertices() << "\n";
  os << std::setprecision(17);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const auto& vx = mesh.vertex(v);
    os << v;
    for (int a = 0; a < d; ++a) os << ' ' << vx.x[a];
    os << ' ' << static_cast<int>(vx.bclass) << "\n";
  }
  const auto live = mesh.live_simplices();
  os << "simplices " << live.size() << "\n";
  for (std::size_t k = 0; k < live.size(); ++k) {
    const auto& s = mesh.simplex(live[k]);
    os << k;
    for (int i = 0; i <= d; ++i) os << ' ' << s.verts[i];
    for (int i = 0; i <= d; ++i) os << ' ' << static_cast<int>(s.face[i]);
    os << "\n";
  }
}

void write_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_mesh(os, mesh);
  if (!os) throw Error("failed writing " + path);
}

Mesh read_mesh(std::istream& is) {
  LineReader rd{is};
  {
    auto ls = rd.next("header");
    std::string tag;
    int version = 0;
    if (!(ls >> tag >> version) || tag != "AFEM-MESH") rd.fail("missing AFEM-MESH header");
    if (version != 1) rd.fail("unsupported format version " + std::to_string(version));
  }
  int dim = 0;
  {
    auto ls = rd.next("dim");
    std::string key;
    if (!(ls >> key >> dim) || key != "dim") rd.fail("expected 'dim <2|3>'");
    if (dim != 2 && dim != 3) rd.fail("dim must be 2 or 3");
  }
  Mesh mesh(dim);
  long nv = 0;
  {
    auto ls = rd.next("vertex count");
    std::string key;
    if (!(ls >> key >> nv) || key != "vertices" || nv < 0) rd.fail("expected 'vertices <n>'");
  }
  std::unordered_map<long, int> vid;
  for (long k = 0; k < nv; ++k) {
    auto ls = rd.next("vertex");
    long id = 0, code = 0;
    Vec3 x{0, 0, 0};
    if (!(ls >> id)) rd.fail("bad vertex id");
    for (int a = 0; a < dim; ++a)
      if (!(ls >> x[a])) rd.fail("bad vertex coordinate");
    if (!(ls >> code)) rd.fail("missing vertex boundary class");
    if (vid.count(id)) rd.fail("duplicate vertex id " + std::to_string(id));
    vid[id] = mesh.add_vertex(x, parse_class(code, "vertex boundary class"));
  }
  long ns = 0;
  {
    auto ls = rd.next("simplex count");
    std::string key;
    if (!(ls >> key >> ns) || key != "simplices" || ns < 0) rd.fail("expected 'simplices <m>'");
  }
  std::unordered_map<long, int> sid;
  for (long k = 0; k < ns; ++k) {
    auto ls = rd.next("simplex");
    long id = 0;
    if (!(ls >> id)) rd.fail("bad simplex id");
    if (sid.count(id)) rd.fail("duplicate simplex id " + std::to_string(id));
    std::array<int, 4> v{};
    std::array<BoundaryClass, 4> f{};
    std::array<Vec3, 4> p{};
    for (int i = 0; i <= dim; ++i) {
      long ref = 0;
      if (!(ls >> ref)) rd.fail("bad simplex vertex reference");
      auto it = vid.find(ref);
      if (it == vid.end()) rd.fail("simplex references unknown vertex " + std::to_string(ref));
      v[i] = it->second;
      p[i] = mesh.vertex(v[i]).x;
    }
    for (int i = 0; i <= dim; ++i) {
      long code = 0;
      if (!(ls >> code)) rd.fail("missing face code");
      f[i] = parse_class(code, "face");
    }
    const double vol = signed_volume(std::span<const Vec3>(p.data(), dim + 1), dim);
    if (!(vol > 0.0)) rd.fail("simplex " + std::to_string(id) + " has non-positive volume");
    sid[id] = mesh.add_simplex(std::span<const int>(v.data(), dim + 1),
                               std::span<const BoundaryClass>(f.data(), dim + 1));
  }
  if (!mesh.is_conforming()) throw MeshError("mesh file: input mesh is not conforming");
  mesh.check_invariants();
  return mesh;
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw MeshError("cannot open mesh file " + path);
  return read_mesh(is);
}

}  // namespace afem
