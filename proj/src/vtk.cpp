#include <afem/vtk.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>

namespace afem {

void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<NamedField>& fields, const IndicatorField* eta) {
  const int d = mesh.dim(), nv = mesh.num_vertices();
  const std::vector<int> live = mesh.live_simplices();
  for (const auto& f : fields)
    if (!f.field || f.field->num_vertices() != nv)
      throw Error("vtk: field '" + f.name + "' does not match the mesh vertex count");
  if (eta && static_cast<int>(eta->eta.size()) < mesh.num_slots())
    throw Error("vtk: indicator field does not cover the mesh");

  os << "# vtk DataFile Version 3.0\nafem\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << std::setprecision(17);
  os << "POINTS " << nv << " double\n";
  for (int v = 0; v < nv; ++v) {
    const Vec3& x = mesh.vertex(v).x;
    os << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  }
  os << "CELLS " << live.size() << ' ' << live.size() * (d + 2) << '\n';
  for (int s : live) {
    os << d + 1;
    for (int i = 0; i <= d; ++i) os << ' ' << mesh.simplex(s).verts[i];
    os << '\n';
  }
  os << "CELL_TYPES " << live.size() << '\n';
  for (std::size_t k = 0; k < live.size(); ++k) os << (d == 2 ? 5 : 10) << '\n';
  if (!fields.empty()) {
    os << "POINT_DATA " << nv << '\n';
    for (const auto& f : fields)
      for (int c = 0; c < f.field->ncomp; ++c) {
        const std::string name = f.field->ncomp == 1 ? f.name : f.name + "_" + std::to_string(c);
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (int v = 0; v < nv; ++v) os << f.field->at(v, c) << '\n';
      }
  }
  if (eta) {
    os << "CELL_DATA " << live.size() << "\nSCALARS eta double 1\nLOOKUP_TABLE default\n";
    for (int s : live) os << eta->eta[s] << '\n';
  }
  if (!os) throw Error("vtk: write failed");
}

void write_vtk(const std::string& path, const Mesh& mesh, const std::vector<NamedField>& fields,
               const IndicatorField* eta) {
  std::ofstream os(path);
  if (!os) throw Error("vtk: cannot open '" + path + "' for writing");
  write_vtk(os, mesh, fields, eta);
}

}  // namespace afem
