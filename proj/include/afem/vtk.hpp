#pragma once

#include <afem/indicators.hpp>
#include <afem/mesh.hpp>
#include <afem/solution.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace afem {

struct NamedField {
  std::string name;
  const SolutionField* field = nullptr;
};

/// Legacy ASCII VTK unstructured grid: all vertices as POINTS, live simplices as
/// cells (type 5 triangles, type 10 tetrahedra), one POINT_DATA scalar per field
/// component (`name` for one component, `name_<c>` otherwise) and CELL_DATA "eta".
void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<NamedField>& fields = {},
               const IndicatorField* eta = nullptr);
void write_vtk(const std::string& path, const Mesh& mesh, const std::vector<NamedField>& fields = {},
               const IndicatorField* eta = nullptr);

}  // namespace afem
