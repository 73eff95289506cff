#pragma once

#include <afem/mesh.hpp>

#include <iosfwd>
#include <string>

namespace afem {

/// Line-oriented text format with header `AFEM-MESH 1`. Vertices are written with
/// their ids; live simplices are renumbered densely from 0.
void write_mesh(std::ostream& os, const Mesh& mesh);
void write_mesh(const std::string& path, const Mesh& mesh);

/// Rejects duplicate ids, unknown references, negative or zero volumes,
/// inconsistent boundary classes and nonconforming input (MeshError).
Mesh read_mesh(std::istream& is);
Mesh read_mesh_file(const std::string& path);

}  // namespace afem
