#pragma once

#include <fstream>
#include <span>
#include <string>

#include "nsrom/errors.hpp"
#include "nsrom/fem/space.hpp"
#include "nsrom/io/csv.hpp"

namespace nsrom {

// Legacy ASCII VTK on the vertex/triangle grid. Velocity is sampled at the
// vertices; pressure is optional.
inline void write_vtk(const std::string& path, const TaylorHoodSpace& space, std::span<const double> u,
                      std::span<const double> p = {}, const std::string& title = "nsrom field") {
  NSROM_REQUIRE(u.size() == space.velocity_dofs(), "write_vtk: velocity length mismatch");
  NSROM_REQUIRE(p.empty() || p.size() == space.pressure_dofs(), "write_vtk: pressure length mismatch");
  const Mesh& mesh = space.mesh();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertices.size() << " double\n";
  for (const Point& v : mesh.vertices) out << format_real(v.x) << ' ' << format_real(v.y) << " 0\n";
  out << "CELLS " << mesh.triangles.size() << ' ' << 4 * mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.triangles.size() << '\n';
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) out << "5\n";
  out << "POINT_DATA " << mesh.vertices.size() << "\nVECTORS velocity double\n";
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const std::size_t n = space.merged_node(v);
    out << format_real(u[2 * n]) << ' ' << format_real(u[2 * n + 1]) << " 0\n";
  }
  if (!p.empty()) {
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) out << format_real(p[space.pressure_dof_of_vertex(v)]) << '\n';
  }
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace nsrom
