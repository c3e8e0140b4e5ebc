#include <fstream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "evpde/mesh.hpp"

namespace evpde {

namespace {

void write_header(std::ostream& os, const char* dataset, double t) {
  os << "# vtk DataFile Version 3.0\n";
  fmt::print(os, "evpde snapshot t={:.17g}\n", t);
  os << "ASCII\n";
  os << "DATASET " << dataset << "\n";
}

void write_points(std::ostream& os, const std::vector<Vec2>& nodes) {
  fmt::print(os, "POINTS {} double\n", nodes.size());
  for (const auto& x : nodes) fmt::print(os, "{:.17g} {:.17g} 0\n", x.x(), x.y());
}

void write_point_data(std::ostream& os, std::size_t num_nodes, const PointData& data) {
  if (data.empty()) return;
  fmt::print(os, "POINT_DATA {}\n", num_nodes);
  for (const auto& [name, values] : data) {
    if (values.size() != num_nodes) {
      throw std::invalid_argument("write_vtk: field '" + name + "' has wrong length");
    }
    fmt::print(os, "SCALARS {} double 1\nLOOKUP_TABLE default\n", name);
    for (double v : values) fmt::print(os, "{:.17g}\n", v);
  }
}

template <class Mesh>
void write_file(const std::string& path, const Mesh& mesh, const PointData& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_vtk: cannot open " + path);
  write_vtk(out, mesh, data);
}

}  // namespace

void write_vtk(std::ostream& os, const SurfaceMesh& mesh, const PointData& data) {
  write_header(os, "POLYDATA", mesh.t);
  write_points(os, mesh.nodes);
  fmt::print(os, "LINES {} {}\n", mesh.segments.size(), 3 * mesh.segments.size());
  for (const auto& [a, b] : mesh.segments) fmt::print(os, "2 {} {}\n", a, b);
  write_point_data(os, mesh.nodes.size(), data);
}

void write_vtk(std::ostream& os, const BulkMesh& mesh, const PointData& data) {
  write_header(os, "UNSTRUCTURED_GRID", mesh.t);
  write_points(os, mesh.nodes);
  fmt::print(os, "CELLS {} {}\n", mesh.triangles.size(), 4 * mesh.triangles.size());
  for (const auto& [a, b, c] : mesh.triangles) fmt::print(os, "3 {} {} {}\n", a, b, c);
  fmt::print(os, "CELL_TYPES {}\n", mesh.triangles.size());
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) os << "5\n";
  write_point_data(os, mesh.nodes.size(), data);
}

void write_vtk(const std::string& path, const SurfaceMesh& mesh, const PointData& data) {
  write_file(path, mesh, data);
}

void write_vtk(const std::string& path, const BulkMesh& mesh, const PointData& data) {
  write_file(path, mesh, data);
}

}  // namespace evpde
