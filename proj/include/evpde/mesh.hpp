#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "evpde/flowmap.hpp"
#include "evpde/geometry.hpp"

namespace evpde {

/// Piecewise-linear closed curve. Segments form one counter-clockwise cycle.
struct SurfaceMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 2>> segments;
  double t = 0.0;

  std::size_t num_nodes() const { return nodes.size(); }
  double segment_length(std::size_t e) const;
  /// Throws GeometryError unless every node has two incident segments forming a
  /// single cycle with positive lengths.
  void validate() const;
};

/// Triangulated planar domain. Triangles are counter-clockwise, boundary edges
/// are oriented with the domain on their left.
struct BulkMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> boundary_edges;
  std::vector<int> boundary_node_ids;
  double t = 0.0;

  std::size_t num_nodes() const { return nodes.size(); }
  double signed_area(std::size_t tri) const;
  void validate() const;
};

SurfaceMesh build_circle_mesh(int n);

/// Concentric-ring triangulation of the unit disk. Ring spacing and arc spacing
/// are at most h_target; the outermost ring lies on the unit circle and its
/// nodes come last in the node ordering.
BulkMesh build_disk_mesh(double h_target);

/// The boundary cycle of a bulk mesh as a surface mesh, in boundary_node_ids order.
SurfaceMesh boundary_surface(const BulkMesh& mesh);

/// Nodal transport through the flow map. Requires a reference snapshot (t = 0).
SurfaceMesh move_mesh(const SurfaceMesh& mesh, const FlowMap& map, double t);
BulkMesh move_mesh(const BulkMesh& mesh, const FlowMap& map, double t);

double mesh_size(const SurfaceMesh& mesh);
double mesh_size(const BulkMesh& mesh);

double total_measure(const SurfaceMesh& mesh);
double total_measure(const BulkMesh& mesh);

/// min/max segment length ratio.
double mesh_quality(const SurfaceMesh& mesh);
/// Smallest interior angle in radians.
double mesh_quality(const BulkMesh& mesh);

/// Named nodal fields attached to a VTK snapshot.
using PointData = std::map<std::string, std::vector<double>>;

/// Legacy ASCII VTK 3.0: POLYDATA with LINES for curves, UNSTRUCTURED_GRID for triangulations.
void write_vtk(std::ostream& os, const SurfaceMesh& mesh, const PointData& data = {});
void write_vtk(std::ostream& os, const BulkMesh& mesh, const PointData& data = {});
void write_vtk(const std::string& path, const SurfaceMesh& mesh, const PointData& data = {});
void write_vtk(const std::string& path, const BulkMesh& mesh, const PointData& data = {});

}  // namespace evpde
