#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "evpde/errors.hpp"
#include "evpde/mesh.hpp"

using namespace evpde;

namespace {

constexpr double kPi = std::numbers::pi;

double max_edge(const BulkMesh& mesh) {
  double h = 0.0;
  for (const auto& tri : mesh.triangles) {
    for (int i = 0; i < 3; ++i) h = std::max(h, (mesh.nodes[tri[i]] - mesh.nodes[tri[(i + 1) % 3]]).norm());
  }
  return h;
}

}  // namespace

TEST(CircleMesh, InscribedSquarePerimeter) {
  const SurfaceMesh mesh = build_circle_mesh(4);
  EXPECT_NEAR(total_measure(mesh), 4.0 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(mesh_size(mesh), std::sqrt(2.0), 1e-14);
}

TEST(CircleMesh, MinimalCycle) {
  const SurfaceMesh mesh = build_circle_mesh(3);
  EXPECT_EQ(mesh.nodes.size(), 3u);
  EXPECT_EQ(mesh.segments.size(), 3u);
  EXPECT_NO_THROW(mesh.validate());
  EXPECT_EQ(mesh.t, 0.0);
}

TEST(CircleMesh, PerimeterConvergesToTwoPi) {
  const SurfaceMesh mesh = build_circle_mesh(256);
  EXPECT_NEAR(total_measure(mesh), 2.0 * 256 * std::sin(kPi / 256), 1e-12);
  EXPECT_NEAR(total_measure(mesh), 2.0 * kPi, 1e-3);
  EXPECT_NEAR(mesh_size(mesh), 2.0 * kPi / 256, 1e-4);
}

TEST(CircleMesh, RejectsTooFewSegments) { EXPECT_THROW(build_circle_mesh(2), std::invalid_argument); }

TEST(CircleMesh, NodesOnUnitCircleCounterClockwise) {
  const SurfaceMesh mesh = build_circle_mesh(16);
  for (std::size_t k = 0; k < mesh.nodes.size(); ++k) {
    EXPECT_NEAR(mesh.nodes[k].norm(), 1.0, 1e-15);
    EXPECT_NEAR(std::atan2(mesh.nodes[k].y(), mesh.nodes[k].x()),
                std::remainder(2.0 * kPi * static_cast<double>(k) / 16.0, 2.0 * kPi), 1e-14);
  }
}

TEST(SurfaceMesh, ValidateRejectsBrokenCycles) {
  SurfaceMesh mesh = build_circle_mesh(6);
  mesh.segments[2] = {2, 2};
  EXPECT_THROW(mesh.validate(), GeometryError);

  SurfaceMesh two = build_circle_mesh(6);
  two.segments = {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}};
  EXPECT_THROW(two.validate(), GeometryError);
}

TEST(DiskMesh, AreaCloseToPi) {
  EXPECT_NEAR(total_measure(build_disk_mesh(0.5)), kPi, 0.05 * kPi);
  EXPECT_NEAR(total_measure(build_disk_mesh(0.1)), kPi, 0.005 * kPi);
}

TEST(DiskMesh, StructuralInvariants) {
  for (double h : {0.5, 0.3, 0.2, 0.1, 0.05}) {
    const BulkMesh mesh = build_disk_mesh(h);
    EXPECT_NO_THROW(mesh.validate());
    EXPECT_LE(max_edge(mesh), 1.5 * h) << h;
    EXPECT_NEAR(mesh_size(mesh), max_edge(mesh), 1e-15);
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) EXPECT_GT(mesh.signed_area(k), 0.0);
    // Boundary nodes lie on the unit circle and come last.
    const std::size_t nb = mesh.boundary_node_ids.size();
    for (std::size_t k = 0; k < nb; ++k) {
      EXPECT_EQ(mesh.boundary_node_ids[k], static_cast<int>(mesh.num_nodes() - nb + k));
      EXPECT_NEAR(mesh.nodes[mesh.boundary_node_ids[k]].norm(), 1.0, 1e-15);
    }
    std::set<int> from_edges;
    for (const auto& e : mesh.boundary_edges) from_edges.insert({e[0], e[1]});
    EXPECT_EQ(from_edges, std::set<int>(mesh.boundary_node_ids.begin(), mesh.boundary_node_ids.end()));
    EXPECT_GT(mesh_quality(mesh), 0.3);
  }
}

TEST(DiskMesh, BoundaryIsCounterClockwiseCycle) {
  const BulkMesh mesh = build_disk_mesh(0.2);
  const SurfaceMesh boundary = boundary_surface(mesh);
  EXPECT_NO_THROW(boundary.validate());
  double signed_area = 0.0;
  for (const auto& [a, b] : boundary.segments) signed_area += 0.5 * cross(boundary.nodes[a], boundary.nodes[b]);
  EXPECT_GT(signed_area, 0.0);
  EXPECT_NEAR(signed_area, total_measure(mesh), 1e-12);
}

TEST(DiskMesh, RejectsInfeasibleSize) {
  EXPECT_THROW(build_disk_mesh(0.0), std::invalid_argument);
  EXPECT_THROW(build_disk_mesh(1.0), std::invalid_argument);
  EXPECT_THROW(build_disk_mesh(-0.2), std::invalid_argument);
}

TEST(MoveMesh, IdentityAtTimeZero) {
  const BulkMesh mesh = build_disk_mesh(0.3);
  const BulkMesh moved = move_mesh(mesh, FlowMap(Family::OscillatingEllipse), 0.0);
  for (std::size_t k = 0; k < mesh.num_nodes(); ++k) {
    EXPECT_EQ(moved.nodes[k].x(), mesh.nodes[k].x());
    EXPECT_EQ(moved.nodes[k].y(), mesh.nodes[k].y());
  }
}

TEST(MoveMesh, ExpandingCircleDilates) {
  const SurfaceMesh mesh = build_circle_mesh(64);
  const SurfaceMesh moved = move_mesh(mesh, FlowMap(Family::ExpandingCircle), 1.0);
  EXPECT_EQ(moved.t, 1.0);
  for (const Vec2& x : moved.nodes) EXPECT_NEAR(x.norm(), 1.5, 1e-12);
  EXPECT_NEAR(mesh_size(moved), 1.5 * mesh_size(mesh), 1e-12);
  EXPECT_EQ(moved.segments, mesh.segments);
}

TEST(MoveMesh, EllipseAreaScalesWithDeterminant) {
  const BulkMesh mesh = build_disk_mesh(0.2);
  const BulkMesh moved = move_mesh(mesh, FlowMap(Family::OscillatingEllipse), 0.25);
  EXPECT_NEAR(total_measure(moved), 1.25 * kPi, 0.02 * 1.25 * kPi);
  EXPECT_NEAR(total_measure(moved), 1.25 * total_measure(mesh), 1e-12);
}

TEST(MoveMesh, PreservesInvariantsAndQuality) {
  const BulkMesh disk = build_disk_mesh(0.2);
  const SurfaceMesh circle = build_circle_mesh(40);
  for (const auto& id : FlowMap::known_ids()) {
    const FlowMap map = FlowMap::from_id(id);
    for (double t : {0.1, 0.25, 0.5, 0.75, 1.0}) {
      const BulkMesh b = move_mesh(disk, map, t);
      EXPECT_NO_THROW(b.validate());
      // Affine maps with singular values in [0.75, 1.5] shrink angles by a bounded factor.
      EXPECT_GT(mesh_quality(b), 0.5 * mesh_quality(disk)) << id;
      const SurfaceMesh c = move_mesh(circle, map, t);
      EXPECT_NO_THROW(c.validate());
      EXPECT_GT(mesh_quality(c), 0.5 * mesh_quality(circle)) << id;
    }
  }
}

TEST(MoveMesh, RequiresReferenceSnapshot) {
  const FlowMap map(Family::ExpandingCircle);
  const SurfaceMesh moved = move_mesh(build_circle_mesh(8), map, 0.5);
  EXPECT_THROW(move_mesh(moved, map, 0.7), std::invalid_argument);
}

TEST(MoveMesh, InvertedTriangleNamesElement) {
  BulkMesh mesh = build_disk_mesh(0.4);
  std::swap(mesh.triangles[3][0], mesh.triangles[3][1]);
  try {
    move_mesh(mesh, FlowMap(Family::Static), 0.5);
    FAIL() << "expected GeometryError";
  } catch (const GeometryError& e) {
    EXPECT_NE(std::string(e.what()).find("triangle 3"), std::string::npos) << e.what();
  }
}

TEST(Vtk, CurveLayout) {
  const SurfaceMesh mesh = build_circle_mesh(4);
  std::ostringstream os;
  write_vtk(os, mesh, {{"u", {1.0, 2.0, 3.0, 4.0}}});
  const std::string text = os.str();
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# vtk DataFile Version 3.0");
  EXPECT_NE(text.find("DATASET POLYDATA"), std::string::npos);
  EXPECT_NE(text.find("POINTS 4 double"), std::string::npos);
  EXPECT_NE(text.find("LINES 4 12"), std::string::npos);
  EXPECT_NE(text.find("POINT_DATA 4"), std::string::npos);
  EXPECT_NE(text.find("SCALARS u double 1"), std::string::npos);
}

TEST(Vtk, TriangulationLayout) {
  const BulkMesh mesh = build_disk_mesh(0.5);
  std::ostringstream os;
  write_vtk(os, mesh);
  const std::string text = os.str();
  const std::size_t nt = mesh.triangles.size();
  EXPECT_EQ(text.rfind("# vtk DataFile Version 3.0\n", 0), 0u);
  EXPECT_NE(text.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
  EXPECT_NE(text.find("CELLS " + std::to_string(nt) + " " + std::to_string(4 * nt)), std::string::npos);
  EXPECT_NE(text.find("CELL_TYPES " + std::to_string(nt)), std::string::npos);
}

TEST(Vtk, RejectsMismatchedPointData) {
  std::ostringstream os;
  EXPECT_THROW(write_vtk(os, build_circle_mesh(4), {{"u", {1.0}}}), std::invalid_argument);
}
