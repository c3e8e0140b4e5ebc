#include "evpde/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "evpde/errors.hpp"

namespace evpde {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Walks the segment graph from node 0; true iff it is one cycle through every node.
bool is_single_cycle(std::size_t num_nodes, const std::vector<std::array<int, 2>>& edges) {
  if (num_nodes < 3 || edges.size() != num_nodes) return false;
  std::vector<int> next(num_nodes, -1);
  std::vector<int> in_degree(num_nodes, 0);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= num_nodes || static_cast<std::size_t>(b) >= num_nodes ||
        a == b) {
      return false;
    }
    if (next[a] != -1) return false;
    next[a] = b;
    ++in_degree[b];
  }
  if (std::any_of(in_degree.begin(), in_degree.end(), [](int d) { return d != 1; })) return false;
  std::size_t steps = 0;
  int node = 0;
  do {
    node = next[node];
    ++steps;
  } while (node != 0 && steps <= num_nodes);
  return steps == num_nodes;
}

}  // namespace

double SurfaceMesh::segment_length(std::size_t e) const {
  const auto& [a, b] = segments[e];
  return (nodes[b] - nodes[a]).norm();
}

void SurfaceMesh::validate() const {
  if (!is_single_cycle(nodes.size(), segments)) {
    throw GeometryError("surface mesh: segments do not form a single closed cycle");
  }
  for (std::size_t e = 0; e < segments.size(); ++e) {
    if (!(segment_length(e) > 0.0)) {
      throw GeometryError("surface mesh: segment " + std::to_string(e) + " has zero length");
    }
  }
}

double BulkMesh::signed_area(std::size_t tri) const {
  const auto& [a, b, c] = triangles[tri];
  return 0.5 * cross(nodes[b] - nodes[a], nodes[c] - nodes[a]);
}

void BulkMesh::validate() const {
  for (std::size_t k = 0; k < triangles.size(); ++k) {
    for (int v : triangles[k]) {
      if (v < 0 || static_cast<std::size_t>(v) >= nodes.size()) {
        throw GeometryError("bulk mesh: triangle " + std::to_string(k) + " references a missing node");
      }
    }
    if (!(signed_area(k) > 0.0)) {
      throw GeometryError("bulk mesh: triangle " + std::to_string(k) + " is inverted or degenerate");
    }
  }
  // Boundary edges index into the full node array; remap onto boundary ids to reuse the cycle check.
  std::vector<int> local(nodes.size(), -1);
  for (std::size_t i = 0; i < boundary_node_ids.size(); ++i) local[boundary_node_ids[i]] = static_cast<int>(i);
  std::vector<std::array<int, 2>> remapped;
  remapped.reserve(boundary_edges.size());
  for (const auto& [a, b] : boundary_edges) {
    if (local[a] < 0 || local[b] < 0) {
      throw GeometryError("bulk mesh: boundary edge uses a node missing from boundary_node_ids");
    }
    remapped.push_back({local[a], local[b]});
  }
  if (!is_single_cycle(boundary_node_ids.size(), remapped)) {
    throw GeometryError("bulk mesh: boundary edges do not form a single closed cycle");
  }
}

SurfaceMesh build_circle_mesh(int n) {
  if (n < 3) throw std::invalid_argument("build_circle_mesh: need n >= 3, got " + std::to_string(n));
  SurfaceMesh mesh;
  mesh.nodes.reserve(n);
  mesh.segments.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double angle = kTwoPi * k / n;
    mesh.nodes.emplace_back(std::cos(angle), std::sin(angle));
    mesh.segments.push_back({k, (k + 1) % n});
  }
  return mesh;
}

BulkMesh build_disk_mesh(double h_target) {
  if (!(h_target > 0.0 && h_target < 1.0)) {
    throw std::invalid_argument("build_disk_mesh: h_target must lie in (0, 1), got " + std::to_string(h_target));
  }
  const int rings = static_cast<int>(std::ceil(1.0 / h_target - 1e-9));

  BulkMesh mesh;
  mesh.nodes.emplace_back(0.0, 0.0);
  std::vector<int> ring_start{0};
  std::vector<int> ring_size{1};
  for (int i = 1; i <= rings; ++i) {
    const double radius = i == rings ? 1.0 : static_cast<double>(i) / rings;
    // Arc spacing 0.9 h keeps the zipped diagonals between rings below 1.5 h.
    const int count = std::max(6, static_cast<int>(std::ceil(kTwoPi * radius / (0.9 * h_target) - 1e-9)));
    ring_start.push_back(static_cast<int>(mesh.nodes.size()));
    ring_size.push_back(count);
    for (int j = 0; j < count; ++j) {
      const double angle = kTwoPi * j / count;
      mesh.nodes.emplace_back(radius * std::cos(angle), radius * std::sin(angle));
    }
  }

  auto push_ccw = [&mesh](int a, int b, int c) {
    const double area = cross(mesh.nodes[b] - mesh.nodes[a], mesh.nodes[c] - mesh.nodes[a]);
    if (area > 0.0) {
      mesh.triangles.push_back({a, b, c});
    } else {
      mesh.triangles.push_back({a, c, b});
    }
  };

  // Fan around the centre.
  for (int j = 0; j < ring_size[1]; ++j) {
    push_ccw(0, ring_start[1] + j, ring_start[1] + (j + 1) % ring_size[1]);
  }

  // Zip consecutive rings together by always advancing whichever ring has the
  // smaller next angle. Both rings start at angle 0.
  for (int i = 1; i < rings; ++i) {
    const int na = ring_size[i];
    const int nb = ring_size[i + 1];
    const int sa = ring_start[i];
    const int sb = ring_start[i + 1];
    int ia = 0;
    int ib = 0;
    while (ia < na || ib < nb) {
      const double next_a = ia < na ? static_cast<double>(ia + 1) / na : 2.0;
      const double next_b = ib < nb ? static_cast<double>(ib + 1) / nb : 2.0;
      const int a = sa + ia % na;
      const int b = sb + ib % nb;
      if (next_a <= next_b) {
        push_ccw(a, b, sa + (ia + 1) % na);
        ++ia;
      } else {
        push_ccw(a, b, sb + (ib + 1) % nb);
        ++ib;
      }
    }
  }

  const int outer_start = ring_start[rings];
  const int outer_size = ring_size[rings];
  for (int j = 0; j < outer_size; ++j) {
    mesh.boundary_node_ids.push_back(outer_start + j);
    mesh.boundary_edges.push_back({outer_start + j, outer_start + (j + 1) % outer_size});
  }
  mesh.validate();
  return mesh;
}

SurfaceMesh boundary_surface(const BulkMesh& mesh) {
  SurfaceMesh surf;
  surf.t = mesh.t;
  std::vector<int> local(mesh.nodes.size(), -1);
  for (std::size_t i = 0; i < mesh.boundary_node_ids.size(); ++i) {
    local[mesh.boundary_node_ids[i]] = static_cast<int>(i);
    surf.nodes.push_back(mesh.nodes[mesh.boundary_node_ids[i]]);
  }
  for (const auto& [a, b] : mesh.boundary_edges) surf.segments.push_back({local[a], local[b]});
  return surf;
}

namespace {

void require_reference(double mesh_t) {
  if (mesh_t != 0.0) {
    throw std::invalid_argument("move_mesh: input must be the reference snapshot (t = 0), got t=" +
                                std::to_string(mesh_t));
  }
}

}  // namespace

SurfaceMesh move_mesh(const SurfaceMesh& mesh, const FlowMap& map, double t) {
  require_reference(mesh.t);
  SurfaceMesh moved = mesh;
  moved.t = t;
  for (auto& x : moved.nodes) x = map.evaluate(t, x);
  for (std::size_t e = 0; e < moved.segments.size(); ++e) {
    if (!(moved.segment_length(e) > 0.0)) {
      throw GeometryError("move_mesh: segment " + std::to_string(e) + " collapsed at t=" + std::to_string(t));
    }
  }
  return moved;
}

BulkMesh move_mesh(const BulkMesh& mesh, const FlowMap& map, double t) {
  require_reference(mesh.t);
  BulkMesh moved = mesh;
  moved.t = t;
  for (auto& x : moved.nodes) x = map.evaluate(t, x);
  for (std::size_t k = 0; k < moved.triangles.size(); ++k) {
    if (!(moved.signed_area(k) > 0.0)) {
      throw GeometryError("move_mesh: triangle " + std::to_string(k) + " inverted at t=" + std::to_string(t));
    }
  }
  return moved;
}

double mesh_size(const SurfaceMesh& mesh) {
  double h = 0.0;
  for (std::size_t e = 0; e < mesh.segments.size(); ++e) h = std::max(h, mesh.segment_length(e));
  return h;
}

double mesh_size(const BulkMesh& mesh) {
  double h = 0.0;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) h = std::max(h, (mesh.nodes[tri[(k + 1) % 3]] - mesh.nodes[tri[k]]).norm());
  }
  return h;
}

double total_measure(const SurfaceMesh& mesh) {
  double length = 0.0;
  for (std::size_t e = 0; e < mesh.segments.size(); ++e) length += mesh.segment_length(e);
  return length;
}

double total_measure(const BulkMesh& mesh) {
  double area = 0.0;
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) area += mesh.signed_area(k);
  return area;
}

double mesh_quality(const SurfaceMesh& mesh) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t e = 0; e < mesh.segments.size(); ++e) {
    const double len = mesh.segment_length(e);
    lo = std::min(lo, len);
    hi = std::max(hi, len);
  }
  return hi > 0.0 ? lo / hi : 0.0;
}

double mesh_quality(const BulkMesh& mesh) {
  double min_angle = std::numbers::pi;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 u = mesh.nodes[tri[(k + 1) % 3]] - mesh.nodes[tri[k]];
      const Vec2 v = mesh.nodes[tri[(k + 2) % 3]] - mesh.nodes[tri[k]];
      min_angle = std::min(min_angle, std::atan2(std::abs(cross(u, v)), u.dot(v)));
    }
  }
  return min_angle;
}

}  // namespace evpde
