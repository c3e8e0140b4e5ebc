#include "evpde/fem.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "evpde/errors.hpp"

namespace evpde {

namespace {

void require_nodal(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(expected) +
                                " nodal values, got " + std::to_string(got));
  }
}

// Gradients of the three barycentric basis functions on a CCW triangle.
std::array<Vec2, 3> basis_gradients(const Vec2& a, const Vec2& b, const Vec2& c, double area) {
  const double two_area = 2.0 * area;
  return {perp(c - b) / two_area, perp(a - c) / two_area, perp(b - a) / two_area};
}

template <class Weight>
SparseMatrix surface_weighted_mass(const SurfaceMesh& mesh, Weight weight) {
  const std::size_t n = mesh.num_nodes();
  TripletBuilder builder(n, n);
  for (std::size_t e = 0; e < mesh.segments.size(); ++e) {
    const auto [a, b] = mesh.segments[e];
    const double scale = weight(a, b) * mesh.segment_length(e) / 6.0;
    builder.add(a, a, 2.0 * scale);
    builder.add(a, b, scale);
    builder.add(b, a, scale);
    builder.add(b, b, 2.0 * scale);
  }
  return builder.build();
}

template <class Weight>
SparseMatrix bulk_weighted_mass(const BulkMesh& mesh, Weight weight) {
  const std::size_t n = mesh.num_nodes();
  TripletBuilder builder(n, n);
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto& tri = mesh.triangles[k];
    const double scale = weight(tri) * mesh.signed_area(k) / 12.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) builder.add(tri[i], tri[j], (i == j ? 2.0 : 1.0) * scale);
    }
  }
  return builder.build();
}

}  // namespace

SparseMatrix assemble_mass(const SurfaceMesh& mesh) {
  return surface_weighted_mass(mesh, [](int, int) { return 1.0; });
}

SparseMatrix assemble_mass(const BulkMesh& mesh) {
  return bulk_weighted_mass(mesh, [](const std::array<int, 3>&) { return 1.0; });
}

SparseMatrix assemble_stiffness(const SurfaceMesh& mesh) {
  const std::size_t n = mesh.num_nodes();
  TripletBuilder builder(n, n);
  for (std::size_t e = 0; e < mesh.segments.size(); ++e) {
    const auto [a, b] = mesh.segments[e];
    const double k = 1.0 / mesh.segment_length(e);
    builder.add(a, a, k);
    builder.add(a, b, -k);
    builder.add(b, a, -k);
    builder.add(b, b, k);
  }
  return builder.build();
}

SparseMatrix assemble_stiffness(const BulkMesh& mesh) {
  const std::size_t n = mesh.num_nodes();
  TripletBuilder builder(n, n);
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto& tri = mesh.triangles[k];
    const double area = mesh.signed_area(k);
    const auto grads = basis_gradients(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]], area);
    for (int i = 0; i < 3; ++i) {
      // Row sums vanish exactly: the diagonal is minus the sum of off-diagonals.
      double diag = 0.0;
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        const double v = area * grads[i].dot(grads[j]);
        builder.add(tri[i], tri[j], v);
        diag -= v;
      }
      builder.add(tri[i], tri[i], diag);
    }
  }
  return builder.build();
}

SparseMatrix assemble_lambda(const SurfaceMesh& mesh, std::span<const double> div_w) {
  require_nodal(mesh.num_nodes(), div_w.size(), "assemble_lambda");
  return surface_weighted_mass(mesh, [&](int a, int b) { return 0.5 * (div_w[a] + div_w[b]); });
}

SparseMatrix assemble_lambda(const BulkMesh& mesh, std::span<const double> div_w) {
  require_nodal(mesh.num_nodes(), div_w.size(), "assemble_lambda");
  return bulk_weighted_mass(mesh, [&](const std::array<int, 3>& tri) {
    return (div_w[tri[0]] + div_w[tri[1]] + div_w[tri[2]]) / 3.0;
  });
}

SparseMatrix assemble_advection(const BulkMesh& mesh, std::span<const Vec2> p, std::span<const double> c) {
  require_nodal(mesh.num_nodes(), p.size(), "assemble_advection (p)");
  require_nodal(mesh.num_nodes(), c.size(), "assemble_advection (c)");
  const std::size_t n = mesh.num_nodes();
  TripletBuilder builder(n, n);
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto& tri = mesh.triangles[k];
    const double area = mesh.signed_area(k);
    const Vec2 p_mid = (p[tri[0]] + p[tri[1]] + p[tri[2]]) / 3.0;
    const double c_mid = (c[tri[0]] + c[tri[1]] + c[tri[2]]) / 3.0;
    const auto grads = basis_gradients(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]], area);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double transport = p_mid.dot(grads[j]) * area / 3.0;
        const double reaction = c_mid * area / 12.0 * (i == j ? 2.0 : 1.0);
        if (transport != 0.0 || reaction != 0.0) builder.add(tri[i], tri[j], transport + reaction);
      }
    }
  }
  return builder.build();
}

SparseMatrix assemble_boundary_mass(const BulkMesh& mesh) {
  const std::size_t n = mesh.num_nodes();
  TripletBuilder builder(n, n);
  for (const auto& [a, b] : mesh.boundary_edges) {
    const double scale = (mesh.nodes[b] - mesh.nodes[a]).norm() / 6.0;
    builder.add(a, a, 2.0 * scale);
    builder.add(a, b, scale);
    builder.add(b, a, scale);
    builder.add(b, b, 2.0 * scale);
  }
  return builder.build();
}

SparseMatrix assemble_coupling(const BulkMesh& mesh, const SurfaceMesh& surf) {
  const auto& ids = mesh.boundary_node_ids;
  if (surf.num_nodes() != ids.size()) {
    throw AlignmentError("assemble_coupling: surface has " + std::to_string(surf.num_nodes()) +
                         " nodes, bulk boundary has " + std::to_string(ids.size()));
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if ((surf.nodes[i] - mesh.nodes[ids[i]]).norm() > 1e-12) {
      throw AlignmentError("assemble_coupling: surface node " + std::to_string(i) +
                           " does not coincide with bulk node " + std::to_string(ids[i]));
    }
  }
  TripletBuilder builder(surf.num_nodes(), mesh.num_nodes());
  for (std::size_t e = 0; e < surf.segments.size(); ++e) {
    const auto [a, b] = surf.segments[e];
    const double scale = surf.segment_length(e) / 6.0;
    builder.add(a, ids[a], 2.0 * scale);
    builder.add(a, ids[b], scale);
    builder.add(b, ids[a], scale);
    builder.add(b, ids[b], 2.0 * scale);
  }
  return builder.build();
}

double l2_error(const SurfaceMesh& mesh, std::span<const double> fe, const PointFunction& exact) {
  require_nodal(mesh.num_nodes(), fe.size(), "l2_error");
  const double g = 0.5 / std::sqrt(3.0);
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.segments.size(); ++e) {
    const auto [a, b] = mesh.segments[e];
    const double len = mesh.segment_length(e);
    for (double s : {0.5 - g, 0.5 + g}) {
      const Vec2 x = (1.0 - s) * mesh.nodes[a] + s * mesh.nodes[b];
      const double diff = (1.0 - s) * fe[a] + s * fe[b] - exact(x);
      sum += 0.5 * len * diff * diff;
    }
  }
  return std::sqrt(sum);
}

double l2_error(const BulkMesh& mesh, std::span<const double> fe, const PointFunction& exact) {
  require_nodal(mesh.num_nodes(), fe.size(), "l2_error");
  constexpr double kBary[3][3] = {{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}};
  double sum = 0.0;
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto& tri = mesh.triangles[k];
    const double area = mesh.signed_area(k);
    for (const auto& w : kBary) {
      const Vec2 x = w[0] * mesh.nodes[tri[0]] + w[1] * mesh.nodes[tri[1]] + w[2] * mesh.nodes[tri[2]];
      const double diff = w[0] * fe[tri[0]] + w[1] * fe[tri[1]] + w[2] * fe[tri[2]] - exact(x);
      sum += area / 3.0 * diff * diff;
    }
  }
  return std::sqrt(sum);
}

double l2_error(const SurfaceMesh& mesh, const FeFunction& fe, const PointFunction& exact) {
  if (fe.kind != MeshKind::Surface) throw std::invalid_argument("l2_error: bulk function on a surface mesh");
  return l2_error(mesh, std::span<const double>(fe.values), exact);
}

double l2_error(const BulkMesh& mesh, const FeFunction& fe, const PointFunction& exact) {
  if (fe.kind != MeshKind::Bulk) throw std::invalid_argument("l2_error: surface function on a bulk mesh");
  return l2_error(mesh, std::span<const double>(fe.values), exact);
}

Vector interpolate(std::span<const Vec2> nodes, const PointFunction& fn) {
  Vector values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = fn(nodes[i]);
  return values;
}

}  // namespace evpde
