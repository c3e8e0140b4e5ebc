#pragma once

#include <functional>
#include <span>
#include <vector>

#include "evpde/geometry.hpp"
#include "evpde/linalg.hpp"
#include "evpde/mesh.hpp"

namespace evpde {

enum class MeshKind { Surface, Bulk };

/// Nodal P1 coefficients bound to a mesh snapshot at `mesh_time`.
struct FeFunction {
  Vector values;
  double mesh_time = 0.0;
  MeshKind kind = MeshKind::Surface;
};

/// Coefficients of the assembled forms. Per-node fields are sampled on the
/// current snapshot; elements use the average of their nodal values.
struct FormCoefficients {
  double diffusion = 1.0;
  std::vector<Vec2> advect_field;  ///< p = b - w at nodes
  Vector reaction_field;           ///< zeroth-order coefficient at nodes
  double alpha = 1.0;
  double beta = 1.0;
};

using PointFunction = std::function<double(const Vec2&)>;

/// Consistent P1 mass matrix.
SparseMatrix assemble_mass(const SurfaceMesh& mesh);
SparseMatrix assemble_mass(const BulkMesh& mesh);

/// Tangential (arclength) stiffness on curves, full-gradient stiffness on triangulations.
SparseMatrix assemble_stiffness(const SurfaceMesh& mesh);
SparseMatrix assemble_stiffness(const BulkMesh& mesh);

/// Mass matrix weighted by the divergence of the velocity, sampled at nodes.
SparseMatrix assemble_lambda(const SurfaceMesh& mesh, std::span<const double> div_w);
SparseMatrix assemble_lambda(const BulkMesh& mesh, std::span<const double> div_w);

/// Row i, column j: int (p . grad phi_j) phi_i + c phi_j phi_i. Nonsymmetric in general.
SparseMatrix assemble_advection(const BulkMesh& mesh, std::span<const Vec2> p, std::span<const double> c);

/// int_Gamma phi_i phi_j along the boundary cycle, indexed by all bulk nodes.
SparseMatrix assemble_boundary_mass(const BulkMesh& mesh);

/// Rows: surface nodes, columns: bulk nodes. gamma^T C u = int_Gamma gamma u.
/// Throws AlignmentError unless surf node i coincides with bulk boundary node i (to 1e-12).
SparseMatrix assemble_coupling(const BulkMesh& mesh, const SurfaceMesh& surf);

/// L2 norm of (fe - exact): 2-point Gauss on segments, 3-point (degree 2) rule on triangles.
double l2_error(const SurfaceMesh& mesh, std::span<const double> fe, const PointFunction& exact);
double l2_error(const BulkMesh& mesh, std::span<const double> fe, const PointFunction& exact);
double l2_error(const SurfaceMesh& mesh, const FeFunction& fe, const PointFunction& exact);
double l2_error(const BulkMesh& mesh, const FeFunction& fe, const PointFunction& exact);

Vector interpolate(std::span<const Vec2> nodes, const PointFunction& fn);

}  // namespace evpde
