#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "evpde/errors.hpp"
#include "evpde/linalg.hpp"

namespace evpde {

namespace {

void spot_check_symmetry(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cg_solve: matrix is not square");
  const std::size_t nnz = a.nnz();
  if (nnz == 0) return;
  const double scale = a.max_abs();
  const std::size_t samples = std::min<std::size_t>(nnz, 256);
  const std::size_t stride = std::max<std::size_t>(1, nnz / samples);
  const auto& offsets = a.row_offsets();
  std::size_t row = 0;
  for (std::size_t k = 0; k < nnz; k += stride) {
    while (offsets[row + 1] <= k) ++row;
    const std::size_t col = a.col_indices()[k];
    if (std::abs(a.values()[k] - a.at(col, row)) > 1e-12 * scale) {
      throw std::invalid_argument("cg_solve: matrix not symmetric at (" + std::to_string(row) + ", " +
                                  std::to_string(col) + ")");
    }
  }
}

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(a.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
      triplets.emplace_back(static_cast<int>(i), a.col_indices()[k], a.values()[k]);
    }
  }
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

Vector cg_solve(const SparseMatrix& a, std::span<const double> b, const CgOptions& options, CgReport* report) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("cg_solve: tolerance must be positive");
  if (a.rows() != b.size() || a.cols() != b.size()) throw std::invalid_argument("cg_solve: dimension mismatch");
  if (options.check_symmetry) spot_check_symmetry(a);

  const std::size_t n = b.size();
  Vector x(n, 0.0);
  const double b_norm = norm2(b);
  if (b_norm == 0.0) {
    if (report) *report = {};
    return x;
  }

  Vector inv_diag(n, 1.0);
  if (options.jacobi) {
    const Vector d = a.diagonal_values();
    for (std::size_t i = 0; i < n; ++i) {
      if (!(d[i] > 0.0)) throw std::invalid_argument("cg_solve: non-positive diagonal entry " + std::to_string(i));
      inv_diag[i] = 1.0 / d[i];
    }
  }

  Vector r(b.begin(), b.end());
  Vector z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  Vector p = z;
  double rz = dot(r, z);
  const double target = options.tol * b_norm;
  const int cap = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n);

  double r_norm = b_norm;
  for (int it = 1; it <= cap; ++it) {
    const Vector ap = spmv(a, p);
    const double p_ap = dot(p, ap);
    if (!(p_ap > 0.0)) {
      throw NoConvergenceError("cg_solve: matrix not positive definite (p^T A p <= 0)", r_norm / b_norm, it);
    }
    const double alpha = rz / p_ap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    r_norm = norm2(r);
    if (r_norm <= target) {
      if (report) *report = {it, r_norm / b_norm};
      return x;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw NoConvergenceError("cg_solve: no convergence in " + std::to_string(cap) +
                               " iterations, relative residual " + std::to_string(r_norm / b_norm),
                           r_norm / b_norm, cap);
}

struct DirectFactorization::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  std::size_t n = 0;
};

DirectFactorization::DirectFactorization(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("direct_solve: matrix is not square");
  impl_->n = a.rows();
  if (impl_->n == 0) return;
  const Eigen::SparseMatrix<double> m = to_eigen(a);
  impl_->lu.analyzePattern(m);
  impl_->lu.factorize(m);
  if (impl_->lu.info() != Eigen::Success) {
    throw SingularMatrixError("direct_solve: singular pivot (" + impl_->lu.lastErrorMessage() + ")");
  }
}

DirectFactorization::~DirectFactorization() = default;
DirectFactorization::DirectFactorization(DirectFactorization&&) noexcept = default;
DirectFactorization& DirectFactorization::operator=(DirectFactorization&&) noexcept = default;

std::size_t DirectFactorization::size() const { return impl_->n; }

Vector DirectFactorization::solve(std::span<const double> b) const {
  if (b.size() != impl_->n) throw std::invalid_argument("direct_solve: dimension mismatch");
  if (impl_->n == 0) return {};
  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd x = impl_->lu.solve(rhs);
  if (!x.allFinite()) throw SingularMatrixError("direct_solve: non-finite solution (matrix numerically singular)");
  return Vector(x.data(), x.data() + x.size());
}

Eigen::MatrixXd DirectFactorization::solve(const Eigen::MatrixXd& b) const {
  if (static_cast<std::size_t>(b.rows()) != impl_->n) throw std::invalid_argument("direct_solve: dimension mismatch");
  if (impl_->n == 0) return b;
  Eigen::MatrixXd x = impl_->lu.solve(b);
  if (!x.allFinite()) throw SingularMatrixError("direct_solve: non-finite solution (matrix numerically singular)");
  return x;
}

Vector direct_solve(const SparseMatrix& a, std::span<const double> b) {
  if (a.rows() != b.size()) throw std::invalid_argument("direct_solve: dimension mismatch");
  return DirectFactorization(a).solve(b);
}

}  // namespace evpde
