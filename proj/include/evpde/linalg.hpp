#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace evpde {

using Vector = std::vector<double>;

/// Compressed sparse row matrix. Column indices are strictly increasing within
/// each row; immutable once built.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
               std::vector<int> col_indices, std::vector<double> values);

  static SparseMatrix identity(std::size_t n);
  static SparseMatrix zero(std::size_t rows, std::size_t cols);
  static SparseMatrix diagonal(std::span<const double> diag);
  static SparseMatrix from_dense(const Eigen::MatrixXd& dense, double drop_tol = 0.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  /// Entry (i, j); zero when not stored.
  double at(std::size_t i, std::size_t j) const;
  Vector diagonal_values() const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double factor) const;
  /// Rows/columns restricted to `keep_rows` x `keep_cols`, in the given order.
  SparseMatrix submatrix(std::span<const int> keep_rows, std::span<const int> keep_cols) const;

  /// max |A_ij - A_ji| over stored entries.
  double asymmetry() const;
  bool is_symmetric(double tol) const { return rows_ == cols_ && asymmetry() <= tol; }
  double max_abs() const;

  Eigen::MatrixXd to_dense() const;

  /// Quadratic/bilinear forms y^T A x.
  double bilinear(std::span<const double> y, std::span<const double> x) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

/// Accumulates (i, j, v) contributions; duplicates are summed in insertion order.
class TripletBuilder {
 public:
  TripletBuilder(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

  void add(std::size_t i, std::size_t j, double v);
  /// Adds factor * A with its top-left corner at (row0, col0).
  void add_block(std::size_t row0, std::size_t col0, const SparseMatrix& a, double factor = 1.0);
  SparseMatrix build() const;

 private:
  struct Entry {
    std::size_t row;
    int col;
    double value;
  };
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Entry> entries_;
};

/// a * A + b * B (same shape).
SparseMatrix linear_combination(double a, const SparseMatrix& lhs, double b, const SparseMatrix& rhs);

Vector spmv(const SparseMatrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

struct CgOptions {
  double tol = 1e-12;             ///< relative residual ||Ax - b|| <= tol ||b||
  bool jacobi = true;             ///< diagonal preconditioning
  int max_iterations = 0;         ///< 0 -> 10 n
  bool check_symmetry = true;     ///< spot-check A_ij = A_ji on sampled entries
};

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients from x0 = 0. Throws NoConvergenceError on
/// hitting the iteration cap, std::invalid_argument on a failed symmetry spot-check.
Vector cg_solve(const SparseMatrix& a, std::span<const double> b, const CgOptions& options = {},
                CgReport* report = nullptr);

/// Sparse LU with partial pivoting. Throws SingularMatrixError.
Vector direct_solve(const SparseMatrix& a, std::span<const double> b);

/// A factorization reused across right-hand sides.
class DirectFactorization {
 public:
  explicit DirectFactorization(const SparseMatrix& a);
  ~DirectFactorization();
  DirectFactorization(DirectFactorization&&) noexcept;
  DirectFactorization& operator=(DirectFactorization&&) noexcept;

  std::size_t size() const;
  Vector solve(std::span<const double> b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// MatrixMarket coordinate real general format, 1-based indices.
void write_matrix_market(std::ostream& os, const SparseMatrix& a);
void write_matrix_market(const std::string& path, const SparseMatrix& a);

}  // namespace evpde
