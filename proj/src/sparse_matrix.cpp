#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "evpde/linalg.hpp"

namespace evpde {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                           std::vector<int> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != rows_ + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != col_indices_.size() || col_indices_.size() != values_.size()) {
    throw std::invalid_argument("SparseMatrix: inconsistent CSR array sizes");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1]) throw std::invalid_argument("SparseMatrix: offsets not monotone");
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (col_indices_[k] < 0 || static_cast<std::size_t>(col_indices_[k]) >= cols_) {
        throw std::invalid_argument("SparseMatrix: column index out of range in row " + std::to_string(i));
      }
      if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1]) {
        throw std::invalid_argument("SparseMatrix: column indices not strictly increasing in row " +
                                    std::to_string(i));
      }
      if (!std::isfinite(values_[k])) {
        throw std::invalid_argument("SparseMatrix: non-finite value in row " + std::to_string(i));
      }
    }
  }
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  Vector ones(n, 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::zero(std::size_t rows, std::size_t cols) {
  return SparseMatrix(rows, cols, std::vector<std::size_t>(rows + 1, 0), {}, {});
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> diag) {
  const std::size_t n = diag.size();
  std::vector<std::size_t> offsets(n + 1);
  std::vector<int> cols(n);
  for (std::size_t i = 0; i < n; ++i) {
    offsets[i + 1] = i + 1;
    cols[i] = static_cast<int>(i);
  }
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), Vector(diag.begin(), diag.end()));
}

SparseMatrix SparseMatrix::from_dense(const Eigen::MatrixXd& dense, double drop_tol) {
  std::vector<std::size_t> offsets{0};
  std::vector<int> cols;
  Vector vals;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (std::abs(dense(i, j)) > drop_tol || (drop_tol == 0.0 && dense(i, j) != 0.0)) {
        cols.push_back(static_cast<int>(j));
        vals.push_back(dense(i, j));
      }
    }
    offsets.push_back(cols.size());
  }
  return SparseMatrix(dense.rows(), dense.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  const auto it = std::lower_bound(first, last, static_cast<int>(j));
  if (it == last || *it != static_cast<int>(j)) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

Vector SparseMatrix::diagonal_values() const {
  Vector d(std::min(rows_, cols_), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
  return d;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<std::size_t> offsets(cols_ + 1, 0);
  for (int c : col_indices_) ++offsets[c + 1];
  for (std::size_t j = 0; j < cols_; ++j) offsets[j + 1] += offsets[j];
  std::vector<int> cols(nnz());
  Vector vals(nnz());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const std::size_t dst = cursor[col_indices_[k]]++;
      cols[dst] = static_cast<int>(i);
      vals[dst] = values_[k];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::scaled(double factor) const {
  Vector vals = values_;
  for (double& v : vals) v *= factor;
  return SparseMatrix(rows_, cols_, row_offsets_, col_indices_, std::move(vals));
}

SparseMatrix SparseMatrix::submatrix(std::span<const int> keep_rows, std::span<const int> keep_cols) const {
  std::vector<int> col_map(cols_, -1);
  for (std::size_t j = 0; j < keep_cols.size(); ++j) col_map[keep_cols[j]] = static_cast<int>(j);
  TripletBuilder builder(keep_rows.size(), keep_cols.size());
  for (std::size_t r = 0; r < keep_rows.size(); ++r) {
    const std::size_t i = keep_rows[r];
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const int c = col_map[col_indices_[k]];
      if (c >= 0) builder.add(r, c, values_[k]);
    }
  }
  return builder.build();
}

double SparseMatrix::asymmetry() const {
  if (rows_ != cols_) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      worst = std::max(worst, std::abs(values_[k] - at(col_indices_[k], i)));
    }
  }
  return worst;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) dense(i, col_indices_[k]) = values_[k];
  }
  return dense;
}

double SparseMatrix::bilinear(std::span<const double> y, std::span<const double> x) const {
  return dot(y, spmv(*this, x));
}

void TripletBuilder::add(std::size_t i, std::size_t j, double v) {
  if (i >= rows_ || j >= cols_) throw std::out_of_range("TripletBuilder: index out of range");
  entries_.push_back({i, static_cast<int>(j), v});
}

void TripletBuilder::add_block(std::size_t row0, std::size_t col0, const SparseMatrix& a, double factor) {
  const auto& offsets = a.row_offsets();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
      add(row0 + i, col0 + a.col_indices()[k], factor * a.values()[k]);
    }
  }
}

SparseMatrix TripletBuilder::build() const {
  // Bucket by row (stable), then order each row by column; equal entries are summed in insertion order.
  std::vector<std::size_t> start(rows_ + 1, 0);
  for (const Entry& e : entries_) ++start[e.row + 1];
  for (std::size_t i = 0; i < rows_; ++i) start[i + 1] += start[i];
  std::vector<std::size_t> fill(start.begin(), start.end() - 1);
  std::vector<Entry> sorted(entries_.size());
  for (const Entry& e : entries_) sorted[fill[e.row]++] = e;

  std::vector<std::size_t> offsets(rows_ + 1, 0);
  std::vector<int> cols;
  Vector vals;
  cols.reserve(sorted.size());
  vals.reserve(sorted.size());
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto first = sorted.begin() + static_cast<std::ptrdiff_t>(start[i]);
    const auto last = sorted.begin() + static_cast<std::ptrdiff_t>(start[i + 1]);
    // Rows are short; insertion sort is stable and allocation-free.
    for (auto it = first; it != last; ++it) {
      const Entry e = *it;
      auto hole = it;
      while (hole != first && std::prev(hole)->col > e.col) {
        *hole = *std::prev(hole);
        --hole;
      }
      *hole = e;
    }
    for (auto it = first; it != last; ++it) {
      if (it != first && std::prev(it)->col == it->col) {
        vals.back() += it->value;
      } else {
        cols.push_back(it->col);
        vals.push_back(it->value);
      }
    }
    offsets[i + 1] = cols.size();
  }
  return SparseMatrix(rows_, cols_, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix linear_combination(double a, const SparseMatrix& lhs, double b, const SparseMatrix& rhs) {
  if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) {
    throw std::invalid_argument("linear_combination: shape mismatch");
  }
  // Row-wise merge of the two sorted patterns.
  const auto& lo = lhs.row_offsets();
  const auto& lc = lhs.col_indices();
  const auto& lv = lhs.values();
  const auto& ro = rhs.row_offsets();
  const auto& rc = rhs.col_indices();
  const auto& rv = rhs.values();
  std::vector<std::size_t> offsets(lhs.rows() + 1, 0);
  std::vector<int> cols;
  Vector vals;
  cols.reserve(lhs.nnz() + rhs.nnz());
  vals.reserve(lhs.nnz() + rhs.nnz());
  for (std::size_t i = 0; i < lhs.rows(); ++i) {
    std::size_t p = lo[i];
    std::size_t q = ro[i];
    while (p < lo[i + 1] || q < ro[i + 1]) {
      if (q == ro[i + 1] || (p < lo[i + 1] && lc[p] < rc[q])) {
        cols.push_back(lc[p]);
        vals.push_back(a * lv[p++]);
      } else if (p == lo[i + 1] || rc[q] < lc[p]) {
        cols.push_back(rc[q]);
        vals.push_back(b * rv[q++]);
      } else {
        cols.push_back(lc[p]);
        vals.push_back(a * lv[p++] + b * rv[q++]);
      }
    }
    offsets[i + 1] = cols.size();
  }
  return SparseMatrix(lhs.rows(), lhs.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

Vector spmv(const SparseMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) {
    throw std::invalid_argument("spmv: dimension mismatch (" + std::to_string(a.cols()) + " columns, vector of " +
                                std::to_string(x.size()) + ")");
  }
  Vector y(a.rows(), 0.0);
  const auto& offsets = a.row_offsets();
  const auto& cols = a.col_indices();
  const auto& vals = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) sum += vals[k] * x[cols[k]];
    y[i] = sum;
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void write_matrix_market(std::ostream& os, const SparseMatrix& a) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  fmt::print(os, "{} {} {}\n", a.rows(), a.cols(), a.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
      fmt::print(os, "{} {} {:.17g}\n", i + 1, a.col_indices()[k] + 1, a.values()[k]);
    }
  }
}

void write_matrix_market(const std::string& path, const SparseMatrix& a) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
  write_matrix_market(out, a);
}

}  // namespace evpde
