#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "eigentow/kernels.hpp"

namespace eigentow {

/// One stored upper-triangle entry (row <= col).
struct Entry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Real amplitude vector with a cached squared norm.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::vector<double> amps);
  StateVector(std::initializer_list<double> amps);

  static StateVector zeros(std::size_t n);
  /// Standard basis vector e_k of length n.
  static StateVector basis(std::size_t n, std::size_t k);

  std::size_t size() const noexcept { return amps_.size(); }
  std::span<const double> amps() const noexcept { return amps_; }
  double operator[](std::size_t i) const { return amps_[i]; }

  double norm2() const noexcept { return norm2_; }
  double norm() const;

  StateVector normalized() const;
  StateVector scaled(double c) const;

  /// Replace the amplitudes; the cached norm is recomputed.
  void assign(std::vector<double> amps);
  std::vector<double> release() &&;

  friend bool operator==(const StateVector& a, const StateVector& b) { return a.amps_ == b.amps_; }

 private:
  std::vector<double> amps_;
  double norm2_ = 0.0;
};

double dot(const StateVector& a, const StateVector& b);

/// Real symmetric matrix stored once as its upper triangle.
///
/// Entries are kept sorted by (row, col). A full (both triangles) CSR copy
/// with every diagonal position present is built at construction; matvec and
/// the shifted-square assembly in operator_set use it. Instances are
/// immutable.
class SparseSymmetricOperator {
 public:
  /// Validates indices, rejects row > col and duplicate positions.
  SparseSymmetricOperator(std::size_t dim, std::vector<Entry> upper);

  static SparseSymmetricOperator identity(std::size_t n);
  static SparseSymmetricOperator diagonal(std::span<const double> diag);
  static SparseSymmetricOperator tridiagonal(std::span<const double> diag, std::span<const double> offdiag);
  /// Upper triangle of a row-major dense matrix; |a_ij| <= drop_tol entries are skipped
  /// (the diagonal is always kept).
  static SparseSymmetricOperator from_dense(std::size_t n, std::span<const double> row_major, double drop_tol = 0.0);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return upper_.size(); }
  std::span<const Entry> entries() const noexcept { return upper_; }

  /// max(col - row) over stored entries.
  std::size_t bandwidth() const noexcept { return bandwidth_; }
  double value(std::size_t row, std::size_t col) const;
  std::vector<double> diagonal_values() const;
  /// Entries (i, i+1); zero where not stored.
  std::vector<double> superdiagonal_values() const;

  std::vector<double> to_dense() const;
  double frobenius_norm() const;

  kernels::CsrView csr() const noexcept;
  /// Position of (i, i) inside the full CSR value array.
  std::span<const std::size_t> csr_diagonal_positions() const noexcept { return csr_diag_; }

  void matvec(std::span<const double> x, std::span<double> y) const;
  StateVector apply(const StateVector& v) const;

  /// The matrix product O * O (exact pattern).
  SparseSymmetricOperator square() const;

 private:
  void build_csr();

  std::size_t dim_ = 0;
  std::size_t bandwidth_ = 0;
  std::vector<Entry> upper_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> csr_val_;
  std::vector<std::size_t> csr_diag_;
};

/// alpha * a + beta * b on the union pattern.
SparseSymmetricOperator combine(double alpha, const SparseSymmetricOperator& a, double beta,
                                const SparseSymmetricOperator& b);

/// Largest |a_ij - b_ij| over the union of both patterns.
double max_abs_difference(const SparseSymmetricOperator& a, const SparseSymmetricOperator& b);

}  // namespace eigentow
