#include "eigentow/sparse_operator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "eigentow/error.hpp"

namespace eigentow {

// ---------------------------------------------------------------- StateVector

StateVector::StateVector(std::vector<double> amps) { assign(std::move(amps)); }

StateVector::StateVector(std::initializer_list<double> amps) : StateVector(std::vector<double>(amps)) {}

StateVector StateVector::zeros(std::size_t n) { return StateVector(std::vector<double>(n, 0.0)); }

StateVector StateVector::basis(std::size_t n, std::size_t k) {
  if (k >= n) throw ContractViolation("basis index " + std::to_string(k) + " out of range for dim " + std::to_string(n));
  std::vector<double> a(n, 0.0);
  a[k] = 1.0;
  return StateVector(std::move(a));
}

double StateVector::norm() const { return std::sqrt(norm2_); }

StateVector StateVector::normalized() const {
  if (!(norm2_ > 0.0)) throw DegenerateStateError("cannot normalize a zero vector");
  return scaled(1.0 / norm());
}

StateVector StateVector::scaled(double c) const {
  std::vector<double> a = amps_;
  kernels::scale(c, a);
  return StateVector(std::move(a));
}

void StateVector::assign(std::vector<double> amps) {
  amps_ = std::move(amps);
  norm2_ = kernels::dot(amps_, amps_);
}

std::vector<double> StateVector::release() && {
  norm2_ = 0.0;
  return std::move(amps_);
}

double dot(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw ContractViolation("dot: length mismatch");
  return kernels::dot(a.amps(), b.amps());
}

// ---------------------------------------------------- SparseSymmetricOperator

SparseSymmetricOperator::SparseSymmetricOperator(std::size_t dim, std::vector<Entry> upper)
    : dim_(dim), upper_(std::move(upper)) {
  if (dim_ == 0) throw ContractViolation("operator dimension must be positive");
  for (const Entry& e : upper_) {
    if (e.row >= dim_ || e.col >= dim_)
      throw ContractViolation("entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                              ") outside dimension " + std::to_string(dim_));
    if (e.row > e.col)
      throw ContractViolation("entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                              ") below the diagonal; store the upper triangle only");
    if (!std::isfinite(e.value)) throw ContractViolation("non-finite matrix entry");
  }
  std::sort(upper_.begin(), upper_.end(),
            [](const Entry& a, const Entry& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  for (std::size_t i = 1; i < upper_.size(); ++i) {
    if (upper_[i].row == upper_[i - 1].row && upper_[i].col == upper_[i - 1].col)
      throw ContractViolation("duplicate entry (" + std::to_string(upper_[i].row) + "," +
                              std::to_string(upper_[i].col) + ")");
  }
  for (const Entry& e : upper_) bandwidth_ = std::max(bandwidth_, e.col - e.row);
  build_csr();
}

void SparseSymmetricOperator::build_csr() {
  // Count per row: each off-diagonal entry lands in two rows; every row gets a
  // diagonal slot, explicit or not.
  std::vector<std::size_t> count(dim_, 1);
  for (const Entry& e : upper_) {
    if (e.row != e.col) {
      ++count[e.row];
      ++count[e.col];
    }
  }
  row_ptr_.assign(dim_ + 1, 0);
  for (std::size_t i = 0; i < dim_; ++i) row_ptr_[i + 1] = row_ptr_[i] + count[i];
  col_idx_.assign(row_ptr_[dim_], 0);
  csr_val_.assign(row_ptr_[dim_], 0.0);

  // Gather (col, value) per row, then sort each row by column.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(dim_);
  for (std::size_t i = 0; i < dim_; ++i) rows[i].reserve(count[i]);
  std::vector<bool> has_diag(dim_, false);
  for (const Entry& e : upper_) {
    rows[e.row].emplace_back(e.col, e.value);
    if (e.row == e.col)
      has_diag[e.row] = true;
    else
      rows[e.col].emplace_back(e.row, e.value);
  }
  csr_diag_.assign(dim_, 0);
  for (std::size_t i = 0; i < dim_; ++i) {
    if (!has_diag[i]) rows[i].emplace_back(i, 0.0);
    std::sort(rows[i].begin(), rows[i].end());
    std::size_t p = row_ptr_[i];
    for (const auto& [c, v] : rows[i]) {
      if (c == i) csr_diag_[i] = p;
      col_idx_[p] = c;
      csr_val_[p] = v;
      ++p;
    }
  }
}

SparseSymmetricOperator SparseSymmetricOperator::identity(std::size_t n) {
  std::vector<double> d(n, 1.0);
  return diagonal(d);
}

SparseSymmetricOperator SparseSymmetricOperator::diagonal(std::span<const double> diag) {
  std::vector<Entry> e;
  e.reserve(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) e.push_back({i, i, diag[i]});
  return SparseSymmetricOperator(diag.size(), std::move(e));
}

SparseSymmetricOperator SparseSymmetricOperator::tridiagonal(std::span<const double> diag,
                                                             std::span<const double> offdiag) {
  if (diag.empty() || offdiag.size() + 1 != diag.size())
    throw ContractViolation("tridiagonal: offdiag length must be diag length - 1");
  std::vector<Entry> e;
  e.reserve(2 * diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    e.push_back({i, i, diag[i]});
    if (i + 1 < diag.size()) e.push_back({i, i + 1, offdiag[i]});
  }
  return SparseSymmetricOperator(diag.size(), std::move(e));
}

SparseSymmetricOperator SparseSymmetricOperator::from_dense(std::size_t n, std::span<const double> a,
                                                            double drop_tol) {
  if (a.size() != n * n) throw ContractViolation("from_dense: expected n*n values");
  std::vector<Entry> e;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = 0.5 * (a[i * n + j] + a[j * n + i]);
      if (i == j || std::abs(v) > drop_tol) e.push_back({i, j, v});
    }
  }
  return SparseSymmetricOperator(n, std::move(e));
}

double SparseSymmetricOperator::value(std::size_t row, std::size_t col) const {
  if (row > col) std::swap(row, col);
  if (col >= dim_) throw ContractViolation("value: index out of range");
  for (std::size_t p = row_ptr_[row]; p < row_ptr_[row + 1]; ++p)
    if (col_idx_[p] == col) return csr_val_[p];
  return 0.0;
}

std::vector<double> SparseSymmetricOperator::diagonal_values() const {
  std::vector<double> d(dim_);
  for (std::size_t i = 0; i < dim_; ++i) d[i] = csr_val_[csr_diag_[i]];
  return d;
}

std::vector<double> SparseSymmetricOperator::superdiagonal_values() const {
  std::vector<double> s(dim_ > 0 ? dim_ - 1 : 0, 0.0);
  for (std::size_t i = 0; i + 1 < dim_; ++i) {
    const std::size_t p = csr_diag_[i] + 1;
    if (p < row_ptr_[i + 1] && col_idx_[p] == i + 1) s[i] = csr_val_[p];
  }
  return s;
}

std::vector<double> SparseSymmetricOperator::to_dense() const {
  std::vector<double> a(dim_ * dim_, 0.0);
  for (const Entry& e : upper_) {
    a[e.row * dim_ + e.col] = e.value;
    a[e.col * dim_ + e.row] = e.value;
  }
  return a;
}

double SparseSymmetricOperator::frobenius_norm() const {
  double s = 0.0;
  for (const Entry& e : upper_) s += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
  return std::sqrt(s);
}

kernels::CsrView SparseSymmetricOperator::csr() const noexcept {
  return kernels::CsrView{dim_, row_ptr_, col_idx_, csr_val_};
}

void SparseSymmetricOperator::matvec(std::span<const double> x, std::span<double> y) const {
  if (x.size() != dim_ || y.size() != dim_)
    throw ContractViolation("matvec: operator dim " + std::to_string(dim_) + " vs vector length " +
                            std::to_string(x.size()));
  kernels::spmv(csr(), x, y);
}

StateVector SparseSymmetricOperator::apply(const StateVector& v) const {
  std::vector<double> y(v.size());
  matvec(v.amps(), y);
  return StateVector(std::move(y));
}

SparseSymmetricOperator SparseSymmetricOperator::square() const {
  // (O O)_{ik} = sum_m O_im O_mk, upper part only.
  std::vector<Entry> out;
  std::map<std::size_t, double> acc;
  for (std::size_t i = 0; i < dim_; ++i) {
    acc.clear();
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const std::size_t m = col_idx_[p];
      const double a = csr_val_[p];
      for (std::size_t q = row_ptr_[m]; q < row_ptr_[m + 1]; ++q) {
        const std::size_t k = col_idx_[q];
        if (k >= i) acc[k] += a * csr_val_[q];
      }
    }
    for (const auto& [k, v] : acc) out.push_back({i, k, v});
  }
  return SparseSymmetricOperator(dim_, std::move(out));
}

SparseSymmetricOperator combine(double alpha, const SparseSymmetricOperator& a, double beta,
                                const SparseSymmetricOperator& b) {
  if (a.dim() != b.dim()) throw ContractViolation("combine: dimension mismatch");
  std::vector<Entry> out;
  out.reserve(a.nnz() + b.nnz());
  auto ea = a.entries();
  auto eb = b.entries();
  std::size_t i = 0, j = 0;
  auto less = [](const Entry& x, const Entry& y) { return x.row != y.row ? x.row < y.row : x.col < y.col; };
  while (i < ea.size() || j < eb.size()) {
    if (j == eb.size() || (i < ea.size() && less(ea[i], eb[j]))) {
      out.push_back({ea[i].row, ea[i].col, alpha * ea[i].value});
      ++i;
    } else if (i == ea.size() || less(eb[j], ea[i])) {
      out.push_back({eb[j].row, eb[j].col, beta * eb[j].value});
      ++j;
    } else {
      out.push_back({ea[i].row, ea[i].col, alpha * ea[i].value + beta * eb[j].value});
      ++i;
      ++j;
    }
  }
  return SparseSymmetricOperator(a.dim(), std::move(out));
}

double max_abs_difference(const SparseSymmetricOperator& a, const SparseSymmetricOperator& b) {
  const SparseSymmetricOperator d = combine(1.0, a, -1.0, b);
  double m = 0.0;
  for (const Entry& e : d.entries()) m = std::max(m, std::abs(e.value));
  return m;
}

}  // namespace eigentow
