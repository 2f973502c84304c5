#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "eigentow/operator_set.hpp"

namespace eigentow {

/// Symmetric positive definite solver over a fixed SolvePattern.
///
/// Half-bandwidth <= kMaxBandedWidth: in-place banded Cholesky, O(n b^2).
/// Otherwise: simplicial LDL^T with AMD ordering (Eigen); the symbolic
/// analysis runs once in the constructor. factorize() may be called
/// repeatedly with new values on the same pattern.
class SpdSolver {
 public:
  static constexpr std::size_t kMaxBandedWidth = 8;

  explicit SpdSolver(const SolvePattern& pattern);
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  /// `values` holds one entry per pattern slot. Throws FactorizationError.
  void factorize(std::span<const double> values);
  void solve(std::span<const double> rhs, std::span<double> x) const;

  bool banded() const noexcept;
  std::size_t dim() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot solve A x = b for an SPD operator.
std::vector<double> solve_spd(const SparseSymmetricOperator& a, std::span<const double> b);

}  // namespace eigentow
