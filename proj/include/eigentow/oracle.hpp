#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "eigentow/sparse_operator.hpp"

namespace eigentow {

/// Eigenvalues ascending; eigenvectors[i] pairs with eigenvalues[i] and has
/// its largest-magnitude component positive.
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  std::vector<StateVector> eigenvectors;
};

/// Largest dimension dense_eig accepts.
inline constexpr std::size_t kDenseEigMaxDim = 4096;

/// Cyclic Jacobi on the dense copy, until the off-diagonal Frobenius norm is
/// at most 1e-14 ||O||_F. Throws ContractViolation above kDenseEigMaxDim.
EigenDecomposition dense_eig(const SparseSymmetricOperator& op);

/// Sturm-sequence bisection plus inverse iteration. With `indices` only
/// those eigenpairs (ascending positions) are computed.
EigenDecomposition tridiag_eig(std::span<const double> diag, std::span<const double> offdiag);
EigenDecomposition tridiag_eig(std::span<const double> diag, std::span<const double> offdiag,
                               std::span<const std::size_t> indices);

/// The k-th (ascending) eigenpair of a tridiagonal matrix.
std::pair<double, StateVector> tridiag_eigpair(std::span<const double> diag, std::span<const double> offdiag,
                                               std::size_t k);

/// Number of eigenvalues strictly below x.
std::size_t sturm_count(std::span<const double> diag, std::span<const double> offdiag, double x);

/// min(||v - ref||, ||v + ref||).
double compare_eigvec(const StateVector& v, const StateVector& ref);

struct RayleighResidual {
  double rho = 0.0;       ///< <v|O|v> / <v|v>
  double residual = 0.0;  ///< ||O v - rho v|| / ||v||
};

RayleighResidual rayleigh_residual(const SparseSymmetricOperator& op, const StateVector& v);

/// Flips v so that its largest-magnitude component is positive.
void fix_sign(std::vector<double>& v);

}  // namespace eigentow
