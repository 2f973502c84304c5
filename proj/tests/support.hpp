#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "eigentow/jaynes_cummings.hpp"
#include "eigentow/oracle.hpp"
#include "eigentow/sparse_operator.hpp"

namespace testing {

using namespace eigentow;

inline std::vector<double> gaussian_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

inline StateVector random_state(std::size_t n, std::mt19937_64& rng) { return StateVector(gaussian_vector(n, rng)); }

/// Dense symmetric matrix with N(0,1) entries, stored sparse.
inline SparseSymmetricOperator random_symmetric(std::size_t n, std::mt19937_64& rng) {
  auto a = gaussian_vector(n * n, rng);
  return SparseSymmetricOperator::from_dense(n, a);
}

/// Tridiagonal matrix with N(0,1) diagonal and off-diagonal.
inline SparseSymmetricOperator random_tridiagonal(std::size_t n, std::mt19937_64& rng) {
  auto d = gaussian_vector(n, rng);
  auto e = gaussian_vector(n - 1, rng);
  return SparseSymmetricOperator::tridiagonal(d, e);
}

/// `count` commuting operators Q D_j Q^T sharing a random orthonormal basis Q.
inline std::vector<SparseSymmetricOperator> random_commuting(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  const auto q = dense_eig(random_symmetric(n, rng)).eigenvectors;
  std::vector<SparseSymmetricOperator> ops;
  for (std::size_t j = 0; j < count; ++j) {
    const auto d = gaussian_vector(n, rng);
    std::vector<double> a(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) a[r * n + c] += d[k] * q[k][r] * q[k][c];
    ops.push_back(SparseSymmetricOperator::from_dense(n, a));
  }
  return ops;
}

inline SparseSymmetricOperator jc_hamiltonian(std::size_t n, double kappa, double omega0 = 1.0, double omega = 2.0) {
  JCParams p;
  p.n_molecules = n;
  p.kappa = kappa;
  p.omega0 = omega0;
  p.omega = omega;
  return build_hamiltonian(p);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double l2(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

/// Fresh directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("eigentow_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
