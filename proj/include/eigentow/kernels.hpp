#pragma once

// Inner-loop kernels. The default entry points run under OpenMP when the
// problem is large enough; their floating point results do not depend on the
// thread count (row-parallel matvec, fixed-size blocks for reductions). The
// reference:: versions are plain serial loops kept as the ground truth for
// tests and the benchmark.

#include <cstddef>
#include <span>

namespace eigentow::kernels {

/// Full (both triangles) compressed-row matrix.
struct CsrView {
  std::size_t n = 0;
  std::span<const std::size_t> row_ptr;
  std::span<const std::size_t> col_idx;
  std::span<const double> values;
};

/// Reduction block length; fixed so that partial sums are always formed the same way.
inline constexpr std::size_t kReductionBlock = 4096;

/// Loops shorter than this stay serial.
std::size_t parallel_threshold() noexcept;
void set_parallel_threshold(std::size_t n) noexcept;

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);

namespace reference {
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
}  // namespace reference

}  // namespace eigentow::kernels
