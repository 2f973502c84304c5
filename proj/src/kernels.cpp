#include "eigentow/kernels.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <vector>

namespace eigentow::kernels {

namespace {
std::atomic<std::size_t> g_threshold{32768};

// Partial sums per block, combined left to right. Below one block this is
// the plain loop, so short vectors reproduce reference::dot bitwise.
template <class BlockFn>
double blocked_sum(std::size_t n, BlockFn&& block_sum) {
  const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
  if (nblocks <= 1) return n == 0 ? 0.0 : block_sum(std::size_t{0}, n);

  std::array<double, 64> small{};
  std::vector<double> big;
  double* partial = small.data();
  if (nblocks > small.size()) {
    big.resize(nblocks);
    partial = big.data();
  }
  const auto nb = static_cast<std::int64_t>(nblocks);
#pragma omp parallel for schedule(static) if (n >= g_threshold.load(std::memory_order_relaxed))
  for (std::int64_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    partial[b] = block_sum(lo, hi);
  }
  double s = 0.0;
  for (std::size_t b = 0; b < nblocks; ++b) s += partial[b];
  return s;
}
}  // namespace

std::size_t parallel_threshold() noexcept { return g_threshold.load(std::memory_order_relaxed); }
void set_parallel_threshold(std::size_t n) noexcept { g_threshold.store(n, std::memory_order_relaxed); }

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(a.n);
  const std::size_t* rp = a.row_ptr.data();
  const std::size_t* ci = a.col_idx.data();
  const double* va = a.values.data();
  const double* xv = x.data();
  double* yv = y.data();
#pragma omp parallel for schedule(static) if (a.n >= g_threshold.load(std::memory_order_relaxed))
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) s += va[p] * xv[ci[p]];
    yv[i] = s;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  const double* xv = x.data();
  const double* yv = y.data();
  return blocked_sum(x.size(), [xv, yv](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += xv[i] * yv[i];
    return s;
  });
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(x.size());
  const double* xv = x.data();
  double* yv = y.data();
#pragma omp parallel for schedule(static) if (x.size() >= g_threshold.load(std::memory_order_relaxed))
  for (std::int64_t i = 0; i < n; ++i) yv[i] += alpha * xv[i];
}

void scale(double alpha, std::span<double> x) {
  const auto n = static_cast<std::int64_t>(x.size());
  double* xv = x.data();
#pragma omp parallel for schedule(static) if (x.size() >= g_threshold.load(std::memory_order_relaxed))
  for (std::int64_t i = 0; i < n; ++i) xv[i] *= alpha;
}

namespace reference {

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < a.n; ++i) {
    double s = 0.0;
    for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) s += a.values[p] * x[a.col_idx[p]];
    y[i] = s;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace reference
}  // namespace eigentow::kernels
