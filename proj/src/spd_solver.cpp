#include "eigentow/spd_solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "eigentow/error.hpp"
#include "eigentow/io.hpp"

namespace eigentow {

namespace {

std::string dump(const SolvePattern& pat, std::span<const double> values) {
  std::vector<Entry> e = pat.pattern;
  for (std::size_t s = 0; s < e.size(); ++s) e[s].value = values[s];
  std::ostringstream os;
  write_matrix(os, SparseSymmetricOperator(pat.dim, std::move(e)));
  return os.str();
}

}  // namespace

struct SpdSolver::Impl {
  const SolvePattern* pattern = nullptr;
  std::size_t n = 0;
  bool is_banded = false;

  // banded Cholesky: lower factor rows, band[i*(b+1) + (i-k)] = L(i,k)
  std::size_t b = 0;
  std::vector<std::size_t> band_index;  // per slot
  std::vector<double> band;

  // general
  Eigen::SparseMatrix<double> mat;
  std::vector<Eigen::Index> value_ptr;  // per slot, into mat.valuePtr()
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Upper, Eigen::AMDOrdering<int>> ldlt;

  void factor_banded(std::span<const double> values) {
    const std::size_t w = b + 1;
    band.assign(n * w, 0.0);
    for (std::size_t s = 0; s < values.size(); ++s) band[band_index[s]] = values[s];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k0 = i >= b ? i - b : 0;
      for (std::size_t k = k0; k <= i; ++k) {
        double sum = band[i * w + (i - k)];
        const std::size_t m0 = std::max(k0, k >= b ? k - b : 0);
        for (std::size_t m = m0; m < k; ++m) sum -= band[i * w + (i - m)] * band[k * w + (k - m)];
        if (k == i) {
          if (!(sum > 0.0) || !std::isfinite(sum))
            throw FactorizationError("banded Cholesky: nonpositive pivot at row " + std::to_string(i),
                                     dump(*pattern, values));
          band[i * w] = std::sqrt(sum);
        } else {
          band[i * w + (i - k)] = sum / band[k * w];
        }
      }
    }
  }

  void solve_banded(std::span<const double> rhs, std::span<double> x) const {
    const std::size_t w = b + 1;
    for (std::size_t i = 0; i < n; ++i) {
      double s = rhs[i];
      const std::size_t k0 = i >= b ? i - b : 0;
      for (std::size_t k = k0; k < i; ++k) s -= band[i * w + (i - k)] * x[k];
      x[i] = s / band[i * w];
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x[ii];
      const std::size_t k1 = std::min(n - 1, ii + b);
      for (std::size_t k = ii + 1; k <= k1; ++k) s -= band[k * w + (k - ii)] * x[k];
      x[ii] = s / band[ii * w];
    }
  }
};

SpdSolver::SpdSolver(const SolvePattern& pattern) : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  m.pattern = &pattern;
  m.n = pattern.dim;
  m.is_banded = pattern.bandwidth <= kMaxBandedWidth;
  if (m.is_banded) {
    m.b = pattern.bandwidth;
    m.band_index.resize(pattern.pattern.size());
    for (std::size_t s = 0; s < pattern.pattern.size(); ++s) {
      const Entry& e = pattern.pattern[s];
      m.band_index[s] = e.col * (m.b + 1) + (e.col - e.row);
    }
    return;
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(pattern.pattern.size());
  for (const Entry& e : pattern.pattern)
    trip.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), 1.0);
  m.mat.resize(static_cast<Eigen::Index>(m.n), static_cast<Eigen::Index>(m.n));
  m.mat.setFromTriplets(trip.begin(), trip.end());
  m.mat.makeCompressed();
  m.value_ptr.resize(pattern.pattern.size());
  for (std::size_t s = 0; s < pattern.pattern.size(); ++s) {
    const Entry& e = pattern.pattern[s];
    const auto col = static_cast<Eigen::Index>(e.col);
    const int* inner = m.mat.innerIndexPtr();
    Eigen::Index lo = m.mat.outerIndexPtr()[col], hi = m.mat.outerIndexPtr()[col + 1];
    const int* it = std::lower_bound(inner + lo, inner + hi, static_cast<int>(e.row));
    m.value_ptr[s] = it - inner;
  }
  m.ldlt.analyzePattern(m.mat);
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

void SpdSolver::factorize(std::span<const double> values) {
  Impl& m = *impl_;
  if (values.size() != m.pattern->pattern.size()) throw ContractViolation("SpdSolver: value count mismatch");
  if (m.is_banded) {
    m.factor_banded(values);
    return;
  }
  double* vp = m.mat.valuePtr();
  for (std::size_t s = 0; s < values.size(); ++s) vp[m.value_ptr[s]] = values[s];
  m.ldlt.factorize(m.mat);
  bool ok = m.ldlt.info() == Eigen::Success;
  if (ok) {
    const auto d = m.ldlt.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (!(d[i] > 0.0)) ok = false;
  }
  if (!ok) throw FactorizationError("sparse LDL^T failed on an SPD solve matrix", dump(*m.pattern, values));
}

void SpdSolver::solve(std::span<const double> rhs, std::span<double> x) const {
  const Impl& m = *impl_;
  if (rhs.size() != m.n || x.size() != m.n) throw ContractViolation("SpdSolver: vector length mismatch");
  if (m.is_banded) {
    m.solve_banded(rhs, x);
    return;
  }
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(m.n));
  Eigen::Map<Eigen::VectorXd> out(x.data(), static_cast<Eigen::Index>(m.n));
  out = m.ldlt.solve(b);
}

bool SpdSolver::banded() const noexcept { return impl_->is_banded; }
std::size_t SpdSolver::dim() const noexcept { return impl_->n; }

std::vector<double> solve_spd(const SparseSymmetricOperator& a, std::span<const double> b) {
  SolvePattern pat;
  pat.dim = a.dim();
  pat.pattern.assign(a.entries().begin(), a.entries().end());
  pat.bandwidth = a.bandwidth();
  std::vector<double> values;
  values.reserve(pat.pattern.size());
  for (const Entry& e : pat.pattern) values.push_back(e.value);
  // A missing diagonal is a zero pivot; give it a slot so the failure is
  // reported by factorize() rather than as a pattern error.
  std::vector<bool> has(a.dim(), false);
  for (const Entry& e : pat.pattern)
    if (e.row == e.col) has[e.row] = true;
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (!has[i]) {
      pat.pattern.push_back({i, i, 0.0});
      values.push_back(0.0);
    }
  SpdSolver solver(pat);
  solver.factorize(values);
  std::vector<double> x(a.dim());
  solver.solve(b, x);
  return x;
}

}  // namespace eigentow
