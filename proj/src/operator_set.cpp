#include "eigentow/operator_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "eigentow/error.hpp"

namespace eigentow {

double Moments::total_variance() const {
  double s = 0.0;
  for (double v : var) s += v;
  return s;
}

namespace {

std::shared_ptr<const SolvePattern> build_pattern(const std::vector<SparseSymmetricOperator>& ops) {
  auto pat = std::make_shared<SolvePattern>();
  const std::size_t n = ops.front().dim();
  pat->dim = n;

  // Slots: identity diagonal, every operator entry, every product entry.
  std::vector<std::pair<std::size_t, std::size_t>> rc;
  for (std::size_t i = 0; i < n; ++i) rc.emplace_back(i, i);
  for (const auto& op : ops) {
    for (const Entry& e : op.entries()) rc.emplace_back(e.row, e.col);
    const auto a = op.csr();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
        const std::size_t m = a.col_idx[p];
        for (std::size_t q = a.row_ptr[m]; q < a.row_ptr[m + 1]; ++q)
          if (a.col_idx[q] >= i) rc.emplace_back(i, a.col_idx[q]);
      }
  }
  std::sort(rc.begin(), rc.end());
  rc.erase(std::unique(rc.begin(), rc.end()), rc.end());
  if (rc.size() >= std::numeric_limits<std::uint32_t>::max())
    throw ContractViolation("solve pattern too large");

  std::vector<std::size_t> row_start(n + 1, 0);
  pat->pattern.reserve(rc.size());
  for (const auto& [r, c] : rc) {
    pat->pattern.push_back({r, c, 0.0});
    ++row_start[r + 1];
    pat->bandwidth = std::max(pat->bandwidth, c - r);
  }
  for (std::size_t i = 0; i < n; ++i) row_start[i + 1] += row_start[i];
  auto slot_of = [&](std::size_t r, std::size_t c) -> std::uint32_t {
    auto first = rc.begin() + static_cast<std::ptrdiff_t>(row_start[r]);
    auto last = rc.begin() + static_cast<std::ptrdiff_t>(row_start[r + 1]);
    auto it = std::lower_bound(first, last, std::make_pair(r, c));
    return static_cast<std::uint32_t>(it - rc.begin());
  };
  pat->diag_slot.resize(n);
  for (std::size_t i = 0; i < n; ++i) pat->diag_slot[i] = slot_of(i, i);

  pat->terms.resize(ops.size());
  for (std::size_t j = 0; j < ops.size(); ++j) {
    const auto a = ops[j].csr();
    auto& terms = pat->terms[j];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
        const std::size_t m = a.col_idx[p];
        for (std::size_t q = a.row_ptr[m]; q < a.row_ptr[m + 1]; ++q) {
          const std::size_t k = a.col_idx[q];
          if (k >= i)
            terms.push_back({slot_of(i, k), static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(q)});
        }
      }
  }
  return pat;
}

void require_dim(const OperatorSet& set, const StateVector& v) {
  if (v.size() != set.dim())
    throw ContractViolation("state length " + std::to_string(v.size()) + " does not match operator dim " +
                            std::to_string(set.dim()));
}

}  // namespace

OperatorSet::OperatorSet(std::vector<SparseSymmetricOperator> ops) {
  if (ops.empty()) throw ContractViolation("operator set must not be empty");
  for (const auto& op : ops)
    if (op.dim() != ops.front().dim()) throw ContractViolation("operator set: dimension mismatch");
  std::vector<SparseSymmetricOperator> sq;
  sq.reserve(ops.size());
  for (const auto& op : ops) sq.push_back(op.square());
  pattern_ = build_pattern(ops);
  squares_ = std::make_shared<const std::vector<SparseSymmetricOperator>>(std::move(sq));
  ops_ = std::make_shared<const std::vector<SparseSymmetricOperator>>(std::move(ops));
}

OperatorSet::OperatorSet(SparseSymmetricOperator op)
    : OperatorSet(std::vector<SparseSymmetricOperator>{std::move(op)}) {}

Moments moments(const OperatorSet& set, const StateVector& v) {
  require_dim(set, v);
  const double n2 = v.norm2();
  if (!(n2 > 0.0)) throw DegenerateStateError("moments of a zero vector");
  Moments m;
  const std::size_t n = v.size();
  std::vector<double> w(n), r(n);
  for (const auto& op : set.ops()) {
    op.matvec(v.amps(), w);
    const double e1 = kernels::dot(v.amps(), w) / n2;
    const double e2 = kernels::dot(w, w) / n2;
    r = w;
    kernels::axpy(-e1, v.amps(), r);
    double var = kernels::dot(r, r) / n2;
    if (var < 0.0) var = 0.0;
    m.e1.push_back(e1);
    m.e2.push_back(e2);
    m.var.push_back(var);
  }
  return m;
}

StateVector apply_B(const OperatorSet& set, const StateVector& v, const Moments& m) {
  require_dim(set, v);
  if (m.size() != set.size()) throw ContractViolation("apply_B: moments do not match operator set");
  const std::size_t n = v.size();
  std::vector<double> out(n, 0.0), r(n), u(n);
  for (std::size_t j = 0; j < set.size(); ++j) {
    // r = (O - e1) v, u = (O - e1) r
    set.op(j).matvec(v.amps(), r);
    kernels::axpy(-m.e1[j], v.amps(), r);
    set.op(j).matvec(r, u);
    kernels::axpy(-m.e1[j], r, u);
    kernels::axpy(-1.0, u, out);
    kernels::axpy(-m.var[j], v.amps(), out);
  }
  return StateVector(std::move(out));
}

void assemble_solve_values(const OperatorSet& set, std::span<const double> shifts, std::span<const double> vars,
                           double dt, std::vector<double>& values) {
  const SolvePattern& pat = set.solve_pattern();
  values.assign(pat.pattern.size(), 0.0);
  const double h = 0.5 * dt;
  double diag_shift = 1.0;
  for (double v : vars) diag_shift += h * v;
  for (std::size_t i = 0; i < pat.dim; ++i) values[pat.diag_slot[i]] = diag_shift;

  std::vector<double> shifted;
  for (std::size_t j = 0; j < set.size(); ++j) {
    const SparseSymmetricOperator& op = set.op(j);
    const auto csr = op.csr();
    shifted.assign(csr.values.begin(), csr.values.end());
    for (std::size_t p : op.csr_diagonal_positions()) shifted[p] -= shifts[j];
    for (const auto& t : pat.terms[j]) values[t.slot] += h * shifted[t.left] * shifted[t.right];
  }
}

SparseSymmetricOperator assemble_solve_matrix(const OperatorSet& set, const Moments& m, double dt) {
  if (!(dt > 0.0)) throw ContractViolation("dt must be positive");
  if (m.size() != set.size()) throw ContractViolation("assemble_solve_matrix: moments do not match operator set");
  std::vector<double> values;
  assemble_solve_values(set, m.e1, m.var, dt, values);
  std::vector<Entry> entries = set.solve_pattern().pattern;
  for (std::size_t s = 0; s < entries.size(); ++s) entries[s].value = values[s];
  return SparseSymmetricOperator(set.dim(), std::move(entries));
}

bool commutation_check(const OperatorSet& set, int probes, double tol, std::uint64_t seed) {
  if (probes < 1) throw ContractViolation("commutation_check: probes must be >= 1");
  const std::size_t n = set.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<std::vector<double>> vs;
  if (n <= 64)
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> e(n, 0.0);
      e[k] = 1.0;
      vs.push_back(std::move(e));
    }
  for (int p = 0; p < probes; ++p) {
    std::vector<double> v(n);
    for (double& x : v) x = gauss(rng);
    vs.push_back(std::move(v));
  }

  std::vector<double> a(n), b(n), ab(n), ba(n);
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t j = i + 1; j < set.size(); ++j)
      for (const auto& v : vs) {
        set.op(j).matvec(v, a);
        set.op(i).matvec(a, ab);
        set.op(i).matvec(v, b);
        set.op(j).matvec(b, ba);
        kernels::axpy(-1.0, ba, ab);
        if (std::sqrt(kernels::dot(ab, ab)) > tol * std::sqrt(kernels::dot(v, v))) return false;
      }
  return true;
}

SparseSymmetricOperator exchange_operator(std::size_t n_single) {
  if (n_single < 2) throw ContractViolation("exchange_operator: n_single must be >= 2");
  std::vector<Entry> e;
  for (std::size_t p = 0; p < n_single; ++p)
    for (std::size_t q = p; q < n_single; ++q) {
      if (p == q)
        e.push_back({p * n_single + p, p * n_single + p, 1.0});
      else
        e.push_back({p * n_single + q, q * n_single + p, 1.0});
    }
  return SparseSymmetricOperator(n_single * n_single, std::move(e));
}

}  // namespace eigentow
