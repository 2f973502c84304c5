#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "eigentow/sparse_operator.hpp"

namespace eigentow {

/// Per-operator first and second moments of a state and their variance.
struct Moments {
  std::vector<double> e1;
  std::vector<double> e2;
  std::vector<double> var;

  std::size_t size() const noexcept { return e1.size(); }
  double total_variance() const;
};

/// Fixed sparsity pattern of I + sum_j (O_j - s_j I)^2 in upper-triangle form.
///
/// For every operator the product O_j O_j is recorded as a list of
/// (output slot, left CSR position, right CSR position) triples, so the
/// shifted square can be re-evaluated per step with new shifts and without
/// symbolic work.
struct SolvePattern {
  struct Term {
    std::uint32_t slot;
    std::uint32_t left;
    std::uint32_t right;
  };

  std::size_t dim = 0;
  std::vector<Entry> pattern;            ///< values unused; row/col of each slot
  std::vector<std::size_t> diag_slot;    ///< slot of (i, i)
  std::vector<std::vector<Term>> terms;  ///< per operator
  std::size_t bandwidth = 0;
};

/// Nonempty set of same-dimension symmetric operators, with their squares.
class OperatorSet {
 public:
  explicit OperatorSet(std::vector<SparseSymmetricOperator> ops);
  explicit OperatorSet(SparseSymmetricOperator op);

  std::size_t size() const noexcept { return ops_->size(); }
  std::size_t dim() const noexcept { return ops_->front().dim(); }
  const SparseSymmetricOperator& op(std::size_t j) const { return (*ops_)[j]; }
  std::span<const SparseSymmetricOperator> ops() const noexcept { return *ops_; }
  /// O_j * O_j, materialized once.
  std::span<const SparseSymmetricOperator> squares() const noexcept { return *squares_; }
  const SolvePattern& solve_pattern() const noexcept { return *pattern_; }

 private:
  std::shared_ptr<const std::vector<SparseSymmetricOperator>> ops_;
  std::shared_ptr<const std::vector<SparseSymmetricOperator>> squares_;
  std::shared_ptr<const SolvePattern> pattern_;
};

/// e1_j = <v|O_j|v>/n, e2_j = <O_j v|O_j v>/n, var_j = ||(O_j - e1_j) v||^2 / n.
/// Throws DegenerateStateError for a zero vector.
Moments moments(const OperatorSet& set, const StateVector& v);

/// sum_j B_j v with B_j = 2 e1_j O_j - O_j^2 - e2_j I, evaluated in the
/// equivalent form -(O_j - e1_j)^2 v - var_j v.
StateVector apply_B(const OperatorSet& set, const StateVector& v, const Moments& m);

/// A = I + (dt/2) sum_j [(O_j - e1_j I)^2 + var_j I]; symmetric positive
/// definite with smallest eigenvalue >= 1.
SparseSymmetricOperator assemble_solve_matrix(const OperatorSet& set, const Moments& m, double dt);

/// Fills `values` (one per pattern slot) with the entries of
/// I + (dt/2) sum_j [(O_j - shift_j I)^2 + var_j I].
void assemble_solve_values(const OperatorSet& set, std::span<const double> shifts, std::span<const double> vars,
                           double dt, std::vector<double>& values);

/// True iff ||O_i O_j v - O_j O_i v|| <= tol ||v|| for all pairs and probes.
/// Dims <= 64 use dense commutators checked on every basis vector plus the
/// probes; larger dims use seeded random probes only.
bool commutation_check(const OperatorSet& set, int probes, double tol, std::uint64_t seed = 0x5eedULL);

/// Particle-exchange permutation on the two-particle basis |p q>, index p*n + q.
SparseSymmetricOperator exchange_operator(std::size_t n_single);

}  // namespace eigentow
