#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eigentow/collapse.hpp"
#include "eigentow/operator_set.hpp"

namespace eigentow {

/// Starting point of one towed state: a basis index or an explicit vector.
using TargetSpec = std::variant<std::size_t, StateVector>;

/// Ladder of operator sets O^(0) = base, ..., O^(M) = target.
struct TowingPlan {
  OperatorSet base;
  OperatorSet target;
  std::size_t steps = 10;
  /// deltas[k][j] is the increment of operator j at step k+1; when present,
  /// base + sum_k deltas[k] must reproduce target.
  std::optional<std::vector<std::vector<SparseSymmetricOperator>>> custom_deltas;
  std::vector<TargetSpec> targets;

  /// Operator set at step i of a ladder with `steps` rungs (0 <= i <= steps).
  /// With custom deltas, `steps` must be a multiple of their count; each
  /// delta is then split into equal parts.
  OperatorSet step_set(std::size_t i, std::size_t steps) const;
  OperatorSet step_set(std::size_t i) const { return step_set(i, steps); }

  /// Unit vector for targets[target_id]. Throws ContractViolation.
  StateVector initial_state(std::size_t target_id) const;

  /// Checks dimensions, step count and custom-delta closure (1e-12).
  void validate() const;
};

/// Plan interpolating linearly from base to target in `steps` rungs.
TowingPlan make_schedule(const OperatorSet& base, const OperatorSet& target, std::size_t steps);

struct TowingResult {
  std::size_t target_id = 0;
  StateVector final_state;
  std::vector<ConvergenceReport> per_step_reports;
  /// |<Psi_{i-1}|Psi_i>|^2 for i = 1..M, with Psi_0 the initial state.
  std::vector<double> per_step_overlaps;
  std::size_t refined_steps = 0;
  bool converged = false;
  /// refine(): the last two ladders agreed.
  bool resolved = true;
  std::vector<std::string> warnings;
  /// Set when the target failed with an exception (tow_many isolation).
  std::string error;

  double overlap_min() const;
};

/// Squared overlaps below this raise a wrong-branch warning.
inline constexpr double kBranchWarnOverlap = 0.5;

/// Tows one target along plan.steps rungs.
TowingResult tow(const TowingPlan& plan, std::size_t target_id, const CollapseConfig& cfg);
TowingResult tow(const TowingPlan& plan, std::size_t target_id, const CollapseConfig& cfg, std::size_t steps);

struct RefineOptions {
  double agreement_tol = 1e-6;
  std::size_t max_doublings = 6;
};

/// Runs M, 2M, 4M, ... until consecutive final states have squared overlap
/// >= 1 - agreement_tol; returns the finer of the agreeing pair.
TowingResult refine(const TowingPlan& plan, std::size_t target_id, const CollapseConfig& cfg,
                    RefineOptions opt = {});

/// Runs every target of the plan independently on up to `parallelism`
/// threads (capped by EIGENTOW_THREADS). Results are ordered by target id
/// and do not depend on the thread count.
std::vector<TowingResult> tow_many(const TowingPlan& plan, const CollapseConfig& cfg, std::size_t parallelism,
                                   std::optional<RefineOptions> refine_opt = std::nullopt);

/// min(requested, EIGENTOW_THREADS) when the variable holds a positive integer.
std::size_t effective_parallelism(std::size_t requested);

}  // namespace eigentow
