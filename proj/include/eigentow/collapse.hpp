#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "eigentow/operator_set.hpp"
#include "eigentow/spd_solver.hpp"

namespace eigentow {

enum class ExpectationOrder { zeroth, first };

struct CollapseConfig {
  double dt = 1.1;
  /// Stop when ||sum_j B_j v|| / ||v|| <= tol.
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  ExpectationOrder expectation_order = ExpectationOrder::zeroth;
  bool renormalize_every_step = true;
  /// Keep per-iteration Moments in the report (memory grows with iterations).
  bool record_moments = true;

  /// Throws ContractViolation on dt <= 0, tol <= 0 or max_iter == 0.
  void validate() const;
};

/// Iteration history of one collapse run. One trace entry per residual
/// evaluation; `iterations` counts those evaluations, so an input that is
/// already an eigenvector reports 1.
struct ConvergenceReport {
  std::size_t iterations = 0;
  std::vector<double> residual_trace;
  /// Norm of the state entering each evaluation, before any renormalization.
  std::vector<double> norm_trace;
  std::vector<Moments> moments_trace;
  bool converged = false;
  /// Residual stopped improving for more than 1000 iterations with variance left.
  bool stagnated = false;
  std::vector<std::string> warnings;
  double wall_time = 0.0;

  double final_residual() const { return residual_trace.empty() ? 0.0 : residual_trace.back(); }
};

struct CollapseResult {
  StateVector state;
  ConvergenceReport report;
};

/// Reusable per-run workspace: buffers, the assembled solve values and the
/// SPD factorization live here, so a run does no symbolic work per step.
class CollapseStepper {
 public:
  CollapseStepper(const OperatorSet& set, CollapseConfig cfg);

  /// Computes moments and sum_j B_j v for `v`; returns ||B v|| / ||v||.
  double evaluate(std::span<const double> v);
  /// Replaces `v` by the Crank-Nicolson update using the last evaluate().
  /// No renormalization here.
  void advance(std::vector<double>& v);

  const Moments& moments() const noexcept { return m_; }
  std::span<const double> b_times_v() const noexcept { return bv_; }

 private:
  const OperatorSet& set_;
  CollapseConfig cfg_;
  SpdSolver solver_;
  Moments m_;
  double n2_ = 0.0;
  std::vector<std::vector<double>> w_;  // O_j v
  std::vector<double> r_, u_, bv_, rhs_, tmp_, values_;
  std::span<const double> v_;
};

/// One semi-implicit Crank-Nicolson step of d/dt v = sum_j B_j^{(v)} v.
StateVector cn_step(const OperatorSet& set, const StateVector& v, const CollapseConfig& cfg);

/// Iterates cn_step until the residual drops to cfg.tol or max_iter is hit.
CollapseResult collapse(const OperatorSet& set, const StateVector& v0, const CollapseConfig& cfg);

/// CSV with header "iter,norm,residual,e1_0..,var_0..", `iter` = steps taken
/// before the row's evaluation. Moments columns are empty if not recorded.
std::string trace_csv(const ConvergenceReport& report, std::size_t n_ops);

}  // namespace eigentow
