#include "eigentow/towing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "eigentow/error.hpp"
#include "eigentow/io.hpp"

namespace eigentow {

namespace {

std::vector<SparseSymmetricOperator> copy_ops(const OperatorSet& s) { return {s.ops().begin(), s.ops().end()}; }

double squared_overlap(const StateVector& a, const StateVector& b) {
  const double d = dot(a, b);
  return d * d / (a.norm2() * b.norm2());
}

}  // namespace

OperatorSet TowingPlan::step_set(std::size_t i, std::size_t m) const {
  if (m == 0 || i > m) throw ContractViolation("step_set: step index outside [0, steps]");
  if (i == 0) return base;
  if (!custom_deltas) {
    if (i == m) return target;
    const double t = static_cast<double>(i) / static_cast<double>(m);
    std::vector<SparseSymmetricOperator> ops;
    for (std::size_t j = 0; j < base.size(); ++j) ops.push_back(combine(1.0 - t, base.op(j), t, target.op(j)));
    return OperatorSet(std::move(ops));
  }
  const auto& deltas = *custom_deltas;
  if (m % deltas.size() != 0) throw ContractViolation("step_set: steps must be a multiple of the delta count");
  const std::size_t split = m / deltas.size();
  const std::size_t whole = i / split;
  const double frac = static_cast<double>(i % split) / static_cast<double>(split);
  std::vector<SparseSymmetricOperator> ops = copy_ops(base);
  for (std::size_t k = 0; k < whole; ++k)
    for (std::size_t j = 0; j < ops.size(); ++j) ops[j] = combine(1.0, ops[j], 1.0, deltas[k][j]);
  if (frac > 0.0)
    for (std::size_t j = 0; j < ops.size(); ++j) ops[j] = combine(1.0, ops[j], frac, deltas[whole][j]);
  return OperatorSet(std::move(ops));
}

StateVector TowingPlan::initial_state(std::size_t target_id) const {
  if (target_id >= targets.size()) throw ContractViolation("target id out of range");
  const std::size_t n = base.dim();
  if (const auto* k = std::get_if<std::size_t>(&targets[target_id])) {
    if (*k >= n) throw ContractViolation("target basis index outside the dimension");
    return StateVector::basis(n, *k);
  }
  const auto& v = std::get<StateVector>(targets[target_id]);
  if (v.size() != n) throw ContractViolation("target state length does not match the dimension");
  return v.normalized();
}

void TowingPlan::validate() const {
  if (base.dim() != target.dim() || base.size() != target.size())
    throw ContractViolation("towing plan: base and target sets differ in shape");
  if (steps == 0) throw ContractViolation("towing plan: steps must be >= 1");
  if (custom_deltas) {
    const auto& deltas = *custom_deltas;
    if (deltas.empty()) throw ContractViolation("towing plan: custom deltas are empty");
    if (steps % deltas.size() != 0)
      throw ContractViolation("towing plan: steps must be a multiple of the delta count");
    std::vector<SparseSymmetricOperator> acc = copy_ops(base);
    for (const auto& d : deltas) {
      if (d.size() != base.size()) throw ContractViolation("towing plan: delta has wrong operator count");
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] = combine(1.0, acc[j], 1.0, d[j]);
    }
    for (std::size_t j = 0; j < acc.size(); ++j)
      if (max_abs_difference(acc[j], target.op(j)) > 1e-12)
        throw ContractViolation("towing plan: base + sum of deltas does not reproduce the target");
  }
}

TowingPlan make_schedule(const OperatorSet& base, const OperatorSet& target, std::size_t steps) {
  TowingPlan plan{base, target, steps, std::nullopt, {}};
  plan.validate();
  return plan;
}

double TowingResult::overlap_min() const {
  if (per_step_overlaps.empty()) return 1.0;
  return *std::min_element(per_step_overlaps.begin(), per_step_overlaps.end());
}

TowingResult tow(const TowingPlan& plan, std::size_t target_id, const CollapseConfig& cfg, std::size_t steps) {
  plan.validate();
  cfg.validate();
  TowingResult res;
  res.target_id = target_id;
  res.refined_steps = steps;
  StateVector psi = plan.initial_state(target_id);
  for (std::size_t i = 1; i <= steps; ++i) {
    const OperatorSet set = plan.step_set(i, steps);
    CollapseResult cr = collapse(set, psi, cfg);
    const double ov = squared_overlap(psi, cr.state);
    res.per_step_overlaps.push_back(ov);
    if (ov < kBranchWarnOverlap)
      res.warnings.push_back("step " + std::to_string(i) + ": squared overlap " + format_double(ov) +
                             " below 0.5, possible wrong-branch capture");
    const bool ok = cr.report.converged;
    res.per_step_reports.push_back(std::move(cr.report));
    psi = std::move(cr.state);
    if (!ok) {
      res.warnings.push_back("step " + std::to_string(i) + " did not converge; target aborted");
      res.final_state = std::move(psi);
      res.converged = false;
      return res;
    }
  }
  res.final_state = std::move(psi);
  res.converged = true;
  return res;
}

TowingResult tow(const TowingPlan& plan, std::size_t target_id, const CollapseConfig& cfg) {
  return tow(plan, target_id, cfg, plan.steps);
}

TowingResult refine(const TowingPlan& plan, std::size_t target_id, const CollapseConfig& cfg, RefineOptions opt) {
  if (!(opt.agreement_tol > 0.0 && opt.agreement_tol < 1.0))
    throw ContractViolation("refine: agreement_tol must lie in (0, 1)");
  std::size_t m = plan.steps;
  TowingResult coarse = tow(plan, target_id, cfg, m);
  for (std::size_t d = 0; d < opt.max_doublings; ++d) {
    m *= 2;
    TowingResult fine = tow(plan, target_id, cfg, m);
    if (coarse.converged && fine.converged &&
        squared_overlap(coarse.final_state, fine.final_state) >= 1.0 - opt.agreement_tol) {
      fine.resolved = true;
      return fine;
    }
    coarse = std::move(fine);
  }
  coarse.resolved = false;
  coarse.warnings.push_back("refinement cap reached without agreement at " + std::to_string(m) + " steps");
  return coarse;
}

std::size_t effective_parallelism(std::size_t requested) {
  std::size_t p = std::max<std::size_t>(requested, 1);
  if (const char* env = std::getenv("EIGENTOW_THREADS")) {
    std::size_t cap = 0;
    const char* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, cap);
    if (ec == std::errc{} && ptr == end && cap > 0) p = std::min(p, cap);
  }
  return p;
}

std::vector<TowingResult> tow_many(const TowingPlan& plan, const CollapseConfig& cfg, std::size_t parallelism,
                                   std::optional<RefineOptions> refine_opt) {
  if (parallelism == 0) throw ContractViolation("tow_many: parallelism must be >= 1");
  plan.validate();
  const std::size_t n = plan.targets.size();
  std::vector<TowingResult> results(n);
  const int threads = static_cast<int>(effective_parallelism(parallelism));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(n); ++t) {
    const auto id = static_cast<std::size_t>(t);
    try {
      results[id] = refine_opt ? refine(plan, id, cfg, *refine_opt) : tow(plan, id, cfg);
    } catch (const std::exception& ex) {
      results[id] = TowingResult{};
      results[id].target_id = id;
      results[id].converged = false;
      results[id].error = ex.what();
    }
  }
  return results;
}

}  // namespace eigentow
