#include "eigentow/collapse.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "eigentow/error.hpp"
#include "eigentow/io.hpp"

namespace eigentow {

void CollapseConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractViolation("dt must be positive");
  if (!(tol > 0.0)) throw ContractViolation("tol must be positive");
  if (max_iter == 0) throw ContractViolation("max_iter must be >= 1");
}

CollapseStepper::CollapseStepper(const OperatorSet& set, CollapseConfig cfg)
    : set_(set), cfg_(cfg), solver_(set.solve_pattern()) {
  cfg_.validate();
  const std::size_t n = set.dim();
  w_.assign(set.size(), std::vector<double>(n));
  r_.resize(n);
  u_.resize(n);
  bv_.resize(n);
  rhs_.resize(n);
  tmp_.resize(n);
  m_.e1.resize(set.size());
  m_.e2.resize(set.size());
  m_.var.resize(set.size());
}

double CollapseStepper::evaluate(std::span<const double> v) {
  if (v.size() != set_.dim()) throw ContractViolation("collapse: state length does not match operator dim");
  v_ = v;
  n2_ = kernels::dot(v, v);
  if (!(n2_ > 0.0)) throw DegenerateStateError("collapse: zero state vector");
  std::fill(bv_.begin(), bv_.end(), 0.0);
  for (std::size_t j = 0; j < set_.size(); ++j) {
    const auto& op = set_.op(j);
    auto& w = w_[j];
    op.matvec(v, w);
    const double e1 = kernels::dot(v, w) / n2_;
    std::copy(w.begin(), w.end(), r_.begin());
    kernels::axpy(-e1, v, r_);
    double var = kernels::dot(r_, r_) / n2_;
    if (var < 0.0) var = 0.0;
    m_.e1[j] = e1;
    m_.e2[j] = kernels::dot(w, w) / n2_;
    m_.var[j] = var;
    // B_j v = -(O - e1)^2 v - var v
    op.matvec(r_, u_);
    kernels::axpy(-e1, r_, u_);
    kernels::axpy(-1.0, u_, bv_);
    kernels::axpy(-var, v, bv_);
  }
  return std::sqrt(kernels::dot(bv_, bv_) / n2_);
}

void CollapseStepper::advance(std::vector<double>& v) {
  const double h = 0.5 * cfg_.dt;
  std::vector<double> shifts = m_.e1;
  std::vector<double> vars = m_.var;
  if (cfg_.expectation_order == ExpectationOrder::first) {
    // E^(i) <- E^(i) + 2 dt (<O^i v, B v> - E^(i) <v, B v>) / n, the rate of
    // the normalized expectation (the state is renormalized after the step)
    const double vbv = kernels::dot(v_, bv_) / n2_;
    for (std::size_t j = 0; j < set_.size(); ++j) {
      const auto& w = w_[j];
      set_.op(j).matvec(w, tmp_);  // O^2 v
      const double de1 = 2.0 * cfg_.dt * (kernels::dot(w, bv_) / n2_ - m_.e1[j] * vbv);
      const double de2 = 2.0 * cfg_.dt * (kernels::dot(tmp_, bv_) / n2_ - m_.e2[j] * vbv);
      const double e1 = m_.e1[j] + de1;
      const double e2 = m_.e2[j] + de2;
      shifts[j] = e1;
      vars[j] = std::max(0.0, e2 - e1 * e1);
    }
  }
  assemble_solve_values(set_, shifts, vars, cfg_.dt, values_);
  solver_.factorize(values_);
  std::copy(v_.begin(), v_.end(), rhs_.begin());
  kernels::axpy(h, bv_, rhs_);
  v.resize(set_.dim());
  solver_.solve(rhs_, v);
}

StateVector cn_step(const OperatorSet& set, const StateVector& v, const CollapseConfig& cfg) {
  if (!(v.norm2() > 0.0)) throw DegenerateStateError("cn_step: zero state vector");
  CollapseStepper stepper(set, cfg);
  std::vector<double> x(v.amps().begin(), v.amps().end());
  stepper.evaluate(x);
  std::vector<double> out;
  stepper.advance(out);
  StateVector next(std::move(out));
  return cfg.renormalize_every_step ? next.normalized() : next;
}

CollapseResult collapse(const OperatorSet& set, const StateVector& v0, const CollapseConfig& cfg) {
  cfg.validate();
  if (v0.size() != set.dim()) throw ContractViolation("collapse: state length does not match operator dim");
  if (!(v0.norm2() > 0.0)) throw DegenerateStateError("collapse: zero initial state");
  const auto t0 = std::chrono::steady_clock::now();

  CollapseStepper stepper(set, cfg);
  ConvergenceReport rep;
  std::vector<double> v(v0.amps().begin(), v0.amps().end());
  double norm_in = v0.norm();
  if (cfg.renormalize_every_step) kernels::scale(1.0 / norm_in, v);

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_it = 0;
  std::vector<double> next;
  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    const double res = stepper.evaluate(v);
    rep.iterations = it;
    rep.residual_trace.push_back(res);
    rep.norm_trace.push_back(norm_in);
    if (cfg.record_moments) rep.moments_trace.push_back(stepper.moments());
    if (res <= cfg.tol) {
      rep.converged = true;
      break;
    }
    if (res < 0.9 * best) {
      best = res;
      best_it = it;
    } else if (!rep.stagnated && it - best_it > 1000 && stepper.moments().total_variance() > cfg.tol) {
      rep.stagnated = true;
      rep.warnings.push_back("residual plateau for more than 1000 iterations at " + format_double(res) +
                             " with nonzero variance; input may lie in a degenerate subspace");
    }
    stepper.advance(next);
    v.swap(next);
    norm_in = std::sqrt(kernels::dot(v, v));
    if (!std::isfinite(norm_in) || !(norm_in > 0.0)) throw DegenerateStateError("collapse: state underflowed to zero");
    if (cfg.renormalize_every_step) kernels::scale(1.0 / norm_in, v);
  }
  if (!rep.converged)
    rep.warnings.push_back("no convergence after " + std::to_string(cfg.max_iter) + " iterations");
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {StateVector(std::move(v)), std::move(rep)};
}

std::string trace_csv(const ConvergenceReport& report, std::size_t n_ops) {
  std::ostringstream os;
  os << "iter,norm,residual";
  for (std::size_t j = 0; j < n_ops; ++j) os << ",e1_" << j;
  for (std::size_t j = 0; j < n_ops; ++j) os << ",var_" << j;
  os << '\n';
  for (std::size_t i = 0; i < report.residual_trace.size(); ++i) {
    os << i << ',' << format_double(report.norm_trace[i]) << ',' << format_double(report.residual_trace[i]);
    const bool have = i < report.moments_trace.size();
    for (std::size_t j = 0; j < n_ops; ++j) os << ',' << (have ? format_double(report.moments_trace[i].e1[j]) : "");
    for (std::size_t j = 0; j < n_ops; ++j) os << ',' << (have ? format_double(report.moments_trace[i].var[j]) : "");
    os << '\n';
  }
  return os.str();
}

}  // namespace eigentow
