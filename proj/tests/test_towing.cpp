#include <doctest.h>

#include <cstring>

#include "eigentow/error.hpp"
#include "eigentow/oracle.hpp"
#include "eigentow/towing.hpp"
#include "support.hpp"

using namespace eigentow;
using doctest::Approx;

namespace {

OperatorSet diag_set(std::vector<double> d) { return OperatorSet(SparseSymmetricOperator::diagonal(d)); }

TowingPlan jc_plan(std::size_t n, double kappa, std::size_t steps, std::vector<std::size_t> targets) {
  TowingPlan plan = make_schedule(OperatorSet(testing::jc_hamiltonian(n, 0.0)),
                                  OperatorSet(testing::jc_hamiltonian(n, kappa)), steps);
  for (std::size_t k : targets) plan.targets.emplace_back(k);
  return plan;
}

const StateVector& oracle_vec(const EigenDecomposition& d, std::size_t k) { return d.eigenvectors[k]; }

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Avoided crossing: the lower branch of target is reached only with enough rungs.
TowingPlan crossing_plan(std::size_t steps) {
  // Scaled so dt = 1.1 stays below the two-level spurious fixed point
  // (h * gap^2 / 2 > 1 makes the equal superposition attracting).
  const SparseSymmetricOperator base = SparseSymmetricOperator::diagonal(std::vector<double>{-0.3, 0.3});
  const SparseSymmetricOperator target(2, {{0, 0, 0.45}, {0, 1, 0.3}, {1, 1, -0.45}});
  TowingPlan plan = make_schedule(OperatorSet(base), OperatorSet(target), steps);
  plan.targets.emplace_back(std::size_t{0});
  return plan;
}

}  // namespace

TEST_CASE("make_schedule interpolates linearly") {
  const auto base = diag_set({1.0, 2.0, 3.0});
  const auto target = diag_set({1.4, 1.2, 3.8});
  const auto plan = make_schedule(base, target, 4);
  for (std::size_t i = 1; i <= 4; ++i) {
    const double f = static_cast<double>(i) / 4.0;
    const auto d = plan.step_set(i).op(0).diagonal_values();
    CHECK(d[0] == Approx(1.0 + 0.4 * f));
    CHECK(d[1] == Approx(2.0 - 0.8 * f));
    CHECK(d[2] == Approx(3.0 + 0.8 * f));
  }
  CHECK(max_abs_difference(plan.step_set(4).op(0), target.op(0)) == 0.0);
  const auto one = make_schedule(base, target, 1);
  CHECK(max_abs_difference(one.step_set(1).op(0), target.op(0)) == 0.0);
  CHECK_THROWS_AS(make_schedule(base, diag_set({1.0, 2.0}), 3), ContractViolation);
  CHECK_THROWS_AS(make_schedule(base, target, 0), ContractViolation);
  CHECK_THROWS_AS(plan.step_set(5), ContractViolation);
}

TEST_CASE("JC ladder rungs equal H at fractional coupling") {
  const auto plan = jc_plan(40, 0.3, 10, {});
  for (std::size_t l = 1; l <= 10; ++l)
    CHECK(max_abs_difference(plan.step_set(l).op(0), testing::jc_hamiltonian(40, 0.03 * l)) <= 1e-14);
  CHECK(max_abs_difference(plan.step_set(10).op(0), plan.target.op(0)) <= 1e-12);
}

TEST_CASE("custom deltas reproduce the target and split on refinement") {
  const auto base = diag_set({0.0, 1.0});
  const auto target = OperatorSet(SparseSymmetricOperator(2, {{0, 0, 0.5}, {0, 1, 0.2}, {1, 1, 1.0}}));
  TowingPlan plan{base, target, 2, std::vector<std::vector<SparseSymmetricOperator>>{}, {}};
  plan.custom_deltas->push_back({SparseSymmetricOperator(2, {{0, 0, 0.5}})});
  plan.custom_deltas->push_back({SparseSymmetricOperator(2, {{0, 1, 0.2}})});
  CHECK_NOTHROW(plan.validate());
  CHECK(plan.step_set(1).op(0).value(0, 0) == 0.5);
  CHECK(plan.step_set(1).op(0).value(0, 1) == 0.0);
  CHECK(plan.step_set(3, 4).op(0).value(0, 1) == Approx(0.1));
  CHECK(max_abs_difference(plan.step_set(2).op(0), target.op(0)) <= 1e-12);
  CHECK_THROWS_AS(plan.step_set(1, 3), ContractViolation);
  plan.custom_deltas->pop_back();
  plan.steps = 1;
  CHECK_THROWS_AS(plan.validate(), ContractViolation);
}

TEST_CASE("zero perturbation leaves the basis state in place") {
  TowingPlan plan = make_schedule(OperatorSet(testing::jc_hamiltonian(20, 0.0)),
                                  OperatorSet(testing::jc_hamiltonian(20, 0.0)), 5);
  plan.targets.emplace_back(std::size_t{3});
  const auto r = tow(plan, 0, CollapseConfig{});
  CHECK(r.converged);
  CHECK(r.final_state == StateVector::basis(21, 3));
  for (double ov : r.per_step_overlaps) CHECK(ov == 1.0);
  CHECK(r.per_step_overlaps.size() == 5);
}

TEST_CASE("JC N=80 towing reaches oracle eigenvector 8") {
  const auto plan = jc_plan(80, 0.1, 10, {8});
  const auto r = tow(plan, 0, CollapseConfig{});
  REQUIRE(r.converged);
  const auto h = plan.target.op(0);
  const auto [lambda, ref] = tridiag_eigpair(h.diagonal_values(), h.superdiagonal_values(), 8);
  CHECK(compare_eigvec(r.final_state, ref) <= 1e-8);
  for (double ov : r.per_step_overlaps) {
    CHECK(ov >= 0.9);
    CHECK(ov <= 1.0 + 1e-12);
  }
  CHECK(r.warnings.empty());
}

TEST_CASE("many small rungs keep overlaps near one") {
  const auto r = tow(jc_plan(60, 0.5, 40, {6}), 0, CollapseConfig{});
  REQUIRE(r.converged);
  CHECK(r.overlap_min() >= 0.9);
}

TEST_CASE("refine on diagonal input agrees at the first comparison") {
  TowingPlan plan = make_schedule(diag_set({1.0, 2.0, 3.0}), diag_set({1.5, 2.1, 2.9}), 3);
  plan.targets.emplace_back(std::size_t{1});
  const auto r = refine(plan, 0, CollapseConfig{});
  CHECK(r.resolved);
  CHECK(r.refined_steps == 6);
}

TEST_CASE("refine on JC N=80: 10 and 20 rungs agree") {
  const auto plan = jc_plan(80, 0.1, 10, {8});
  const auto a = tow(plan, 0, CollapseConfig{}, 10);
  const auto b = tow(plan, 0, CollapseConfig{}, 20);
  const double ov = dot(a.final_state, b.final_state);
  CHECK(ov * ov >= 1.0 - 1e-10);
  const auto r = refine(plan, 0, CollapseConfig{});
  CHECK(r.resolved);
  CHECK(r.refined_steps == 20);
}

TEST_CASE("refine detects a wrong-branch capture at an avoided crossing") {
  const auto plan = crossing_plan(2);
  const auto lower = dense_eig(plan.target.op(0)).eigenvectors[0];
  const auto coarse = tow(plan, 0, CollapseConfig{});
  REQUIRE(coarse.converged);
  CHECK(compare_eigvec(coarse.final_state, lower) > 1.0);
  const auto r = refine(plan, 0, CollapseConfig{});
  CHECK(r.resolved);
  CHECK(r.refined_steps == 8);
  CHECK(compare_eigvec(r.final_state, lower) <= 1e-8);
}

TEST_CASE("refine cap without agreement is flagged") {
  // 2 rungs land on the upper branch, 4 on the lower
  const auto plan = crossing_plan(2);
  const auto r = refine(plan, 0, CollapseConfig{}, RefineOptions{1e-6, 1});
  CHECK_FALSE(r.resolved);
  CHECK_FALSE(r.warnings.empty());
  CHECK_THROWS_AS(refine(plan, 0, CollapseConfig{}, RefineOptions{0.0, 2}), ContractViolation);
}

TEST_CASE("non-converged rung aborts the target") {
  CollapseConfig cfg;
  cfg.max_iter = 2;
  const auto r = tow(jc_plan(40, 0.5, 4, {5}), 0, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.per_step_reports.size() == 1);
}

TEST_CASE("wrong-branch warning below half overlap") {
  // The center state wins from a start that holds only a third of its weight.
  const auto set = diag_set({0.5, 1.5, 2.5});
  TowingPlan plan = make_schedule(set, set, 1);
  plan.targets.emplace_back(StateVector{std::sqrt(13.0 / 30), std::sqrt(10.0 / 30), std::sqrt(7.0 / 30)});
  const auto r = tow(plan, 0, CollapseConfig{});
  REQUIRE(r.converged);
  CHECK(r.per_step_overlaps[0] == Approx(1.0 / 3.0).epsilon(1e-6));
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("tow_many on JC N=80 targets 8, 7, 6, 5") {
  const auto plan = jc_plan(80, 0.1, 10, {8, 7, 6, 5});
  const auto results = tow_many(plan, CollapseConfig{}, 4);
  REQUIRE(results.size() == 4);
  const auto dec = dense_eig(plan.target.op(0));
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(results[t].target_id == t);
    CHECK(results[t].converged);
    CHECK(compare_eigvec(results[t].final_state, oracle_vec(dec, 8 - t)) <= 1e-8);
  }
}

TEST_CASE("tow_many is bitwise identical at parallelism 1 and 8") {
  const auto plan = jc_plan(100, 0.2, 10, {3, 17, 4, 9, 12, 0, 7, 21});
  const auto serial = tow_many(plan, CollapseConfig{}, 1);
  const auto parallel = tow_many(plan, CollapseConfig{}, 8);
  REQUIRE(serial.size() == 8);
  for (std::size_t t = 0; t < 8; ++t) {
    CHECK(serial[t].final_state == parallel[t].final_state);
    CHECK(serial[t].per_step_overlaps == parallel[t].per_step_overlaps);
    for (std::size_t s = 0; s < serial[t].per_step_reports.size(); ++s)
      CHECK(bitwise_equal(serial[t].per_step_reports[s].residual_trace,
                          parallel[t].per_step_reports[s].residual_trace));
  }
}

TEST_CASE("tow_many edge cases") {
  const auto empty = jc_plan(20, 0.1, 3, {});
  CHECK(tow_many(empty, CollapseConfig{}, 4).empty());
  CHECK_THROWS_AS(tow_many(empty, CollapseConfig{}, 0), ContractViolation);

  // a bad target fails alone
  TowingPlan plan = jc_plan(20, 0.1, 3, {2, 99, 4});
  const auto r = tow_many(plan, CollapseConfig{}, 2);
  REQUIRE(r.size() == 3);
  CHECK(r[0].converged);
  CHECK_FALSE(r[1].converged);
  CHECK_FALSE(r[1].error.empty());
  CHECK(r[2].converged);
}

TEST_CASE("EIGENTOW_THREADS caps parallelism") {
  setenv("EIGENTOW_THREADS", "3", 1);
  CHECK(effective_parallelism(8) == 3);
  CHECK(effective_parallelism(2) == 2);
  setenv("EIGENTOW_THREADS", "junk", 1);
  CHECK(effective_parallelism(8) == 8);
  unsetenv("EIGENTOW_THREADS");
  CHECK(effective_parallelism(8) == 8);
  CHECK(effective_parallelism(0) == 1);
}
