#include <doctest.h>

#include <cmath>

#include "eigentow/error.hpp"
#include "eigentow/operator_set.hpp"
#include "support.hpp"

using namespace eigentow;
using doctest::Approx;

namespace {

const double kS = std::sqrt(0.5);

SparseSymmetricOperator diag(std::initializer_list<double> d) {
  std::vector<double> v(d);
  return SparseSymmetricOperator::diagonal(v);
}

std::vector<double> dense_matvec(const SparseSymmetricOperator& op, std::span<const double> x) {
  const auto a = op.to_dense();
  const std::size_t n = op.dim();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) y[i] += a[i * n + k] * x[k];
  return y;
}

}  // namespace

TEST_CASE("matvec examples") {
  const auto id = SparseSymmetricOperator::identity(3);
  CHECK(id.apply(StateVector{1.0, 2.0, 3.0}) == StateVector{1.0, 2.0, 3.0});

  const auto d = diag({0.0, 1.0});
  const auto w = d.apply(StateVector{kS, kS});
  CHECK(w[0] == 0.0);
  CHECK(w[1] == Approx(kS).epsilon(1e-15));

  // JC j=1, c=1, omega0=1, omega=2, kappa=1
  const auto h = testing::jc_hamiltonian(2, 1.0);
  const auto r = h.apply(StateVector::basis(3, 1));
  CHECK(r[0] == Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
  CHECK(r[1] == Approx(2.0));
  CHECK(r[2] == Approx(1.0));
}

TEST_CASE("matvec rejects a dimension mismatch") {
  const auto id = SparseSymmetricOperator::identity(3);
  CHECK_THROWS_AS(id.apply(StateVector{1.0, 2.0}), ContractViolation);
}

TEST_CASE("matvec equals the symmetrized dense product") {
  std::mt19937_64 rng(21);
  for (std::size_t n : {1u, 2u, 5u, 17u, 64u}) {
    const auto op = testing::random_symmetric(n, rng);
    const auto x = testing::gaussian_vector(n, rng);
    std::vector<double> y(n);
    op.matvec(x, y);
    CHECK(testing::max_abs_diff(y, dense_matvec(op, x)) <= 1e-12);
  }
}

TEST_CASE("operator construction validates entries") {
  CHECK_THROWS_AS(SparseSymmetricOperator(2, {{1, 0, 1.0}}), ContractViolation);
  CHECK_THROWS_AS(SparseSymmetricOperator(2, {{0, 2, 1.0}}), ContractViolation);
  CHECK_THROWS_AS(SparseSymmetricOperator(2, {{0, 1, 1.0}, {0, 1, 2.0}}), ContractViolation);
  CHECK_THROWS_AS(SparseSymmetricOperator(2, {{0, 0, std::nan("")}}), ContractViolation);
  const SparseSymmetricOperator op(3, {{1, 2, 4.0}, {0, 0, 1.0}});
  CHECK(op.entries()[0] == Entry{0, 0, 1.0});
  CHECK(op.value(2, 1) == 4.0);
  CHECK(op.bandwidth() == 1);
}

TEST_CASE("state vector caches its squared norm") {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = testing::gaussian_vector(100, rng);
    const StateVector v(a);
    double s = 0.0;
    for (double x : a) s += x * x;
    CHECK(std::abs(v.norm2() - s) <= 1e-12 * s);
  }
  CHECK_THROWS_AS(StateVector::zeros(3).normalized(), DegenerateStateError);
  CHECK_THROWS_AS(StateVector::basis(3, 3), ContractViolation);
}

TEST_CASE("squares equal the dense matrix product") {
  std::mt19937_64 rng(23);
  for (std::size_t n : {1u, 3u, 16u, 64u}) {
    const auto op = n == 64 ? testing::random_tridiagonal(n, rng) : testing::random_symmetric(n, rng);
    const OperatorSet set(op);
    const auto a = op.to_dense();
    const auto sq = set.squares()[0].to_dense();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += a[i * n + k] * a[k * n + j];
        worst = std::max(worst, std::abs(s - sq[i * n + j]));
      }
    CHECK(worst <= 1e-12);
  }
  // tridiagonal -> pentadiagonal
  CHECK(OperatorSet(testing::jc_hamiltonian(20, 0.3)).squares()[0].bandwidth() == 2);
}

TEST_CASE("operator set rejects empty and mismatched input") {
  CHECK_THROWS_AS(OperatorSet(std::vector<SparseSymmetricOperator>{}), ContractViolation);
  CHECK_THROWS_AS(OperatorSet({SparseSymmetricOperator::identity(2), SparseSymmetricOperator::identity(3)}),
                  ContractViolation);
}

TEST_CASE("moments examples") {
  const OperatorSet set(diag({0.5, 1.5, 2.5}));
  auto m = moments(set, StateVector::basis(3, 1));
  CHECK(m.e1[0] == Approx(1.5));
  CHECK(m.e2[0] == Approx(2.25));
  CHECK(m.var[0] == 0.0);

  m = moments(set, StateVector{kS, kS, 0.0});
  CHECK(m.e1[0] == Approx(1.0));
  CHECK(m.e2[0] == Approx(1.25));
  CHECK(m.var[0] == Approx(0.25));

  for (double kappa : {0.0, 0.3, 5.0}) {
    const OperatorSet jc(testing::jc_hamiltonian(2, kappa));
    CHECK(moments(jc, StateVector::basis(3, 0)).e1[0] == Approx(1.0));
  }
  CHECK_THROWS_AS(moments(set, StateVector::zeros(3)), DegenerateStateError);
}

TEST_CASE("apply_B examples") {
  const OperatorSet set(diag({0.0, 1.0}));
  StateVector v{kS, kS};
  auto b = apply_B(set, v, moments(set, v));
  CHECK(b[0] == Approx(-0.5 * kS));
  CHECK(b[1] == Approx(-0.5 * kS));

  v = StateVector{std::sqrt(0.8), std::sqrt(0.2)};
  b = apply_B(set, v, moments(set, v));
  CHECK(b[0] == Approx(-0.2 * std::sqrt(0.8)));
  CHECK(b[1] == Approx(-0.8 * std::sqrt(0.2)));

  // eigenvector of a JC Hamiltonian
  const auto h = testing::jc_hamiltonian(40, 0.2);
  const auto dec = dense_eig(h);
  const OperatorSet jc(h);
  for (std::size_t k : {0u, 8u, 40u}) {
    const auto& psi = dec.eigenvectors[k];
    CHECK(apply_B(jc, psi, moments(jc, psi)).norm() <= 1e-12 * psi.norm() * (1.0 + std::abs(dec.eigenvalues[k])));
  }
}

TEST_CASE("assemble_solve_matrix examples") {
  const OperatorSet set(diag({0.0, 1.0}));
  const StateVector v{kS, kS};
  const auto a = assemble_solve_matrix(set, moments(set, v), 1.0);
  CHECK(a.value(0, 0) == Approx(1.25));
  CHECK(a.value(1, 1) == Approx(1.25));
  CHECK(a.value(0, 1) == 0.0);

  // common eigenvector is a fixed point of A
  const OperatorSet ev(diag({0.5, 1.5, 2.5}));
  const auto psi = StateVector::basis(3, 2);
  const auto ae = assemble_solve_matrix(ev, moments(ev, psi), 1.1);
  CHECK(testing::max_abs_diff(ae.apply(psi).amps(), psi.amps()) <= 1e-15);

  // dt -> 0
  const auto small = assemble_solve_matrix(set, moments(set, v), 1e-12);
  CHECK(max_abs_difference(small, SparseSymmetricOperator::identity(2)) <= 1e-12);

  CHECK_THROWS_AS(assemble_solve_matrix(set, moments(set, v), 0.0), ContractViolation);
  CHECK_THROWS_AS(assemble_solve_matrix(set, moments(set, v), -1.0), ContractViolation);
}

TEST_CASE("assemble_solve_matrix equals I - dt/2 sum B as a dense matrix") {
  std::mt19937_64 rng(24);
  const auto ops = testing::random_commuting(6, 2, rng);
  const OperatorSet set(ops);
  const auto v = testing::random_state(6, rng);
  const auto m = moments(set, v);
  const double dt = 0.7;
  const auto a = assemble_solve_matrix(set, m, dt).to_dense();
  std::vector<double> ref(36, 0.0);
  for (std::size_t i = 0; i < 6; ++i) ref[i * 6 + i] = 1.0;
  for (std::size_t j = 0; j < 2; ++j) {
    const auto o = ops[j].to_dense();
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t c = 0; c < 6; ++c) {
        double o2 = 0.0;
        for (std::size_t k = 0; k < 6; ++k) o2 += o[r * 6 + k] * o[k * 6 + c];
        const double bj = 2.0 * m.e1[j] * o[r * 6 + c] - o2 - (r == c ? m.e2[j] : 0.0);
        ref[r * 6 + c] -= 0.5 * dt * bj;
      }
  }
  CHECK(testing::max_abs_diff(a, ref) <= 1e-12);
}

TEST_CASE("commutation_check examples") {
  std::mt19937_64 rng(25);
  CHECK(commutation_check(OperatorSet(testing::random_symmetric(10, rng)), 4, 1e-10));
  const SparseSymmetricOperator flip(2, {{0, 0, 0.0}, {0, 1, 1.0}, {1, 1, 0.0}});
  CHECK_FALSE(commutation_check(OperatorSet({diag({1.0, 2.0}), flip}), 4, 1e-10));
  const auto h = testing::jc_hamiltonian(100, 0.4);
  const auto c = combine(0.0, h, 7.0, SparseSymmetricOperator::identity(h.dim()));
  CHECK(commutation_check(OperatorSet({h, c}), 4, 1e-10));
  CHECK(commutation_check(OperatorSet(testing::random_commuting(8, 3, rng)), 4, 1e-10));
  CHECK_THROWS_AS(commutation_check(OperatorSet(h), 0, 1e-10), ContractViolation);
}

TEST_CASE("exchange_operator examples") {
  const auto p = exchange_operator(2);
  CHECK(p.apply(StateVector{1.0, 2.0, 3.0, 4.0}) == StateVector{1.0, 3.0, 2.0, 4.0});
  const StateVector anti{0.0, kS, -kS, 0.0};
  const auto pa = p.apply(anti);
  CHECK(pa == anti.scaled(-1.0));
  std::mt19937_64 rng(26);
  const auto p3 = exchange_operator(3);
  const auto v = testing::random_state(9, rng);
  CHECK(p3.apply(p3.apply(v)) == v);
  CHECK_THROWS_AS(exchange_operator(1), ContractViolation);
}
