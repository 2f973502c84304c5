#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace eigentow {

/// Expansion of a state in a common eigenbasis: coefficient b_a attached to
/// the eigenvalue vector a (one component per operator).
struct CoefficientState {
  std::vector<std::vector<double>> eigvals;
  std::vector<std::complex<double>> coeffs;
  double time = 0.0;

  std::size_t size() const noexcept { return coeffs.size(); }
  /// Sum of |b_a|^2.
  double norm2() const;
  /// |b_a|^2 divided by the total.
  std::vector<double> probabilities() const;
  /// Index of the largest probability (lowest index on ties).
  std::size_t winner() const;

  /// Checks shapes; throws ContractViolation.
  void validate() const;
};

/// Builds a state with real coefficients sqrt(p_a) and scalar eigenvalues.
CoefficientState coefficient_state(std::vector<double> eigvals, const std::vector<double>& probabilities);

/// |a - a'|^2 for two eigenvalue vectors.
double squared_distance(const std::vector<double>& a, const std::vector<double>& b);

/// Integrates db_a/dt = -b_a sum_a' |b_a'|^2 |a - a'|^2 / sum_a' |b_a'|^2 with
/// classical RK4 at fixed step dt. The returned trajectory starts with `cs`
/// and holds one entry per step; the last step is shortened to land on t_end.
std::vector<CoefficientState> coeff_simulate(const CoefficientState& cs, double dt, double t_end);

/// gamma_a = -sum_a' |a - a'|^2 p_a' with normalized probabilities.
double damping_rate(const CoefficientState& cs, std::size_t a_index);

/// c_{aa'}(t) = exp(-|a - a'|^2 t) b_a conj(b_a'), row-major size x size.
std::vector<std::complex<double>> lindblad_closed_form(const std::vector<std::complex<double>>& b0,
                                                       const std::vector<std::vector<double>>& eigvals, double t);

}  // namespace eigentow
