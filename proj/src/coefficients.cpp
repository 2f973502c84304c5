#include "eigentow/coefficients.hpp"

#include <algorithm>
#include <cmath>

#include "eigentow/error.hpp"

namespace eigentow {

double CoefficientState::norm2() const {
  double s = 0.0;
  for (const auto& b : coeffs) s += std::norm(b);
  return s;
}

std::vector<double> CoefficientState::probabilities() const {
  const double n = norm2();
  if (!(n > 0.0)) throw DegenerateStateError("coefficient state has zero norm");
  std::vector<double> p(coeffs.size());
  for (std::size_t a = 0; a < p.size(); ++a) p[a] = std::norm(coeffs[a]) / n;
  return p;
}

std::size_t CoefficientState::winner() const {
  const auto p = probabilities();
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

void CoefficientState::validate() const {
  if (coeffs.empty()) throw ContractViolation("coefficient state is empty");
  if (eigvals.size() != coeffs.size()) throw ContractViolation("eigvals and coeffs differ in length");
  for (const auto& a : eigvals)
    if (a.size() != eigvals.front().size() || a.empty())
      throw ContractViolation("eigenvalue vectors must share a nonzero length");
}

CoefficientState coefficient_state(std::vector<double> eigvals, const std::vector<double>& probabilities) {
  if (eigvals.size() != probabilities.size()) throw ContractViolation("eigvals and probabilities differ in length");
  CoefficientState cs;
  for (std::size_t a = 0; a < eigvals.size(); ++a) {
    if (probabilities[a] < 0.0) throw ContractViolation("negative probability");
    cs.eigvals.push_back({eigvals[a]});
    cs.coeffs.emplace_back(std::sqrt(probabilities[a]), 0.0);
  }
  cs.validate();
  return cs;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

namespace {

// Right-hand side rate r_a = sum_a' p_a' |a - a'|^2 / sum p for real moduli x.
void rates(const std::vector<double>& dist, const std::vector<double>& x, std::vector<double>& out) {
  const std::size_t n = x.size();
  double total = 0.0;
  for (double xi : x) total += xi * xi;
  for (std::size_t a = 0; a < n; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < n; ++b) s += x[b] * x[b] * dist[a * n + b];
    out[a] = -x[a] * s / total;
  }
}

}  // namespace

std::vector<CoefficientState> coeff_simulate(const CoefficientState& cs, double dt, double t_end) {
  cs.validate();
  if (!(dt > 0.0)) throw ContractViolation("coeff_simulate: dt must be positive");
  if (!(cs.norm2() > 0.0)) throw DegenerateStateError("coeff_simulate: zero initial coefficients");
  const std::size_t n = cs.size();
  std::vector<double> dist(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) dist[a * n + b] = squared_distance(cs.eigvals[a], cs.eigvals[b]);

  // The rate is real, so each b_a keeps its phase; integrate the moduli.
  std::vector<double> x(n), phase_re(n), phase_im(n);
  for (std::size_t a = 0; a < n; ++a) {
    x[a] = std::abs(cs.coeffs[a]);
    const std::complex<double> u = x[a] > 0.0 ? cs.coeffs[a] / x[a] : std::complex<double>(1.0, 0.0);
    phase_re[a] = u.real();
    phase_im[a] = u.imag();
  }

  std::vector<CoefficientState> traj;
  traj.push_back(cs);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), y(n);
  const double t0 = cs.time;
  double t = t0;
  const std::size_t steps = t_end > t0 ? static_cast<std::size_t>(std::ceil((t_end - t0) / dt - 1e-9)) : 0;
  traj.reserve(steps + 1);
  for (std::size_t s = 0; s < steps; ++s) {
    const double h = std::min(dt, t_end - t);
    rates(dist, x, k1);
    for (std::size_t a = 0; a < n; ++a) y[a] = x[a] + 0.5 * h * k1[a];
    rates(dist, y, k2);
    for (std::size_t a = 0; a < n; ++a) y[a] = x[a] + 0.5 * h * k2[a];
    rates(dist, y, k3);
    for (std::size_t a = 0; a < n; ++a) y[a] = x[a] + h * k3[a];
    rates(dist, y, k4);
    for (std::size_t a = 0; a < n; ++a) x[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    t = s + 1 == steps ? t_end : t0 + static_cast<double>(s + 1) * dt;
    CoefficientState next;
    next.eigvals = cs.eigvals;
    next.coeffs.resize(n);
    for (std::size_t a = 0; a < n; ++a) next.coeffs[a] = {x[a] * phase_re[a], x[a] * phase_im[a]};
    next.time = t;
    traj.push_back(std::move(next));
  }
  return traj;
}

double damping_rate(const CoefficientState& cs, std::size_t a_index) {
  cs.validate();
  if (a_index >= cs.size()) throw ContractViolation("damping_rate: index out of range");
  const auto p = cs.probabilities();
  double g = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) g -= squared_distance(cs.eigvals[a_index], cs.eigvals[b]) * p[b];
  return g;
}

std::vector<std::complex<double>> lindblad_closed_form(const std::vector<std::complex<double>>& b0,
                                                       const std::vector<std::vector<double>>& eigvals, double t) {
  if (b0.size() != eigvals.size()) throw ContractViolation("lindblad_closed_form: length mismatch");
  if (t < 0.0) throw ContractViolation("lindblad_closed_form: t must be nonnegative");
  const std::size_t n = b0.size();
  std::vector<std::complex<double>> c(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      c[a * n + b] = std::exp(-squared_distance(eigvals[a], eigvals[b]) * t) * b0[a] * std::conj(b0[b]);
  return c;
}

}  // namespace eigentow
