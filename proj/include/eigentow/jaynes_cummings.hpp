#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "eigentow/collapse.hpp"
#include "eigentow/sparse_operator.hpp"

namespace eigentow {

/// Collective Jaynes-Cummings model in the subspace of fixed c, basis index
/// i = 0..2j counting photons above c - j.
struct JCParams {
  std::size_t n_molecules = 2;  ///< N, even; j = N/2
  std::optional<double> c;      ///< defaults to j
  double omega0 = 1.0;
  double omega = 2.0;
  double kappa = 0.0;

  double j() const noexcept { return 0.5 * static_cast<double>(n_molecules); }
  double c_value() const noexcept { return c.value_or(j()); }
  std::size_t dim() const noexcept { return n_molecules + 1; }
  /// Throws ParameterError (odd or zero N, c < j, negative kappa, non-finite values).
  void validate() const;
};

/// Tridiagonal H_kappa. The off-diagonal is stored even when kappa = 0 so
/// every coupling shares one sparsity pattern.
SparseSymmetricOperator build_hamiltonian(const JCParams& p);

/// 1 - (1/j) sum_i v_i^2 i. Throws ContractViolation unless ||v|| = 1 within 1e-10.
double atomic_inversion(const StateVector& v, double j);

/// sqrt((omega - omega0)^2 / 2).
double critical_coupling(double omega0, double omega);

enum class ScanMethod { towing, oracle };

struct ScanRow {
  double kappa = 0.0;
  double inversion = 0.0;      ///< scaled, in [-1, 1]
  double scaled_energy = 0.0;  ///< Rayleigh quotient / j
  bool converged = true;
};

struct ScanOptions {
  double q = 0.1;
  ScanMethod method = ScanMethod::towing;
  /// Coarse grid upper end; unset means automatic (start at 2 kappa_c and
  /// double, up to 64 kappa_c, while the transition peak sits on the edge).
  std::optional<double> kappa_max;
  std::size_t coarse_points = 61;
  std::size_t refine_points = 61;
  /// Half-width of the refinement window in coarse steps.
  std::size_t window_steps = 2;
  bool two_pass = true;
  CollapseConfig collapse;
};

struct ScanResult {
  JCParams params;
  double q = 0.0;
  std::size_t target_index = 0;
  double kappa_max = 0.0;
  std::vector<ScanRow> coarse;
  std::vector<ScanRow> refined;
  /// Row holding the transition peak (from `refined` when two-pass).
  ScanRow peak;

  /// Coarse and refined rows merged, ascending in kappa.
  std::vector<ScanRow> all_rows() const;
};

/// round(q N); throws ParameterError when q is outside [0, 1].
std::size_t target_index(double q, std::size_t n_molecules);

/// Eigenvector `k` of H_kappa for each kappa of an ascending grid. Towing
/// walks the grid from e_k at kappa = 0; `start` resumes from a known state
/// at `start_kappa` instead.
std::vector<ScanRow> scan_grid(const JCParams& base, std::size_t k, const std::vector<double>& kappas,
                               ScanMethod method, const CollapseConfig& cfg,
                               std::vector<StateVector>* states = nullptr);

/// Index of the transition peak: the largest converged inversion after the
/// first local minimum of the curve, or the global maximum if the curve has
/// no interior minimum.
std::size_t transition_peak(const std::vector<ScanRow>& rows);

/// Coarse scan plus an optional refined pass around the transition peak.
ScanResult scan_kappa(const JCParams& base, const ScanOptions& opt);

/// Scan CSV: '#' metadata lines then "kappa,inversion,scaled_energy,converged".
std::string scan_csv(const ScanResult& r);
/// Reads back a scan CSV; rows flagged as non-converged are kept but marked.
ScanResult parse_scan_csv(const std::string& text);

struct ScalingRow {
  std::size_t n = 0;
  double max_inversion = 0.0;  ///< unscaled, j times the scaled peak value
  double kappa_at_max = 0.0;
  double energy_at_max = 0.0;
};

struct ScalingTable {
  double q = 0.0;
  std::vector<ScalingRow> rows;
  double slope = 0.0;
  double intercept = 0.0;
  double ci95 = 0.0;  ///< t-distribution 95% half-width of the slope
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci95 = 0.0;
};

/// Ordinary least squares y = intercept + slope x. Throws FitError below 3 points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Fit of log(max inversion) against log N over the scans' peaks.
ScalingTable fit_critical_exponent(const std::vector<ScanResult>& scans, double q);

}  // namespace eigentow
