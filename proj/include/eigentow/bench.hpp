#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace eigentow {

enum class BenchSuite { collapse_scaling, oracle_scaling };

struct BenchRecord {
  std::size_t n = 0;
  std::string method;  ///< collapse, tow, oracle_all, oracle_single
  double wall_time = 0.0;
  std::size_t iterations = 0;
  bool timed_out = false;
};

struct BenchOptions {
  double kappa = 0.1;
  /// Fixed iteration count for the collapse timing (tol is set unreachably low).
  std::size_t collapse_iters = 200;
  /// Each cell reports the minimum over this many runs.
  std::size_t repeats = 3;
  /// A cell slower than this is flagged and larger n for that method are skipped.
  double timeout = 300.0;
  /// Include the end-to-end towing run (M = 10) in collapse_scaling.
  bool include_tow = true;
};

/// Times each method of the suite on the JC problem (c = j, omega0 = 1,
/// omega = 2) at target index N/10. n_list must be ascending and even.
std::vector<BenchRecord> bench(BenchSuite suite, const std::vector<std::size_t>& n_list, const BenchOptions& opt);

/// Least-squares slope of log(time) against log(n) for one method; with
/// per_iteration the time is divided by the iteration count. Timed-out
/// records are ignored. Throws FitError below 2 points.
double loglog_slope(const std::vector<BenchRecord>& records, const std::string& method, bool per_iteration);

/// "n,method,wall_time,iterations" plus '#' lines for timeouts and slopes.
std::string bench_csv(const std::vector<BenchRecord>& records);

}  // namespace eigentow
