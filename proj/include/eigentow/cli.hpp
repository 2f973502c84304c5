#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eigentow/bench.hpp"
#include "eigentow/collapse.hpp"
#include "eigentow/jaynes_cummings.hpp"

namespace eigentow {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

/// Raised by parse_cli. `code` is 0 for --help (message holds the help text).
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, int code) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

enum class Command { collapse, tow, jc_build, jc_scan, jc_exponent, oracle_eig, bench, coeffsim };

struct RunConfig {
  Command command = Command::collapse;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  std::filesystem::path out;
  int verbosity = 1;

  // collapse / tow
  std::vector<std::filesystem::path> ops;
  std::vector<std::filesystem::path> base;
  std::vector<std::filesystem::path> target;
  std::string init = "basis:0";
  CollapseConfig collapse;
  std::size_t steps = 10;
  std::vector<std::size_t> target_indices;
  std::vector<std::filesystem::path> target_states;
  std::optional<double> refine_tol;
  std::size_t parallel = 1;

  // jc
  JCParams jc;
  ScanOptions scan;
  std::vector<std::filesystem::path> scans;
  std::optional<double> q;

  // oracle
  std::filesystem::path matrix;
  bool tridiag = false;
  std::vector<std::size_t> vectors;
  bool all_vectors = false;

  // bench
  BenchSuite suite = BenchSuite::collapse_scaling;
  std::vector<std::size_t> n_list;
  BenchOptions bench;

  // coeffsim
  std::vector<double> eigvals;
  std::vector<double> probs;
  double coeff_dt = 1e-3;
  double t_end = 10.0;
  std::size_t every = 1;
};

/// Validated configuration; throws UsageError.
RunConfig parse_cli(int argc, const char* const* argv);

/// Executes a parsed configuration and returns the process exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_cli + run with exit-code mapping.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Restricts OpenMP to EIGENTOW_THREADS threads when the variable is set.
void apply_thread_cap();

/// Seeded uniform draw on the unit sphere in dimension n.
StateVector random_unit_state(std::size_t n, std::uint64_t seed);

}  // namespace eigentow
