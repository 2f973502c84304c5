#include <doctest.h>

#include <fstream>
#include <sstream>

#include "eigentow/cli.hpp"
#include "eigentow/error.hpp"
#include "eigentow/io.hpp"
#include "eigentow/oracle.hpp"
#include "support.hpp"

using namespace eigentow;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "eigentow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "eigentow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_cli(static_cast<int>(argv.size()), argv.data());
}

int usage_code(std::vector<std::string> args) {
  try {
    parse(std::move(args));
  } catch (const UsageError& e) {
    return e.code();
  }
  return -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void check_header(const CsvTable& t, const std::vector<std::string>& want) { CHECK(t.header == want); }

/// Every cell parses as a number.
void check_numeric(const CsvTable& t) {
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.header.size(); ++c) CHECK_NOTHROW(t.number(r, t.header[c]));
}

/// JC N=80 matrix file shared by the end-to-end cases.
fs::path jc80(const fs::path& dir) {
  const fs::path p = dir / "h.mtx";
  save_matrix(p, testing::jc_hamiltonian(80, 0.1));
  return p;
}

}  // namespace

TEST_CASE("collapse happy path parses") {
  const auto dir = testing::scratch_dir("cli_parse");
  const auto h = jc80(dir);
  const auto cfg = parse({"collapse", "--op", h.string(), "--init", "basis:8", "--dt", "1.1", "--tol", "1e-10",
                          "--out-dir", (dir / "run1").string()});
  CHECK(cfg.command == Command::collapse);
  CHECK(cfg.collapse.dt == 1.1);
  CHECK(cfg.collapse.tol == 1e-10);
  CHECK(cfg.init == "basis:8");
  CHECK(cfg.ops.size() == 1);
}

TEST_CASE("usage errors exit with 2") {
  const auto dir = testing::scratch_dir("cli_usage");
  const auto h = jc80(dir);
  const std::string out = (dir / "o").string();
  CHECK(usage_code({"collapse", "--op", h.string(), "--dt", "-1", "--out-dir", out}) == kExitUsage);
  CHECK(usage_code({"collapse", "--op", h.string(), "--dt", "abc", "--out-dir", out}) == kExitUsage);
  CHECK(usage_code({"collapse", "--op", h.string()}) == kExitUsage);
  CHECK(usage_code({"collapse", "--op", (dir / "missing.mtx").string(), "--out-dir", out}) == kExitUsage);
  CHECK(usage_code({"collapse", "--op", h.string(), "--out-dir", out, "--bogus"}) == kExitUsage);
  CHECK(usage_code({"collapse", "--op", h.string(), "--out-dir", out, "--init", "basis:x"}) == kExitUsage);
  CHECK(usage_code({"jc", "build", "--n", "3", "--out", out}) == kExitUsage);
  CHECK(usage_code({"bench", "--n-list", "200,100", "--out", out}) == kExitUsage);
  CHECK(usage_code({"coeffsim", "--eigvals", "0,1", "--probs", "1", "--out", out}) == kExitUsage);
  CHECK(usage_code({}) == kExitUsage);
  CHECK(usage_code({"--help"}) == kExitOk);
  CHECK(run_cli({"collapse", "--op", h.string(), "--dt", "-1", "--out-dir", out}).code == kExitUsage);
}

TEST_CASE("jc scan fills defaults") {
  const auto cfg = parse({"jc", "scan", "--n", "800", "--q", "0.1", "--out", "scan.csv"});
  CHECK(cfg.command == Command::jc_scan);
  CHECK(cfg.jc.n_molecules == 800);
  CHECK(cfg.jc.omega0 == 1.0);
  CHECK(cfg.jc.omega == 2.0);
  CHECK(cfg.jc.c_value() == 400.0);
  CHECK(cfg.scan.q == 0.1);
  CHECK_FALSE(cfg.scan.kappa_max.has_value());
  CHECK(cfg.scan.method == ScanMethod::towing);
  CHECK(cfg.scan.two_pass);
}

TEST_CASE("collapse end to end matches the oracle") {
  const auto dir = testing::scratch_dir("cli_collapse");
  const auto h = jc80(dir);
  const auto r = run_cli({"collapse", "--op", h.string(), "--init", "basis:8", "--out-dir", (dir / "run").string()});
  REQUIRE(r.code == kExitOk);
  const auto trace = load_csv(dir / "run" / "trace.csv");
  check_header(trace, {"iter", "norm", "residual", "e1_0", "var_0"});
  check_numeric(trace);
  CHECK(trace.number(trace.rows.size() - 1, "residual") <= 1e-10);
  const auto v = load_state(dir / "run" / "state.txt");
  const auto ref = tridiag_eigpair(testing::jc_hamiltonian(80, 0.1).diagonal_values(),
                                   testing::jc_hamiltonian(80, 0.1).superdiagonal_values(), 8);
  CHECK(compare_eigvec(v, ref.second) <= 1e-8);
}

TEST_CASE("collapse that does not converge exits with 1") {
  const auto dir = testing::scratch_dir("cli_noconv");
  const auto h = jc80(dir);
  const auto r = run_cli({"collapse", "--op", h.string(), "--init", "random", "--max-iter", "2", "--out-dir",
                          (dir / "run").string()});
  CHECK(r.code == kExitNumerical);
  CHECK(fs::exists(dir / "run" / "trace.csv"));
}

TEST_CASE("malformed matrix file exits with 2") {
  const auto dir = testing::scratch_dir("cli_badfile");
  write_text_file(dir / "bad.mtx", "2 2\n0 1 x\n1 1 1\n");
  const auto r = run_cli({"collapse", "--op", (dir / "bad.mtx").string(), "--out-dir", (dir / "run").string()});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("tow end to end") {
  const auto dir = testing::scratch_dir("cli_tow");
  const auto d = testing::jc_hamiltonian(40, 0.0).diagonal_values();
  save_matrix(dir / "base.mtx", SparseSymmetricOperator::diagonal(d));
  save_matrix(dir / "target.mtx", testing::jc_hamiltonian(40, 0.5));
  const auto r = run_cli({"tow", "--base", (dir / "base.mtx").string(), "--target", (dir / "target.mtx").string(),
                          "--steps", "10", "--target-index", "0,4", "--parallel", "2", "--out-dir",
                          (dir / "out").string()});
  REQUIRE(r.code == kExitOk);
  const auto s = load_csv(dir / "out" / "summary.csv");
  check_header(s, {"target", "refined_steps", "final_residual", "rayleigh", "overlap_min"});
  check_numeric(s);
  REQUIRE(s.rows.size() == 2);
  const auto h = testing::jc_hamiltonian(40, 0.5);
  for (std::size_t t : {0u, 1u}) {
    const std::size_t k = t == 0 ? 0 : 4;
    const auto ref = tridiag_eigpair(h.diagonal_values(), h.superdiagonal_values(), k);
    CHECK(s.number(t, "rayleigh") == Approx(ref.first).epsilon(1e-10));
    const auto dir_t = dir / "out" / ("target_" + std::to_string(t));
    CHECK(compare_eigvec(load_state(dir_t / "state.txt"), ref.second) <= 1e-8);
    for (int i = 1; i <= 10; ++i) {
      const auto step = load_csv(dir_t / ("step_" + std::to_string(i) + ".csv"));
      check_header(step, {"iter", "norm", "residual", "e1_0", "var_0"});
    }
  }
}

TEST_CASE("tow rejects mismatched operator lists") {
  const auto dir = testing::scratch_dir("cli_tow_bad");
  const auto h = jc80(dir);
  CHECK(usage_code({"tow", "--base", h.string(), h.string(), "--target", h.string(), "--target-index", "0",
                    "--out-dir", (dir / "o").string()}) == kExitUsage);
  CHECK(usage_code({"tow", "--base", h.string(), "--target", h.string(), "--out-dir", (dir / "o").string()}) ==
        kExitUsage);
}

TEST_CASE("jc build writes the canonical N=2 matrix") {
  const auto dir = testing::scratch_dir("cli_build");
  REQUIRE(run_cli({"jc", "build", "--n", "2", "--kappa", "1", "--out", (dir / "h.mtx").string()}).code == kExitOk);
  const auto m = load_matrix(dir / "h.mtx");
  CHECK(m.diagonal_values() == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(m.value(1, 2) == Approx(1.0).epsilon(1e-15));
  std::ostringstream os;
  write_matrix(os, m);
  CHECK(slurp(dir / "h.mtx") == os.str());
}

TEST_CASE("jc scan and exponent end to end") {
  const auto dir = testing::scratch_dir("cli_scan");
  std::vector<std::string> files;
  for (const char* n : {"40", "60", "80"}) {
    const std::string f = (dir / (std::string("scan_") + n + ".csv")).string();
    const auto r = run_cli({"jc", "scan", "--n", n, "--q", "0.1", "--method", "oracle", "--out", f});
    REQUIRE(r.code == kExitOk);
    const auto t = load_csv(f);
    check_header(t, {"kappa", "inversion", "scaled_energy", "converged"});
    check_numeric(t);
    for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(t.number(i, "kappa") >= t.number(i - 1, "kappa"));
    files.push_back(f);
  }
  std::vector<std::string> args = {"jc", "exponent", "--out", (dir / "exponent.csv").string(), "--scans"};
  args.insert(args.end(), files.begin(), files.end());
  REQUIRE(run_cli(args).code == kExitOk);
  const auto e = load_csv(dir / "exponent.csv");
  check_header(e, {"q", "slope", "ci95", "n_points"});
  check_numeric(e);
  CHECK(e.number(0, "n_points") == 3.0);
  CHECK(e.number(0, "q") == 0.1);
}

TEST_CASE("jc exponent with too few scans exits with 1") {
  const auto dir = testing::scratch_dir("cli_fit_fail");
  const std::string f = (dir / "scan.csv").string();
  REQUIRE(run_cli({"jc", "scan", "--n", "20", "--method", "oracle", "--out", f}).code == kExitOk);
  CHECK(run_cli({"jc", "exponent", "--scans", f, "--out", (dir / "e.csv").string()}).code == kExitNumerical);
}

TEST_CASE("oracle eig end to end") {
  const auto dir = testing::scratch_dir("cli_oracle");
  const auto h = jc80(dir);
  for (bool tri : {false, true}) {
    const fs::path out = dir / (tri ? "tri.csv" : "dense.csv");
    std::vector<std::string> args = {"oracle", "eig", "--matrix", h.string(), "--vectors", "0,8", "--out",
                                     out.string()};
    if (tri) args.push_back("--tridiag");
    REQUIRE(run_cli(args).code == kExitOk);
    const auto t = load_csv(out);
    check_header(t, {"index", "eigenvalue"});
    check_numeric(t);
    CHECK(t.rows.size() == 81);
    for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(t.number(i, "eigenvalue") >= t.number(i - 1, "eigenvalue"));
    CHECK(fs::exists(dir / (out.stem().string() + "_vec_8.txt")));
  }
  const auto a = load_state(dir / "dense_vec_8.txt");
  const auto b = load_state(dir / "tri_vec_8.txt");
  CHECK(compare_eigvec(a, b) <= 1e-8);
  CHECK(run_cli({"oracle", "eig", "--matrix", h.string(), "--vectors", "81", "--out", (dir / "x.csv").string()})
            .code == kExitUsage);
}

TEST_CASE("bench end to end") {
  const auto dir = testing::scratch_dir("cli_bench");
  const auto f = dir / "bench.csv";
  const auto r = run_cli({"bench", "--n-list", "100,200", "--iters", "5", "--repeats", "1", "--out", f.string()});
  REQUIRE(r.code == kExitOk);
  const auto t = load_csv(f);
  check_header(t, {"n", "method", "wall_time", "iterations"});
  CHECK(t.rows.size() == 4);
  for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(t.number(i, "wall_time") > 0.0);
  REQUIRE(run_cli({"bench", "--out", (dir / "empty.csv").string()}).code == kExitOk);
  CHECK(load_csv(dir / "empty.csv").rows.empty());
}

TEST_CASE("coeffsim end to end") {
  const auto dir = testing::scratch_dir("cli_coeff");
  const auto f = dir / "c.csv";
  const auto r = run_cli({"coeffsim", "--eigvals", "0,1,2", "--probs", "0.4333333333333333,0.3333333333333333,"
                          "0.2333333333333333", "--t-end", "10", "--every", "100", "--out", f.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("winner=1") != std::string::npos);
  const auto t = load_csv(f);
  check_header(t, {"t", "norm2", "p_0", "p_1", "p_2"});
  check_numeric(t);
  CHECK(t.number(t.rows.size() - 1, "t") == Approx(10.0));
  CHECK(t.number(t.rows.size() - 1, "p_1") > 0.999);
}

TEST_CASE("identical configurations give identical files") {
  const auto dir = testing::scratch_dir("cli_repro");
  const auto h = jc80(dir);
  // small step: a random start on a wide spectrum stalls at dt = 1.1
  const auto small = dir / "small.mtx";
  save_matrix(small, testing::jc_hamiltonian(6, 0.3));
  for (int run = 0; run < 2; ++run) {
    const auto d = dir / ("r" + std::to_string(run));
    REQUIRE(run_cli({"--seed", "42", "collapse", "--op", small.string(), "--init", "random", "--dt", "0.05", "--out-dir",
                     (d / "col").string()})
                .code == kExitOk);
    REQUIRE(run_cli({"tow", "--base", h.string(), "--target", h.string(), "--steps", "2", "--target-index", "3,5",
                     "--parallel", run == 0 ? "1" : "4", "--out-dir", (d / "tow").string()})
                .code == kExitOk);
    REQUIRE(run_cli({"jc", "scan", "--n", "40", "--out", (d / "scan.csv").string()}).code == kExitOk);
    REQUIRE(run_cli({"coeffsim", "--eigvals", "0,1", "--probs", "0.501,0.499", "--out", (d / "c.csv").string()})
                .code == kExitOk);
  }
  for (const char* f : {"col/trace.csv", "col/state.txt", "tow/summary.csv", "tow/target_0/state.txt",
                        "tow/target_1/step_2.csv", "scan.csv", "c.csv"})
    CHECK(slurp(dir / "r0" / f) == slurp(dir / "r1" / f));
  // a different seed gives a different random start
  REQUIRE(run_cli({"--seed", "43", "collapse", "--op", small.string(), "--init", "random", "--dt", "0.05", "--out-dir",
                   (dir / "r2").string()})
              .code == kExitOk);
  CHECK(slurp(dir / "r2" / "trace.csv") != slurp(dir / "r0" / "col" / "trace.csv"));
}

TEST_CASE("random_unit_state is seeded and normalized") {
  const auto a = random_unit_state(50, 7);
  CHECK(a == random_unit_state(50, 7));
  CHECK_FALSE(a == random_unit_state(50, 8));
  CHECK(a.norm() == Approx(1.0).epsilon(1e-14));
}
