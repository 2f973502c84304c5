#include "eigentow/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "eigentow/coefficients.hpp"
#include "eigentow/error.hpp"
#include "eigentow/io.hpp"
#include "eigentow/oracle.hpp"
#include "eigentow/towing.hpp"

namespace eigentow {

namespace fs = std::filesystem;

void apply_thread_cap() {
  const std::size_t cap = effective_parallelism(std::numeric_limits<int>::max());
  const int current = omp_get_max_threads();
  if (cap < static_cast<std::size_t>(current)) omp_set_num_threads(static_cast<int>(cap));
}

StateVector random_unit_state(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> a(n);
  for (double& x : a) x = gauss(rng);
  return StateVector(std::move(a)).normalized();
}

namespace {

void add_collapse_options(CLI::App* sub, CollapseConfig& c, std::string& order, bool& no_renorm) {
  sub->add_option("--dt", c.dt, "time step")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--tol", c.tol, "residual threshold")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--max-iter", c.max_iter, "iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--order", order, "expectation update order")->check(CLI::IsMember({"zeroth", "first"}));
  sub->add_flag("--no-renormalize", no_renorm, "keep the raw norm between steps");
}

void add_jc_params(CLI::App* sub, JCParams& p, double& c) {
  sub->add_option("--n", p.n_molecules, "number of molecules N (even)")->required()->check(CLI::PositiveNumber);
  sub->add_option("--c", c, "conserved number c (default j)");
  sub->add_option("--omega0", p.omega0, "molecular frequency")->capture_default_str();
  sub->add_option("--omega", p.omega, "field frequency")->capture_default_str();
}

[[noreturn]] void usage(const std::string& msg) { throw UsageError(msg, kExitUsage); }

}  // namespace

RunConfig parse_cli(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{"Targeted eigenstates of commuting symmetric operators by collapse dynamics"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", cfg.seed, "seed for randomized initial states")->capture_default_str();
  app.add_flag_callback("-v,--verbose", [&] { cfg.verbosity = 2; }, "more output");
  app.add_flag_callback("-q,--quiet", [&] { cfg.verbosity = 0; }, "errors only");

  std::string order = "zeroth";
  bool no_renorm = false;
  double c = std::numeric_limits<double>::quiet_NaN();

  auto* col = app.add_subcommand("collapse", "collapse one state onto a common eigenvector");
  col->add_option("--op", cfg.ops, "operator matrix files")->required()->check(CLI::ExistingFile);
  col->add_option("--init", cfg.init, "basis:K | state:FILE | random")->capture_default_str();
  col->add_option("--out-dir", cfg.out_dir, "output directory")->required();
  add_collapse_options(col, cfg.collapse, order, no_renorm);

  auto* tw = app.add_subcommand("tow", "tow eigenstates from a base set to a target set");
  tw->add_option("--base", cfg.base, "base operator files")->required()->check(CLI::ExistingFile);
  tw->add_option("--target", cfg.target, "target operator files")->required()->check(CLI::ExistingFile);
  tw->add_option("--steps", cfg.steps, "ladder rungs M")->check(CLI::PositiveNumber)->capture_default_str();
  tw->add_option("--target-index", cfg.target_indices, "basis indices to tow")->delimiter(',');
  tw->add_option("--target-state", cfg.target_states, "initial state files")->check(CLI::ExistingFile);
  tw->add_option("--refine", cfg.refine_tol, "agreement tolerance for ladder doubling")->check(CLI::Range(0.0, 1.0));
  tw->add_option("--parallel", cfg.parallel, "concurrent targets")->check(CLI::PositiveNumber)->capture_default_str();
  tw->add_option("--out-dir", cfg.out_dir, "output directory")->required();
  add_collapse_options(tw, cfg.collapse, order, no_renorm);

  auto* jc = app.add_subcommand("jc", "Jaynes-Cummings model");
  jc->require_subcommand(1);
  jc->fallthrough();
  auto* jb = jc->add_subcommand("build", "write H_kappa in matrix format");
  add_jc_params(jb, cfg.jc, c);
  jb->add_option("--kappa", cfg.jc.kappa, "coupling")->check(CLI::NonNegativeNumber);
  jb->add_option("--out", cfg.out, "matrix file")->required();

  std::string kappa_max = "auto", method = "towing";
  bool single_pass = false;
  double q_scan = 0.1;
  auto* js = jc->add_subcommand("scan", "atomic inversion along a kappa grid");
  add_jc_params(js, cfg.jc, c);
  js->add_option("--q", q_scan, "spectrum ratio k/N")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  js->add_option("--kappa-max", kappa_max, "grid end or 'auto'")->capture_default_str();
  js->add_option("--method", method, "towing | oracle")->check(CLI::IsMember({"towing", "oracle"}))->capture_default_str();
  js->add_option("--points", cfg.scan.coarse_points, "coarse grid size")->check(CLI::Range(3, 1000000));
  js->add_option("--refine-points", cfg.scan.refine_points, "refined grid size")->check(CLI::Range(2, 1000000));
  js->add_flag("--single-pass", single_pass, "skip the refined pass");
  js->add_option("--out", cfg.out, "scan CSV")->required();
  add_collapse_options(js, cfg.scan.collapse, order, no_renorm);

  double q_exp = std::numeric_limits<double>::quiet_NaN();
  auto* je = jc->add_subcommand("exponent", "fit log max inversion against log N");
  je->add_option("--scans", cfg.scans, "scan CSV files")->required()->check(CLI::ExistingFile);
  je->add_option("--q", q_exp, "spectrum ratio (default from the scans)")->check(CLI::Range(0.0, 1.0));
  je->add_option("--out", cfg.out, "exponent CSV")->required();

  auto* orc = app.add_subcommand("oracle", "reference eigensolvers");
  orc->require_subcommand(1);
  orc->fallthrough();
  auto* oe = orc->add_subcommand("eig", "all eigenpairs of a matrix");
  oe->add_option("--matrix", cfg.matrix, "matrix file")->required()->check(CLI::ExistingFile);
  oe->add_flag("--tridiag", cfg.tridiag, "use the tridiagonal solver");
  oe->add_option("--vectors", cfg.vectors, "eigenvector indices to write")->delimiter(',');
  oe->add_flag("--all-vectors", cfg.all_vectors, "write every eigenvector");
  oe->add_option("--out", cfg.out, "pairs CSV")->required();

  std::string suite = "collapse_scaling";
  bool no_tow = false;
  auto* bn = app.add_subcommand("bench", "timing scaling on the JC problem");
  bn->add_option("--suite", suite, "collapse_scaling | oracle_scaling")
      ->check(CLI::IsMember({"collapse_scaling", "oracle_scaling"}))
      ->capture_default_str();
  bn->add_option("--n-list", cfg.n_list, "ascending even sizes")->delimiter(',');
  bn->add_option("--iters", cfg.bench.collapse_iters, "collapse iterations per cell")->check(CLI::PositiveNumber);
  bn->add_option("--repeats", cfg.bench.repeats, "runs per cell (minimum kept)")->check(CLI::PositiveNumber);
  bn->add_option("--timeout", cfg.bench.timeout, "per-cell limit in seconds")->check(CLI::PositiveNumber);
  bn->add_option("--kappa", cfg.bench.kappa, "coupling")->check(CLI::NonNegativeNumber);
  bn->add_flag("--no-tow", no_tow, "skip the end-to-end towing cells");
  bn->add_option("--out", cfg.out, "bench CSV")->required();

  auto* cs = app.add_subcommand("coeffsim", "coefficient competition in the eigenbasis");
  cs->add_option("--eigvals", cfg.eigvals, "eigenvalues")->required()->delimiter(',');
  cs->add_option("--probs", cfg.probs, "initial probabilities")->required()->delimiter(',');
  cs->add_option("--dt", cfg.coeff_dt, "RK4 step")->check(CLI::PositiveNumber)->capture_default_str();
  cs->add_option("--t-end", cfg.t_end, "final time")->check(CLI::NonNegativeNumber)->capture_default_str();
  cs->add_option("--every", cfg.every, "write every k-th step")->check(CLI::PositiveNumber);
  cs->add_option("--out", cfg.out, "trajectory CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    throw UsageError(code == 0 ? o.str() : eo.str(), code == 0 ? kExitOk : kExitUsage);
  }

  if (order == "first") {
    cfg.collapse.expectation_order = ExpectationOrder::first;
    cfg.scan.collapse.expectation_order = ExpectationOrder::first;
  }
  if (no_renorm) {
    cfg.collapse.renormalize_every_step = false;
    cfg.scan.collapse.renormalize_every_step = false;
  }
  if (!std::isnan(c)) cfg.jc.c = c;

  if (*col) {
    cfg.command = Command::collapse;
    const auto& s = cfg.init;
    if (s.rfind("basis:", 0) == 0) {
      std::size_t k = 0;
      try {
        std::size_t pos = 0;
        k = std::stoul(s.substr(6), &pos);
        if (pos != s.size() - 6) usage("--init basis:K needs an integer K");
      } catch (const std::logic_error&) {
        usage("--init basis:K needs an integer K");
      }
      (void)k;
    } else if (s.rfind("state:", 0) == 0) {
      if (!fs::exists(s.substr(6))) usage("--init state file does not exist: " + s.substr(6));
    } else if (s != "random") {
      usage("--init must be basis:K, state:FILE or random");
    }
  } else if (*tw) {
    cfg.command = Command::tow;
    if (cfg.base.size() != cfg.target.size()) usage("--base and --target need the same number of operators");
    if (cfg.target_indices.empty() && cfg.target_states.empty())
      usage("tow needs --target-index or --target-state");
  } else if (*jb) {
    cfg.command = Command::jc_build;
  } else if (*js) {
    cfg.command = Command::jc_scan;
    cfg.scan.q = q_scan;
    cfg.scan.two_pass = !single_pass;
    cfg.scan.method = method == "oracle" ? ScanMethod::oracle : ScanMethod::towing;
    if (kappa_max != "auto") {
      try {
        const double v = parse_double(kappa_max);
        if (!(v > 0.0)) usage("--kappa-max must be positive or 'auto'");
        cfg.scan.kappa_max = v;
      } catch (const std::invalid_argument&) {
        usage("--kappa-max must be a number or 'auto'");
      }
    }
  } else if (*je) {
    cfg.command = Command::jc_exponent;
    if (!std::isnan(q_exp)) cfg.q = q_exp;
  } else if (*oe) {
    cfg.command = Command::oracle_eig;
  } else if (*bn) {
    cfg.command = Command::bench;
    cfg.suite = suite == "oracle_scaling" ? BenchSuite::oracle_scaling : BenchSuite::collapse_scaling;
    cfg.bench.include_tow = !no_tow;
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
      if (cfg.n_list[i] == 0 || cfg.n_list[i] % 2 != 0) usage("--n-list entries must be positive even integers");
      if (i > 0 && cfg.n_list[i] <= cfg.n_list[i - 1]) usage("--n-list must be strictly ascending");
    }
  } else if (*cs) {
    cfg.command = Command::coeffsim;
    if (cfg.eigvals.size() != cfg.probs.size()) usage("--eigvals and --probs need the same length");
    for (double p : cfg.probs)
      if (!(p >= 0.0)) usage("--probs must be nonnegative");
  }
  if ((cfg.command == Command::jc_build || cfg.command == Command::jc_scan)) {
    try {
      cfg.jc.validate();
    } catch (const ParameterError& ex) {
      usage(ex.what());
    }
  }
  return cfg;
}

namespace {

std::vector<SparseSymmetricOperator> load_ops(const std::vector<fs::path>& files) {
  std::vector<SparseSymmetricOperator> ops;
  for (const auto& f : files) ops.push_back(load_matrix(f));
  return ops;
}

StateVector initial_state(const RunConfig& cfg, std::size_t dim) {
  const auto& s = cfg.init;
  if (s.rfind("basis:", 0) == 0) {
    const std::size_t k = std::stoul(s.substr(6));
    if (k >= dim) throw ContractViolation("--init basis index outside the dimension");
    return StateVector::basis(dim, k);
  }
  if (s.rfind("state:", 0) == 0) {
    StateVector v = load_state(s.substr(6));
    if (v.size() != dim) throw ContractViolation("initial state length does not match the operator dimension");
    return v;
  }
  return random_unit_state(dim, cfg.seed);
}

std::string join_warnings(const std::vector<std::string>& w) {
  std::string s;
  for (const auto& x : w) s += "warning: " + x + "\n";
  return s;
}

int run_collapse(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const OperatorSet set(load_ops(cfg.ops));
  const StateVector v0 = initial_state(cfg, set.dim());
  const CollapseResult r = collapse(set, v0, cfg.collapse);
  write_text_file(cfg.out_dir / "trace.csv", trace_csv(r.report, set.size()));
  save_state(cfg.out_dir / "state.txt", r.state);
  if (cfg.verbosity > 0) {
    out << "converged=" << (r.report.converged ? 1 : 0) << " iterations=" << r.report.iterations
        << " residual=" << format_double(r.report.final_residual()) << '\n';
    err << join_warnings(r.report.warnings);
  }
  return r.report.converged ? kExitOk : kExitNumerical;
}

int run_tow(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  TowingPlan plan = make_schedule(OperatorSet(load_ops(cfg.base)), OperatorSet(load_ops(cfg.target)), cfg.steps);
  for (std::size_t k : cfg.target_indices) plan.targets.emplace_back(k);
  for (const auto& f : cfg.target_states) plan.targets.emplace_back(load_state(f));
  std::optional<RefineOptions> ref;
  if (cfg.refine_tol) ref = RefineOptions{*cfg.refine_tol, RefineOptions{}.max_doublings};
  const auto results = tow_many(plan, cfg.collapse, cfg.parallel, ref);

  std::ostringstream summary;
  summary << "target,refined_steps,final_residual,rayleigh,overlap_min\n";
  bool all_ok = true;
  const auto& h = plan.target.op(0);
  for (const TowingResult& r : results) {
    const fs::path dir = cfg.out_dir / ("target_" + std::to_string(r.target_id));
    for (std::size_t i = 0; i < r.per_step_reports.size(); ++i)
      write_text_file(dir / ("step_" + std::to_string(i + 1) + ".csv"),
                      trace_csv(r.per_step_reports[i], plan.target.size()));
    double rho = std::numeric_limits<double>::quiet_NaN();
    double res = std::numeric_limits<double>::quiet_NaN();
    if (r.final_state.size() == h.dim()) {
      save_state(dir / "state.txt", r.final_state);
      rho = rayleigh_residual(h, r.final_state).rho;
    }
    if (!r.per_step_reports.empty()) res = r.per_step_reports.back().final_residual();
    summary << r.target_id << ',' << r.refined_steps << ',' << format_double(res) << ',' << format_double(rho) << ','
            << format_double(r.overlap_min()) << '\n';
    const bool ok = r.converged && r.resolved && r.error.empty();
    all_ok = all_ok && ok;
    if (cfg.verbosity > 0) {
      for (const auto& w : r.warnings) err << "warning: target " << r.target_id << ": " << w << '\n';
      if (!r.error.empty()) err << "error: target " << r.target_id << ": " << r.error << '\n';
    }
  }
  write_text_file(cfg.out_dir / "summary.csv", summary.str());
  if (cfg.verbosity > 0) out << "targets=" << results.size() << " ok=" << (all_ok ? 1 : 0) << '\n';
  return all_ok ? kExitOk : kExitNumerical;
}

int run_jc_scan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ScanResult r = scan_kappa(cfg.jc, cfg.scan);
  write_text_file(cfg.out, scan_csv(r));
  std::size_t bad = 0;
  for (const auto& row : r.all_rows()) bad += row.converged ? 0 : 1;
  if (cfg.verbosity > 0) {
    out << "peak kappa=" << format_double(r.peak.kappa) << " inversion=" << format_double(r.peak.inversion)
        << " kappa_max=" << format_double(r.kappa_max) << '\n';
    if (bad) err << "warning: " << bad << " rows did not converge and are flagged\n";
  }
  return kExitOk;
}

int run_jc_exponent(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<ScanResult> scans;
  for (const auto& f : cfg.scans) {
    std::ifstream is(f);
    std::stringstream ss;
    ss << is.rdbuf();
    scans.push_back(parse_scan_csv(ss.str()));
  }
  const double q = cfg.q.value_or(scans.front().q);
  for (const auto& s : scans)
    if (std::abs(s.q - q) > 1e-12 && cfg.verbosity > 0)
      err << "warning: scan for N=" << s.params.n_molecules << " has q=" << format_double(s.q) << '\n';
  const ScalingTable t = fit_critical_exponent(scans, q);
  std::ostringstream os;
  os << "q,slope,ci95,n_points\n"
     << format_double(q) << ',' << format_double(t.slope) << ',' << format_double(t.ci95) << ',' << t.rows.size()
     << '\n';
  write_text_file(cfg.out, os.str());
  if (cfg.verbosity > 0) out << "slope=" << format_double(t.slope) << " ci95=" << format_double(t.ci95) << '\n';
  return kExitOk;
}

int run_oracle(const RunConfig& cfg, std::ostream& out) {
  const auto m = load_matrix(cfg.matrix);
  if (cfg.tridiag && m.bandwidth() > 1) throw ContractViolation("--tridiag given for a matrix with bandwidth > 1");
  const EigenDecomposition dec =
      cfg.tridiag ? tridiag_eig(m.diagonal_values(), m.superdiagonal_values()) : dense_eig(m);
  std::ostringstream os;
  os << "index,eigenvalue\n";
  for (std::size_t i = 0; i < dec.eigenvalues.size(); ++i) os << i << ',' << format_double(dec.eigenvalues[i]) << '\n';
  write_text_file(cfg.out, os.str());
  std::vector<std::size_t> want = cfg.vectors;
  if (cfg.all_vectors) {
    want.clear();
    for (std::size_t i = 0; i < dec.eigenvalues.size(); ++i) want.push_back(i);
  }
  for (std::size_t i : want) {
    if (i >= dec.eigenvectors.size()) throw ContractViolation("--vectors index outside the dimension");
    const fs::path p = cfg.out.parent_path() / (cfg.out.stem().string() + "_vec_" + std::to_string(i) + ".txt");
    save_state(p, dec.eigenvectors[i]);
  }
  if (cfg.verbosity > 0) out << "eigenvalues=" << dec.eigenvalues.size() << " vectors=" << want.size() << '\n';
  return kExitOk;
}

int run_bench(const RunConfig& cfg, std::ostream& out) {
  const auto records = bench(cfg.suite, cfg.n_list, cfg.bench);
  const std::string csv = bench_csv(records);
  write_text_file(cfg.out, csv);
  if (cfg.verbosity > 0) {
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line))
      if (line.rfind("# ", 0) == 0) out << line.substr(2) << '\n';
  }
  return kExitOk;
}

int run_coeffsim(const RunConfig& cfg, std::ostream& out) {
  const CoefficientState cs = coefficient_state(cfg.eigvals, cfg.probs);
  const auto traj = coeff_simulate(cs, cfg.coeff_dt, cfg.t_end);
  std::ostringstream os;
  os << "t,norm2";
  for (std::size_t a = 0; a < cs.size(); ++a) os << ",p_" << a;
  os << '\n';
  for (std::size_t s = 0; s < traj.size(); ++s) {
    if (s % cfg.every != 0 && s + 1 != traj.size()) continue;
    os << format_double(traj[s].time) << ',' << format_double(traj[s].norm2());
    for (double p : traj[s].probabilities()) os << ',' << format_double(p);
    os << '\n';
  }
  write_text_file(cfg.out, os.str());
  const std::size_t w = traj.back().winner();
  double t_hit = std::numeric_limits<double>::quiet_NaN();
  for (const auto& st : traj)
    if (st.probabilities()[w] > 0.999) {
      t_hit = st.time;
      break;
    }
  if (cfg.verbosity > 0)
    out << "winner=" << w << " p=" << format_double(traj.back().probabilities()[w])
        << " t_0.999=" << format_double(t_hit) << '\n';
  return kExitOk;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  apply_thread_cap();
  switch (cfg.command) {
    case Command::collapse:
      return run_collapse(cfg, out, err);
    case Command::tow:
      return run_tow(cfg, out, err);
    case Command::jc_build:
      save_matrix(cfg.out, build_hamiltonian(cfg.jc));
      return kExitOk;
    case Command::jc_scan:
      return run_jc_scan(cfg, out, err);
    case Command::jc_exponent:
      return run_jc_exponent(cfg, out, err);
    case Command::oracle_eig:
      return run_oracle(cfg, out);
    case Command::bench:
      return run_bench(cfg, out);
    case Command::coeffsim:
      return run_coeffsim(cfg, out);
  }
  return kExitUsage;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_cli(argc, argv);
  } catch (const UsageError& e) {
    (e.code() == kExitOk ? out : err) << e.what();
    return e.code();
  }
  try {
    return run(cfg, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FactorizationError& e) {
    err << "error: " << e.what() << '\n';
    if (cfg.verbosity > 1) err << e.matrix_dump();
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace eigentow
