#include "eigentow/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "eigentow/collapse.hpp"
#include "eigentow/error.hpp"
#include "eigentow/io.hpp"
#include "eigentow/jaynes_cummings.hpp"
#include "eigentow/oracle.hpp"
#include "eigentow/towing.hpp"

namespace eigentow {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

JCParams jc_at(std::size_t n, double kappa) {
  JCParams p;
  p.n_molecules = n;
  p.kappa = kappa;
  return p;
}

template <class F>
BenchRecord time_cell(std::size_t n, const char* method, std::size_t repeats, F&& run) {
  BenchRecord rec{n, method, std::numeric_limits<double>::infinity(), 0, false};
  for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
    const auto t0 = Clock::now();
    const std::size_t iters = run();
    const double dt = seconds_since(t0);
    if (dt < rec.wall_time) {
      rec.wall_time = dt;
      rec.iterations = iters;
    }
  }
  // Guard against a clock that reports zero for very short cells.
  rec.wall_time = std::max(rec.wall_time, 1e-9);
  return rec;
}

}  // namespace

std::vector<BenchRecord> bench(BenchSuite suite, const std::vector<std::size_t>& n_list, const BenchOptions& opt) {
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] == 0 || n_list[i] % 2 != 0) throw ContractViolation("bench: every n must be a positive even integer");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw ContractViolation("bench: n_list must be strictly ascending");
  }
  std::vector<BenchRecord> out;
  std::set<std::string> stopped;
  auto add = [&](BenchRecord rec) {
    if (rec.wall_time > opt.timeout) {
      rec.timed_out = true;
      stopped.insert(rec.method);
    }
    out.push_back(std::move(rec));
  };

  for (std::size_t n : n_list) {
    const JCParams base = jc_at(n, 0.0);
    const JCParams p = jc_at(n, opt.kappa);
    const std::size_t k = n / 10;
    const auto h = build_hamiltonian(p);
    if (suite == BenchSuite::collapse_scaling) {
      const OperatorSet set(h);
      if (!stopped.count("collapse")) {
        CollapseConfig cfg;
        cfg.tol = std::numeric_limits<double>::min();
        cfg.max_iter = opt.collapse_iters;
        cfg.record_moments = false;
        const StateVector v0 = StateVector::basis(h.dim(), k);
        add(time_cell(n, "collapse", opt.repeats, [&] { return collapse(set, v0, cfg).report.iterations; }));
      }
      if (opt.include_tow && !stopped.count("tow")) {
        TowingPlan plan = make_schedule(OperatorSet(build_hamiltonian(base)), set, 10);
        plan.targets.push_back(k);
        const CollapseConfig cfg;
        add(time_cell(n, "tow", 1, [&] {
          const TowingResult r = tow(plan, 0, cfg);
          std::size_t it = 0;
          for (const auto& rep : r.per_step_reports) it += rep.iterations;
          return it;
        }));
      }
    } else {
      if (!stopped.count("oracle_all") && n + 1 <= kDenseEigMaxDim)
        add(time_cell(n, "oracle_all", opt.repeats, [&] { return dense_eig(h).eigenvalues.size(); }));
      if (!stopped.count("oracle_single")) {
        const auto d = h.diagonal_values();
        const auto e = h.superdiagonal_values();
        add(time_cell(n, "oracle_single", opt.repeats, [&] {
          (void)tridiag_eigpair(d, e, k);
          return std::size_t{1};
        }));
      }
    }
  }
  return out;
}

double loglog_slope(const std::vector<BenchRecord>& records, const std::string& method, bool per_iteration) {
  std::vector<double> x, y;
  for (const BenchRecord& r : records) {
    if (r.method != method || r.timed_out) continue;
    const double t = per_iteration ? r.wall_time / static_cast<double>(std::max<std::size_t>(r.iterations, 1))
                                   : r.wall_time;
    x.push_back(std::log(static_cast<double>(r.n)));
    y.push_back(std::log(t));
  }
  if (x.size() < 2) throw FitError("loglog_slope: need at least 2 timed cells for " + method);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

std::string bench_csv(const std::vector<BenchRecord>& records) {
  std::ostringstream os;
  std::set<std::string> methods;
  for (const BenchRecord& r : records) {
    methods.insert(r.method);
    if (r.timed_out) os << "# timeout n=" << r.n << " method=" << r.method << '\n';
  }
  for (const std::string& m : methods) {
    try {
      os << "# slope method=" << m << " total=" << format_double(loglog_slope(records, m, false));
      if (m == "collapse") os << " per_iteration=" << format_double(loglog_slope(records, m, true));
      os << '\n';
    } catch (const FitError&) {
      os << " unavailable\n";
    }
  }
  os << "n,method,wall_time,iterations\n";
  for (const BenchRecord& r : records)
    os << r.n << ',' << r.method << ',' << format_double(r.wall_time) << ',' << r.iterations << '\n';
  return os.str();
}

}  // namespace eigentow
