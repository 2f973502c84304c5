#include "eigentow/jaynes_cummings.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <sstream>

#include "eigentow/error.hpp"
#include "eigentow/io.hpp"
#include "eigentow/oracle.hpp"
#include "eigentow/towing.hpp"

namespace eigentow {

void JCParams::validate() const {
  if (n_molecules == 0 || n_molecules % 2 != 0) throw ParameterError("JC: N must be a positive even integer");
  if (!std::isfinite(omega0) || !std::isfinite(omega) || !std::isfinite(kappa) || !std::isfinite(c_value()))
    throw ParameterError("JC: parameters must be finite");
  if (kappa < 0.0) throw ParameterError("JC: kappa must be nonnegative");
  if (c_value() < j()) throw ParameterError("JC: c must be >= j so that photon numbers are nonnegative");
}

SparseSymmetricOperator build_hamiltonian(const JCParams& p) {
  p.validate();
  const double j = p.j(), c = p.c_value();
  const std::size_t n = p.dim();
  std::vector<double> diag(n), off(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double di = static_cast<double>(i);
    diag[i] = (j - di) * p.omega0 + (c - j + di) * p.omega;
  }
  const double pref = p.kappa / std::sqrt(4.0 * j);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double di = static_cast<double>(i);
    const double photons = c - j + di + 1.0;
    const double m = j - di - 1.0;
    const double cg = j * (j + 1.0) - m * (m + 1.0);
    if (photons < 0.0 || cg < 0.0) throw ParameterError("JC: negative radicand at basis index " + std::to_string(i));
    off[i] = pref * std::sqrt(photons) * std::sqrt(cg);
  }
  return SparseSymmetricOperator::tridiagonal(diag, off);
}

double atomic_inversion(const StateVector& v, double j) {
  if (!(j > 0.0)) throw ContractViolation("atomic_inversion: j must be positive");
  if (std::abs(v.norm() - 1.0) > 1e-10) throw ContractViolation("atomic_inversion: state must be normalized");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * v[i] * static_cast<double>(i);
  return 1.0 - s / j;
}

double critical_coupling(double omega0, double omega) { return std::sqrt((omega - omega0) * (omega - omega0) / 2.0); }

std::size_t target_index(double q, std::size_t n_molecules) {
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("q must lie in [0, 1]");
  return static_cast<std::size_t>(std::llround(q * static_cast<double>(n_molecules)));
}

namespace {

JCParams at_kappa(JCParams p, double kappa) {
  p.kappa = kappa;
  return p;
}

ScanRow make_row(const JCParams& p, const SparseSymmetricOperator& h, const StateVector& v, bool converged) {
  const StateVector u = v.normalized();
  return {p.kappa, atomic_inversion(u, p.j()), rayleigh_residual(h, u).rho / p.j(), converged};
}

std::vector<ScanRow> scan_impl(const JCParams& base, std::size_t k, const std::vector<double>& kappas,
                               ScanMethod method, const CollapseConfig& cfg, const StateVector* start,
                               double start_kappa, std::vector<StateVector>* states) {
  base.validate();
  if (k >= base.dim()) throw ParameterError("JC: target index outside the basis");
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    if (!(kappas[i] >= 0.0)) throw ContractViolation("scan: kappa grid must be nonnegative");
    if (i > 0 && kappas[i] < kappas[i - 1]) throw ContractViolation("scan: kappa grid must be ascending");
  }
  std::vector<ScanRow> rows;
  rows.reserve(kappas.size());
  if (states) states->clear();

  if (method == ScanMethod::oracle) {
    for (double kappa : kappas) {
      const JCParams p = at_kappa(base, kappa);
      const auto h = build_hamiltonian(p);
      auto [lambda, v] = tridiag_eigpair(h.diagonal_values(), h.superdiagonal_values(), k);
      rows.push_back(make_row(p, h, v, true));
      if (states) states->push_back(std::move(v));
    }
    return rows;
  }

  StateVector psi = start ? start->normalized() : StateVector::basis(base.dim(), k);
  double prev = start ? start_kappa : 0.0;
  for (double kappa : kappas) {
    const JCParams p = at_kappa(base, kappa);
    const auto h = build_hamiltonian(p);
    bool ok = true;
    if (prev == 0.0 && kappa > 0.0 && !start && rows.empty()) {
      // First rung away from the unperturbed basis state: a short ladder.
      TowingPlan plan = make_schedule(OperatorSet(build_hamiltonian(at_kappa(base, 0.0))), OperatorSet(h), 10);
      plan.targets.push_back(psi);
      TowingResult tr = tow(plan, 0, cfg);
      ok = tr.converged;
      psi = std::move(tr.final_state);
    } else {
      CollapseResult cr = collapse(OperatorSet(h), psi, cfg);
      ok = cr.report.converged;
      psi = std::move(cr.state);
    }
    rows.push_back(make_row(p, h, psi, ok));
    if (states) states->push_back(psi);
    prev = kappa;
  }
  return rows;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = a;
    return g;
  }
  for (std::size_t i = 0; i < n; ++i)
    g[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

struct PeakInfo {
  std::size_t index = 0;
  bool after_minimum = false;
};

PeakInfo peak_info(const std::vector<ScanRow>& rows) {
  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].converged) ok.push_back(i);
  if (ok.empty()) throw FitError("scan has no converged rows");
  std::size_t first_min = ok.size();
  for (std::size_t m = 1; m + 1 < ok.size(); ++m) {
    const double x = rows[ok[m]].inversion;
    if (x < rows[ok[m - 1]].inversion && x <= rows[ok[m + 1]].inversion) {
      first_min = m;
      break;
    }
  }
  PeakInfo info;
  info.after_minimum = first_min < ok.size();
  const std::size_t from = info.after_minimum ? first_min : 0;
  std::size_t best = ok[from];
  for (std::size_t m = from; m < ok.size(); ++m)
    if (rows[ok[m]].inversion > rows[best].inversion) best = ok[m];
  info.index = best;
  return info;
}

}  // namespace

std::vector<ScanRow> scan_grid(const JCParams& base, std::size_t k, const std::vector<double>& kappas,
                               ScanMethod method, const CollapseConfig& cfg, std::vector<StateVector>* states) {
  return scan_impl(base, k, kappas, method, cfg, nullptr, 0.0, states);
}

std::size_t transition_peak(const std::vector<ScanRow>& rows) { return peak_info(rows).index; }

std::vector<ScanRow> ScanResult::all_rows() const {
  std::vector<ScanRow> all = coarse;
  all.insert(all.end(), refined.begin(), refined.end());
  std::stable_sort(all.begin(), all.end(), [](const ScanRow& a, const ScanRow& b) { return a.kappa < b.kappa; });
  all.erase(std::unique(all.begin(), all.end(), [](const ScanRow& a, const ScanRow& b) { return a.kappa == b.kappa; }),
            all.end());
  return all;
}

ScanResult scan_kappa(const JCParams& base, const ScanOptions& opt) {
  base.validate();
  if (opt.coarse_points < 3) throw ContractViolation("scan: need at least 3 coarse points");
  if (opt.two_pass && opt.refine_points < 2) throw ContractViolation("scan: need at least 2 refined points");
  ScanResult res;
  res.params = base;
  res.q = opt.q;
  res.target_index = target_index(opt.q, base.n_molecules);
  const std::size_t k = res.target_index;

  const double kc = critical_coupling(base.omega0, base.omega);
  // Degenerate frequencies have kappa_c = 0; fall back to a unit scale.
  const double scale = kc > 0.0 ? kc : 1.0;
  double kmax = opt.kappa_max.value_or(2.0 * scale);
  if (!(kmax > 0.0)) throw ContractViolation("scan: kappa_max must be positive");
  const bool auto_range = !opt.kappa_max && k > 0;

  std::vector<StateVector> states;
  PeakInfo info;
  for (;;) {
    res.coarse = scan_impl(base, k, linspace(0.0, kmax, opt.coarse_points), opt.method, opt.collapse, nullptr, 0.0,
                           &states);
    info = peak_info(res.coarse);
    const bool at_edge = info.index + 1 + opt.window_steps >= res.coarse.size();
    if (!auto_range || (info.after_minimum && !at_edge) || kmax >= 64.0 * scale) break;
    kmax *= 2.0;
  }
  res.kappa_max = kmax;
  res.peak = res.coarse[info.index];
  if (!opt.two_pass) return res;

  const double step = kmax / static_cast<double>(opt.coarse_points - 1);
  const std::size_t left = info.index >= opt.window_steps ? info.index - opt.window_steps : 0;
  const double lo = res.coarse[left].kappa;
  const double hi = std::min(kmax, res.coarse[info.index].kappa + static_cast<double>(opt.window_steps) * step);
  res.refined = scan_impl(base, k, linspace(lo, hi, opt.refine_points), opt.method, opt.collapse, &states[left],
                          res.coarse[left].kappa, nullptr);
  std::size_t best = res.refined.size();
  for (std::size_t i = 0; i < res.refined.size(); ++i)
    if (res.refined[i].converged && (best == res.refined.size() || res.refined[i].inversion > res.refined[best].inversion))
      best = i;
  if (best < res.refined.size() && res.refined[best].inversion >= res.peak.inversion) res.peak = res.refined[best];
  return res;
}

std::string scan_csv(const ScanResult& r) {
  std::ostringstream os;
  os << "# n=" << r.params.n_molecules << '\n'
     << "# q=" << format_double(r.q) << '\n'
     << "# target_index=" << r.target_index << '\n'
     << "# omega0=" << format_double(r.params.omega0) << '\n'
     << "# omega=" << format_double(r.params.omega) << '\n'
     << "# c=" << format_double(r.params.c_value()) << '\n'
     << "# kappa_max=" << format_double(r.kappa_max) << '\n'
     << "# peak_kappa=" << format_double(r.peak.kappa) << '\n'
     << "# peak_inversion=" << format_double(r.peak.inversion) << '\n'
     << "# peak_scaled_energy=" << format_double(r.peak.scaled_energy) << '\n'
     << "kappa,inversion,scaled_energy,converged\n";
  for (const ScanRow& row : r.all_rows())
    os << format_double(row.kappa) << ',' << format_double(row.inversion) << ',' << format_double(row.scaled_energy)
       << ',' << (row.converged ? 1 : 0) << '\n';
  return os.str();
}

ScanResult parse_scan_csv(const std::string& text) {
  std::istringstream is(text);
  const CsvTable t = read_csv(is);
  std::map<std::string, std::string> meta;
  for (const std::string& c : t.comments) {
    const auto eq = c.find('=');
    if (eq == std::string::npos) continue;
    auto key = c.substr(0, eq);
    key.erase(0, key.find_first_not_of(' '));
    meta[key] = c.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw ParseError(std::string("scan CSV lacks '# ") + key + "=' metadata", 1);
    return it->second;
  };
  ScanResult r;
  try {
    r.params.n_molecules = static_cast<std::size_t>(parse_double(need("n")));
    r.q = parse_double(need("q"));
    if (meta.count("omega0")) r.params.omega0 = parse_double(meta["omega0"]);
    if (meta.count("omega")) r.params.omega = parse_double(meta["omega"]);
    if (meta.count("c")) r.params.c = parse_double(meta["c"]);
    if (meta.count("kappa_max")) r.kappa_max = parse_double(meta["kappa_max"]);
    r.target_index = meta.count("target_index") ? static_cast<std::size_t>(parse_double(meta["target_index"]))
                                                : target_index(r.q, r.params.n_molecules);
  } catch (const std::invalid_argument& ex) {
    throw ParseError(std::string("bad scan metadata: ") + ex.what(), 1);
  }
  const std::size_t ck = t.column("kappa"), ci = t.column("inversion"), ce = t.column("scaled_energy"),
                    cc = t.column("converged");
  for (const auto& row : t.rows)
    r.coarse.push_back({parse_double(row[ck]), parse_double(row[ci]), parse_double(row[ce]), row[cc] == "1"});
  if (r.coarse.empty()) throw ParseError("scan CSV has no rows", 1);
  if (meta.count("peak_kappa") && meta.count("peak_inversion")) {
    r.peak.kappa = parse_double(meta["peak_kappa"]);
    r.peak.inversion = parse_double(meta["peak_inversion"]);
    r.peak.scaled_energy = meta.count("peak_scaled_energy") ? parse_double(meta["peak_scaled_energy"]) : 0.0;
  } else {
    r.peak = r.coarse[transition_peak(r.coarse)];
  }
  return r;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw FitError("fit: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw FitError("fit: need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("fit: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ssr += r * r;
  }
  const double dof = static_cast<double>(n - 2);
  const boost::math::students_t dist(dof);
  const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
  f.ci95 = tq * std::sqrt(ssr / dof / sxx);
  return f;
}

ScalingTable fit_critical_exponent(const std::vector<ScanResult>& scans, double q) {
  ScalingTable table;
  table.q = q;
  std::vector<double> x, y;
  for (const ScanResult& s : scans) {
    if (!(s.peak.inversion > 0.0)) throw FitError("fit: nonpositive peak inversion at N=" + std::to_string(s.params.n_molecules));
    ScalingRow row{s.params.n_molecules, s.params.j() * s.peak.inversion, s.peak.kappa, s.peak.scaled_energy};
    table.rows.push_back(row);
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const ScalingRow& a, const ScalingRow& b) { return a.n < b.n; });
  for (const ScalingRow& r : table.rows) {
    x.push_back(std::log(static_cast<double>(r.n)));
    y.push_back(std::log(r.max_inversion));
  }
  const LineFit f = fit_line(x, y);
  table.slope = f.slope;
  table.intercept = f.intercept;
  table.ci95 = f.ci95;
  return table;
}

}  // namespace eigentow
