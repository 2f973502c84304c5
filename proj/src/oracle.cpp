#include "eigentow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eigentow/error.hpp"

namespace eigentow {

void fix_sign(std::vector<double>& v) {
  std::size_t imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  if (!v.empty() && v[imax] < 0.0)
    for (double& x : v) x = -x;
}

EigenDecomposition dense_eig(const SparseSymmetricOperator& op) {
  const std::size_t n = op.dim();
  if (n > kDenseEigMaxDim) throw ContractViolation("dense_eig: dimension above the dense guard; use tridiag_eig");
  std::vector<double> a = op.to_dense();
  std::vector<double> vt(n * n, 0.0);  // row p holds eigenvector p
  for (std::size_t i = 0; i < n; ++i) vt[i * n + i] = 1.0;

  const double fro = op.frobenius_norm();
  const double target = 1e-14 * fro;
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += 2.0 * a[p * n + q] * a[p * n + q];
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 100 && fro > 0.0 && off_norm() > target; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p], aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a[k * n + p], akq = a[k * n + q];
          const double np = c * akp - s * akq, nq = s * akp + c * akq;
          a[k * n + p] = a[p * n + k] = np;
          a[k * n + q] = a[q * n + k] = nq;
        }
        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = a[q * n + p] = 0.0;
        double* vp = &vt[p * n];
        double* vq = &vt[q * n];
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k], y = vq[k];
          vp[k] = c * x - s * y;
          vq[k] = s * x + c * y;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x * n + x] < a[y * n + y]; });
  EigenDecomposition out;
  out.eigenvalues.reserve(n);
  out.eigenvectors.reserve(n);
  for (std::size_t i : order) {
    out.eigenvalues.push_back(a[i * n + i]);
    std::vector<double> v(vt.begin() + static_cast<std::ptrdiff_t>(i * n),
                          vt.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    fix_sign(v);
    out.eigenvectors.emplace_back(std::move(v));
  }
  return out;
}

std::size_t sturm_count(std::span<const double> d, std::span<const double> e, double x) {
  const double tiny = std::numeric_limits<double>::min();
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double e2 = i == 0 ? 0.0 : e[i - 1] * e[i - 1];
    q = d[i] - x - (i == 0 ? 0.0 : e2 / q);
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

namespace {

void check_tridiag(std::span<const double> d, std::span<const double> e) {
  if (d.empty()) throw ContractViolation("tridiag_eig: empty diagonal");
  if (e.size() + 1 != d.size()) throw ContractViolation("tridiag_eig: offdiag length must be diag length - 1");
}

struct Bounds {
  double lo, hi;
};

Bounds gershgorin(std::span<const double> d, std::span<const double> e) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < d.size() ? std::abs(e[i]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  const double pad = 1e-12 * std::max(1.0, hi - lo) + std::numeric_limits<double>::min();
  return {lo - pad, hi + pad};
}

// k-th smallest eigenvalue by bisection to machine resolution.
double bisect(std::span<const double> d, std::span<const double> e, std::size_t k, Bounds b) {
  double lo = b.lo, hi = b.hi;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi))) break;
    if (sturm_count(d, e, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Tridiagonal LU with partial pivoting of T - shift I; solves in place.
class ShiftedTridiagLU {
 public:
  ShiftedTridiagLU(std::span<const double> d, std::span<const double> e, double shift, double pivmin)
      : n_(d.size()), l_(n_, 0.0), u0_(n_), u1_(n_, 0.0), u2_(n_, 0.0), swap_(n_, false) {
    std::vector<double> diag(d.begin(), d.end()), sub(e.begin(), e.end()), sup(e.begin(), e.end());
    for (double& x : diag) x -= shift;
    // row i currently: [.. diag[i], sup[i], extra[i] ..]
    double carry_diag = n_ ? diag[0] : 0.0;
    double carry_sup = n_ > 1 ? sup[0] : 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (i + 1 == n_) {
        u0_[i] = std::abs(carry_diag) < pivmin ? (carry_diag < 0.0 ? -pivmin : pivmin) : carry_diag;
        break;
      }
      const double below_sub = sub[i];
      const double below_diag = diag[i + 1];
      const double below_sup = i + 2 < n_ ? sup[i + 1] : 0.0;
      if (std::abs(below_sub) > std::abs(carry_diag)) {
        swap_[i] = true;
        u0_[i] = below_sub;
        u1_[i] = below_diag;
        u2_[i] = below_sup;
        const double m = carry_diag / below_sub;
        l_[i] = m;
        carry_diag = carry_sup - m * below_diag;
        carry_sup = -m * below_sup;
      } else {
        double piv = carry_diag;
        if (std::abs(piv) < pivmin) piv = piv < 0.0 ? -pivmin : pivmin;
        u0_[i] = piv;
        u1_[i] = carry_sup;
        u2_[i] = 0.0;
        const double m = below_sub / piv;
        l_[i] = m;
        carry_diag = below_diag - m * carry_sup;
        carry_sup = below_sup;
      }
    }
  }

  void solve(std::vector<double>& x) const {
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (swap_[i]) std::swap(x[i], x[i + 1]);
      x[i + 1] -= l_[i] * x[i];
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      double s = x[ii];
      if (ii + 1 < n_) s -= u1_[ii] * x[ii + 1];
      if (ii + 2 < n_) s -= u2_[ii] * x[ii + 2];
      x[ii] = s / u0_[ii];
    }
  }

 private:
  std::size_t n_;
  std::vector<double> l_, u0_, u1_, u2_;
  std::vector<bool> swap_;
};

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Deterministic, non-special starting vector.
std::vector<double> start_vector(std::size_t n, std::size_t k) {
  std::vector<double> v(n);
  std::uint64_t s = 0x9e3779b97f4a7c15ULL ^ (k * 0xbf58476d1ce4e5b9ULL);
  for (double& x : v) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    x = 0.5 + static_cast<double>(s >> 11) * 0x1.0p-53;
  }
  return v;
}

std::vector<double> inverse_iteration(std::span<const double> d, std::span<const double> e, double lambda,
                                      std::size_t k, double norm_bound, const std::vector<std::vector<double>>& cluster) {
  const std::size_t n = d.size();
  const double scale = std::max(norm_bound, std::numeric_limits<double>::min());
  const double pivmin = std::numeric_limits<double>::epsilon() * scale;
  double shift = lambda;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    ShiftedTridiagLU lu(d, e, shift, pivmin);
    std::vector<double> x = start_vector(n, k + 7919 * static_cast<std::size_t>(attempt));
    bool ok = true;
    for (int it = 0; it < 4 && ok; ++it) {
      lu.solve(x);
      // two Gram-Schmidt passes: one loses orthogonality when the solve
      // amplifies the cluster directions
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& u : cluster) {
          double c = 0.0;
          for (std::size_t i = 0; i < n; ++i) c += u[i] * x[i];
          for (std::size_t i = 0; i < n; ++i) x[i] -= c * u[i];
        }
      const double nx = norm(x);
      if (!std::isfinite(nx) || !(nx > 0.0)) {
        ok = false;
        break;
      }
      for (double& xi : x) xi /= nx;
    }
    if (ok) {
      fix_sign(x);
      return x;
    }
    shift = lambda + 1e-12 * scale * static_cast<double>(attempt + 1);
  }
  throw FactorizationError("inverse iteration broke down after 3 shift perturbations", "");
}

EigenDecomposition tridiag_impl(std::span<const double> d, std::span<const double> e,
                                std::span<const std::size_t> idx) {
  check_tridiag(d, e);
  const std::size_t n = d.size();
  for (std::size_t k : idx)
    if (k >= n) throw ContractViolation("tridiag_eig: eigenpair index out of range");
  const Bounds b = gershgorin(d, e);
  // eigenvalue accuracy is relative to the norm, not the spread
  const double norm_bound = std::max(std::abs(b.lo), std::abs(b.hi));
  std::vector<std::size_t> order(idx.begin(), idx.end());
  std::sort(order.begin(), order.end());

  EigenDecomposition out;
  std::vector<double> lambdas;
  for (std::size_t k : order) lambdas.push_back(bisect(d, e, k, b));

  const double cluster_gap = 1e-8 * norm_bound;
  std::vector<std::vector<double>> vecs;
  std::size_t cluster_start = 0;
  for (std::size_t m = 0; m < order.size(); ++m) {
    if (m > 0 && !(lambdas[m] - lambdas[m - 1] <= cluster_gap)) cluster_start = m;
    std::vector<std::vector<double>> cluster(vecs.begin() + static_cast<std::ptrdiff_t>(cluster_start), vecs.end());
    vecs.push_back(inverse_iteration(d, e, lambdas[m], order[m], norm_bound, cluster));
  }
  for (std::size_t m = 0; m < order.size(); ++m) {
    out.eigenvalues.push_back(lambdas[m]);
    out.eigenvectors.emplace_back(std::move(vecs[m]));
  }
  return out;
}

}  // namespace

EigenDecomposition tridiag_eig(std::span<const double> diag, std::span<const double> offdiag) {
  std::vector<std::size_t> all(diag.size());
  std::iota(all.begin(), all.end(), 0);
  return tridiag_impl(diag, offdiag, all);
}

EigenDecomposition tridiag_eig(std::span<const double> diag, std::span<const double> offdiag,
                               std::span<const std::size_t> indices) {
  return tridiag_impl(diag, offdiag, indices);
}

std::pair<double, StateVector> tridiag_eigpair(std::span<const double> diag, std::span<const double> offdiag,
                                               std::size_t k) {
  const std::size_t idx[] = {k};
  auto dec = tridiag_impl(diag, offdiag, idx);
  return {dec.eigenvalues[0], std::move(dec.eigenvectors[0])};
}

double compare_eigvec(const StateVector& v, const StateVector& ref) {
  if (v.size() != ref.size()) throw ContractViolation("compare_eigvec: length mismatch");
  double dm = 0.0, dp = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    dm += (v[i] - ref[i]) * (v[i] - ref[i]);
    dp += (v[i] + ref[i]) * (v[i] + ref[i]);
  }
  return std::sqrt(std::min(dm, dp));
}

RayleighResidual rayleigh_residual(const SparseSymmetricOperator& op, const StateVector& v) {
  if (!(v.norm2() > 0.0)) throw DegenerateStateError("rayleigh_residual: zero vector");
  const StateVector w = op.apply(v);
  const double rho = dot(v, w) / v.norm2();
  double r2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = w[i] - rho * v[i];
    r2 += r * r;
  }
  return {rho, std::sqrt(r2 / v.norm2())};
}

}  // namespace eigentow
