#pragma once

// Finite-n exponential-basis solutions of the variance and iteration-count
// ODEs (exponential case).
//
// Characteristic equations, with P(t) = prod_{j<k} (n-j-t)/(n-j):
//   variance:  P(t) = (1 - k/n)^2     roots beta^1..beta^k, beta^1 in [1,2]
//   time:      P(t) = 1               roots alpha^1 = 0, alpha^2..alpha^k
// and reconstructions
//   v(x) = sum_l eta_l exp(beta_l (x - a))
//   T(x) = Delta (a - x) + sum_l delta_l exp(alpha_l (x - a)),  Delta = 1/M_{n,k}.
// The coefficient systems are confluent Vandermonde systems whose right-hand
// sides are moment functionals, so they are solved in Lagrange form:
//   eta_l   = (1/n) L_l(1) + (1 - 1/n) L_l(2)
//   delta_l = L_l(0) + Delta L_l'(0)
// with L_l the Lagrange basis on the roots.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "ams/errors.hpp"
#include "ams/oracle/coefficients.hpp"

namespace ams::oracle {

using cplx = std::complex<double>;

enum class RootKind { variance, time };

inline const char* to_string(RootKind kind) {
  return kind == RootKind::variance ? "variance" : "time";
}

namespace detail {

inline double char_rhs_log(int n, int k, RootKind kind) {
  return kind == RootKind::variance ? 2.0 * std::log1p(-static_cast<double>(k) / n) : 0.0;
}

// h(t) = P(t) - c and h'(t), evaluated in product form.
inline void char_eval(int n, int k, double c, cplx t, cplx& h, cplx& dh) {
  cplx prod(1.0);
  cplx dsum(0.0);
  for (int j = 0; j < k; ++j) {
    const double nj = n - j;
    const cplx f = 1.0 - t / nj;
    dsum += (-1.0 / nj) / f;
    prod *= f;
  }
  h = prod - c;
  dh = prod * dsum;
}

inline cplx newton_polish(int n, int k, double c, cplx t) {
  cplx h, dh;
  char_eval(n, k, c, t, h, dh);
  for (int it = 0; it < 20; ++it) {
    if (dh == cplx(0.0)) break;
    const cplx cand = t - h / dh;
    cplx hc, dhc;
    char_eval(n, k, c, cand, hc, dhc);
    if (!(std::abs(hc) < std::abs(h))) break;
    t = cand;
    h = hc;
    dh = dhc;
  }
  return t;
}

// Unique root of sum_j log(1 - t/(n-j)) = log c on [1, 2]; the left side is
// strictly decreasing on (-inf, n-k+1).
inline double variance_real_root(int n, int k) {
  const double target = char_rhs_log(n, k, RootKind::variance);
  auto phi = [&](double t) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += std::log1p(-t / (n - j));
    return s - target;
  };
  double lo = 1.0;
  double hi = 2.0;
  const double flo = phi(lo);
  const double fhi = phi(hi);
  if (!(flo > 0.0 && fhi <= 0.0)) {
    std::ostringstream msg;
    msg << "char_roots: no sign change on [1,2] for n=" << n << " k=" << k << " (phi(1)=" << flo
        << ", phi(2)=" << fhi << ")";
    throw convergence_error(msg.str());
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) > 0.0 ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  // Newton on phi, kept inside the bracket.
  for (int it = 0; it < 5; ++it) {
    double dphi = 0.0;
    for (int j = 0; j < k; ++j) dphi += -1.0 / (n - j - t);
    const double cand = t - phi(t) / dphi;
    if (!(cand >= lo && cand <= hi)) break;
    t = cand;
  }
  return t;
}

// Roots of q(s) = prod_j (1 - j/n - s) - c prod_j (1 - j/n), t = n s.
inline std::vector<cplx> companion_roots(int n, int k, double c) {
  std::vector<double> poly{1.0};  // ascending powers of s
  double base = 1.0;
  for (int j = 0; j < k; ++j) {
    const double w = 1.0 - static_cast<double>(j) / n;
    base *= w;
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += w * poly[i];
      next[i + 1] -= poly[i];
    }
    poly = std::move(next);
  }
  poly[0] -= c * base;
  const double lead = poly[k];
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(k, k);
  for (int i = 1; i < k; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < k; ++i) comp(i, k - 1) = -poly[i] / lead;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  if (es.info() != Eigen::Success) {
    throw convergence_error("char_roots: companion eigenvalue solver failed");
  }
  std::vector<cplx> roots;
  roots.reserve(k);
  for (int i = 0; i < k; ++i) roots.push_back(es.eigenvalues()[i] * static_cast<double>(n));
  return roots;
}

inline std::size_t nearest(const std::vector<cplx>& v, cplx target) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i] - target) < std::abs(v[best] - target)) best = i;
  }
  return best;
}

}  // namespace detail

/// All k roots of the characteristic equation. Index 0 is the distinguished
/// root (beta^1 in [1,2], or alpha^1 = 0 exactly); index l-1 for l >= 2 is
/// the root closest to n (1 - exp(2 pi i (l-1)/k)).
inline std::vector<cplx> char_roots(int n, int k, RootKind kind) {
  if (k < 1 || k > kMaxOracleK) throw input_error("char_roots: requires 1 <= k <= 16");
  if (k > n - 1) throw input_error("char_roots: requires k <= n-1");
  if (kind == RootKind::variance && k > n - 2) {
    throw input_error("char_roots: variance kind requires k <= n-2");
  }
  const double c = kind == RootKind::variance
                       ? std::pow(1.0 - static_cast<double>(k) / n, 2)
                       : 1.0;
  const cplx special = kind == RootKind::variance ? cplx(detail::variance_real_root(n, k)) : 0.0;
  if (k == 1) return {special};

  std::vector<cplx> raw = detail::companion_roots(n, k, c);
  for (auto& t : raw) t = detail::newton_polish(n, k, c, t);
  raw.erase(raw.begin() + static_cast<std::ptrdiff_t>(detail::nearest(raw, special)));

  std::vector<cplx> roots{special};
  for (int l = 2; l <= k; ++l) {
    const cplx dir = static_cast<double>(n) *
                     (1.0 - std::polar(1.0, 2.0 * std::numbers::pi * (l - 1) / k));
    const std::size_t i = detail::nearest(raw, dir);
    roots.push_back(raw[i]);
    raw.erase(raw.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return roots;
}

inline cplx ipow(cplx z, int m) {
  cplx r(1.0);
  for (int i = 0; i < m; ++i) r *= z;
  return r;
}

/// Lagrange basis polynomial L_l on `nodes`, evaluated at z.
inline cplx lagrange_basis(const std::vector<cplx>& nodes, std::size_t l, cplx z) {
  cplx v(1.0);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (j != l) v *= (z - nodes[j]) / (nodes[l] - nodes[j]);
  }
  return v;
}

inline cplx lagrange_basis_derivative(const std::vector<cplx>& nodes, std::size_t l, cplx z) {
  cplx sum(0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i == l) continue;
    cplx term = 1.0 / (nodes[l] - nodes[i]);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j != l && j != i) term *= (z - nodes[j]) / (nodes[l] - nodes[j]);
    }
    sum += term;
  }
  return sum;
}

struct SpectralSolution {
  RootKind kind = RootKind::variance;
  int n = 0;
  int k = 0;
  double a = 0.0;
  std::vector<cplx> roots;
  std::vector<cplx> coeffs;
  double slope = 0.0;        // Delta (time kind), 0 for variance
  double bc_residual = 0.0;  // max relative boundary-condition residual at a

  cplx complex_value(double x) const {
    cplx s = slope * (a - x);
    for (std::size_t l = 0; l < roots.size(); ++l) s += coeffs[l] * std::exp(roots[l] * (x - a));
    return s;
  }

  double operator()(double x) const { return complex_value(x).real(); }

  /// m-th derivative in x.
  cplx derivative(double x, int m) const {
    if (m == 0) return complex_value(x);
    cplx s = m == 1 ? cplx(-slope) : cplx(0.0);
    for (std::size_t l = 0; l < roots.size(); ++l) {
      s += coeffs[l] * ipow(roots[l], m) * std::exp(roots[l] * (x - a));
    }
    return s;
  }

  /// Boundary data d^m/dx^m at x = a that the solution must match.
  double boundary_value(int m) const {
    if (kind == RootKind::variance) return 1.0 / n + (1.0 - 1.0 / n) * std::pow(2.0, m);
    return m == 0 ? 1.0 : 0.0;
  }

  /// Smallest pairwise distance between roots.
  double min_root_gap() const {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < roots.size(); ++i)
      for (std::size_t j = i + 1; j < roots.size(); ++j)
        gap = std::min(gap, std::abs(roots[i] - roots[j]));
    return gap;
  }
};

namespace detail {

inline void check_gap(const std::vector<cplx>& roots, int n, int k) {
  for (std::size_t i = 0; i < roots.size(); ++i)
    for (std::size_t j = i + 1; j < roots.size(); ++j)
      if (std::abs(roots[i] - roots[j]) <= 1e-8) {
        std::ostringstream msg;
        msg << "spectral: near-degenerate roots for n=" << n << " k=" << k << ": " << roots[i]
            << " vs " << roots[j];
        throw conditioning_error(msg.str());
      }
}

inline double bc_residual(const SpectralSolution& s) {
  double worst = 0.0;
  for (int m = 0; m < s.k; ++m) {
    double scale = std::abs(s.boundary_value(m)) + (m == 1 ? std::abs(s.slope) : 0.0);
    for (std::size_t l = 0; l < s.roots.size(); ++l)
      scale += std::abs(s.coeffs[l]) * std::pow(std::abs(s.roots[l]), m);
    const double res = std::abs(s.derivative(s.a, m) - s.boundary_value(m));
    worst = std::max(worst, res / std::max(scale, 1.0));
  }
  return worst;
}

}  // namespace detail

/// v^{n,k}(x) = E[p_hat^2] for the exponential model, as an exponential sum.
inline SpectralSolution spectral_v(int n, int k, double a) {
  SpectralSolution s;
  s.kind = RootKind::variance;
  s.n = n;
  s.k = k;
  s.a = a;
  s.roots = char_roots(n, k, RootKind::variance);
  detail::check_gap(s.roots, n, k);
  const double w1 = 1.0 / n;
  for (std::size_t l = 0; l < s.roots.size(); ++l) {
    s.coeffs.push_back(w1 * lagrange_basis(s.roots, l, 1.0) +
                       (1.0 - w1) * lagrange_basis(s.roots, l, 2.0));
  }
  s.bc_residual = detail::bc_residual(s);
  return s;
}

/// T^{n,k}(x) = E[J] + 1 for the exponential model.
inline SpectralSolution spectral_T(int n, int k, double a) {
  SpectralSolution s;
  s.kind = RootKind::time;
  s.n = n;
  s.k = k;
  s.a = a;
  s.roots = char_roots(n, k, RootKind::time);
  detail::check_gap(s.roots, n, k);
  s.slope = 1.0 / m_nk(n, k).convert_to<double>();
  for (std::size_t l = 0; l < s.roots.size(); ++l) {
    s.coeffs.push_back(lagrange_basis(s.roots, l, 0.0) +
                       s.slope * lagrange_basis_derivative(s.roots, l, 0.0));
  }
  s.bc_residual = detail::bc_residual(s);
  return s;
}

}  // namespace ams::oracle
