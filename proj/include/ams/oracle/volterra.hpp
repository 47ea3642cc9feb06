#pragma once

// Numerical solution of the AMS functional equations in the exponential case,
//
//   w(x) = lambda * int_x^a w(y) f_{n,k}(y; x) dy + theta(x),
//
// with (lambda, theta) = (1-k/n, theta_p) for p, ((1-k/n)^2, theta_v) for v
// and (1, 1) for T. The kernel only depends on y - x, so it is tabulated once
// per grid. Nodes are swept from x = a downward with the composite trapezoid
// rule; the diagonal term is solved for implicitly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "ams/errors.hpp"
#include "ams/models.hpp"
#include "ams/order_stats.hpp"
#include "ams/oracle/spectral.hpp"

namespace ams::oracle {

enum class EquationKind { p, v, T };

inline const char* to_string(EquationKind kind) {
  switch (kind) {
    case EquationKind::p: return "p";
    case EquationKind::v: return "v";
    case EquationKind::T: return "T";
  }
  return "?";
}

inline EquationKind parse_equation_kind(const std::string& s) {
  if (s == "p") return EquationKind::p;
  if (s == "v") return EquationKind::v;
  if (s == "T") return EquationKind::T;
  throw input_error("unknown equation kind '" + s + "' (expected p, v or T)");
}

struct GridSolution {
  EquationKind kind = EquationKind::p;
  int n = 0;
  int k = 0;
  double a = 0.0;
  std::vector<double> grid;    // x_0 = 0 < ... < x_G = a
  std::vector<double> values;  // extrapolated solution at each node
  std::vector<double> error;   // per-node Richardson error estimate
  double estimated_error = 0.0;
  int grid_size = 0;           // G
  int refinements = 0;

  /// Linear interpolation between nodes.
  double operator()(double x) const {
    if (x <= grid.front()) return values.front();
    if (x >= grid.back()) return values.back();
    const double h = a / grid_size;
    const auto i = std::min(static_cast<std::size_t>(x / h), values.size() - 2);
    const double t = (x - grid[i]) / h;
    return (1.0 - t) * values[i] + t * values[i + 1];
  }
};

namespace detail {

inline void check_equation_args(EquationKind kind, int n, int k, double a) {
  if (n < 2 || k < 1 || k > n - 1) throw input_error("functional equation: requires 1 <= k <= n-1");
  if (kind == EquationKind::v && k > n - 2)
    throw input_error("functional equation v: requires k <= n-2");
  if (!(a > 0.0)) throw input_error("functional equation: a must be > 0");
}

inline double equation_weight(EquationKind kind, int n, int k) {
  const double q = 1.0 - static_cast<double>(k) / n;
  switch (kind) {
    case EquationKind::p: return q;
    case EquationKind::v: return q * q;
    case EquationKind::T: return 1.0;
  }
  return 0.0;
}

inline double equation_source(EquationKind kind, int n, int k, double x, double a) {
  static const ExponentialModel exp_model{};
  switch (kind) {
    case EquationKind::p: return theta_p(n, k, exp_model, x, a);
    case EquationKind::v: return theta_v(n, k, exp_model, x, a);
    case EquationKind::T: return 1.0;
  }
  return 0.0;
}

/// Kernel g(z) = f_{n,k}(z; 0) tabulated at z = j h, j = 0..G.
inline std::vector<double> kernel_table(int n, int k, double h, int g_size) {
  static const ExponentialModel exp_model{};
  const OrderStatSpec spec{n, k, 0.0};
  std::vector<double> g(static_cast<std::size_t>(g_size) + 1);
  for (int j = 0; j <= g_size; ++j) g[j] = density_fnk(spec, exp_model, j * h);
  return g;
}

/// Plain trapezoid solve on G intervals.
inline std::vector<double> trapezoid_sweep(EquationKind kind, int n, int k, double a, int g_size) {
  const double h = a / g_size;
  const double lam = equation_weight(kind, n, k);
  const auto g = kernel_table(n, k, h, g_size);
  const double diag = 1.0 - 0.5 * lam * h * g[0];
  if (!(diag > 0.0)) throw convergence_error("functional equation: grid too coarse for kernel");
  std::vector<double> w(static_cast<std::size_t>(g_size) + 1);
  w[g_size] = equation_source(kind, n, k, a, a);
  for (int i = g_size - 1; i >= 0; --i) {
    double sum = 0.5 * w[g_size] * g[g_size - i];
    for (int j = i + 1; j < g_size; ++j) sum += w[j] * g[j - i];
    w[i] = (equation_source(kind, n, k, i * h, a) + lam * h * sum) / diag;
  }
  return w;
}

}  // namespace detail

/// Solves on grids G, 2G, 4G and reports the doubly Richardson-extrapolated
/// values on the G grid. The per-node error is the gap between the two
/// extrapolations. G is doubled until the worst error is below tol.
inline GridSolution solve_functional_equation(EquationKind kind, int n, int k, double a,
                                              int grid_size = 4096, double tol = 1e-8,
                                              int max_grid = 1 << 14) {
  detail::check_equation_args(kind, n, k, a);
  if (grid_size < 64) throw input_error("functional equation: grid_size must be >= 64");
  if (max_grid < grid_size) throw input_error("functional equation: max_grid < grid_size");

  GridSolution out;
  out.kind = kind;
  out.n = n;
  out.k = k;
  out.a = a;

  double last_error = 0.0;
  for (int g_size = grid_size; g_size <= max_grid; g_size *= 2, ++out.refinements) {
    const auto w1 = detail::trapezoid_sweep(kind, n, k, a, g_size);
    const auto w2 = detail::trapezoid_sweep(kind, n, k, a, 2 * g_size);
    const auto w4 = detail::trapezoid_sweep(kind, n, k, a, 4 * g_size);

    out.grid.assign(g_size + 1, 0.0);
    out.values.assign(g_size + 1, 0.0);
    out.error.assign(g_size + 1, 0.0);
    out.estimated_error = 0.0;
    for (int i = 0; i <= g_size; ++i) {
      const double ra = (4.0 * w2[2 * i] - w1[i]) / 3.0;
      const double rb = (4.0 * w4[4 * i] - w2[2 * i]) / 3.0;
      out.grid[i] = a * i / g_size;
      out.values[i] = rb;
      out.error[i] = std::abs(rb - ra);
      out.estimated_error = std::max(out.estimated_error, out.error[i]);
    }
    out.grid[g_size] = a;
    out.grid_size = g_size;
    last_error = out.estimated_error;
    if (out.estimated_error < tol) return out;
  }
  std::ostringstream msg;
  msg << "functional equation " << to_string(kind) << " (n=" << n << ", k=" << k
      << "): Richardson error " << last_error << " above " << tol << " at grid " << max_grid;
  throw convergence_error(msg.str());
}

struct ResidualReport {
  std::vector<double> grid;
  std::vector<double> residual;  // lambda int s g + theta - s, extrapolated
  std::vector<double> error;     // Richardson estimate of the quadrature error
  double max_residual = 0.0;
  double max_excess = 0.0;       // max(|residual| - error - floor), <= 0 when consistent
};

/// Substitutes a spectral reconstruction into its functional equation and
/// evaluates the residual at `nodes` + 1 grid points by trapezoid quadrature
/// at steps h and h/2 with one Richardson step.
inline ResidualReport functional_residual(const SpectralSolution& s, int nodes = 512,
                                          double floor = 1e-12) {
  const EquationKind kind = s.kind == RootKind::variance ? EquationKind::v : EquationKind::T;
  detail::check_equation_args(kind, s.n, s.k, s.a);
  if (nodes < 8) throw input_error("functional_residual: nodes must be >= 8");
  const int fine = 2 * nodes;
  const double hf = s.a / fine;
  const double lam = detail::equation_weight(kind, s.n, s.k);
  const auto g = detail::kernel_table(s.n, s.k, hf, fine);
  std::vector<double> sv(static_cast<std::size_t>(fine) + 1);
  for (int j = 0; j <= fine; ++j) sv[j] = s(j * hf);

  ResidualReport rep;
  for (int i = 0; i <= nodes; ++i) {
    const int start = 2 * i;
    double fine_sum = 0.0;
    double coarse_sum = 0.0;
    for (int j = start; j <= fine && start < fine; ++j) {
      const double term = sv[j] * g[j - start];
      fine_sum += (j == start || j == fine) ? 0.5 * term : term;
      if ((j - start) % 2 == 0) coarse_sum += (j == start || j == fine) ? 0.5 * term : term;
    }
    const double i_fine = hf * fine_sum;
    const double i_coarse = 2.0 * hf * coarse_sum;
    const double integral = (4.0 * i_fine - i_coarse) / 3.0;
    const double x = i * 2.0 * hf;
    const double scale = std::abs(sv[start]);
    const double res = lam * integral + detail::equation_source(kind, s.n, s.k, x, s.a) - sv[start];
    const double err = lam * std::abs(i_fine - i_coarse) / 3.0;
    rep.grid.push_back(x);
    rep.residual.push_back(res);
    rep.error.push_back(err);
    rep.max_residual = std::max(rep.max_residual, std::abs(res));
    const double excess = std::abs(res) - err - floor * std::max(scale, 1.0);
    rep.max_excess = i == 0 ? excess : std::max(rep.max_excess, excess);
  }
  return rep;
}

}  // namespace ams::oracle
