#pragma once

// Conditional order statistics of n i.i.d. draws from L(X | X > x) and the
// closed-form inhomogeneities theta_p, theta_v of the AMS functional equations.

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <string>

#include "ams/errors.hpp"
#include "ams/models.hpp"

namespace ams {

struct OrderStatSpec {
  int n = 2;
  int k = 1;
  double x = 0.0;

  void validate() const {
    if (n < 2) throw input_error("order statistic: n must be >= 2");
    if (k < 1 || k > n - 1) throw input_error("order statistic: requires 1 <= k <= n-1");
  }
};

/// log C(n, k), stable for n up to ~1e15.
inline double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

namespace detail {

// P(k-th smallest of m i.i.d. draws <= level) given per-draw probability q,
// i.e. I_q(k, m - k + 1), and its complement. Valid for 1 <= k <= m.
inline double order_cdf(int m, int k, double q) {
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  return boost::math::ibeta(static_cast<double>(k), static_cast<double>(m - k + 1), q);
}

inline double order_sf(int m, int k, double q) {
  if (q <= 0.0) return 1.0;
  if (q >= 1.0) return 0.0;
  return boost::math::ibetac(static_cast<double>(k), static_cast<double>(m - k + 1), q);
}

template <RandomModel M>
double cond_cdf(const M& model, double y, double x) {
  if (y <= x) return 0.0;
  const double ly = model.lambda(y);
  if (std::isinf(ly)) return 1.0;
  return -std::expm1(model.lambda(x) - ly);
}

template <RandomModel M>
double cond_survival(const M& model, double y, double x) {
  if (y <= x) return 1.0;
  return std::exp(model.lambda(x) - model.lambda(y));
}

}  // namespace detail

/// f_{n,k}(y; x) = k C(n,k) F(y;x)^{k-1} f(y;x) (1 - F(y;x))^{n-k}; zero for y < x.
template <DensityModel M>
double density_fnk(const OrderStatSpec& spec, const M& model, double y) {
  spec.validate();
  if (y < spec.x) return 0.0;
  const double dl = model.lambda(y) - model.lambda(spec.x);
  if (std::isinf(dl)) return 0.0;
  const double h = model.hazard(y);
  if (!(h > 0.0)) return 0.0;
  const int n = spec.n;
  const int k = spec.k;
  double log_f = std::log(static_cast<double>(k)) + log_binomial(n, k) + std::log(h) -
                 static_cast<double>(n - k + 1) * dl;
  if (k > 1) {
    const double F = -std::expm1(-dl);
    if (!(F > 0.0)) return 0.0;
    log_f += static_cast<double>(k - 1) * std::log(F);
  }
  return std::exp(log_f);
}

/// F_{n,k}(y; x) via the binomial-tail identity I_{F(y;x)}(k, n-k+1).
template <RandomModel M>
double cdf_Fnk(const OrderStatSpec& spec, const M& model, double y) {
  spec.validate();
  return detail::order_cdf(spec.n, spec.k, detail::cond_cdf(model, y, spec.x));
}

/// 1 - F_{n,k}(y; x), computed directly to keep small tails accurate.
template <RandomModel M>
double sf_Fnk(const OrderStatSpec& spec, const M& model, double y) {
  spec.validate();
  return detail::order_sf(spec.n, spec.k, detail::cond_cdf(model, y, spec.x));
}

/// theta_p(x) = (1 - F(a;x)) (1 - F_{n-1,k}(a;x)): the expected estimator on
/// runs that stop at initialization.
template <RandomModel M>
double theta_p(int n, int k, const M& model, double x, double a) {
  if (n < 2 || k < 1 || k > n - 1) throw input_error("theta_p: requires 1 <= k <= n-1");
  if (x > a) throw input_error("theta_p: requires x <= a");
  const double q = detail::cond_cdf(model, a, x);
  return detail::cond_survival(model, a, x) * detail::order_sf(n - 1, k, q);
}

/// theta_v(x) = (1/n)(1-F(a;x))(1-F_{n-1,k}(a;x)) + (1-1/n)(1-F(a;x))^2 (1-F_{n-2,k}(a;x)).
template <RandomModel M>
double theta_v(int n, int k, const M& model, double x, double a) {
  if (n < 3 || k < 1 || k > n - 2) throw input_error("theta_v: requires 1 <= k <= n-2");
  if (x > a) throw input_error("theta_v: requires x <= a");
  const double q = detail::cond_cdf(model, a, x);
  const double s = detail::cond_survival(model, a, x);
  const double inv_n = 1.0 / n;
  return inv_n * s * detail::order_sf(n - 1, k, q) +
         (1.0 - inv_n) * s * s * detail::order_sf(n - 2, k, q);
}

}  // namespace ams
