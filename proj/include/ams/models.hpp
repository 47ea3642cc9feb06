#pragma once

// Random-variable models with exact conditional sampling.
//
// Every model exposes its law through the cumulative hazard
//   Lambda(y) = -log(1 - F(y)),
// and samples L(X | X > x) by the quantile transform
//   F(.; x)^{-1}(u) = Lambda^{-1}(Lambda(x) - log(1 - u)),
// one uniform per draw. Sharing the uniform stream between two models
// therefore shares the Exp(1) increments, which is what makes AMS runs on
// different models comparable run-by-run after the Lambda change of level.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "ams/errors.hpp"
#include "ams/rng.hpp"

namespace ams {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Exp(1) variate from a uniform in (0,1): -log(1-u).
inline double exp1_from_uniform(double u) { return -std::log1p(-u); }

inline void require_open_unit(double u, const char* what) {
  if (!(u > 0.0 && u < 1.0)) {
    throw input_error(std::string(what) + " must lie in the open interval (0,1)");
  }
}

template <class M>
concept RandomModel = requires(const M& m, double y, UniformStream& s) {
  { m.cdf(y) } -> std::convertible_to<double>;
  { m.survival(y) } -> std::convertible_to<double>;
  { m.quantile(y) } -> std::convertible_to<double>;
  { m.lambda(y) } -> std::convertible_to<double>;
  { m.lambda_inv(y) } -> std::convertible_to<double>;
  { m.sample_conditional(y, y) } -> std::convertible_to<double>;
  { m.draw_above(y, s) } -> std::convertible_to<double>;
  { M::supports_atom_at_target } -> std::convertible_to<bool>;
};

/// Models with a Lebesgue density; hazard(y) = f(y) / (1 - F(y)) = Lambda'(y).
template <class M>
concept DensityModel = RandomModel<M> && requires(const M& m, double y) {
  { m.hazard(y) } -> std::convertible_to<double>;
};

/// -log P(X >= a). Equals lambda(a) for continuous laws; atom models override.
template <RandomModel M>
double lambda_at_least(const M& m, double a) {
  if constexpr (requires { m.lambda_ge(a); }) {
    return m.lambda_ge(a);
  } else {
    return m.lambda(a);
  }
}

/// Everything derivable from a closed-form Lambda and its inverse.
template <class Derived>
class LambdaModel {
public:
  static constexpr bool supports_atom_at_target = false;

  double survival(double y) const { return std::exp(-self().lambda(y)); }
  double cdf(double y) const { return -std::expm1(-self().lambda(y)); }
  double density(double y) const { return self().hazard(y) * survival(y); }
  double quantile(double u) const { return self().lambda_inv(exp1_from_uniform(u)); }

  double sample_conditional(double x, double u) const {
    return self().lambda_inv(self().lambda(x) + exp1_from_uniform(u));
  }

  double draw_above(double x, UniformStream& s) const {
    return self().sample_conditional(x, s.next());
  }

private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

/// X ~ Exp(1); Lambda is the identity on [0, inf).
struct ExponentialModel : LambdaModel<ExponentialModel> {
  double lambda(double y) const { return y > 0.0 ? y : 0.0; }
  double lambda_inv(double s) const { return s; }
  double hazard(double y) const { return y >= 0.0 ? 1.0 : 0.0; }
  double sample_conditional(double x, double u) const {
    return std::max(x, 0.0) + exp1_from_uniform(u);
  }
};

/// F(y) = 1 - (1 + y)^{-2}.
struct ParetoModel : LambdaModel<ParetoModel> {
  double lambda(double y) const { return y > 0.0 ? 2.0 * std::log1p(y) : 0.0; }
  double lambda_inv(double s) const { return std::expm1(0.5 * s); }
  double hazard(double y) const { return y >= 0.0 ? 2.0 / (1.0 + y) : 0.0; }
};

/// F(y) = 1 - exp(-y^2).
struct WeibullModel : LambdaModel<WeibullModel> {
  double lambda(double y) const { return y > 0.0 ? y * y : 0.0; }
  double lambda_inv(double s) const { return std::sqrt(s); }
  double hazard(double y) const { return y >= 0.0 ? 2.0 * y : 0.0; }
};

/// Piecewise-deterministic process on the line: from q_0 = x the particle
/// moves with speed +1 until an Exp(1) switching time tau, then with speed -1
/// forever. The model's variable is sup_t q_t = x + tau.
struct PdmpModel : LambdaModel<PdmpModel> {
  struct Path {
    double start;
    double switch_time;
    double sup;
  };

  /// Event-driven simulation of one trajectory started at x.
  static Path simulate(double x, double u) {
    const double tau = exp1_from_uniform(u);
    // Segment 1: q = x + t on [0, tau]; segment 2: q = x + tau - (t - tau).
    // q is increasing then decreasing, so the sup sits at the switch point.
    const double q_switch = x + tau;
    return {x, tau, std::max(x, q_switch)};
  }

  double lambda(double y) const { return y > 0.0 ? y : 0.0; }
  double lambda_inv(double s) const { return s; }
  double hazard(double y) const { return y >= 0.0 ? 1.0 : 0.0; }
  double sample_conditional(double x, double u) const {
    return simulate(std::max(x, 0.0), u).sup;
  }
};

/// Law of sup xi(Y_t) when xi is the committor of a diffusion started from a
/// point with xi = xi0: P(X > z) = xi0 / z on [xi0, 1), atom xi0 at 1.
/// The target level is fixed at 1.
class CommittorToyModel {
public:
  static constexpr bool supports_atom_at_target = true;
  static constexpr double target = 1.0;

  explicit CommittorToyModel(double xi0) : xi0_(xi0) {
    if (!(xi0 > 0.0 && xi0 < 1.0)) throw input_error("committor xi0 must lie in (0,1)");
  }

  double xi0() const { return xi0_; }
  double mass_at_target() const { return xi0_; }

  double survival(double t) const {
    if (t < xi0_) return 1.0;
    if (t < 1.0) return xi0_ / t;
    return 0.0;
  }
  double cdf(double t) const { return 1.0 - survival(t); }
  double quantile(double u) const { return std::min(xi0_ / (1.0 - u), 1.0); }

  double lambda(double t) const {
    if (t < xi0_) return 0.0;
    if (t < 1.0) return std::log(t / xi0_);
    return kInf;
  }
  double lambda_inv(double s) const { return std::min(xi0_ * std::exp(s), 1.0); }
  double lambda_ge(double a) const {
    if (a <= xi0_) return 0.0;
    if (a <= 1.0) return std::log(a / xi0_);
    return kInf;
  }

  /// Inverts the conditional survival z/t on [z, 1) and caps at the atom:
  /// min(z / (1 - u), 1).
  double sample_conditional(double z, double u) const {
    require_open_unit(u, "u");
    if (z >= 1.0) throw degenerate_conditioning("committor: conditioning level at or above 1");
    const double base = std::max(z, xi0_);
    return std::min(base / (1.0 - u), 1.0);
  }

  double draw_above(double z, UniformStream& s) const { return sample_conditional(z, s.next()); }

private:
  double xi0_;
};

/// Replaces X by X 1{X<a} + (a/U) 1{X>=a}: continuous at and above a, same
/// law as X below a, same target event.
inline double tilde_transform(double x_val, double u_aux, double a) {
  if (!(a > 0.0)) throw input_error("tilde_transform: a must be positive");
  require_open_unit(u_aux, "u_aux");
  return x_val < a ? x_val : a / u_aux;
}

/// Base model seen through tilde_transform at level a. Each conditional draw
/// consumes two uniforms: one for the base draw, one for the Pareto tail.
template <RandomModel Base>
class TildeCoupled {
public:
  static constexpr bool supports_atom_at_target = false;

  TildeCoupled(Base base, double a) : base_(std::move(base)), a_(a), tail_lambda_(0.0) {
    if (!(a > 0.0)) throw input_error("tilde coupling: a must be positive");
    tail_lambda_ = lambda_at_least(base_, a_);
  }

  const Base& base() const { return base_; }
  double level() const { return a_; }

  double lambda(double t) const {
    return t < a_ ? base_.lambda(t) : tail_lambda_ + std::log(t / a_);
  }
  double lambda_inv(double s) const {
    return s < tail_lambda_ ? base_.lambda_inv(s) : a_ * std::exp(s - tail_lambda_);
  }
  double survival(double t) const { return std::exp(-lambda(t)); }
  double cdf(double t) const { return -std::expm1(-lambda(t)); }
  double quantile(double u) const { return lambda_inv(exp1_from_uniform(u)); }

  double sample_conditional(double x, double u) const {
    return lambda_inv(lambda(x) + exp1_from_uniform(u));
  }

  double draw_above(double x, UniformStream& s) const {
    const double v = base_.draw_above(x, s);
    return tilde_transform(v, s.next(), a_);
  }

private:
  Base base_;
  double a_;
  double tail_lambda_;
};

// ---------------------------------------------------------------------------
// Model-generic operations

/// F(y; x) = (F(y) - F(x)) / (1 - F(x)), zero below x.
template <RandomModel M>
double cdf_conditional(const M& m, double y, double x) {
  if (!(m.survival(x) > 0.0)) throw degenerate_conditioning("cdf_conditional: cdf(x) = 1");
  if (y <= x) return 0.0;
  const double ly = m.lambda(y);
  if (std::isinf(ly)) return 1.0;
  return -std::expm1(m.lambda(x) - ly);
}

/// Lambda(y; x) = Lambda(y) - Lambda(x) = -log(1 - F(y; x)).
template <RandomModel M>
double lambda_between(const M& m, double y, double x) {
  if (x > y) throw input_error("lambda_between: requires x <= y");
  const double ly = m.lambda(y);
  if (std::isinf(ly)) throw infinite_value_error("lambda_between: cdf(y) = 1");
  return ly - m.lambda(x);
}

/// F(.; x)^{-1}(u); strictly above x almost surely, deterministic in (x, u).
template <RandomModel M>
double sample_conditional(const M& m, double x, double u) {
  require_open_unit(u, "u");
  if (!(m.survival(x) > 0.0)) throw degenerate_conditioning("sample_conditional: cdf(x) = 1");
  return m.sample_conditional(x, u);
}

// ---------------------------------------------------------------------------
// Runtime model catalog

struct ModelSpec {
  std::string key = "exponential";
  std::vector<double> params;
};

using AnyModel = std::variant<ExponentialModel, ParetoModel, WeibullModel, PdmpModel,
                              TildeCoupled<CommittorToyModel>>;

/// Builds a model from its catalog key. The committor toy is always wrapped
/// in the tilde coupling at its target 1.
inline AnyModel make_model(const ModelSpec& spec) {
  auto no_params = [&] {
    if (!spec.params.empty()) throw input_error("model '" + spec.key + "' takes no parameters");
  };
  if (spec.key == "exponential") return no_params(), AnyModel{ExponentialModel{}};
  if (spec.key == "pareto") return no_params(), AnyModel{ParetoModel{}};
  if (spec.key == "weibull") return no_params(), AnyModel{WeibullModel{}};
  if (spec.key == "pdmp") return no_params(), AnyModel{PdmpModel{}};
  if (spec.key == "committor") {
    if (spec.params.size() != 1) throw input_error("model 'committor' takes one parameter: xi0");
    return AnyModel{TildeCoupled<CommittorToyModel>(CommittorToyModel(spec.params[0]),
                                                    CommittorToyModel::target)};
  }
  throw input_error("unknown model key '" + spec.key + "'");
}

}  // namespace ams
