#pragma once

// Large-n expansions of Var, E[J] and the AMS cost, and the cost model that
// compares AMS with direct Monte Carlo at a fixed relative error.

#include <cmath>

#include "ams/errors.hpp"

namespace ams::oracle {

struct Asymptotics {
  int n = 0;
  int k = 0;
  double P = 0.0;
  double var_leading = 0.0;       // P^2 (-log P) / n
  double var_second = 0.0;        // reference second-order term; informational only
  bool var_second_informational = true;
  double T_leading = 0.0;         // n (-log P) / k
  double T_expansion = 0.0;       // through order 1 in n
  double cost_leading = 0.0;      // (log P)^2 - log P
  double cost_expansion = 0.0;    // through order 1/n
};

/// Evaluates the reference expansions at (n, k, P) as stated, uncorrected.
inline Asymptotics asymptotics(int n, int k, double P) {
  if (!(P > 0.0 && P < 1.0)) throw input_error("asymptotics: requires 0 < P < 1");
  if (n < 2 || k < 1 || k > n - 1) throw input_error("asymptotics: requires 1 <= k <= n-1");
  const double L = -std::log(P);
  const double nd = n;
  const double kd = k;
  Asymptotics out;
  out.n = n;
  out.k = k;
  out.P = P;
  out.var_leading = P * P * L / nd;
  out.var_second = P * P / nd * ((L * L + L) * (kd - 1.0) / (2.0 * nd));
  out.T_leading = nd * L / kd;
  out.T_expansion =
      nd * (L * (1.0 / kd - (kd - 1.0) / (2.0 * kd * nd)) + (3.0 * kd - 1.0) / (2.0 * kd * nd));
  out.cost_leading = L * L + L;
  out.cost_expansion = out.cost_leading + (L * (kd - 1.0) + 0.5 * L * L + 0.5 * L * L * L) / nd;
  return out;
}

struct CostModel {
  double c0 = 1.0;
  double c1 = 0.0;
  double epsilon = 0.1;

  void validate() const {
    if (!(c0 > 0.0)) throw input_error("cost: c0 must be > 0");
    if (!(c1 >= 0.0)) throw input_error("cost: c1 must be >= 0");
    if (!(epsilon > 0.0)) throw input_error("cost: epsilon must be > 0");
  }
};

/// C^{n,k} = (v - P^2)/P^2 * (k T + n - k): relative variance times the
/// expected number of draws.
inline double dimensionless_cost(double v, double P, double T, int n, int k) {
  if (!(P > 0.0)) throw input_error("cost: P must be > 0");
  return (v - P * P) / (P * P) * (k * T + n - k);
}

inline double cost_ams(double v, double P, double T, int n, int k, const CostModel& cm) {
  cm.validate();
  return (cm.c0 + cm.c1 * std::log(static_cast<double>(n))) * dimensionless_cost(v, P, T, n, k) /
         (cm.epsilon * cm.epsilon);
}

inline double cost_direct_mc(double p, const CostModel& cm) {
  cm.validate();
  if (!(p > 0.0 && p <= 1.0)) throw input_error("cost: p must lie in (0, 1]");
  return cm.c0 * (1.0 - p) / (cm.epsilon * cm.epsilon * p);
}

/// Leading-order comparison: (1 + (c1/c0) log n)((log p)^2 - log p) < (1-p)/p.
inline bool ams_beats_direct(double p, int n, const CostModel& cm) {
  cm.validate();
  if (!(p > 0.0 && p < 1.0)) throw input_error("cost: p must lie in (0, 1)");
  const double L = -std::log(p);
  return (1.0 + cm.c1 / cm.c0 * std::log(static_cast<double>(n))) * (L * L + L) < (1.0 - p) / p;
}

}  // namespace ams::oracle
