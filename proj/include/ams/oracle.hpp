#pragma once

#include <cmath>

#include "ams/oracle/coefficients.hpp"
#include "ams/oracle/cost.hpp"
#include "ams/oracle/spectral.hpp"
#include "ams/oracle/volterra.hpp"

namespace ams::oracle {

/// Exact finite-n moments at start level x for the exponential model.
struct Moments {
  double P = 0.0;         // e^{x-a}
  double v = 0.0;         // E[p_hat^2]
  double variance = 0.0;  // v - P^2
  double T = 0.0;         // E[J] + 1
};

inline Moments spectral_moments(int n, int k, double x, double a) {
  Moments m;
  m.P = std::exp(x - a);
  m.v = spectral_v(n, k, a)(x);
  m.variance = m.v - m.P * m.P;
  m.T = spectral_T(n, k, a)(x);
  return m;
}

}  // namespace ams::oracle
