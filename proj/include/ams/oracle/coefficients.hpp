#pragma once

// Exact integer coefficients of the order-k linear ODEs satisfied by
// p^{n,k}, v^{n,k}, T^{n,k} in the exponential case, and the exact mean
// M_{n,k} of the k-th order statistic of n Exp(1) draws.

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "ams/errors.hpp"

namespace ams::oracle {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline constexpr int kMaxOracleK = 16;

struct CoefficientTable {
  int n = 0;
  int k = 0;
  BigInt mu;               // mu^{n,k} = mu_k
  std::vector<BigInt> r;   // r_m^{n,k} = r_{m,k}, m = 0..k-1
  std::vector<BigInt> mu_steps;              // mu_l, l = 0..k
  std::vector<std::vector<BigInt>> r_steps;  // r_steps[l][m] = r_{m,l}, m < l
};

/// Runs the derivative induction l -> l+1 with c_l = n - k + l + 1:
///   mu_{l+1}    = -c_l mu_l
///   r_{0,l+1}   = -c_l r_{0,l}                    (l > 0)
///   r_{m,l+1}   = r_{m-1,l} - c_l r_{m,l}         (1 <= m <= l-1)
///   r_{l,l+1}   = c_l + r_{l-1,l}                 (r_{-1,0} := 0)
/// The result satisfies t^k - sum_m r_m t^m = (t-n)(t-n+1)...(t-n+k-1).
inline CoefficientTable recursion_coeffs(int n, int k) {
  if (k < 1 || k > n - 1) throw input_error("recursion_coeffs: requires 1 <= k <= n-1");
  if (k > kMaxOracleK) throw input_error("recursion_coeffs: k capped at 16");

  CoefficientTable t;
  t.n = n;
  t.k = k;
  t.mu_steps.push_back(BigInt(1));
  t.r_steps.emplace_back();
  for (int l = 0; l < k; ++l) {
    const BigInt c = BigInt(n) - k + l + 1;
    const auto& prev = t.r_steps.back();
    std::vector<BigInt> next(l + 1);
    if (l > 0) next[0] = -c * prev[0];
    for (int m = 1; m <= l - 1; ++m) next[m] = prev[m - 1] - c * prev[m];
    next[l] = c + (l > 0 ? prev[l - 1] : BigInt(0));
    t.mu_steps.push_back(-c * t.mu_steps.back());
    t.r_steps.push_back(std::move(next));
  }
  t.mu = t.mu_steps.back();
  t.r = t.r_steps.back();
  return t;
}

/// M_{n,k} = sum_{j=0}^{k-1} 1/(n-j), exactly.
inline BigRational m_nk(int n, int k) {
  if (k < 1 || k > n - 1) throw input_error("m_nk: requires 1 <= k <= n-1");
  BigRational sum(0);
  for (int j = 0; j < k; ++j) sum += BigRational(1, n - j);
  return sum;
}

}  // namespace ams::oracle
