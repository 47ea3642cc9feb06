#pragma once

// The acceptance suite: twelve criteria, each made of one or more
// TestReports. Shared by the acceptance test binary and `ams_cli verify`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ams/ams.hpp"
#include "ams/models.hpp"
#include "ams/oracle.hpp"
#include "ams/stats.hpp"

namespace ams::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<TestReport> reports;
  double seconds = 0.0;

  bool pass() const {
    return !reports.empty() &&
           std::all_of(reports.begin(), reports.end(), [](const TestReport& r) { return r.pass; });
  }
};

namespace detail {

inline std::string fmt(double v, int precision = 8) {
  std::ostringstream o;
  o.precision(precision);
  o << v;
  return o.str();
}

inline TestReport make_report(std::string name, double statistic, double threshold, bool pass,
                              std::string digest, std::string detail = {}) {
  TestReport r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.threshold = threshold;
  r.pass = pass;
  r.digest = std::move(digest);
  r.detail = std::move(detail);
  return r;
}

/// Coefficients of (t-n)(t-n+1)...(t-n+k-1), lowest degree first.
inline std::vector<oracle::BigInt> product_coeffs(int n, int k) {
  std::vector<oracle::BigInt> c{oracle::BigInt(1)};
  for (int j = 0; j < k; ++j) {
    const oracle::BigInt root = oracle::BigInt(n) - j;
    std::vector<oracle::BigInt> next(c.size() + 1);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= root * c[i];
    }
    c = std::move(next);
  }
  return c;
}

}  // namespace detail

struct Options {
  std::uint64_t seed = 20240601;
  /// Multiplies every Monte Carlo replication count; 1 is the full suite.
  double scale = 1.0;

  std::int64_t reps(std::int64_t m) const {
    return std::max<std::int64_t>(2, static_cast<std::int64_t>(std::llround(m * scale)));
  }
};

inline CriterionResult criterion_1(const Options& o) {
  CriterionResult c{1, "unbiasedness, exponential a=1 n=50 k in {1,2,5,10}", {}, 0.0};
  const ExponentialModel model{};
  for (int k : {1, 2, 5, 10}) {
    const auto s = run_replications(model, AmsConfig{50, k, 0.0, 1.0, 0}, o.reps(200000),
                                    o.seed + 100 + k);
    auto r = test_unbiasedness(s, std::exp(-1.0));
    r.name = "unbiasedness_k" + std::to_string(k);
    c.reports.push_back(r);
  }
  return c;
}

inline CriterionResult criterion_2(const Options& o) {
  CriterionResult c{2, "unbiasedness, committor toy xi0=0.05 n=100 k=3 (tilde coupling)", {}, 0.0};
  const auto model = TildeCoupled<CommittorToyModel>(CommittorToyModel(0.05), 1.0);
  const auto s =
      run_replications(model, AmsConfig{100, 3, 0.0, 1.0, 0}, o.reps(100000), o.seed + 200);
  auto r = test_unbiasedness(s, 0.05);
  r.name = "unbiasedness_committor";
  c.reports.push_back(r);
  return c;
}

inline CriterionResult criterion_3(const Options& o) {
  CriterionResult c{3, "Poisson law of J, k=1 n=20 exponential a=1", {}, 0.0};
  const auto s = run_replications(ExponentialModel{}, AmsConfig{20, 1, 0.0, 1.0, 0},
                                  o.reps(100000), o.seed + 300);
  auto r = test_poisson_iterations(s.j_histogram, 20, 1, std::exp(-1.0));
  r.digest = digest_of(s);
  c.reports.push_back(r);
  return c;
}

inline CriterionResult criterion_4(const Options& o) {
  CriterionResult c{4, "exact k=1 variance, n=50", {}, 0.0};
  const auto s = run_replications(ExponentialModel{}, AmsConfig{50, 1, 0.0, 1.0, 0},
                                  o.reps(200000), o.seed + 400);
  const double truth = std::exp(-2.0) * std::expm1(1.0 / 50.0);
  const double z = (s.variance_estimate - truth) / s.se_variance;
  c.reports.push_back(detail::make_report(
      "variance_k1", z, 4.0, std::abs(z) <= 4.0, digest_of(s),
      "var=" + detail::fmt(s.variance_estimate) + " closed_form=" + detail::fmt(truth) +
          " se=" + detail::fmt(s.se_variance)));
  return c;
}

inline CriterionResult criterion_5(const Options& o) {
  CriterionResult c{5, "finite-n oracle equivalence: Monte Carlo vs spectral vs quadrature", {}, 0.0};
  const ExponentialModel model{};
  const std::pair<int, int> cases[] = {{5, 1}, {8, 2}, {10, 3}, {12, 4}};
  for (auto [n, k] : cases) {
    const auto s =
        run_replications(model, AmsConfig{n, k, 0.0, 1.0, 0}, o.reps(200000), o.seed + 500 + n);
    auto r = test_moments_vs_oracle(s, n, k, 1.0);
    r.name = "moments_n" + std::to_string(n) + "_k" + std::to_string(k);
    c.reports.push_back(r);

    const auto sv = oracle::spectral_v(n, k, 1.0);
    const auto st = oracle::spectral_T(n, k, 1.0);
    const auto gv = oracle::solve_functional_equation(oracle::EquationKind::v, n, k, 1.0);
    const auto gt = oracle::solve_functional_equation(oracle::EquationKind::T, n, k, 1.0);
    for (const auto* pair : {&gv, &gt}) {
      const auto& g = *pair;
      const auto& sp = pair == &gv ? sv : st;
      double worst_diff = 0.0;
      double worst_excess = -1.0;
      double combined_max = 0.0;
      for (std::size_t i = 0; i < g.grid.size(); ++i) {
        const double diff = std::abs(sp(g.grid[i]) - g.values[i]);
        const double combined = g.error[i] +
                                sp.bc_residual * std::max(1.0, std::abs(g.values[i])) + 1e-8;
        worst_diff = std::max(worst_diff, diff);
        combined_max = std::max(combined_max, combined);
        worst_excess = std::max(worst_excess, diff - combined);
      }
      const bool ok = worst_excess <= 0.0 && combined_max <= 1e-6;
      c.reports.push_back(detail::make_report(
          std::string("cross_oracle_") + oracle::to_string(g.kind) + "_n" + std::to_string(n) +
              "_k" + std::to_string(k),
          worst_diff, 1e-6, ok, "n=" + std::to_string(n) + " k=" + std::to_string(k) + " a=1",
          "max|spectral-grid|=" + detail::fmt(worst_diff, 4) +
              " max_combined_error=" + detail::fmt(combined_max, 4) +
              " grid=" + std::to_string(g.grid_size)));
    }
  }
  return c;
}

inline CriterionResult criterion_6(const Options&) {
  CriterionResult c{6, "leading-order asymptotics from the oracle, n=2000 k=2", {}, 0.0};
  const int n = 2000;
  const int k = 2;
  const auto m = oracle::spectral_moments(n, k, 0.0, 1.0);
  const double L = -std::log(m.P);
  const double var_ratio = n * m.variance / (m.P * m.P) / L;
  const double t_ratio = k * (m.T - 1.0) / n / L;
  const std::string dg = "n=2000 k=2 a=1 x=0";
  c.reports.push_back(detail::make_report("variance_leading", std::abs(var_ratio - 1.0), 0.05,
                                          std::abs(var_ratio - 1.0) <= 0.05, dg,
                                          "n Var / (P^2 (-log P)) = " + detail::fmt(var_ratio)));
  c.reports.push_back(detail::make_report("iterations_leading", std::abs(t_ratio - 1.0), 0.05,
                                          std::abs(t_ratio - 1.0) <= 0.05, dg,
                                          "k E[J] / (n (-log P)) = " + detail::fmt(t_ratio)));
  return c;
}

inline CriterionResult criterion_7(const Options&) {
  CriterionResult c{7, "cost limit: |C - 2| shrinks >= 8x from n=100 to n=1000", {}, 0.0};
  for (int k : {1, 2}) {
    auto gap = [&](int n) {
      const auto m = oracle::spectral_moments(n, k, 0.0, 1.0);
      return std::abs(oracle::dimensionless_cost(m.v, m.P, m.T, n, k) - 2.0);
    };
    const double g100 = gap(100);
    const double g1000 = gap(1000);
    const double ratio = g100 / g1000;
    c.reports.push_back(detail::make_report(
        "cost_limit_k" + std::to_string(k), ratio, 8.0, ratio >= 8.0,
        "k=" + std::to_string(k) + " p=e^-1",
        "|C-2| n=100: " + detail::fmt(g100) + ", n=1000: " + detail::fmt(g1000)));
  }
  return c;
}

inline CriterionResult criterion_8(const Options&) {
  CriterionResult c{8, "characteristic root expansions", {}, 0.0};
  using oracle::RootKind;
  for (int k : {2, 3, 5}) {
    auto gap = [&](int n, bool& bracket) {
      const double b = oracle::char_roots(n, k, RootKind::variance)[0].real();
      bracket = bracket && b >= 1.0 && b <= 2.0;
      return std::abs(b - (2.0 - 1.0 / n - (k - 1.0) / (2.0 * n * n)));
    };
    bool bracket = true;
    const double g100 = gap(100, bracket);
    const double g1000 = gap(1000, bracket);
    c.reports.push_back(detail::make_report(
        "beta1_expansion_k" + std::to_string(k), g1000 / g100, 0.01,
        bracket && g1000 < 0.01 * g100, "k=" + std::to_string(k) + " n in {100,1000}",
        "gap100=" + detail::fmt(g100, 4) + " gap1000=" + detail::fmt(g1000, 4) +
            (bracket ? " bracket ok" : " root outside [1,2]")));
  }
  for (int n : {10, 100, 1000}) {
    const double b = oracle::char_roots(n, 1, RootKind::variance)[0].real();
    const double err = std::abs(b - (2.0 - 1.0 / n));
    c.reports.push_back(detail::make_report("beta_k1_n" + std::to_string(n), err, 1e-12,
                                            err <= 1e-12, "n=" + std::to_string(n)));
  }
  for (int n : {10, 100, 1000}) {
    const auto r = oracle::char_roots(n, 2, RootKind::time);
    const double e0 = std::min(std::abs(r[0]), std::abs(r[1]));
    const double e1 = std::min(std::abs(r[0] - (2.0 * n - 1.0)), std::abs(r[1] - (2.0 * n - 1.0)));
    const double err = std::max(e0, e1);
    c.reports.push_back(detail::make_report("alpha_k2_n" + std::to_string(n), err, 1e-9,
                                            err <= 1e-9, "n=" + std::to_string(n)));
  }
  return c;
}

inline CriterionResult criterion_9(const Options&) {
  CriterionResult c{9, "recursion coefficients vs expanded product (exact)", {}, 0.0};
  int checked = 0;
  int failed = 0;
  std::string first_failure;
  for (int k = 1; k <= 8; ++k) {
    std::vector<int> ns;
    for (int n = k + 1; n <= 50; ++n) ns.push_back(n);
    ns.push_back(1000);
    for (int n : ns) {
      const auto t = oracle::recursion_coeffs(n, k);
      const auto prod = detail::product_coeffs(n, k);
      // t^k - sum_m r_m t^m == prod  <=>  r_m == -prod[m] for m < k.
      bool ok = prod[k] == 1 && t.r.size() == static_cast<std::size_t>(k);
      for (int m = 0; ok && m < k; ++m) ok = t.r[m] == -prod[m];
      oracle::BigInt falling(1);
      for (int j = 0; j < k; ++j) falling *= oracle::BigInt(n) - j;
      const oracle::BigInt mu = (k % 2 == 0 ? 1 : -1) * falling;
      ok = ok && t.mu == mu && t.r[0] == -t.mu && t.mu_steps.front() == 1;
      ++checked;
      if (!ok) {
        ++failed;
        if (first_failure.empty())
          first_failure = " first failure n=" + std::to_string(n) + " k=" + std::to_string(k);
      }
    }
  }
  c.reports.push_back(detail::make_report("polynomial_identity", failed, 0.0, failed == 0,
                                          "k<=8, n in {k+1..50} u {1000}",
                                          std::to_string(checked - failed) + "/" +
                                              std::to_string(checked) + " exact" + first_failure));
  return c;
}

inline CriterionResult criterion_10(const Options& o) {
  CriterionResult c{10, "Lambda-equivalence with shared uniform streams, n=16", {}, 0.0};
  const std::int64_t runs = o.reps(10000);
  for (int k : {1, 3}) {
    auto rp = test_lambda_equivalence(ParetoModel{}, 0.0, 3.0, 16, k, runs, o.seed + 1000 + k);
    rp.name = "pareto_k" + std::to_string(k);
    c.reports.push_back(rp);
    auto rw = test_lambda_equivalence(WeibullModel{}, 0.0, 3.0, 16, k, runs, o.seed + 1100 + k);
    rw.name = "weibull_k" + std::to_string(k);
    c.reports.push_back(rw);
  }
  return c;
}

inline CriterionResult criterion_11(const Options&) {
  CriterionResult c{11, "functional-equation solver, kind=p, (n,k)=(10,3), grid 4096", {}, 0.0};
  const auto g = oracle::solve_functional_equation(oracle::EquationKind::p, 10, 3, 1.0, 4096);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.grid.size(); ++i)
    worst = std::max(worst, std::abs(g.values[i] - std::exp(g.grid[i] - 1.0)));
  c.reports.push_back(detail::make_report("p_equals_P", worst, 1e-6, worst <= 1e-6,
                                          "n=10 k=3 a=1 grid=" + std::to_string(g.grid_size),
                                          "richardson_error=" + detail::fmt(g.estimated_error, 4)));
  return c;
}

inline CriterionResult criterion_12(const Options& o) {
  CriterionResult c{12, "i.i.d. increments and conditional i.i.d. structure (KS)", {}, 0.0};
  const std::int64_t m = o.reps(100000);

  {
    const int n = 10;
    const int k = 2;
    const ExponentialModel model{};
    const AmsConfig cfg{n, k, 0.0, 1e6, 8};
    std::vector<double> d1(static_cast<std::size_t>(m));
    std::vector<double> d2(static_cast<std::size_t>(m));
    parallel_for(m, worker_count(), [&](std::int64_t i) {
      AmsSampler<ExponentialModel> s(model, cfg, UniformStream(o.seed + 1200, i), false);
      const double z1 = s.next_level();
      s.step();
      const double z2 = s.next_level();
      d1[static_cast<std::size_t>(i)] = z1;
      d2[static_cast<std::size_t>(i)] = z2 - z1;
    });
    const auto ks = ks_two_sample(d1, d2);
    const std::string dg = "seed=" + std::to_string(o.seed + 1200) + " n=10 k=2 M=" + std::to_string(m);
    TestReport r = detail::make_report("increments_two_sample_ks", ks.d, 0.001, ks.p_value >= 0.001,
                                       dg, "D=" + detail::fmt(ks.d, 5));
    r.p_value = ks.p_value;
    c.reports.push_back(r);

    double mean = 0.0;
    for (double v : d1) mean += v;
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double v : d1) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (static_cast<double>(m) - 1.0) / static_cast<double>(m));
    const double truth = oracle::m_nk(n, k).convert_to<double>();
    const double z = (mean - truth) / se;
    c.reports.push_back(detail::make_report(
        "first_increment_mean", z, 4.0, std::abs(z) <= 4.0, dg,
        "mean=" + detail::fmt(mean) + " M_nk=" + detail::fmt(truth)));
  }

  {
    const int n = 10;
    const int k = 3;
    const int j = 3;
    const ParetoModel model{};
    const AmsConfig cfg{n, k, 0.0, 1e12, 2 * j};
    std::vector<double> y(static_cast<std::size_t>(m));
    parallel_for(m, worker_count(), [&](std::int64_t i) {
      AmsSampler<ParetoModel> s(model, cfg, UniformStream(o.seed + 1300, i), false);
      for (int step = 0; step < j; ++step) s.step();
      const auto& st = s.state();
      const auto it = std::find_if(st.particles.begin(), st.particles.end(),
                                   [](const Particle& p) { return p.index == 0; });
      y[static_cast<std::size_t>(i)] = model.lambda(it->level) - model.lambda(st.current_level);
    });
    const auto ks = ks_one_sample(y, [](double t) { return t <= 0.0 ? 0.0 : -std::expm1(-t); });
    TestReport r = detail::make_report(
        "conditional_iid_ks", ks.d, 0.001, ks.p_value >= 0.001,
        "seed=" + std::to_string(o.seed + 1300) + " pareto n=10 k=3 j=3 M=" + std::to_string(m),
        "D=" + detail::fmt(ks.d, 5));
    r.p_value = ks.p_value;
    c.reports.push_back(r);
  }
  return c;
}

inline std::vector<std::function<CriterionResult(const Options&)>> all_criteria() {
  return {criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5,  criterion_6,
          criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12};
}

/// Runs criterion `id` (1-based) and records its wall time.
inline CriterionResult run_criterion(int id, const Options& o) {
  const auto list = all_criteria();
  if (id < 1 || id > static_cast<int>(list.size())) throw input_error("unknown criterion id");
  const auto t0 = std::chrono::steady_clock::now();
  auto c = list[static_cast<std::size_t>(id - 1)](o);
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

}  // namespace ams::acceptance
