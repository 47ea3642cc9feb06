#pragma once

// Replication harness and the hypothesis tests built on top of it.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "ams/ams.hpp"
#include "ams/errors.hpp"
#include "ams/models.hpp"
#include "ams/oracle.hpp"

namespace ams {

struct ReplicationPlan {
  AmsConfig config;
  ModelSpec model;
  std::int64_t m_reps = 1000;
  std::uint64_t base_seed = 1;
  bool keep_runs = false;

  void validate() const {
    config.validate();
    if (m_reps < 2) throw input_error("m_reps must be >= 2");
  }
};

struct RunRecord {
  std::int64_t j_count = 0;
  int survivors = 0;
  double estimate = 0.0;
};

struct ReplicationSummary {
  int n = 0;
  int k = 0;
  double x = 0.0;
  double a = 0.0;
  std::int64_t m_reps = 0;
  std::uint64_t base_seed = 0;
  double mean_estimate = 0.0;
  double variance_estimate = 0.0;  // unbiased sample variance
  double se_mean = 0.0;
  double m4 = 0.0;                 // fourth central sample moment
  double se_variance = 0.0;
  double mean_J = 0.0;
  double var_J = 0.0;
  double se_J = 0.0;
  double mean_samples = 0.0;
  std::vector<std::int64_t> j_histogram;  // j_histogram[j] = #runs with J = j
  std::vector<RunRecord> runs;            // only when requested
  double wallclock_seconds = 0.0;
};

/// Worker count: AMS_THREADS if set and positive, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("AMS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i) for i in [0, count) on up to `workers` threads. The first
/// exception (lowest index among those observed) is rethrown after joining.
inline void parallel_for(std::int64_t count, unsigned workers,
                         const std::function<void(std::int64_t)>& body) {
  workers = static_cast<unsigned>(std::min<std::int64_t>(std::max(1u, workers), std::max<std::int64_t>(count, 1)));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex err_mutex;
  std::exception_ptr err;
  std::int64_t err_index = std::numeric_limits<std::int64_t>::max();
  constexpr std::int64_t kChunk = 64;
  auto worker = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::int64_t begin = next.fetch_add(kChunk);
      if (begin >= count) return;
      const std::int64_t end = std::min(count, begin + kChunk);
      for (std::int64_t i = begin; i < end; ++i) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(err_mutex);
          if (i < err_index) {
            err_index = i;
            err = std::current_exception();
          }
          stop = true;
          return;
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

namespace detail {

inline void summarize(ReplicationSummary& s, const std::vector<RunRecord>& runs) {
  const auto m = static_cast<double>(runs.size());
  double sum = 0.0;
  std::int64_t sum_j = 0;
  std::int64_t max_j = 0;
  for (const auto& r : runs) {
    sum += r.estimate;
    sum_j += r.j_count;
    max_j = std::max(max_j, r.j_count);
  }
  s.mean_estimate = sum / m;
  s.mean_J = static_cast<double>(sum_j) / m;

  double m2 = 0.0;
  double m4 = 0.0;
  double mj2 = 0.0;
  for (const auto& r : runs) {
    const double d = r.estimate - s.mean_estimate;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
    const double dj = static_cast<double>(r.j_count) - s.mean_J;
    mj2 += dj * dj;
  }
  s.variance_estimate = m2 / (m - 1.0);
  s.se_mean = std::sqrt(s.variance_estimate / m);
  s.m4 = m4 / m;
  const double var = s.variance_estimate;
  const double v4 = (s.m4 - var * var * (m - 3.0) / (m - 1.0)) / m;
  s.se_variance = std::sqrt(std::max(v4, 0.0));
  s.var_J = mj2 / (m - 1.0);
  s.se_J = std::sqrt(s.var_J / m);
  s.mean_samples = s.n + s.k * s.mean_J;

  s.j_histogram.assign(static_cast<std::size_t>(max_j) + 1, 0);
  for (const auto& r : runs) ++s.j_histogram[static_cast<std::size_t>(r.j_count)];
}

}  // namespace detail

/// M runs of AMS; run i uses substream i of base_seed. Results are stored
/// per index and reduced in index order, so the summary does not depend on
/// the number of workers.
template <RandomModel M>
ReplicationSummary run_replications(const M& model, const AmsConfig& config, std::int64_t m_reps,
                                    std::uint64_t base_seed, bool keep_runs = false,
                                    unsigned workers = worker_count()) {
  config.validate();
  if (m_reps < 2) throw input_error("m_reps must be >= 2");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<RunRecord> runs(static_cast<std::size_t>(m_reps));
  parallel_for(m_reps, workers, [&](std::int64_t i) {
    try {
      const AmsResult r = run_ams(model, config, base_seed, static_cast<std::uint64_t>(i), false);
      runs[static_cast<std::size_t>(i)] = {r.j_count, r.survivors, r.estimate};
    } catch (const runaway_error& e) {
      throw runaway_error(e.iterations(), i);
    }
  });

  ReplicationSummary s;
  s.n = config.n;
  s.k = config.k;
  s.x = config.x;
  s.a = config.a;
  s.m_reps = m_reps;
  s.base_seed = base_seed;
  detail::summarize(s, runs);
  if (keep_runs) s.runs = std::move(runs);
  s.wallclock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

inline ReplicationSummary run_replications(const ReplicationPlan& plan,
                                           unsigned workers = worker_count()) {
  plan.validate();
  const AnyModel model = make_model(plan.model);
  return std::visit(
      [&](const auto& m) {
        return run_replications(m, plan.config, plan.m_reps, plan.base_seed, plan.keep_runs,
                                workers);
      },
      model);
}

/// Summary statistics computed from an explicit list of estimates.
inline ReplicationSummary summarize_records(const std::vector<RunRecord>& runs, int n, int k) {
  if (runs.size() < 2) throw input_error("summarize_records: need at least 2 runs");
  ReplicationSummary s;
  s.n = n;
  s.k = k;
  s.m_reps = static_cast<std::int64_t>(runs.size());
  detail::summarize(s, runs);
  return s;
}

// ---------------------------------------------------------------------------
// Test reports

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  std::optional<double> p_value;
  bool pass = false;
  std::string digest;  // inputs: seeds, n, k, M, ...
  std::string detail;
};

/// Kolmogorov limiting survival function P(K > t).
inline double kolmogorov_sf(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 1.18) {
    const double pi = std::numbers::pi;
    const double w = pi * pi / (8.0 * t * t);
    double cdf = 0.0;
    for (int j = 1; j <= 20; ++j) cdf += std::exp(-(2.0 * j - 1.0) * (2.0 * j - 1.0) * w);
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / t * cdf, 0.0, 1.0);
  }
  double sf = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * t * t);
    sf += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(sf, 0.0, 1.0);
}

struct KsResult {
  double d = 0.0;
  double p_value = 1.0;
  double n_effective = 0.0;
};

/// Asymptotic p-value for statistic d at effective sample size ne, with the
/// usual small-sample correction sqrt(ne) + 0.12 + 0.11/sqrt(ne).
inline double ks_p_value(double d, double ne) {
  const double r = std::sqrt(ne);
  return kolmogorov_sf((r + 0.12 + 0.11 / r) * d);
}

inline KsResult ks_one_sample(std::vector<double> data, const std::function<double(double)>& cdf) {
  if (data.empty()) throw input_error("ks_one_sample: empty sample");
  std::sort(data.begin(), data.end());
  const auto m = static_cast<double>(data.size());
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = cdf(data[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / m - f, f - static_cast<double>(i) / m});
  }
  return {d, ks_p_value(d, m), m};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw input_error("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  return {d, ks_p_value(d, ne), ne};
}

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int bins = 0;
};

/// Chi-square goodness of fit of a histogram on {0, 1, 2, ...} against
/// Poisson(mean). Bins are merged left to right until each holds expected
/// count >= min_expected; the last bin absorbs the upper tail.
inline ChiSquareResult chi_square_poisson(const std::vector<std::int64_t>& hist, double mean,
                                          double min_expected = 5.0) {
  if (!(mean > 0.0)) throw input_error("chi_square_poisson: mean must be > 0");
  std::int64_t total = 0;
  for (auto c : hist) total += c;
  if (total <= 0) throw input_error("chi_square_poisson: empty histogram");
  const auto m = static_cast<double>(total);

  std::vector<double> expected;
  std::vector<double> observed;
  double exp_acc = 0.0;
  double obs_acc = 0.0;
  double cdf = 0.0;
  // Walk until the remaining tail mass alone cannot form a bin.
  for (std::int64_t j = 0;; ++j) {
    const double pmf =
        std::exp(static_cast<double>(j) * std::log(mean) - mean - std::lgamma(static_cast<double>(j) + 1.0));
    cdf += pmf;
    exp_acc += m * pmf;
    obs_acc += j < static_cast<std::int64_t>(hist.size()) ? static_cast<double>(hist[j]) : 0.0;
    const double tail = m * std::max(0.0, 1.0 - cdf);
    if (exp_acc >= min_expected) {
      expected.push_back(exp_acc);
      observed.push_back(obs_acc);
      exp_acc = 0.0;
      obs_acc = 0.0;
    }
    if (tail < min_expected && static_cast<double>(j) > mean) {
      double obs_tail = 0.0;
      for (std::size_t i = static_cast<std::size_t>(j) + 1; i < hist.size(); ++i)
        obs_tail += static_cast<double>(hist[i]);
      exp_acc += tail;
      obs_acc += obs_tail;
      break;
    }
  }
  if (expected.empty()) throw input_error("chi_square_poisson: too few counts to form bins");
  expected.back() += exp_acc;
  observed.back() += obs_acc;

  ChiSquareResult r;
  r.bins = static_cast<int>(expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double d = observed[i] - expected[i];
    r.statistic += d * d / expected[i];
  }
  r.dof = r.bins - 1;
  r.p_value = r.dof > 0 ? boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic) : 1.0;
  return r;
}

inline std::string digest_of(const ReplicationSummary& s) {
  std::ostringstream o;
  o << "seed=" << s.base_seed << " n=" << s.n << " k=" << s.k << " x=" << s.x << " a=" << s.a
    << " M=" << s.m_reps;
  return o.str();
}

/// z = (mean - truth) / se_mean; pass iff |z| <= 4.
inline TestReport test_unbiasedness(const ReplicationSummary& s, double truth) {
  if (!(truth > 0.0 && truth <= 1.0)) throw input_error("test_unbiasedness: truth must lie in (0,1]");
  TestReport r;
  r.name = "unbiasedness";
  r.threshold = 4.0;
  const double diff = s.mean_estimate - truth;
  r.statistic = diff == 0.0 ? 0.0 : (s.se_mean > 0.0 ? diff / s.se_mean : kInf);
  r.pass = std::abs(r.statistic) <= r.threshold;
  r.digest = digest_of(s);
  std::ostringstream d;
  d.precision(10);
  d << "mean=" << s.mean_estimate << " truth=" << truth << " se=" << s.se_mean;
  r.detail = d.str();
  return r;
}

/// Chi-square test of J against Poisson(-n log P); k = 1 only.
inline TestReport test_poisson_iterations(const std::vector<std::int64_t>& j_histogram, int n,
                                          int k, double P) {
  if (k != 1) throw input_error("test_poisson_iterations: requires k = 1");
  if (!(P > 0.0 && P < 1.0)) throw input_error("test_poisson_iterations: requires 0 < P < 1");
  const double mean = -n * std::log(P);
  const auto chi = chi_square_poisson(j_histogram, mean);
  TestReport r;
  r.name = "poisson_iterations";
  r.statistic = chi.statistic;
  r.threshold = 0.001;
  r.p_value = chi.p_value;
  r.pass = chi.p_value >= r.threshold;
  std::ostringstream d;
  d << "n=" << n << " poisson_mean=" << mean;
  r.digest = d.str();
  r.detail = "bins=" + std::to_string(chi.bins) + " dof=" + std::to_string(chi.dof);
  return r;
}

/// Runs AMS on `model` with levels (x, a) and on the exponential model with
/// levels (Lambda(x), Lambda(a)), run i on substream i of seed for both.
/// Passes iff J, C and the final particle order agree on every run.
template <RandomModel M>
TestReport test_lambda_equivalence(const M& model, double x, double a, int n, int k,
                                   std::int64_t n_runs, std::uint64_t seed) {
  if constexpr (M::supports_atom_at_target) {
    throw input_error("test_lambda_equivalence: requires an inverse-CDF model");
  } else {
    if (n_runs < 1) throw input_error("test_lambda_equivalence: n_runs must be >= 1");
    const ExponentialModel exp_model{};
    const AmsConfig cm{n, k, x, a, 0};
    const double sx = model.lambda(x);
    const double sa = model.lambda(a);
    if (!std::isfinite(sa)) throw input_error("test_lambda_equivalence: Lambda(a) is infinite");
    const AmsConfig ce{n, k, sx, sa, 0};

    std::vector<char> same(static_cast<std::size_t>(n_runs), 0);
    parallel_for(n_runs, worker_count(), [&](std::int64_t i) {
      AmsSampler<M> s1(model, cm, UniformStream(seed, static_cast<std::uint64_t>(i)), false);
      AmsSampler<ExponentialModel> s2(exp_model, ce, UniformStream(seed, static_cast<std::uint64_t>(i)),
                                      false);
      s1.run();
      s2.run();
      const auto r1 = s1.result();
      const auto r2 = s2.result();
      bool ok = r1.j_count == r2.j_count && r1.survivors == r2.survivors;
      for (int p = 0; ok && p < n; ++p)
        ok = s1.state().particles[p].index == s2.state().particles[p].index;
      same[static_cast<std::size_t>(i)] = ok;
    });
    std::int64_t mismatches = 0;
    for (char c : same) mismatches += c ? 0 : 1;
    TestReport r;
    r.name = "lambda_equivalence";
    r.statistic = static_cast<double>(mismatches);
    r.threshold = 0.0;
    r.pass = mismatches == 0;
    std::ostringstream d;
    d << "seed=" << seed << " n=" << n << " k=" << k << " x=" << x << " a=" << a
      << " runs=" << n_runs;
    r.digest = d.str();
    r.detail = std::to_string(n_runs - mismatches) + "/" + std::to_string(n_runs) + " identical";
    return r;
  }
}

/// Compares the sample variance and mean J + 1 with the spectral oracle.
/// The statistic is the larger of the two |z| scores.
inline TestReport test_moments_vs_oracle(const ReplicationSummary& s, int n, int k, double a,
                                         double x = 0.0) {
  const auto m = oracle::spectral_moments(n, k, x, a);
  const double z_var = (s.variance_estimate - m.variance) / s.se_variance;
  const double z_t = (s.mean_J + 1.0 - m.T) / s.se_J;
  TestReport r;
  r.name = "moments_vs_oracle";
  r.threshold = 4.0;
  r.statistic = std::max(std::abs(z_var), std::abs(z_t));
  r.pass = std::abs(z_var) <= 4.0 && std::abs(z_t) <= 4.0;
  r.digest = digest_of(s);
  std::ostringstream d;
  d.precision(10);
  d << "var=" << s.variance_estimate << " oracle_var=" << m.variance << " z_var=" << z_var
    << " T=" << s.mean_J + 1.0 << " oracle_T=" << m.T << " z_T=" << z_t;
  r.detail = d.str();
  return r;
}

}  // namespace ams
