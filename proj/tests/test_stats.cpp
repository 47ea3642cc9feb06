#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "ams/stats.hpp"

using namespace ams;

namespace {

std::vector<std::int64_t> poisson_histogram(double mean, int m, std::uint64_t seed) {
  UniformStream s(seed, 0);
  std::vector<std::int64_t> h;
  const double limit = std::exp(-mean);
  for (int i = 0; i < m; ++i) {
    std::size_t j = 0;
    double prod = s.next();
    while (prod > limit) {
      prod *= s.next();
      ++j;
    }
    if (h.size() <= j) h.resize(j + 1, 0);
    ++h[j];
  }
  return h;
}

bool same_summary(const ReplicationSummary& a, const ReplicationSummary& b) {
  return a.mean_estimate == b.mean_estimate && a.variance_estimate == b.variance_estimate &&
         a.se_mean == b.se_mean && a.m4 == b.m4 && a.mean_J == b.mean_J && a.var_J == b.var_J &&
         a.mean_samples == b.mean_samples && a.j_histogram == b.j_histogram;
}

}  // namespace

TEST(Replications, DegenerateIdenticalRuns) {
  const auto s = summarize_records({{4, 10, 0.25}, {4, 10, 0.25}}, 10, 1);
  EXPECT_EQ(s.variance_estimate, 0.0);
  EXPECT_EQ(s.se_mean, 0.0);
  EXPECT_EQ(s.se_variance, 0.0);
  EXPECT_EQ(s.mean_estimate, 0.25);
  const auto r = test_unbiasedness(s, 0.25);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.statistic, 0.0);
}

TEST(Replications, UnbiasedExponential) {
  const auto s = run_replications(ExponentialModel{}, AmsConfig{50, 2, 0.0, 1.0, 0}, 100000, 31);
  EXPECT_NEAR(s.mean_estimate, std::exp(-1.0), 4 * s.se_mean);
  EXPECT_TRUE(test_unbiasedness(s, std::exp(-1.0)).pass);
  EXPECT_NEAR(s.mean_samples, 50 + 2 * s.mean_J, 1e-9);
  EXPECT_GE(s.variance_estimate, 0.0);
  EXPECT_GE(s.mean_estimate, 0.0);
  EXPECT_LE(s.mean_estimate, 1.0);
  std::int64_t total = 0;
  for (auto c : s.j_histogram) total += c;
  EXPECT_EQ(total, 100000);
}

TEST(Replications, IndependentOfWorkerCount) {
  const AmsConfig cfg{16, 3, 0.0, 1.5, 0};
  const auto a = run_replications(ParetoModel{}, cfg, 5000, 8, true, 1);
  const auto b = run_replications(ParetoModel{}, cfg, 5000, 8, true, 3);
  EXPECT_TRUE(same_summary(a, b));
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) ASSERT_EQ(a.runs[i].estimate, b.runs[i].estimate);
}

TEST(Replications, PlanOverload) {
  ReplicationPlan plan;
  plan.config = AmsConfig{10, 1, 0.0, 1.0, 0};
  plan.model = {"weibull", {}};
  plan.m_reps = 200;
  plan.base_seed = 4;
  const auto s = run_replications(plan, 2);
  EXPECT_EQ(s.m_reps, 200);
  plan.m_reps = 1;
  EXPECT_THROW(run_replications(plan), input_error);
}

TEST(Replications, RunawayAborts) {
  try {
    run_replications(ExponentialModel{}, AmsConfig{10, 1, 0.0, 5.0, 3}, 50, 1, false, 2);
    FAIL() << "expected runaway";
  } catch (const runaway_error& e) {
    EXPECT_EQ(e.iterations(), 3);
    EXPECT_GE(e.replication(), 0);
  }
}

TEST(Replications, WorkerCountFromEnv) {
  setenv("AMS_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  setenv("AMS_THREADS", "zero", 1);
  EXPECT_GE(worker_count(), 1u);
  unsetenv("AMS_THREADS");
}

TEST(Unbiasedness, SyntheticRejection) {
  ReplicationSummary s;
  s.mean_estimate = 0.3;
  s.se_mean = 0.001;
  EXPECT_TRUE(test_unbiasedness(s, 0.3).pass);
  s.mean_estimate = 0.3 + 10 * 0.001;
  const auto r = test_unbiasedness(s, 0.3);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.statistic, 10.0, 1e-9);
  EXPECT_THROW(test_unbiasedness(s, 0.0), input_error);
}

TEST(Unbiasedness, CommittorThroughTildeCoupling) {
  const auto model = TildeCoupled<CommittorToyModel>(CommittorToyModel(0.05), 1.0);
  const auto s = run_replications(model, AmsConfig{100, 3, 0.0, 1.0, 0}, 20000, 77);
  EXPECT_TRUE(test_unbiasedness(s, 0.05).pass) << s.mean_estimate << " +- " << s.se_mean;
}

TEST(PoissonTest, SelfTestAndPower) {
  EXPECT_TRUE(test_poisson_iterations(poisson_histogram(20.0, 100000, 3), 20, 1, std::exp(-1.0)).pass);
  EXPECT_FALSE(test_poisson_iterations(poisson_histogram(25.0, 100000, 4), 20, 1, std::exp(-1.0)).pass);
  EXPECT_THROW(test_poisson_iterations({1, 2, 3}, 20, 2, std::exp(-1.0)), input_error);
}

TEST(PoissonTest, AmsIterationsK1) {
  const auto s = run_replications(ExponentialModel{}, AmsConfig{20, 1, 0.0, 1.0, 0}, 20000, 12);
  const auto r = test_poisson_iterations(s.j_histogram, 20, 1, std::exp(-1.0));
  EXPECT_TRUE(r.pass) << r.statistic << " p=" << *r.p_value;
  EXPECT_NEAR(s.mean_J, 20.0, 4 * std::sqrt(20.0 / 20000));
}

TEST(ChiSquare, BinsRespectMinimumExpected) {
  const auto h = poisson_histogram(3.0, 1000, 5);
  const auto r = chi_square_poisson(h, 3.0);
  EXPECT_GE(r.bins, 3);
  EXPECT_EQ(r.dof, r.bins - 1);
  EXPECT_GT(r.p_value, 0.0);
  EXPECT_LE(r.p_value, 1.0);
}

TEST(Kolmogorov, SurvivalValues) {
  EXPECT_NEAR(kolmogorov_sf(1.0), 0.26999967, 1e-7);
  EXPECT_NEAR(kolmogorov_sf(1.3581), 0.05, 1e-4);
  EXPECT_NEAR(kolmogorov_sf(1.9495), 0.001, 1e-5);
  EXPECT_NEAR(kolmogorov_sf(0.5), 0.96394524, 1e-7);
  EXPECT_EQ(kolmogorov_sf(0.0), 1.0);
  // both branches agree at the switch point
  EXPECT_NEAR(kolmogorov_sf(1.18 - 1e-12), kolmogorov_sf(1.18), 1e-9);
}

TEST(Ks, OneAndTwoSample) {
  UniformStream s(8, 0);
  std::vector<double> a(20000), b(20000), shifted(20000);
  for (auto& v : a) v = s.next();
  for (auto& v : b) v = s.next();
  for (auto& v : shifted) v = 0.03 + s.next();
  EXPECT_GE(ks_one_sample(a, [](double u) { return std::clamp(u, 0.0, 1.0); }).p_value, 0.001);
  EXPECT_GE(ks_two_sample(a, b).p_value, 0.001);
  EXPECT_LT(ks_two_sample(a, shifted).p_value, 0.001);
  EXPECT_EQ(ks_two_sample(a, a).d, 0.0);
  EXPECT_THROW(ks_one_sample({}, [](double) { return 0.0; }), input_error);
}

TEST(LambdaEquivalence, Cases) {
  EXPECT_TRUE(test_lambda_equivalence(ExponentialModel{}, 0.0, 1.0, 16, 2, 500, 1).pass);
  const auto p = test_lambda_equivalence(ParetoModel{}, 0.0, 3.0, 16, 2, 2000, 2);
  EXPECT_TRUE(p.pass) << p.detail;
  EXPECT_TRUE(test_lambda_equivalence(WeibullModel{}, 0.4, 3.0, 16, 3, 2000, 3).pass);
  EXPECT_THROW(test_lambda_equivalence(CommittorToyModel(0.1), 0.0, 1.0, 16, 2, 10, 1), input_error);
}

TEST(MomentsVsOracle, SmallCase) {
  const auto s = run_replications(ExponentialModel{}, AmsConfig{10, 3, 0.0, 1.0, 0}, 40000, 21);
  const auto r = test_moments_vs_oracle(s, 10, 3, 1.0);
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(MomentsVsOracle, K1ClosedForms) {
  const auto m = oracle::spectral_moments(100, 1, 0.0, 1.0);
  EXPECT_NEAR(m.variance, std::exp(-2.0) * std::expm1(0.01), 1e-15);
  EXPECT_NEAR(m.T, 101.0, 1e-10);
}
