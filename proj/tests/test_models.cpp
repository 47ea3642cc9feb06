#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ams/models.hpp"
#include "ams/stats.hpp"

using namespace ams;

namespace {

template <class M>
double ks_p_of_increments(const M& model, double x, int m, std::uint64_t seed) {
  UniformStream s(seed, 0);
  std::vector<double> y(m);
  for (int i = 0; i < m; ++i) y[i] = lambda_between(model, sample_conditional(model, x, s.next()), x);
  return ks_one_sample(y, [](double t) { return t <= 0 ? 0.0 : -std::expm1(-t); }).p_value;
}

}  // namespace

TEST(CdfConditional, Examples) {
  const ExponentialModel e;
  EXPECT_EQ(cdf_conditional(e, 0.8, 0.8), 0.0);
  EXPECT_NEAR(cdf_conditional(e, 1.5, 0.5), 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(cdf_conditional(e, 800.0, 0.5), 1.0, 1e-15);
  EXPECT_EQ(cdf_conditional(e, 0.2, 0.5), 0.0);
}

TEST(CdfConditional, DegenerateLevelIsAnError) {
  const CommittorToyModel c(0.1);
  EXPECT_THROW(cdf_conditional(c, 2.0, 1.0), degenerate_conditioning);
  EXPECT_THROW(sample_conditional(c, 1.0, 0.5), degenerate_conditioning);
}

TEST(LambdaBetween, Examples) {
  EXPECT_DOUBLE_EQ(lambda_between(ExponentialModel{}, 2.5, 0.0), 2.5);
  EXPECT_NEAR(lambda_between(ParetoModel{}, 1.0, 0.0), 2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(lambda_between(ParetoModel{}, 1.0, 0.0), 1.386294, 1e-6);
  EXPECT_EQ(lambda_between(WeibullModel{}, 0.7, 0.7), 0.0);
  EXPECT_THROW(lambda_between(CommittorToyModel(0.1), 1.0, 0.5), infinite_value_error);
  EXPECT_THROW(lambda_between(ExponentialModel{}, 0.5, 1.0), input_error);
}

TEST(SampleConditional, Examples) {
  const ExponentialModel e;
  EXPECT_NEAR(sample_conditional(e, 0.5, 1.0 - std::exp(-1.0)), 1.5, 1e-14);
  EXPECT_NEAR(sample_conditional(e, 0.5, 1e-300), 0.5, 1e-15);
  EXPECT_GT(sample_conditional(e, 0.5, 1e-12), 0.5);
  EXPECT_DOUBLE_EQ(sample_conditional(CommittorToyModel(0.05), 0.1, 0.5), 0.2);
  EXPECT_DOUBLE_EQ(sample_conditional(CommittorToyModel(0.05), 0.1, 0.95), 1.0);
  EXPECT_THROW(sample_conditional(e, 0.5, 0.0), input_error);
  EXPECT_THROW(sample_conditional(e, 0.5, 1.0), input_error);
  EXPECT_THROW(sample_conditional(e, 0.5, -0.2), input_error);
}

TEST(TildeTransform, Examples) {
  EXPECT_EQ(tilde_transform(0.7, 0.3, 1.0), 0.7);
  EXPECT_DOUBLE_EQ(tilde_transform(1.2, 0.5, 1.0), 2.0);
  EXPECT_NEAR(tilde_transform(1.2, 1.0 - 1e-15, 1.0), 1.0, 1e-14);
  EXPECT_GE(tilde_transform(1.0, 0.999, 1.0), 1.0);
  EXPECT_THROW(tilde_transform(1.2, 1.0, 1.0), input_error);
  EXPECT_THROW(tilde_transform(1.2, 0.5, 0.0), input_error);
}

template <class M>
class ContinuousModelTest : public ::testing::Test {};
using ContinuousModels = ::testing::Types<ExponentialModel, ParetoModel, WeibullModel, PdmpModel>;
TYPED_TEST_SUITE(ContinuousModelTest, ContinuousModels);

TYPED_TEST(ContinuousModelTest, CdfInvariants) {
  const TypeParam m;
  EXPECT_EQ(m.cdf(0.0), 0.0);
  double prev = 0.0;
  for (double y = 0.01; y < 6.0; y += 0.01) {
    const double f = m.cdf(y);
    ASSERT_GE(f, prev);
    prev = f;
    // inverting f amplifies its rounding by 1/((1-f) lambda'(y))
    const double eps = std::numeric_limits<double>::epsilon();
    const double dlam = (m.lambda(y + 1e-6) - m.lambda(y - 1e-6)) / 2e-6;
    ASSERT_NEAR(m.quantile(f), y, 1e-12 * y + 4.0 * eps / ((1.0 - f) * dlam)) << "y=" << y;
    if (f < 1.0) {
      ASSERT_NEAR(m.lambda(y), -std::log1p(-f),
                  1e-12 * std::max(1.0, m.lambda(y)) + 4.0 * eps / (1.0 - f));
    }
    ASSERT_NEAR(m.lambda_inv(m.lambda(y)), y, 1e-12 * y);
  }
}

TYPED_TEST(ContinuousModelTest, ConditionalIncrementsAreExp1) {
  const TypeParam m;
  EXPECT_GE(ks_p_of_increments(m, 0.0, 100000, 11), 0.001);
  EXPECT_GE(ks_p_of_increments(m, 0.7, 100000, 12), 0.001);
}

TYPED_TEST(ContinuousModelTest, SamplesLieAboveLevel) {
  const TypeParam m;
  UniformStream s(3, 0);
  for (int i = 0; i < 10000; ++i) ASSERT_GT(m.draw_above(1.3, s), 1.3);
}

TEST(Pdmp, SupMinusStartIsExp1) {
  UniformStream s(99, 0);
  std::vector<double> d(100000);
  for (auto& v : d) {
    const auto path = PdmpModel::simulate(2.0, s.next());
    ASSERT_DOUBLE_EQ(path.sup, path.start + path.switch_time);
    v = path.sup - path.start;
  }
  const auto ks = ks_one_sample(d, [](double t) { return t <= 0 ? 0.0 : -std::expm1(-t); });
  EXPECT_GE(ks.p_value, 0.001);
}

TEST(Committor, SurvivalAndAtom) {
  const CommittorToyModel c(0.05);
  EXPECT_TRUE(CommittorToyModel::supports_atom_at_target);
  EXPECT_DOUBLE_EQ(c.survival(0.01), 1.0);
  EXPECT_DOUBLE_EQ(c.survival(0.25), 0.05 / 0.25);
  EXPECT_DOUBLE_EQ(c.survival(1.0), 0.0);
  EXPECT_DOUBLE_EQ(c.mass_at_target(), 0.05);
  EXPECT_NEAR(c.lambda_ge(1.0), -std::log(0.05), 1e-15);
}

TEST(Committor, MassAtOneFromLevel) {
  const CommittorToyModel c(0.05);
  for (double z : {0.05, 0.3, 0.8}) {
    UniformStream s(5, static_cast<std::uint64_t>(z * 100));
    const int m = 100000;
    int at_one = 0;
    for (int i = 0; i < m; ++i) at_one += c.draw_above(z, s) == 1.0;
    const double se = std::sqrt(z * (1 - z) / m);
    EXPECT_NEAR(static_cast<double>(at_one) / m, z, 4 * se) << "z=" << z;
  }
}

TEST(Committor, TildeCouplingIsContinuous) {
  const TildeCoupled<CommittorToyModel> t(CommittorToyModel(0.05), 1.0);
  EXPECT_FALSE(decltype(t)::supports_atom_at_target);
  UniformStream s(6, 0);
  const int m = 100000;
  std::vector<double> v(m);
  int exactly_one = 0;
  int above = 0;
  for (auto& x : v) {
    x = t.draw_above(0.0, s);
    exactly_one += x == 1.0;
    above += x >= 1.0;
  }
  EXPECT_EQ(exactly_one, 0);
  EXPECT_NEAR(static_cast<double>(above) / m, 0.05, 4 * std::sqrt(0.05 * 0.95 / m));
  const auto ks = ks_one_sample(v, [&](double y) { return t.cdf(y); });
  EXPECT_GE(ks.p_value, 0.001);
  // the coupled law agrees with the base law strictly below the target
  EXPECT_DOUBLE_EQ(t.cdf(0.5), t.base().cdf(0.5));
  EXPECT_NEAR(t.survival(2.0), 0.05 / 2.0, 1e-15);
}

TEST(ModelCatalog, Keys) {
  EXPECT_TRUE(std::holds_alternative<ExponentialModel>(make_model({"exponential", {}})));
  EXPECT_TRUE(std::holds_alternative<ParetoModel>(make_model({"pareto", {}})));
  EXPECT_TRUE(std::holds_alternative<WeibullModel>(make_model({"weibull", {}})));
  EXPECT_TRUE(std::holds_alternative<PdmpModel>(make_model({"pdmp", {}})));
  EXPECT_TRUE(std::holds_alternative<TildeCoupled<CommittorToyModel>>(make_model({"committor", {0.1}})));
  EXPECT_THROW(make_model({"gaussian", {}}), input_error);
  EXPECT_THROW(make_model({"committor", {}}), input_error);
  EXPECT_THROW(make_model({"committor", {1.5}}), input_error);
  EXPECT_THROW(make_model({"exponential", {1.0}}), input_error);
}
