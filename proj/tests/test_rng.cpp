#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ams/rng.hpp"

using ams::Philox4x32;
using ams::UniformStream;

TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::apply({0, 0, 0, 0}, {0, 0});
  const Philox4x32::counter_type want{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u};
  EXPECT_EQ(out, want);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox4x32::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     {0xffffffffu, 0xffffffffu});
  const Philox4x32::counter_type want{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu};
  EXPECT_EQ(out, want);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
  const Philox4x32::counter_type want{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u};
  EXPECT_EQ(out, want);
}

TEST(UniformStream, OpenUnitInterval) {
  UniformStream s(7, 3);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double u = s.next();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_LT(lo, 1e-4);
  EXPECT_GT(hi, 1 - 1e-4);
  // mean of U(0,1): se = 1/sqrt(12 m)
  EXPECT_NEAR(sum / m, 0.5, 4.0 / std::sqrt(12.0 * m));
}

TEST(UniformStream, DeterministicAndCounted) {
  UniformStream a(42, 0), b(42, 0);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
  EXPECT_EQ(a.consumed(), 1000u);
  EXPECT_EQ(a.seed(), 42u);
  EXPECT_EQ(a.stream(), 0u);
}

TEST(UniformStream, StreamsAndSeedsDiffer) {
  std::set<double> firsts;
  for (std::uint64_t st = 0; st < 100; ++st) firsts.insert(UniformStream(1, st).next());
  for (std::uint64_t sd = 2; sd < 102; ++sd) firsts.insert(UniformStream(sd, 0).next());
  EXPECT_EQ(firsts.size(), 200u);
}

TEST(UniformStream, HighSeedBitsMatter) {
  UniformStream a(1, 0), b(1 + (std::uint64_t{1} << 40), 0);
  EXPECT_NE(a.next(), b.next());
}
