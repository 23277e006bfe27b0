#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "sgldlab/rng.hpp"

using namespace sgldlab;

TEST(Philox, KnownAnswerVectors) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                          {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                          {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, SameTripleSameSequence) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
  EXPECT_TRUE(a == b);
}

TEST(RngStream, DiscardMatchesDrawing) {
  RngStream a(5, 3), b(5, 3);
  for (int i = 0; i < 37; ++i) a();
  b.discard(37);
  EXPECT_EQ(a(), b());
  EXPECT_EQ(RngStream(5, 3, 38)(), a());
}

TEST(RngStream, StreamsAndSeedsDiffer) {
  std::set<std::uint64_t> first;
  for (std::uint64_t s = 0; s < 50; ++s) {
    first.insert(RngStream(1, s)());
    first.insert(RngStream(s + 100, 0)());
  }
  EXPECT_EQ(first.size(), 100u);
  RngStream base(9, 1);
  EXPECT_EQ(base.fork(2)(), RngStream(9, 2)());
}

TEST(RngStream, UniformMomentsAndRange) {
  RngStream r(11, 0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(r);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(var, 1.0 / 12.0, 0.002);
}

TEST(RngStream, UniformBelowIsUniform) {
  RngStream r(12, 0);
  const int k = 7, n = 70000;
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) {
    const auto v = uniform_below(r, k);
    ASSERT_LT(v, static_cast<std::uint64_t>(k));
    ++counts[v];
  }
  double chi2 = 0;
  for (int c : counts) chi2 += (c - n / k) * (c - n / k) / double(n / k);
  EXPECT_LT(chi2, 22.46);  // chi-square(6) 0.999 quantile
}

TEST(RngStream, StandardNormalMoments) {
  RngStream r(13, 0);
  const int n = 200000;
  double s = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(r);
    s += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(RngStream, NoiseVectorDeterministic) {
  RngStream a(1, 2), b(1, 2);
  Eigen::VectorXd x(5);
  gaussian_noise(a, x);
  EXPECT_EQ(x, gaussian_noise(5, b));
}

TEST(DeriveSeed, SpreadsTags) {
  std::set<std::uint64_t> s;
  for (std::uint64_t t = 0; t < 1000; ++t) s.insert(derive_seed(1, t));
  EXPECT_EQ(s.size(), 1000u);
  EXPECT_EQ(derive_seed(3, 4), derive_seed(3, 4));
}
