#include <gtest/gtest.h>

#include <map>
#include <set>

#include "sgldlab/subsample.hpp"

using namespace sgldlab;

namespace {
std::uint64_t choose(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}
}  // namespace

TEST(Subsample, DistinctAndInRange) {
  RngStream r(1, 0);
  for (std::size_t n : {1u, 5u, 50u, 100u}) {
    const auto s = sample_without_replacement(100, n, r);
    ASSERT_EQ(s.indices.size(), n);
    std::set<std::uint32_t> u(s.indices.begin(), s.indices.end());
    EXPECT_EQ(u.size(), n);
    EXPECT_LT(*u.rbegin(), 100u);
  }
}

TEST(Subsample, RejectsBadSizes) {
  RngStream r(1, 0);
  EXPECT_THROW(sample_without_replacement(10, 0, r), ArgumentError);
  EXPECT_THROW(sample_without_replacement(10, 11, r), ArgumentError);
  EXPECT_THROW(Subsampler(0), ArgumentError);
}

TEST(Subsample, FullBatchIsPermutation) {
  RngStream r(2, 0);
  const auto s = sample_without_replacement(20, 20, r);
  std::set<std::uint32_t> u(s.indices.begin(), s.indices.end());
  EXPECT_EQ(u.size(), 20u);
}

TEST(Subsample, SubsetsUniform) {
  // Every 2-subset of 6 equally likely.
  Subsampler sampler(6);
  RngStream r(3, 0);
  std::map<std::pair<int, int>, int> counts;
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) {
    auto v = sampler.draw(2, r);
    int a = static_cast<int>(v[0]), b = static_cast<int>(v[1]);
    if (a > b) std::swap(a, b);
    ++counts[{a, b}];
  }
  ASSERT_EQ(counts.size(), 15u);
  const double e = draws / 15.0;
  double chi2 = 0;
  for (auto& [k, c] : counts) chi2 += (c - e) * (c - e) / e;
  EXPECT_LT(chi2, 36.12);  // chi-square(14) 0.999 quantile
}

TEST(Subsample, DrawDependsOnlyOnRngState) {
  Subsampler shared(50);
  RngStream warm(4, 1);
  for (int i = 0; i < 10; ++i) shared.draw(17, warm);
  RngStream a(4, 0), b(4, 0);
  Subsampler fresh(50);
  const auto x = shared.draw(9, a);
  std::vector<std::uint32_t> xs(x.begin(), x.end());
  const auto y = fresh.draw(9, b);
  EXPECT_EQ(xs, std::vector<std::uint32_t>(y.begin(), y.end()));
}

TEST(Subsample, ForEachSubsetCountsAndOrder) {
  for (std::size_t N = 1; N <= 8; ++N)
    for (std::size_t n = 1; n <= N; ++n) {
      std::uint64_t c = 0;
      std::vector<std::uint32_t> prev;
      for_each_subset(N, n, [&](std::span<const std::uint32_t> t) {
        std::vector<std::uint32_t> cur(t.begin(), t.end());
        if (!prev.empty()) {
          EXPECT_LT(prev, cur);
        }
        prev = cur;
        ++c;
      });
      EXPECT_EQ(c, choose(N, n));
    }
}

TEST(Subsample, EnumerationGuard) {
  std::vector<Eigen::VectorXd> v(21, Eigen::VectorXd::Ones(1));
  EXPECT_THROW(enumerate_subsample_moments(v, 3), GuardError);
}

TEST(Subsample, EnumeratedMomentsOfScaledSum) {
  // Sampling-without-replacement variance N^2 (1/n - 1/N) S^2 computed directly.
  std::vector<Eigen::VectorXd> v;
  const std::vector<double> a{0.3, -1.2, 2.5, 0.0, 4.1, -0.7, 1.9};
  for (double x : a) v.push_back(Eigen::VectorXd::Constant(1, x));
  const double N = a.size();
  double mean = 0;
  for (double x : a) mean += x;
  mean /= N;
  double S2 = 0;
  for (double x : a) S2 += (x - mean) * (x - mean);
  S2 /= N - 1;
  for (std::size_t n = 1; n <= a.size(); ++n) {
    const auto m = enumerate_subsample_moments(v, n);
    EXPECT_NEAR(m.mean[0], N * mean, 1e-12);
    EXPECT_NEAR(m.variance, N * N * (1.0 / n - 1.0 / N) * S2, 1e-12);
    EXPECT_EQ(m.subsets, choose(a.size(), n));
  }
}
