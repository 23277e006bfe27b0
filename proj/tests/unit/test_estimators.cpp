#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sgldlab/errors.hpp"
#include "sgldlab/estimators.hpp"

using namespace sgldlab;

namespace {
// Composite Simpson on [mean - 14 sd, mean + 14 sd] with a fine grid.
double simpson_normal(const std::function<double(double)>& f, double mean, double var) {
  const double sd = std::sqrt(var), a = mean - 14 * sd, b = mean + 14 * sd;
  const int n = 400000;
  const double h = (b - a) / n;
  double acc = 0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * h;
    const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    const double z = (x - mean) / sd;
    acc += w * f(x) * std::exp(-0.5 * z * z);
  }
  return acc * h / 3 / (sd * std::sqrt(2 * std::numbers::pi));
}
}  // namespace

TEST(Estimators, StableSumCompensates) {
  EXPECT_EQ(stable_sum({1e16, 1.0, -1e16}), 1.0);
  std::vector<double> v(100000, 0.1);
  EXPECT_NEAR(stable_sum(v), 10000.0, 1e-9);
}

TEST(Estimators, Functionals) {
  ParamVector x(2);
  x << 0.5, -2.0;
  EXPECT_EQ(Functional::coordinate(1)(x), -2.0);
  EXPECT_EQ(Functional::squared_coordinate(1)(x), 4.0);
  EXPECT_NEAR(Functional::abs_sin_centered(0.1)(x),
              std::abs(std::sin(0.5) - 0.1) + std::abs(std::sin(-2.0) - 0.1), 1e-15);
  EXPECT_EQ(Functional::coordinate(0).lipschitz_bound(), 1.0);
  const auto c = Functional::custom("norm", [](const ParamVector& y) { return y.norm(); }, 1.0);
  EXPECT_EQ(c.name(), "norm");
  EXPECT_NEAR(c(x), std::sqrt(4.25), 1e-15);
}

TEST(Estimators, PathsEstimatesAndStd) {
  std::vector<ParamVector> s;
  for (double v : {1.0, 2.0, 3.0, 4.0}) s.push_back(ParamVector::Constant(1, v));
  EXPECT_DOUBLE_EQ(independent_paths_estimate(Functional::coordinate(0), s), 2.5);
  EXPECT_NEAR(posterior_std_estimate(s, Functional::coordinate(0)), std::sqrt(1.25), 1e-15);
  EXPECT_THROW(posterior_std_estimate({s[0]}, Functional::coordinate(0)), ArgumentError);
  EXPECT_THROW(independent_paths_estimate(Functional::coordinate(0), std::vector<ParamVector>{}),
               ArgumentError);
}

TEST(Estimators, MseReport) {
  const auto r = mse_report(1.0, {1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(r.bias_sq, 1.0);
  EXPECT_DOUBLE_EQ(r.variance, 1.0);
  EXPECT_DOUBLE_EQ(r.rmse, std::sqrt(2.0));
}

TEST(Estimators, BootstrapSeOfMean) {
  RngStream r(5, 0), b(5, 1);
  std::vector<double> v(2000);
  for (auto& x : v) x = standard_normal(r);
  const double se = bootstrap_se(v, 1000, b);
  EXPECT_NEAR(se / (1.0 / std::sqrt(2000.0)), 1.0, 0.1);
  EXPECT_THROW(bootstrap_se(v, 10, b), ArgumentError);
}

TEST(Estimators, NormalExpectationMoments) {
  EXPECT_NEAR(normal_expectation([](double x) { return x * x; }, 0.3, 2.0), 2.09, 1e-10);
  EXPECT_NEAR(normal_expectation([](double x) { return std::cos(x); }, 0.0, 1.0),
              std::exp(-0.5), 1e-12);
}

TEST(Estimators, AbsSinExpectationAgainstSimpson) {
  for (auto [c, m, v] : {std::tuple{0.2, 0.2, 0.01}, std::tuple{0.5, 0.48, 1e-4},
                         std::tuple{-0.3, 1.0, 2.0}, std::tuple{1.5, 0.0, 1.0}}) {
    const double q = abs_sin_expectation(c, m, v);
    const double ref = simpson_normal(
        [c = c](double x) { return std::abs(std::sin(x) - c); }, m, v);
    EXPECT_NEAR(q, ref, 1e-9) << c << " " << m << " " << v;
  }
}
