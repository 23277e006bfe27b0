#include <gtest/gtest.h>

#include "sgldlab/errors.hpp"
#include "sgldlab/gaussian_oracle.hpp"
#include "sgldlab/gradient.hpp"
#include "sgldlab/mode.hpp"

using namespace sgldlab;

TEST(Gradient, ParseAndPrintSchemes) {
  for (auto k : {SchemeKind::Full, SchemeKind::NaiveSubsample, SchemeKind::ControlVariate})
    EXPECT_EQ(parse_scheme_kind(to_string(k)), k);
  EXPECT_THROW(parse_scheme_kind("sgd"), ArgumentError);
}

TEST(Gradient, NaiveUnbiasedByEnumeration) {
  const auto ds = generate_logreg_data(2, 9, 5.0, 3);
  const ParamVector x = ParamVector::Constant(2, 0.4);
  const ParamVector full = ds.model.full_grad(x);
  for (std::size_t n = 1; n <= 9; ++n) {
    const ParamVector m = enumerated_gradient_mean(GradientScheme::naive(n), ds.model, x);
    EXPECT_LE((m - full).cwiseAbs().maxCoeff(), 1e-12) << "n=" << n;
  }
}

TEST(Gradient, ControlVariateUnbiasedByEnumeration) {
  const auto ds = generate_logreg_data(3, 11, 5.0, 4);
  CostLedger pre;
  const ParamVector mode = find_mode(ds.model);
  const ParamVector x = mode + ParamVector::Constant(3, 0.3);
  for (std::size_t n : {1u, 4u, 11u}) {
    const auto s = GradientScheme::control_variate(ds.model, mode, n, pre);
    const ParamVector m = enumerated_gradient_mean(s, ds.model, x);
    EXPECT_LE((m - ds.model.full_grad(x)).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_EQ(pre.term_evals, 3u * 11u);
}

TEST(Gradient, ControlVariateExactlyZeroAtAnchor) {
  const auto ds = generate_logreg_data(3, 400, 10.0, 5);
  CostLedger pre;
  const ParamVector mode = find_mode(ds.model);
  const auto s = GradientScheme::control_variate(ds.model, mode, 7, pre);
  GradientEstimator est(s, ds.model);
  RngStream r(1, 0);
  CostLedger led;
  ParamVector g(3);
  for (int k = 0; k < 50; ++k) {
    est.estimate(mode, r, led, g);
    ASSERT_EQ(g, ParamVector::Zero(3));
  }
  EXPECT_EQ(led.term_evals, 50u * 7u);
}

TEST(Gradient, ControlVariateRejectsPoorAnchor) {
  const auto ds = generate_logreg_data(2, 100, 10.0, 6);
  CostLedger pre;
  EXPECT_THROW(GradientScheme::control_variate(ds.model, ParamVector::Constant(2, 3.0), 5, pre),
               AnchorQualityError);
}

TEST(Gradient, LedgerChargesBatchPerCall) {
  const auto m = generate_gaussian_data(40, 1, 1, 0, 1);
  RngStream r(1, 0);
  CostLedger led;
  estimate_gradient(GradientScheme::full(), m, ParamVector::Zero(1), r, led);
  estimate_gradient(GradientScheme::naive(3), m, ParamVector::Zero(1), r, led);
  EXPECT_EQ(led.term_evals, 43u);
  EXPECT_THROW(estimate_gradient(GradientScheme::naive(41), m, ParamVector::Zero(1), r, led),
               ArgumentError);
}

TEST(Gradient, GaussianVarianceMatchesSubsamplingFormula) {
  const auto m = generate_gaussian_data(10, 1.0, 0.7, 0.2, 8);
  const ParamVector x = ParamVector::Constant(1, -0.4);
  double mean = 0, S2 = 0;
  for (double y : m.data()) mean += y / 10;
  for (double y : m.data()) S2 += (y - mean) * (y - mean) / 9;
  for (std::size_t n = 1; n <= 10; ++n) {
    const double v = gradient_variance(GradientScheme::naive(n), m, x, EnumerateMode{});
    const double expected = 10.0 * (10.0 - n) / n * S2 / (4 * 0.7 * 0.7);
    EXPECT_NEAR(v, expected, 1e-12);
    EXPECT_NEAR(v, oracle::var_b(m, SchemeKind::NaiveSubsample, n), 1e-12);
  }
  EXPECT_EQ(gradient_variance(GradientScheme::full(), m, x, EnumerateMode{}), 0.0);
}

TEST(Gradient, MonteCarloVarianceAgreesWithEnumeration) {
  const auto m = generate_gaussian_data(12, 1.0, 1.0, 0.0, 2);
  const ParamVector x = ParamVector::Zero(1);
  const double exact = gradient_variance(GradientScheme::naive(3), m, x, EnumerateMode{});
  const double mc = gradient_variance(GradientScheme::naive(3), m, x,
                                      MonteCarloMode{40000, RngStream(3, 0)});
  EXPECT_NEAR(mc / exact, 1.0, 0.05);
}

TEST(Gradient, ControlVariateVarianceVanishesForGaussian) {
  const auto m = generate_gaussian_data(12, 1.0, 1.0, 0.0, 2);
  CostLedger pre;
  const auto s = GradientScheme::control_variate(m, *m.closed_form_mode(), 4, pre);
  EXPECT_LE(gradient_variance(s, m, ParamVector::Constant(1, 2.0), EnumerateMode{}), 1e-20);
}
