#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "sgldlab/errors.hpp"
#include "sgldlab/mode.hpp"
#include "sgldlab/models.hpp"

using namespace sgldlab;

namespace {

// Central difference of f at x, step chosen per coordinate.
ParamVector fd_grad(const std::function<double(const ParamVector&)>& f, ParamVector x) {
  ParamVector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double e = 1e-5 * std::max(1.0, std::abs(x[j]));
    const double x0 = x[j];
    x[j] = x0 + e;
    const double fp = f(x);
    x[j] = x0 - e;
    const double fm = f(x);
    x[j] = x0;
    g[j] = (fp - fm) / (2 * e);
  }
  return g;
}

double rel_err(const ParamVector& a, const ParamVector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

void check_gradients(const PosteriorModel& m, const ParamVector& x) {
  const double s = m.drift_scale();
  EXPECT_LE(rel_err(m.grad_log_prior(x),
                    s * fd_grad([&](const ParamVector& y) { return m.log_prior(y); }, x)),
            1e-5);
  EXPECT_LE(rel_err(m.full_grad(x),
                    s * fd_grad([&](const ParamVector& y) { return m.log_posterior(y); }, x)),
            1e-5);
  for (std::size_t i : {std::size_t{0}, m.size() / 2, m.size() - 1}) {
    EXPECT_LE(rel_err(m.grad_log_lik_term(i, x),
                      s * fd_grad([&](const ParamVector& y) { return m.log_lik_term(i, y); }, x)),
              1e-5);
    EXPECT_LE(rel_err(m.split_term_grad(i, x),
                      s * fd_grad([&](const ParamVector& y) {
                        return m.split_term_log_density(i, y);
                      }, x)),
              1e-5);
  }
  // Hessian against differences of the analytic gradient.
  const Eigen::MatrixXd H = m.full_hessian(x);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const ParamVector col = fd_grad(
        [&](const ParamVector& y) { return m.full_grad(y)[j]; }, x);
    EXPECT_LE(rel_err(H.row(j).transpose(), col), 1e-5);
  }
}

}  // namespace

TEST(GaussianModel, GradientsMatchFiniteDifferences) {
  const auto m = generate_gaussian_data(50, 2.0, 0.5, 0.3, 9);
  for (double x : {-1.0, 0.0, 0.7, 3.0}) check_gradients(m, ParamVector::Constant(1, x));
}

TEST(GaussianModel, AffineDriftAndConjugatePosterior) {
  const std::vector<double> y{0.1, 0.4, -0.3, 1.2};
  const GaussianConjugateModel m(2.0, 0.5, y);
  const double A = 0.5 * (1 / 2.0 + 4 / 0.5);
  const double B = (0.1 + 0.4 - 0.3 + 1.2) / (2 * 0.5);
  EXPECT_DOUBLE_EQ(m.A(), A);
  EXPECT_DOUBLE_EQ(m.mean_B(), B);
  for (double x : {-2.0, 0.0, 1.5})
    EXPECT_NEAR(m.full_grad(ParamVector::Constant(1, x))[0], -A * x + B, 1e-13);
  const auto post = exact_posterior(m);
  EXPECT_NEAR(post.mean, 1.4 / (0.5 / 2.0 + 4), 1e-14);
  EXPECT_NEAR(post.variance, 1 / (1 / 2.0 + 4 / 0.5), 1e-14);
  EXPECT_NEAR(post.mean, B / A, 1e-14);
  EXPECT_NEAR((*m.closed_form_mode())[0], post.mean, 1e-14);
  EXPECT_DOUBLE_EQ(*m.exact_stability_limit(), 1 / A);
}

TEST(GaussianModel, SplitTermsSumToFullGradient) {
  const auto m = generate_gaussian_data(30, 1.0, 1.0, 0.0, 4);
  const ParamVector x = ParamVector::Constant(1, 0.37);
  ParamVector s = ParamVector::Zero(1);
  for (std::size_t i = 0; i < m.size(); ++i) s += m.split_term_grad(i, x);
  EXPECT_NEAR(s[0], m.full_grad(x)[0], 1e-12);
}

TEST(GaussianModel, DataPrefixesShared) {
  const auto a = generate_gaussian_data(10, 1, 1, 0.5, 77);
  const auto b = generate_gaussian_data(20, 1, 1, 0.5, 77);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.data()[i], b.data()[i]);
}

TEST(GaussianModel, RejectsBadInput) {
  EXPECT_THROW(GaussianConjugateModel(0.0, 1.0, {1.0}), ArgumentError);
  EXPECT_THROW(GaussianConjugateModel(1.0, 1.0, {}), ArgumentError);
  EXPECT_THROW(GaussianConjugateModel(1.0, 1.0, {NAN}), ArgumentError);
  const GaussianConjugateModel m(1.0, 1.0, {1.0});
  EXPECT_THROW(m.full_grad(ParamVector::Zero(2)), ArgumentError);
  EXPECT_THROW(m.full_grad(ParamVector::Constant(1, INFINITY)), ArgumentError);
  EXPECT_THROW(m.grad_log_lik_term(1, ParamVector::Zero(1)), ArgumentError);
}

TEST(LogisticModel, GradientsMatchFiniteDifferences) {
  const auto ds = generate_logreg_data(3, 200, 10.0, 5);
  const ParamVector mode = find_mode(ds.model);
  check_gradients(ds.model, mode);
  check_gradients(ds.model, ParamVector::Zero(3));
  check_gradients(ds.model, ParamVector::Constant(3, 2.0));
}

TEST(LogisticModel, StableLinkFunctions) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-800.0), 0.0);
  EXPECT_EQ(sigmoid(800.0), 1.0);
  EXPECT_NEAR(softplus(800.0), 800.0, 1e-12);
  EXPECT_NEAR(softplus(-800.0), 0.0, 1e-300);
  EXPECT_NEAR(softplus(1.0), std::log1p(std::exp(1.0)), 1e-15);
  const LogisticRegressionModel::RowMatrix X = LogisticRegressionModel::RowMatrix::Constant(1, 1, 1.0);
  const LogisticRegressionModel m(X, Eigen::VectorXd::Ones(1), 1.0);
  EXPECT_TRUE(std::isfinite(m.log_posterior(ParamVector::Constant(1, -1e6))));
}

TEST(LogisticModel, SharedStructureAcrossN) {
  const auto a = generate_logreg_data(3, 100, 10.0, 1);
  const auto b = generate_logreg_data(3, 500, 10.0, 1);
  EXPECT_EQ(a.true_weights, b.true_weights);
  EXPECT_EQ(a.model.covariates().topRows(100), b.model.covariates().topRows(100));
  for (Eigen::Index i = 0; i < 100; ++i) {
    const double y = a.model.labels()[i];
    EXPECT_TRUE(y == 0.0 || y == 1.0);
  }
}

TEST(LogisticModel, RejectsBadLabels) {
  LogisticRegressionModel::RowMatrix X = LogisticRegressionModel::RowMatrix::Ones(2, 1);
  Eigen::VectorXd y(2);
  y << 0.0, 0.5;
  EXPECT_THROW(LogisticRegressionModel(X, y, 1.0), ArgumentError);
}

TEST(Mode, NewtonFindsStationaryPoint) {
  const auto ds = generate_logreg_data(3, 1000, 10.0, 2);
  const ParamVector x = find_mode(ds.model);
  EXPECT_LE(ds.model.full_grad(x).norm(), default_mode_tolerance(ds.model));
  const ParamVector xi = find_term_mode(ds.model, 3);
  ParamVector g = ParamVector::Zero(3);
  ds.model.split_term_grad_into(3, xi, g);
  EXPECT_LE(g.norm(), 1e-8);
}

TEST(Mode, ClosedFormUsedForGaussian) {
  const auto m = generate_gaussian_data(100, 1, 1, 0.5, 3);
  EXPECT_DOUBLE_EQ(find_mode(m)[0], m.posterior_mean());
}
