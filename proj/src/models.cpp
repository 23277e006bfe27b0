#include "sgldlab/models.hpp"

#include <cmath>
#include <string>

#include "sgldlab/errors.hpp"
#include "sgldlab/rng.hpp"

namespace sgldlab {

// ---------------------------------------------------------------------------
// PosteriorModel

void PosteriorModel::check_point(const ParamVector& x) const {
  if (x.size() != dim())
    throw ArgumentError("point has dimension " + std::to_string(x.size()) +
                        ", model expects " + std::to_string(dim()));
  if (!x.allFinite()) throw ArgumentError("point has non-finite components");
}

void PosteriorModel::check_index(std::size_t i) const {
  if (i >= size())
    throw ArgumentError("datum index " + std::to_string(i) +
                        " out of range for N=" + std::to_string(size()));
}

ParamVector PosteriorModel::grad_log_prior(const ParamVector& x) const {
  check_point(x);
  ParamVector out = ParamVector::Zero(dim());
  add_prior_grad(x, 1.0, out);
  return out;
}

ParamVector PosteriorModel::grad_log_lik_term(std::size_t i,
                                              const ParamVector& x) const {
  check_index(i);
  check_point(x);
  ParamVector out = ParamVector::Zero(dim());
  add_term_grad(i, x, 1.0, out);
  return out;
}

ParamVector PosteriorModel::full_grad(const ParamVector& x) const {
  check_point(x);
  ParamVector out(dim());
  full_grad_into(x, out);
  return out;
}

ParamVector PosteriorModel::split_term_grad(std::size_t i,
                                            const ParamVector& x) const {
  check_index(i);
  check_point(x);
  ParamVector out(dim());
  split_term_grad_into(i, x, out);
  return out;
}

double PosteriorModel::log_posterior(const ParamVector& x) const {
  check_point(x);
  return log_posterior_unchecked(x);
}

double PosteriorModel::log_posterior_unchecked(const ParamVector& x) const {
  double acc = log_prior(x);
  for (std::size_t i = 0; i < size(); ++i) acc += log_lik_term(i, x);
  return acc;
}

double PosteriorModel::split_term_log_density(std::size_t i,
                                              const ParamVector& x) const {
  check_index(i);
  check_point(x);
  return log_prior(x) / static_cast<double>(size()) + log_lik_term(i, x);
}

Eigen::MatrixXd PosteriorModel::full_hessian(const ParamVector& x) const {
  Eigen::MatrixXd H = prior_hessian(x);
  for (std::size_t i = 0; i < size(); ++i) H += lik_term_hessian(i, x);
  return H;
}

void PosteriorModel::add_terms_grad(std::span<const std::uint32_t> indices,
                                    const ParamVector& x, double scale,
                                    ParamVector& out) const {
  for (auto i : indices) add_term_grad(i, x, scale, out);
}

void PosteriorModel::full_grad_into(const ParamVector& x,
                                    ParamVector& out) const {
  out.setZero(dim());
  add_prior_grad(x, 1.0, out);
  for (std::size_t i = 0; i < size(); ++i) add_term_grad(i, x, 1.0, out);
}

void PosteriorModel::split_term_grad_into(std::size_t i, const ParamVector& x,
                                          ParamVector& out) const {
  out.setZero(dim());
  add_prior_grad(x, 1.0 / static_cast<double>(size()), out);
  add_term_grad(i, x, 1.0, out);
}

void PosteriorModel::add_split_terms_diff(
    std::span<const std::uint32_t> indices, const ParamVector& x,
    const Eigen::MatrixXd& anchor, double scale, ParamVector& out) const {
  ParamVector term(dim());
  for (auto i : indices) {
    split_term_grad_into(i, x, term);
    out += scale * (term - anchor.col(i));
  }
}

// ---------------------------------------------------------------------------
// GaussianConjugateModel

GaussianConjugateModel::GaussianConjugateModel(double sigma_theta_sq,
                                               double sigma_y_sq,
                                               std::vector<double> data)
    : sigma_theta_sq_(sigma_theta_sq),
      sigma_y_sq_(sigma_y_sq),
      data_(std::move(data)) {
  if (!(sigma_theta_sq_ > 0.0) || !std::isfinite(sigma_theta_sq_))
    throw ArgumentError("GaussianConjugateModel: sigma_theta_sq must be > 0");
  if (!(sigma_y_sq_ > 0.0) || !std::isfinite(sigma_y_sq_))
    throw ArgumentError("GaussianConjugateModel: sigma_y_sq must be > 0");
  if (data_.empty())
    throw ArgumentError("GaussianConjugateModel: need at least one datum");
  for (double y : data_)
    if (!std::isfinite(y))
      throw ArgumentError("GaussianConjugateModel: non-finite observation");

  const double N = static_cast<double>(data_.size());
  for (double y : data_) {
    sum_y_ += y;
    sum_y_sq_ += y * y;
  }
  const double ybar = sum_y_ / N;
  double ss = 0.0;
  for (double y : data_) ss += (y - ybar) * (y - ybar);
  data_variance_ = data_.size() > 1 ? ss / (N - 1.0) : 0.0;

  const double precision = 1.0 / sigma_theta_sq_ + N / sigma_y_sq_;
  a_ = 0.5 * precision;
  mean_b_ = sum_y_ / (2.0 * sigma_y_sq_);
  posterior_mean_ = sum_y_ / (sigma_y_sq_ / sigma_theta_sq_ + N);
  posterior_variance_ = 1.0 / precision;

  prior_coef_ = -1.0 / (2.0 * sigma_theta_sq_);
  lik_coef_ = 1.0 / (2.0 * sigma_y_sq_);
  prior_share_ = prior_coef_ / N;

  double resid = 0.0;
  for (double y : data_)
    resid += (y - posterior_mean_) * (y - posterior_mean_);
  log_posterior_at_mean_ =
      -posterior_mean_ * posterior_mean_ / (2.0 * sigma_theta_sq_) -
      resid / (2.0 * sigma_y_sq_);
}

double GaussianConjugateModel::log_prior(const ParamVector& x) const {
  return -x[0] * x[0] / (2.0 * sigma_theta_sq_);
}

double GaussianConjugateModel::log_lik_term(std::size_t i,
                                            const ParamVector& x) const {
  const double r = data_[i] - x[0];
  return -r * r / (2.0 * sigma_y_sq_);
}

double GaussianConjugateModel::log_posterior_unchecked(
    const ParamVector& x) const {
  const double dx = x[0] - posterior_mean_;
  return log_posterior_at_mean_ - dx * dx / (2.0 * posterior_variance_);
}

Eigen::MatrixXd GaussianConjugateModel::prior_hessian(const ParamVector&) const {
  return Eigen::MatrixXd::Constant(1, 1, prior_coef_);
}

Eigen::MatrixXd GaussianConjugateModel::lik_term_hessian(
    std::size_t, const ParamVector&) const {
  return Eigen::MatrixXd::Constant(1, 1, -lik_coef_);
}

Eigen::MatrixXd GaussianConjugateModel::full_hessian(const ParamVector&) const {
  return Eigen::MatrixXd::Constant(1, 1, -a_);
}

std::optional<ParamVector> GaussianConjugateModel::closed_form_mode() const {
  return ParamVector::Constant(1, posterior_mean_);
}

void GaussianConjugateModel::add_prior_grad(const ParamVector& x, double scale,
                                            ParamVector& out) const {
  out[0] += scale * (prior_coef_ * x[0]);
}

void GaussianConjugateModel::add_term_grad(std::size_t i, const ParamVector& x,
                                           double scale,
                                           ParamVector& out) const {
  out[0] += scale * ((data_[i] - x[0]) * lik_coef_);
}

void GaussianConjugateModel::add_terms_grad(
    std::span<const std::uint32_t> indices, const ParamVector& x, double scale,
    ParamVector& out) const {
  double sy = 0.0;
  for (auto i : indices) sy += data_[i];
  const double n = static_cast<double>(indices.size());
  out[0] += scale * ((sy - n * x[0]) * lik_coef_);
}

void GaussianConjugateModel::full_grad_into(const ParamVector& x,
                                            ParamVector& out) const {
  out.resize(1);
  out[0] = -a_ * x[0] + mean_b_;
}

void GaussianConjugateModel::split_term_grad_into(std::size_t i,
                                                  const ParamVector& x,
                                                  ParamVector& out) const {
  out.resize(1);
  out[0] = split_term(i, x[0]);
}

void GaussianConjugateModel::add_split_terms_diff(
    std::span<const std::uint32_t> indices, const ParamVector& x,
    const Eigen::MatrixXd& anchor, double scale, ParamVector& out) const {
  const double x0 = x[0];
  double acc = 0.0;
  for (auto i : indices) acc += split_term(i, x0) - anchor(0, i);
  out[0] += scale * acc;
}

PosteriorMoments exact_posterior(const GaussianConjugateModel& model) {
  return {model.posterior_mean(), model.posterior_variance()};
}

GaussianConjugateModel generate_gaussian_data(std::size_t N,
                                              double sigma_theta_sq,
                                              double sigma_y_sq,
                                              double theta_true,
                                              std::uint64_t seed) {
  if (N < 1) throw ArgumentError("generate_gaussian_data: N must be >= 1");
  if (!(sigma_y_sq > 0.0))
    throw ArgumentError("generate_gaussian_data: sigma_y_sq must be > 0");
  RngStream rng(seed, stream_ids::kDataRows);
  const double sd = std::sqrt(sigma_y_sq);
  std::vector<double> y(N);
  for (auto& v : y) v = theta_true + sd * standard_normal(rng);
  return GaussianConjugateModel(sigma_theta_sq, sigma_y_sq, std::move(y));
}

// ---------------------------------------------------------------------------
// Logistic regression

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

LogisticRegressionModel::LogisticRegressionModel(RowMatrix covariates,
                                                 Eigen::VectorXd labels,
                                                 double prior_variance)
    : covariates_(std::move(covariates)),
      labels_(std::move(labels)),
      prior_variance_(prior_variance) {
  if (covariates_.rows() < 1 || covariates_.cols() < 1)
    throw ArgumentError("LogisticRegressionModel: empty covariate matrix");
  if (labels_.size() != covariates_.rows())
    throw ArgumentError("LogisticRegressionModel: label count != row count");
  if (!covariates_.allFinite())
    throw ArgumentError("LogisticRegressionModel: non-finite covariate");
  for (Eigen::Index i = 0; i < labels_.size(); ++i)
    if (labels_[i] != 0.0 && labels_[i] != 1.0)
      throw ArgumentError("LogisticRegressionModel: labels must be 0 or 1");
  if (!(prior_variance_ > 0.0) || !std::isfinite(prior_variance_))
    throw ArgumentError("LogisticRegressionModel: prior_variance must be > 0");
}

double LogisticRegressionModel::log_prior(const ParamVector& x) const {
  return -x.squaredNorm() / (2.0 * prior_variance_);
}

double LogisticRegressionModel::log_lik_term(std::size_t i,
                                             const ParamVector& x) const {
  const double z = covariates_.row(static_cast<Eigen::Index>(i)).dot(x);
  return labels_[static_cast<Eigen::Index>(i)] * z - softplus(z);
}

double LogisticRegressionModel::log_posterior_unchecked(
    const ParamVector& x) const {
  const Eigen::VectorXd z = covariates_ * x;
  double acc = log_prior(x);
  for (Eigen::Index i = 0; i < z.size(); ++i)
    acc += labels_[i] * z[i] - softplus(z[i]);
  return acc;
}

Eigen::MatrixXd LogisticRegressionModel::prior_hessian(const ParamVector&) const {
  return -Eigen::MatrixXd::Identity(dim(), dim()) / prior_variance_;
}

Eigen::MatrixXd LogisticRegressionModel::lik_term_hessian(
    std::size_t i, const ParamVector& x) const {
  const auto row = covariates_.row(static_cast<Eigen::Index>(i));
  const double s = sigmoid(row.dot(x));
  return -s * (1.0 - s) * (row.transpose() * row);
}

Eigen::MatrixXd LogisticRegressionModel::full_hessian(
    const ParamVector& x) const {
  const Eigen::VectorXd z = covariates_ * x;
  Eigen::VectorXd w(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double s = sigmoid(z[i]);
    w[i] = s * (1.0 - s);
  }
  Eigen::MatrixXd H = -(covariates_.transpose() * w.asDiagonal() * covariates_);
  H.diagonal().array() -= 1.0 / prior_variance_;
  return H;
}

void LogisticRegressionModel::add_prior_grad(const ParamVector& x, double scale,
                                             ParamVector& out) const {
  out -= (scale / prior_variance_) * x;
}

void LogisticRegressionModel::add_term_grad(std::size_t i, const ParamVector& x,
                                            double scale,
                                            ParamVector& out) const {
  const auto row = covariates_.row(static_cast<Eigen::Index>(i));
  const double r = labels_[static_cast<Eigen::Index>(i)] - sigmoid(row.dot(x));
  out += (scale * r) * row.transpose();
}

void LogisticRegressionModel::add_terms_grad(
    std::span<const std::uint32_t> indices, const ParamVector& x, double scale,
    ParamVector& out) const {
  for (auto i : indices) {
    const auto row = covariates_.row(i);
    const double r = labels_[i] - sigmoid(row.dot(x));
    out += (scale * r) * row.transpose();
  }
}

void LogisticRegressionModel::full_grad_into(const ParamVector& x,
                                             ParamVector& out) const {
  const Eigen::VectorXd z = covariates_ * x;
  Eigen::VectorXd r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) r[i] = labels_[i] - sigmoid(z[i]);
  out = covariates_.transpose() * r;
  out -= x / prior_variance_;
}

LogisticDataset generate_logreg_data(int d, std::size_t N,
                                     double prior_variance,
                                     std::uint64_t seed) {
  if (d < 1) throw ArgumentError("generate_logreg_data: d must be >= 1");
  if (N < 1) throw ArgumentError("generate_logreg_data: N must be >= 1");
  if (!(prior_variance > 0.0))
    throw ArgumentError("generate_logreg_data: prior_variance must be > 0");

  RngStream structure(seed, stream_ids::kDataStructure);
  Eigen::VectorXd mu(d);
  for (int i = 0; i < d; ++i) mu[i] = uniform01(structure);
  Eigen::MatrixXd C(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) C(i, j) = 2.0 * uniform01(structure) - 1.0;
  Eigen::VectorXd w(d);
  const double sd = std::sqrt(prior_variance);
  for (int j = 0; j < d; ++j) w[j] = sd * standard_normal(structure);

  RngStream rows(seed, stream_ids::kDataRows);
  LogisticRegressionModel::RowMatrix X(static_cast<Eigen::Index>(N), d);
  Eigen::VectorXd y(static_cast<Eigen::Index>(N));
  Eigen::VectorXd z(d);
  for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(N); ++n) {
    gaussian_noise(rows, z);
    const Eigen::VectorXd xn = mu + C * z;
    X.row(n) = xn.transpose();
    y[n] = uniform01(rows) < sigmoid(w.dot(xn)) ? 1.0 : 0.0;
  }

  Eigen::MatrixXd P = C * C.transpose();
  return LogisticDataset{
      LogisticRegressionModel(std::move(X), std::move(y), prior_variance), w,
      mu, P};
}

}  // namespace sgldlab
