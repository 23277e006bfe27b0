#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sgldlab {

/// A point in parameter space (the chain state).
using ParamVector = Eigen::VectorXd;

/// Posterior pi(x | y_1..y_N) proportional to pi(x) * prod_i pi(y_i | x).
///
/// Gradient and Hessian accessors return `drift_scale()` times the true
/// derivatives of the log densities. Models whose natural drift is the
/// rescaled one (the Gaussian toy model uses 1/2) state that here; the
/// sampler converts between conventions in exactly one place
/// (`drift_factor`). Log-density values are always unscaled.
///
/// Per-datum potentials with the prior split evenly across terms,
///   U_i(x) = (1/N) log pi(x) + log pi(y_i | x),
/// sum to the full log posterior, so their gradients vanish in sum at the
/// posterior mode. Control variates are built from these.
///
/// Models are immutable after construction.
class PosteriorModel {
 public:
  virtual ~PosteriorModel() = default;

  virtual int dim() const = 0;
  virtual std::size_t size() const = 0;
  virtual double drift_scale() const { return 1.0; }
  virtual std::string kind() const = 0;
  virtual bool strongly_log_concave() const = 0;

  // Checked, allocating accessors.
  ParamVector grad_log_prior(const ParamVector& x) const;
  ParamVector grad_log_lik_term(std::size_t i, const ParamVector& x) const;
  ParamVector full_grad(const ParamVector& x) const;
  ParamVector split_term_grad(std::size_t i, const ParamVector& x) const;
  double log_posterior(const ParamVector& x) const;

  virtual double log_prior(const ParamVector& x) const = 0;
  virtual double log_lik_term(std::size_t i, const ParamVector& x) const = 0;

  /// (1/N) log pi(x) + log pi(y_i | x).
  double split_term_log_density(std::size_t i, const ParamVector& x) const;

  virtual Eigen::MatrixXd prior_hessian(const ParamVector& x) const = 0;
  virtual Eigen::MatrixXd lik_term_hessian(std::size_t i,
                                           const ParamVector& x) const = 0;
  virtual Eigen::MatrixXd full_hessian(const ParamVector& x) const;

  /// Mode in closed form, when the model has one.
  virtual std::optional<ParamVector> closed_form_mode() const { return {}; }

  /// Exact stepsize bound for the explicit Euler chain, when known.
  virtual std::optional<double> exact_stability_limit() const { return {}; }

  // Unchecked kernels for the sampling loop. `out += scale * grad(...)`.
  virtual void add_prior_grad(const ParamVector& x, double scale,
                              ParamVector& out) const = 0;
  virtual void add_term_grad(std::size_t i, const ParamVector& x, double scale,
                             ParamVector& out) const = 0;
  virtual void add_terms_grad(std::span<const std::uint32_t> indices,
                              const ParamVector& x, double scale,
                              ParamVector& out) const;
  /// `out = grad log prior + sum_i grad log lik_i` (drift-scaled).
  virtual void full_grad_into(const ParamVector& x, ParamVector& out) const;
  /// `out = grad U_i(x)`; identical arithmetic on every call.
  virtual void split_term_grad_into(std::size_t i, const ParamVector& x,
                                    ParamVector& out) const;
  /// `out += scale * sum_{i in indices} (grad U_i(x) - anchor.col(i))`.
  /// Each summand uses the arithmetic of `split_term_grad_into`, so it is
  /// exactly zero when x equals the point the anchor was evaluated at.
  virtual void add_split_terms_diff(std::span<const std::uint32_t> indices,
                                    const ParamVector& x,
                                    const Eigen::MatrixXd& anchor, double scale,
                                    ParamVector& out) const;

  /// Throws ArgumentError on dimension mismatch or non-finite components.
  void check_point(const ParamVector& x) const;
  void check_index(std::size_t i) const;
  virtual double log_posterior_unchecked(const ParamVector& x) const;
};

/// theta ~ N(0, sigma_theta^2), y_i | theta ~ N(theta, sigma_y^2).
///
/// Works in the rescaled drift convention: the returned gradient is half the
/// log-posterior gradient, so full_grad(x) = -A x + B with
///   A = (1/2)(1/sigma_theta^2 + N/sigma_y^2),  B = sum(y) / (2 sigma_y^2),
/// and the Euler chain with unit noise is
///   theta' = (1 - A h) theta + B h + sqrt(h) xi.
class GaussianConjugateModel final : public PosteriorModel {
 public:
  GaussianConjugateModel(double sigma_theta_sq, double sigma_y_sq,
                         std::vector<double> data);

  int dim() const override { return 1; }
  std::size_t size() const override { return data_.size(); }
  double drift_scale() const override { return 0.5; }
  std::string kind() const override { return "gaussian"; }
  bool strongly_log_concave() const override { return true; }

  double sigma_theta_sq() const { return sigma_theta_sq_; }
  double sigma_y_sq() const { return sigma_y_sq_; }
  const std::vector<double>& data() const { return data_; }
  double sum_y() const { return sum_y_; }

  double A() const { return a_; }
  /// E B = sum(y) / (2 sigma_y^2).
  double mean_B() const { return mean_b_; }
  double posterior_mean() const { return posterior_mean_; }
  double posterior_variance() const { return posterior_variance_; }
  /// Unbiased empirical variance of the data (0 when N == 1).
  double data_variance() const { return data_variance_; }

  double log_prior(const ParamVector& x) const override;
  double log_lik_term(std::size_t i, const ParamVector& x) const override;
  double log_posterior_unchecked(const ParamVector& x) const override;

  Eigen::MatrixXd prior_hessian(const ParamVector& x) const override;
  Eigen::MatrixXd lik_term_hessian(std::size_t i,
                                   const ParamVector& x) const override;
  Eigen::MatrixXd full_hessian(const ParamVector& x) const override;

  std::optional<ParamVector> closed_form_mode() const override;
  std::optional<double> exact_stability_limit() const override {
    return 1.0 / a_;
  }

  void add_prior_grad(const ParamVector& x, double scale,
                      ParamVector& out) const override;
  void add_term_grad(std::size_t i, const ParamVector& x, double scale,
                     ParamVector& out) const override;
  void add_terms_grad(std::span<const std::uint32_t> indices,
                      const ParamVector& x, double scale,
                      ParamVector& out) const override;
  void full_grad_into(const ParamVector& x, ParamVector& out) const override;
  void split_term_grad_into(std::size_t i, const ParamVector& x,
                            ParamVector& out) const override;
  void add_split_terms_diff(std::span<const std::uint32_t> indices,
                            const ParamVector& x, const Eigen::MatrixXd& anchor,
                            double scale, ParamVector& out) const override;

 private:
  double split_term(std::size_t i, double x) const {
    return prior_share_ * x + (data_[i] - x) * lik_coef_;
  }

  double sigma_theta_sq_;
  double sigma_y_sq_;
  std::vector<double> data_;
  double sum_y_ = 0.0;
  double sum_y_sq_ = 0.0;
  double a_ = 0.0;
  double mean_b_ = 0.0;
  double posterior_mean_ = 0.0;
  double posterior_variance_ = 0.0;
  double data_variance_ = 0.0;
  double log_posterior_at_mean_ = 0.0;
  double prior_coef_ = 0.0;   // -1 / (2 sigma_theta^2)
  double lik_coef_ = 0.0;     // 1 / (2 sigma_y^2)
  double prior_share_ = 0.0;  // prior_coef_ / N
};

struct PosteriorMoments {
  double mean;
  double variance;
};

/// Conjugate posterior: mean = sum(y)/(sigma_y^2/sigma_theta^2 + N),
/// variance = (1/sigma_theta^2 + N/sigma_y^2)^{-1}.
PosteriorMoments exact_posterior(const GaussianConjugateModel& model);

/// y_i ~ N(theta_true, sigma_y^2) i.i.d.; row i depends on (seed, i) only,
/// so datasets of different N share their common prefix.
GaussianConjugateModel generate_gaussian_data(std::size_t N,
                                              double sigma_theta_sq,
                                              double sigma_y_sq,
                                              double theta_true,
                                              std::uint64_t seed);

/// Numerically stable logistic function.
double sigmoid(double z);
/// log(1 + exp(z)) without overflow.
double softplus(double z);

/// Bayesian logistic regression without intercept; prior w ~ N(0, sigma^2 I).
class LogisticRegressionModel final : public PosteriorModel {
 public:
  using RowMatrix =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  LogisticRegressionModel(RowMatrix covariates, Eigen::VectorXd labels,
                          double prior_variance);

  int dim() const override { return static_cast<int>(covariates_.cols()); }
  std::size_t size() const override {
    return static_cast<std::size_t>(covariates_.rows());
  }
  std::string kind() const override { return "logistic"; }
  bool strongly_log_concave() const override { return false; }

  const RowMatrix& covariates() const { return covariates_; }
  const Eigen::VectorXd& labels() const { return labels_; }
  double prior_variance() const { return prior_variance_; }

  double log_prior(const ParamVector& x) const override;
  double log_lik_term(std::size_t i, const ParamVector& x) const override;
  double log_posterior_unchecked(const ParamVector& x) const override;

  Eigen::MatrixXd prior_hessian(const ParamVector& x) const override;
  Eigen::MatrixXd lik_term_hessian(std::size_t i,
                                   const ParamVector& x) const override;
  Eigen::MatrixXd full_hessian(const ParamVector& x) const override;

  void add_prior_grad(const ParamVector& x, double scale,
                      ParamVector& out) const override;
  void add_term_grad(std::size_t i, const ParamVector& x, double scale,
                     ParamVector& out) const override;
  void add_terms_grad(std::span<const std::uint32_t> indices,
                      const ParamVector& x, double scale,
                      ParamVector& out) const override;
  void full_grad_into(const ParamVector& x, ParamVector& out) const override;

 private:
  RowMatrix covariates_;
  Eigen::VectorXd labels_;
  double prior_variance_;
};

/// Synthetic logistic-regression data:
///   mu_i ~ U[0,1], C_ij ~ U[-1,1], x^(n) ~ N(mu, C C^T),
///   w_j ~ N(0, sigma^2), y^(n) ~ Bernoulli(s(w^T x^(n))).
/// mu, C and w come from one stream and the rows from another, so every N
/// shares the same weights and data distribution. Also returns the true
/// weights and covariance for inspection.
struct LogisticDataset {
  LogisticRegressionModel model;
  Eigen::VectorXd true_weights;
  Eigen::VectorXd covariate_mean;
  Eigen::MatrixXd covariate_covariance;
};

LogisticDataset generate_logreg_data(int d, std::size_t N,
                                     double prior_variance, std::uint64_t seed);

}  // namespace sgldlab
