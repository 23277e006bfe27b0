#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sgldlab/gradient.hpp"
#include "sgldlab/models.hpp"

/// Closed-form moments of the Gaussian toy chain
///   theta_{k+1} = (1 - A h) theta_k + B_k h + sqrt(h) xi_k,
/// where B_k is the (possibly subsampled) data term with mean E B and
/// variance Var B. All quantities live in this convention (drift -A theta + B,
/// noise sqrt(h)); the sampler's `Convention::OrnsteinUhlenbeck` matches it.
namespace sgldlab::oracle {

struct OracleInputs {
  double A = 1.0;
  double mean_B = 0.0;
  double var_B = 0.0;
  double h = 0.0;
  double theta0_mean = 0.0;
  double theta0_var = 0.0;
  /// Step count M; empty means the stationary limit M -> infinity.
  std::optional<std::int64_t> steps;
  std::int64_t paths = 1;

  /// Throws ArgumentError unless A > 0, 0 < h < 1/A, var_B >= 0,
  /// theta0_var >= 0, M >= 0 and P >= 1.
  void validate() const;
};

/// (1/(4 sigma_y^4)) (N (N-n)/n) Var(y) with the unbiased empirical variance.
double var_b(const std::vector<double>& data, double sigma_y_sq, std::size_t n);

/// Var B of the given scheme on the model (0 for Full and ControlVariate).
double var_b(const GaussianConjugateModel& model, SchemeKind kind,
             std::size_t n);

/// Inputs for a chain on `model` started at a point.
OracleInputs inputs_for(const GaussianConjugateModel& model, SchemeKind kind,
                        std::size_t n, double h, double theta0,
                        std::optional<std::int64_t> steps,
                        std::int64_t paths = 1);

/// E theta_M = E B/A + (1 - A h)^M (theta0_mean - E B/A).
double mean(const OracleInputs& in);

/// (1 - A h)^M |theta0_mean - E B/A|.
double bias(const OracleInputs& in);

/// Var theta_M from the recursion Var_{k+1} = (1-Ah)^2 Var_k + h + h^2 Var B,
/// in closed form: q^M v0 + V_inf (1 - q^M) with q = (1-Ah)^2.
double variance(const OracleInputs& in);

/// The same recursion iterated step by step (M must be finite).
double variance_recursion(const OracleInputs& in);

/// (1 + h Var B)/(2A - A^2 h).
double stationary_variance(double A, double h, double var_B);

/// Inflation constant V = (1 + h Var B + (1-Ah)^2 theta0_var)/(2A - A^2 h).
double inflation_constant(const OracleInputs& in);

/// Alternative arrangement V (1 - (1-Ah)^{2M}); agrees with `variance` when
/// theta0_var = 0 and in the limit M -> infinity, not otherwise.
double printed_variance(const OracleInputs& in);

/// MSE of the P-path mean of theta_M: bias^2 + variance / P.
double mse(const OracleInputs& in);

/// (1-Ah)^{2M} ((theta0_mean - E B/A)^2 - V/P) + V/P, the arrangement built
/// on `inflation_constant`.
double printed_mse(const OracleInputs& in);

struct RrBias {
  double plain_bias;
  double rr_bias;
};

/// Stationary variance bias of the plain chain, V_inf(h) - 1/(2A), and of the
/// extrapolation 2 V_inf(h/2) - V_inf(h) - 1/(2A), with a fixed Var B.
RrBias rr_variance_bias(double A, double h, double var_B);

/// Same with Var B re-evaluated at each stepsize (batch tied to h).
RrBias rr_variance_bias(double A, double h,
                        const std::function<double(double)>& var_B_of_h);

/// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sgldlab::oracle
