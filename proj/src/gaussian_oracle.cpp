#include "sgldlab/gaussian_oracle.hpp"

#include <cmath>

#include "sgldlab/errors.hpp"

namespace sgldlab::oracle {

void OracleInputs::validate() const {
  if (!(A > 0.0) || !std::isfinite(A)) throw ArgumentError("oracle: A must be > 0");
  if (!(h > 0.0) || !(A * h < 1.0))
    throw ArgumentError("oracle: need 0 < h < 1/A");
  if (!(var_B >= 0.0)) throw ArgumentError("oracle: var_B must be >= 0");
  if (!(theta0_var >= 0.0)) throw ArgumentError("oracle: theta0_var must be >= 0");
  if (steps && *steps < 0) throw ArgumentError("oracle: M must be >= 0");
  if (paths < 1) throw ArgumentError("oracle: P must be >= 1");
}

double var_b(const std::vector<double>& data, double sigma_y_sq, std::size_t n) {
  const std::size_t N = data.size();
  if (n < 1 || n > N) throw ArgumentError("var_b: need 1 <= n <= N");
  if (!(sigma_y_sq > 0.0)) throw ArgumentError("var_b: sigma_y_sq must be > 0");
  if (n == N) return 0.0;
  if (N < 2) throw ArgumentError("var_b: Var(y) undefined for N < 2");
  double mean = 0.0;
  for (double y : data) mean += y;
  mean /= static_cast<double>(N);
  double ss = 0.0;
  for (double y : data) ss += (y - mean) * (y - mean);
  const double var_y = ss / static_cast<double>(N - 1);
  const double Nd = static_cast<double>(N), nd = static_cast<double>(n);
  return Nd * (Nd - nd) / nd * var_y / (4.0 * sigma_y_sq * sigma_y_sq);
}

double var_b(const GaussianConjugateModel& model, SchemeKind kind,
             std::size_t n) {
  if (kind != SchemeKind::NaiveSubsample) return 0.0;
  return var_b(model.data(), model.sigma_y_sq(), n);
}

OracleInputs inputs_for(const GaussianConjugateModel& model, SchemeKind kind,
                        std::size_t n, double h, double theta0,
                        std::optional<std::int64_t> steps, std::int64_t paths) {
  OracleInputs in;
  in.A = model.A();
  in.mean_B = model.mean_B();
  in.var_B = var_b(model, kind, kind == SchemeKind::Full ? model.size() : n);
  in.h = h;
  in.theta0_mean = theta0;
  in.theta0_var = 0.0;
  in.steps = steps;
  in.paths = paths;
  in.validate();
  return in;
}

namespace {

double contraction_power(const OracleInputs& in, double exponent_per_step) {
  if (!in.steps) return 0.0;
  return std::pow(1.0 - in.A * in.h,
                  exponent_per_step * static_cast<double>(*in.steps));
}

}  // namespace

double mean(const OracleInputs& in) {
  in.validate();
  const double target = in.mean_B / in.A;
  return target + contraction_power(in, 1.0) * (in.theta0_mean - target);
}

double bias(const OracleInputs& in) {
  in.validate();
  return contraction_power(in, 1.0) * std::abs(in.theta0_mean - in.mean_B / in.A);
}

double stationary_variance(double A, double h, double var_B) {
  return (1.0 + h * var_B) / (2.0 * A - A * A * h);
}

double variance(const OracleInputs& in) {
  in.validate();
  const double q = contraction_power(in, 2.0);
  const double v_inf = stationary_variance(in.A, in.h, in.var_B);
  return q * in.theta0_var + v_inf * (1.0 - q);
}

double variance_recursion(const OracleInputs& in) {
  in.validate();
  if (!in.steps) throw ArgumentError("variance_recursion: needs a finite M");
  const double q = (1.0 - in.A * in.h) * (1.0 - in.A * in.h);
  const double inject = in.h + in.h * in.h * in.var_B;
  double v = in.theta0_var;
  for (std::int64_t k = 0; k < *in.steps; ++k) v = q * v + inject;
  return v;
}

double inflation_constant(const OracleInputs& in) {
  in.validate();
  const double r = 1.0 - in.A * in.h;
  return (1.0 + in.h * in.var_B + r * r * in.theta0_var) /
         (2.0 * in.A - in.A * in.A * in.h);
}

double printed_variance(const OracleInputs& in) {
  return inflation_constant(in) * (1.0 - contraction_power(in, 2.0));
}

double mse(const OracleInputs& in) {
  const double b = bias(in);
  return b * b + variance(in) / static_cast<double>(in.paths);
}

double printed_mse(const OracleInputs& in) {
  const double v = inflation_constant(in) / static_cast<double>(in.paths);
  const double d = in.theta0_mean - in.mean_B / in.A;
  const double q = contraction_power(in, 2.0);
  return q * (d * d - v) + v;
}

RrBias rr_variance_bias(double A, double h,
                        const std::function<double(double)>& var_B_of_h) {
  if (!(A > 0.0) || !(h > 0.0) || !(A * h < 1.0))
    throw ArgumentError("rr_variance_bias: need A > 0 and 0 < h < 1/A");
  const double target = 1.0 / (2.0 * A);
  const double coarse = stationary_variance(A, h, var_B_of_h(h));
  const double fine = stationary_variance(A, 0.5 * h, var_B_of_h(0.5 * h));
  return {coarse - target, 2.0 * fine - coarse - target};
}

RrBias rr_variance_bias(double A, double h, double var_B) {
  if (!(var_B >= 0.0)) throw ArgumentError("rr_variance_bias: var_B must be >= 0");
  return rr_variance_bias(A, h, [var_B](double) { return var_B; });
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ArgumentError("loglog_slope: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(std::abs(x[i])), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace sgldlab::oracle
