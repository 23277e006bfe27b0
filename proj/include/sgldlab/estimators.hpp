#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgldlab/gradient.hpp"
#include "sgldlab/models.hpp"
#include "sgldlab/rng.hpp"
#include "sgldlab/sampler.hpp"

namespace sgldlab {

/// Real-valued test function of the chain state.
///
/// Coordinate and squared-coordinate act on one coordinate. abs_sin_centered
/// is |sin(x_j) - mu| summed over coordinates (1-Lipschitz per coordinate).
class Functional {
 public:
  enum class Kind { Coordinate, AbsSinCentered, SquaredCoordinate, Custom };

  static Functional coordinate(int j);
  static Functional abs_sin_centered(double center);
  static Functional squared_coordinate(int j);
  static Functional custom(std::string tag,
                           std::function<double(const ParamVector&)> f,
                           std::optional<double> lipschitz = std::nullopt);

  double operator()(const ParamVector& x) const;

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  /// Lipschitz constant per coordinate when known.
  std::optional<double> lipschitz_bound() const { return lipschitz_; }
  int index() const { return index_; }
  double center() const { return center_; }

 private:
  Kind kind_ = Kind::Coordinate;
  int index_ = 0;
  double center_ = 0.0;
  std::string name_;
  std::optional<double> lipschitz_;
  std::function<double(const ParamVector&)> custom_;
};

/// Compensated (Neumaier) sum.
double stable_sum(const std::vector<double>& values);

/// (1/P) sum_p f(theta_p). Throws ArgumentError on an empty list.
double independent_paths_estimate(const Functional& f,
                                  const std::vector<PathOutput>& outputs);
double independent_paths_estimate(const Functional& f,
                                  const std::vector<ParamVector>& states);

/// sqrt((1/P) sum f^2 - ((1/P) sum f)^2), clamped at 0. Needs P >= 2.
double posterior_std_estimate(const std::vector<PathOutput>& outputs,
                              const Functional& f);
double posterior_std_estimate(const std::vector<ParamVector>& states,
                              const Functional& f);

struct MseReport {
  double bias_sq = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
};

/// bias_sq = (mean - reference)^2, variance = unbiased sample variance of the
/// replicates (0 for a single replicate), mse = bias_sq + variance.
MseReport mse_report(double reference, const std::vector<double>& replicates);

/// Standard deviation over B resamples (with replacement, same size) of the
/// sample mean. Needs >= 2 samples and B >= 100.
double bootstrap_se(const std::vector<double>& samples, int B, RngStream& rng);

/// Bootstrap SE of an arbitrary statistic of the samples.
double bootstrap_se(const std::vector<double>& samples, int B, RngStream& rng,
                    const std::function<double(const std::vector<double>&)>& stat);

struct EstimateReport {
  double point_estimate = 0.0;
  double bootstrap_se = 0.0;
  std::int64_t P = 0;
  std::uint64_t total_cost = 0;
  std::string config_echo;
};

/// Point estimate, bootstrap SE (stream kBootstrap of config.seed) and
/// ledger total for a finished run.
EstimateReport make_estimate_report(const Functional& f,
                                    const std::vector<PathOutput>& outputs,
                                    const RunConfig& config, int B = 1000);

/// E f(Z) for Z ~ N(mean, variance), by adaptive Gauss-Kronrod quadrature.
double normal_expectation(const std::function<double(double)>& f, double mean,
                          double variance);

/// E |sin Z - center| for Z ~ N(mean, variance).
double abs_sin_expectation(double center, double mean, double variance);

}  // namespace sgldlab
