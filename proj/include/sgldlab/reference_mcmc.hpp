#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgldlab/models.hpp"

namespace sgldlab {

struct MhConfig {
  std::int64_t steps = 0;
  std::int64_t burn_in = 0;
  std::int64_t thin = 1;
  /// Fixed proposal scale; empty means tuned during burn-in.
  std::optional<double> proposal_scale;
  std::uint64_t seed = 0;
  /// Shape proposals by the Laplace covariance at the mode instead of the
  /// identity. The scale then multiplies that covariance's square root.
  bool precondition = false;
  /// Starting point; the posterior mode when empty.
  std::optional<ParamVector> initial;

  /// Throws ArgumentError unless 0 <= burn_in < steps and thin >= 1.
  void validate() const;
  /// 2e6 steps, 1e5 burn-in, thin 10, preconditioned.
  static MhConfig logistic_default(std::uint64_t seed);
};

struct MhResult {
  std::vector<ParamVector> samples;
  /// Post-burn-in acceptance rate.
  double acceptance_rate = 0.0;
  double tuned_scale = 0.0;
  /// Batch-means ESS per coordinate of the thinned samples.
  std::vector<double> ess;
  std::vector<std::string> warnings;

  ParamVector mean() const;
  /// Per-coordinate standard deviation (population form).
  ParamVector stddev() const;
  double min_ess() const;
};

/// Gaussian random-walk Metropolis-Hastings. While tuning, the scale is
/// multiplied by 1.1 or 0.9 after every 100-step window whose acceptance is
/// above 0.4 or below 0.2; it is frozen after burn-in. A final acceptance
/// outside [0.05, 0.8] adds a warning.
MhResult mh_sample(const PosteriorModel& model, const MhConfig& config);

/// Batch-means effective sample size of a scalar series (sqrt(n) batches).
double batch_means_ess(const std::vector<double>& series);

}  // namespace sgldlab
