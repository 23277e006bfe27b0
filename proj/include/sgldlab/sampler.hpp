#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgldlab/gradient.hpp"
#include "sgldlab/models.hpp"
#include "sgldlab/rng.hpp"

namespace sgldlab {

/// Noise convention of the Euler step, fixed for a whole run.
///   Langevin:          x + h g + sqrt(2h) xi, with g = grad log posterior
///   OrnsteinUhlenbeck: x + h g + sqrt(h) xi,  with g = half that gradient
/// Both discretise the same posterior; OU with step h is Langevin with h/2.
enum class Convention { Langevin, OrnsteinUhlenbeck };

std::string to_string(Convention c);
/// Accepts "langevin" or "ou".
Convention parse_convention(const std::string& name);

/// sqrt(2h) or sqrt(h).
double noise_scale(Convention c, double h);

/// Factor applied to the model's gradient so the drift matches the
/// convention. This is the only place the two conventions meet.
double drift_factor(const PosteriorModel& model, Convention c);

/// x + h grad + noise_scale(c, h) noise.
ParamVector euler_step(const ParamVector& x, const ParamVector& grad, double h,
                       const ParamVector& noise,
                       Convention c = Convention::Langevin);

struct InitialCondition {
  enum class Kind { Point, Gaussian };
  Kind kind = Kind::Point;
  ParamVector mean;  // the point, or the Gaussian mean
  double sd = 0.0;   // per-coordinate standard deviation (Gaussian only)

  static InitialCondition point(ParamVector x);
  static InitialCondition gaussian(ParamVector mean, double sd);
};

struct RunConfig {
  double h = 0.0;
  /// Integration time; K = ceil(T/h). Ignored when `steps` is set.
  std::optional<double> horizon;
  std::optional<std::int64_t> steps;
  std::int64_t paths = 1;
  std::uint64_t seed = 0;
  GradientScheme scheme = GradientScheme::full();
  InitialCondition initial;
  Convention convention = Convention::Langevin;
  bool allow_unstable = false;
  /// Richardson-Romberg pairs: drive the coarse chain with its own noise.
  bool rr_independent_noise = false;
  double divergence_bound = 1e10;
  int threads = 1;

  /// Number of Euler steps K. Throws ArgumentError on invalid h/T/K.
  std::int64_t step_count() const;
  /// K h.
  double realized_horizon() const { return static_cast<double>(step_count()) * h; }
};

struct PathOutput {
  ParamVector final_state;
  CostLedger ledger;
  std::int64_t path_id = 0;
};

struct StabilityVerdict {
  bool ok = true;
  /// Upper bound on h (exclusive).
  double limit = 0.0;
  /// N h >= 1.
  bool nh_warning = false;
  std::string message;
};

/// Exact bound when the model provides one (Gaussian: 1/A in either
/// convention); otherwise h < 2m/(c M^2) with audited m, M, where c is the
/// drift factor of the convention.
StabilityVerdict check_stability(const PosteriorModel& model, double h,
                                 Convention c = Convention::Langevin,
                                 std::uint64_t seed = 0);

/// One chain on stream (seed, path_id): initial draw first, then per step a
/// subset draw (if any) followed by the Gaussian noise.
/// Throws StabilityError when unstable and not overridden, DivergenceError
/// when a state is non-finite or exceeds `divergence_bound` in magnitude.
PathOutput run_path(const PosteriorModel& model, const RunConfig& config,
                    std::int64_t path_id);

/// Chains at h (K steps) and h/2 (2K steps) driven by one Brownian path:
/// the coarse increment is (xi' + xi'') / sqrt(2) from the two fine ones.
/// Subsets are drawn independently for each chain.
std::pair<PathOutput, PathOutput> run_rr_pair(const PosteriorModel& model,
                                              const RunConfig& config,
                                              std::int64_t path_id);

/// Paths 0..P-1; result order is by path id whatever the thread count.
std::vector<PathOutput> run_paths(const PosteriorModel& model,
                                  const RunConfig& config);
std::vector<std::pair<PathOutput, PathOutput>> run_rr_pairs(
    const PosteriorModel& model, const RunConfig& config);

/// Calls `job(i)` for i in [0, count) on `threads` workers.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& job);

CostLedger merge_ledgers(const std::vector<PathOutput>& outputs);

}  // namespace sgldlab
