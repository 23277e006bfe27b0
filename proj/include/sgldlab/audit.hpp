#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgldlab/models.hpp"

namespace sgldlab {

struct CurvatureBounds {
  /// Smallest one-sided quotient -<g(x)-g(y), x-y>/|x-y|^2 over sampled pairs.
  double m = 0.0;
  /// Largest Lipschitz quotient |g(x)-g(y)|/|x-y| over sampled pairs.
  double M = 0.0;
};

/// Empirical checks of the regularity conditions used by the error bounds.
///
/// All quantities are in the model's drift scale. The moment bounds use
/// m0 = (3/4) m; it is not stored here.
struct ModelAssumptionReport {
  double strong_convexity_lower = 0.0;
  double lipschitz_upper = 0.0;
  /// Max per-term Lipschitz quotient over the audited terms (M tilde).
  double per_term_lipschitz_max = 0.0;
  /// (1/N) (N/n) sum_{i in tau} |x*_i - x*|^2 for one random batch tau.
  double mode_scatter = 0.0;
  /// Caveats, e.g. curvature only measured near the mode.
  std::vector<std::string> flags;
};

/// Points are drawn around the posterior mode at three posterior widths;
/// m and M come from all pairs of `sample_points` points.
CurvatureBounds estimate_curvature_bounds(const PosteriorModel& model,
                                          int sample_points,
                                          std::uint64_t seed);

/// `batch` is the number of terms used for M tilde and the mode scatter
/// (clamped to N). Throws ArgumentError if sample_points < 2 or batch < 1.
ModelAssumptionReport audit_assumptions(const PosteriorModel& model,
                                        int sample_points, int batch,
                                        std::uint64_t seed);

}  // namespace sgldlab
