#include "sgldlab/reference_mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "sgldlab/errors.hpp"
#include "sgldlab/mode.hpp"
#include "sgldlab/rng.hpp"

namespace sgldlab {

void MhConfig::validate() const {
  if (steps < 1) throw ArgumentError("MhConfig: steps must be >= 1");
  if (burn_in < 0 || burn_in >= steps)
    throw ArgumentError("MhConfig: need 0 <= burn_in < steps");
  if (thin < 1) throw ArgumentError("MhConfig: thin must be >= 1");
  if (proposal_scale && !(*proposal_scale > 0.0))
    throw ArgumentError("MhConfig: proposal_scale must be > 0");
}

MhConfig MhConfig::logistic_default(std::uint64_t seed) {
  MhConfig c;
  c.steps = 2'000'000;
  c.burn_in = 100'000;
  c.thin = 10;
  c.seed = seed;
  c.precondition = true;
  return c;
}

ParamVector MhResult::mean() const {
  if (samples.empty()) throw ArgumentError("MhResult: no samples");
  ParamVector m = ParamVector::Zero(samples.front().size());
  for (const auto& s : samples) m += s;
  return m / static_cast<double>(samples.size());
}

ParamVector MhResult::stddev() const {
  const ParamVector m = mean();
  ParamVector v = ParamVector::Zero(m.size());
  for (const auto& s : samples) v += (s - m).cwiseAbs2();
  return (v / static_cast<double>(samples.size())).cwiseSqrt();
}

double MhResult::min_ess() const {
  if (ess.empty()) return 0.0;
  return *std::min_element(ess.begin(), ess.end());
}

double batch_means_ess(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 4) return static_cast<double>(n);
  const std::size_t b = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  const std::size_t batches = n / b;
  const std::size_t used = batches * b;
  double mean = 0.0;
  for (std::size_t i = 0; i < used; ++i) mean += series[i];
  mean /= static_cast<double>(used);
  double var = 0.0;
  for (std::size_t i = 0; i < used; ++i) var += (series[i] - mean) * (series[i] - mean);
  var /= static_cast<double>(used - 1);
  double bvar = 0.0;
  for (std::size_t k = 0; k < batches; ++k) {
    double bm = 0.0;
    for (std::size_t i = k * b; i < (k + 1) * b; ++i) bm += series[i];
    bm /= static_cast<double>(b);
    bvar += (bm - mean) * (bm - mean);
  }
  bvar /= static_cast<double>(batches - 1);
  const double sigma_sq = static_cast<double>(b) * bvar;
  if (!(sigma_sq > 0.0)) return static_cast<double>(used);
  return static_cast<double>(used) * var / sigma_sq;
}

MhResult mh_sample(const PosteriorModel& model, const MhConfig& config) {
  config.validate();
  const int d = model.dim();
  ParamVector x;
  std::optional<ParamVector> mode;
  if (config.initial) {
    x = *config.initial;
    model.check_point(x);
  } else {
    mode = find_mode(model);
    x = *mode;
  }

  Eigen::MatrixXd shape = Eigen::MatrixXd::Identity(d, d);
  if (config.precondition) {
    if (!mode) mode = find_mode(model);
    const Eigen::MatrixXd precision = -model.full_hessian(*mode) / model.drift_scale();
    Eigen::LLT<Eigen::MatrixXd> llt(precision.llt().solve(
        Eigen::MatrixXd::Identity(precision.rows(), precision.cols())));
    if (llt.info() == Eigen::Success) shape = llt.matrixL();
  }
  double scale = config.proposal_scale.value_or(2.38 / std::sqrt(static_cast<double>(d)));
  if (!config.precondition && !config.proposal_scale) {
    // Start near the posterior width rather than at unit scale.
    const Eigen::MatrixXd neg_h = -model.full_hessian(x) / model.drift_scale();
    const double top = neg_h.diagonal().maxCoeff();
    if (top > 0.0 && std::isfinite(top)) scale /= std::sqrt(top);
  }
  const bool tune = !config.proposal_scale;

  RngStream rng(config.seed, stream_ids::kReferenceMcmc);
  double logp = model.log_posterior_unchecked(x);
  ParamVector z(d), proposal(d);
  std::int64_t window_accept = 0, window_count = 0;
  std::int64_t post_accept = 0, post_count = 0;

  MhResult result;
  result.samples.reserve(static_cast<std::size_t>((config.steps - config.burn_in) / config.thin + 1));
  for (std::int64_t t = 0; t < config.steps; ++t) {
    gaussian_noise(rng, z);
    proposal = x + scale * (shape * z);
    const double lp = model.log_posterior_unchecked(proposal);
    const double u = uniform01(rng);
    const bool accept = std::isfinite(lp) && std::log(u) < lp - logp;
    if (accept) {
      x = proposal;
      logp = lp;
    }
    if (t < config.burn_in) {
      window_accept += accept;
      if (++window_count == 100) {
        if (tune) {
          const double rate = static_cast<double>(window_accept) / 100.0;
          if (rate > 0.4) scale *= 1.1;
          else if (rate < 0.2) scale *= 0.9;
        }
        window_accept = window_count = 0;
      }
      continue;
    }
    post_accept += accept;
    ++post_count;
    if ((t - config.burn_in) % config.thin == 0) result.samples.push_back(x);
  }

  result.acceptance_rate = static_cast<double>(post_accept) / static_cast<double>(post_count);
  result.tuned_scale = scale;
  for (int j = 0; j < d; ++j) {
    std::vector<double> series;
    series.reserve(result.samples.size());
    for (const auto& s : result.samples) series.push_back(s[j]);
    result.ess.push_back(batch_means_ess(series));
  }
  if (result.acceptance_rate < 0.05 || result.acceptance_rate > 0.8)
    result.warnings.push_back("proposal tuning failed: acceptance rate " +
                              std::to_string(result.acceptance_rate) +
                              " outside [0.05, 0.8]");
  return result;
}

}  // namespace sgldlab
