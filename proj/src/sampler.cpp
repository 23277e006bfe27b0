#include "sgldlab/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "sgldlab/audit.hpp"
#include "sgldlab/errors.hpp"

namespace sgldlab {

std::string to_string(Convention c) {
  return c == Convention::Langevin ? "langevin" : "ou";
}

Convention parse_convention(const std::string& name) {
  if (name == "langevin") return Convention::Langevin;
  if (name == "ou") return Convention::OrnsteinUhlenbeck;
  throw ArgumentError("unknown convention '" + name + "' (expected langevin|ou)");
}

double noise_scale(Convention c, double h) {
  return c == Convention::Langevin ? std::sqrt(2.0 * h) : std::sqrt(h);
}

double drift_factor(const PosteriorModel& model, Convention c) {
  const double target = c == Convention::Langevin ? 1.0 : 0.5;
  return target / model.drift_scale();
}

ParamVector euler_step(const ParamVector& x, const ParamVector& grad, double h,
                       const ParamVector& noise, Convention c) {
  if (grad.size() != x.size() || noise.size() != x.size())
    throw ArgumentError("euler_step: dimension mismatch");
  if (!(h > 0.0)) throw ArgumentError("euler_step: h must be > 0");
  return x + h * grad + noise_scale(c, h) * noise;
}

InitialCondition InitialCondition::point(ParamVector x) {
  InitialCondition ic;
  ic.kind = Kind::Point;
  ic.mean = std::move(x);
  return ic;
}

InitialCondition InitialCondition::gaussian(ParamVector mean, double sd) {
  if (!(sd >= 0.0)) throw ArgumentError("gaussian initial condition: sd < 0");
  InitialCondition ic;
  ic.kind = Kind::Gaussian;
  ic.mean = std::move(mean);
  ic.sd = sd;
  return ic;
}

std::int64_t RunConfig::step_count() const {
  if (!(h > 0.0) || !std::isfinite(h))
    throw ArgumentError("RunConfig: h must be finite and > 0");
  if (steps) {
    if (*steps < 1) throw ArgumentError("RunConfig: steps must be >= 1");
    return *steps;
  }
  if (!horizon) throw ArgumentError("RunConfig: need a horizon T or a step count");
  if (!(*horizon > 0.0) || !std::isfinite(*horizon))
    throw ArgumentError("RunConfig: T must be finite and > 0");
  const double ratio = *horizon / h;
  // Treat T/h within rounding of an integer as that integer.
  const double nearest = std::round(ratio);
  const double k = std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)
                       ? nearest
                       : std::ceil(ratio);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(k));
}

StabilityVerdict check_stability(const PosteriorModel& model, double h,
                                 Convention c, std::uint64_t seed) {
  if (!(h > 0.0)) throw ArgumentError("check_stability: h must be > 0");
  StabilityVerdict v;
  if (auto exact = model.exact_stability_limit()) {
    v.limit = *exact;
  } else {
    const CurvatureBounds b = estimate_curvature_bounds(model, 8, seed);
    const double f = drift_factor(model, c);
    v.limit = b.M > 0.0 ? 2.0 * b.m / (f * b.M * b.M)
                        : std::numeric_limits<double>::infinity();
  }
  v.ok = h < v.limit;
  v.nh_warning = static_cast<double>(model.size()) * h >= 1.0;
  if (!v.ok)
    v.message = "stepsize " + std::to_string(h) + " >= stability limit " +
                std::to_string(v.limit);
  else if (v.nh_warning)
    v.message = "N h >= 1: explicit Euler step is large relative to 1/N";
  return v;
}

namespace {

void require_stable(const PosteriorModel& model, const RunConfig& config) {
  if (config.allow_unstable) return;
  const StabilityVerdict v =
      check_stability(model, config.h, config.convention, config.seed);
  if (!v.ok) throw StabilityError(v.message, v.limit);
}

ParamVector initial_state(const PosteriorModel& model,
                          const InitialCondition& ic, RngStream& rng) {
  ParamVector x = ic.mean.size() == 0 ? ParamVector::Zero(model.dim()) : ic.mean;
  if (x.size() != model.dim())
    throw ArgumentError("initial condition has the wrong dimension");
  if (ic.kind == InitialCondition::Kind::Gaussian && ic.sd > 0.0) {
    ParamVector z(model.dim());
    gaussian_noise(rng, z);
    x += ic.sd * z;
  }
  if (!x.allFinite()) throw ArgumentError("initial condition is not finite");
  return x;
}

// One chain's mutable state and per-step update.
struct Chain {
  Chain(const PosteriorModel& model, const RunConfig& config, double h)
      : est(config.scheme, model),
        h(h),
        drift(h * drift_factor(model, config.convention)),
        diffusion(noise_scale(config.convention, h)),
        bound(config.divergence_bound),
        grad(model.dim()),
        noise(model.dim()) {}

  void step(RngStream& rng) {
    est.estimate(x, rng, ledger, grad);
    gaussian_noise(rng, noise);
    advance();
  }
  void step_with_noise(RngStream& rng, const ParamVector& xi) {
    est.estimate(x, rng, ledger, grad);
    noise = xi;
    advance();
  }
  void advance() {
    x += drift * grad + diffusion * noise;
    ++ledger.steps;
    ledger.noise_draws += static_cast<std::uint64_t>(x.size());
  }
  void check(std::int64_t path_id, std::int64_t k) const {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > bound)
      throw DivergenceError("chain " + std::to_string(path_id) +
                                " diverged at step " + std::to_string(k),
                            path_id, k);
  }

  GradientEstimator est;
  double h, drift, diffusion, bound;
  ParamVector x, grad, noise;
  CostLedger ledger;
};

PathOutput run_path_unchecked(const PosteriorModel& model,
                              const RunConfig& config, std::int64_t path_id) {
  const std::int64_t K = config.step_count();
  RngStream rng(config.seed, static_cast<std::uint64_t>(path_id));
  Chain chain(model, config, config.h);
  chain.x = initial_state(model, config.initial, rng);
  for (std::int64_t k = 1; k <= K; ++k) {
    chain.step(rng);
    chain.check(path_id, k);
  }
  return PathOutput{chain.x, chain.ledger, path_id};
}

std::pair<PathOutput, PathOutput> run_rr_pair_unchecked(
    const PosteriorModel& model, const RunConfig& config, std::int64_t path_id) {
  const std::int64_t K = config.step_count();
  RngStream rng(config.seed, static_cast<std::uint64_t>(path_id));
  Chain coarse(model, config, config.h);
  Chain fine(model, config, 0.5 * config.h);
  coarse.x = initial_state(model, config.initial, rng);
  fine.x = coarse.x;
  ParamVector xi1(model.dim()), xi2(model.dim()), xic(model.dim());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::int64_t k = 1; k <= K; ++k) {
    fine.est.estimate(fine.x, rng, fine.ledger, fine.grad);
    gaussian_noise(rng, xi1);
    fine.noise = xi1;
    fine.advance();
    fine.check(path_id, 2 * k - 1);
    fine.est.estimate(fine.x, rng, fine.ledger, fine.grad);
    gaussian_noise(rng, xi2);
    fine.noise = xi2;
    fine.advance();
    fine.check(path_id, 2 * k);
    if (config.rr_independent_noise) {
      coarse.step(rng);
    } else {
      xic = inv_sqrt2 * (xi1 + xi2);
      coarse.step_with_noise(rng, xic);
    }
    coarse.check(path_id, k);
  }
  return {PathOutput{coarse.x, coarse.ledger, path_id},
          PathOutput{fine.x, fine.ledger, path_id}};
}

}  // namespace

PathOutput run_path(const PosteriorModel& model, const RunConfig& config,
                    std::int64_t path_id) {
  require_stable(model, config);
  return run_path_unchecked(model, config, path_id);
}

std::pair<PathOutput, PathOutput> run_rr_pair(const PosteriorModel& model,
                                              const RunConfig& config,
                                              std::int64_t path_id) {
  require_stable(model, config);
  return run_rr_pair_unchecked(model, config, path_id);
}

void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& job) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<std::int64_t>(workers, count));
  std::atomic<std::int64_t> next{0};
  std::mutex error_mutex;
  std::int64_t error_index = count;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::int64_t i; (i = next.fetch_add(1)) < count;) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

std::vector<PathOutput> run_paths(const PosteriorModel& model,
                                  const RunConfig& config) {
  if (config.paths < 1) throw ArgumentError("run_paths: paths must be >= 1");
  config.step_count();
  require_stable(model, config);
  std::vector<PathOutput> out(static_cast<std::size_t>(config.paths));
  parallel_for(config.paths, config.threads, [&](std::int64_t p) {
    out[static_cast<std::size_t>(p)] = run_path_unchecked(model, config, p);
  });
  return out;
}

std::vector<std::pair<PathOutput, PathOutput>> run_rr_pairs(
    const PosteriorModel& model, const RunConfig& config) {
  if (config.paths < 1) throw ArgumentError("run_rr_pairs: paths must be >= 1");
  config.step_count();
  require_stable(model, config);
  std::vector<std::pair<PathOutput, PathOutput>> out(
      static_cast<std::size_t>(config.paths));
  parallel_for(config.paths, config.threads, [&](std::int64_t p) {
    out[static_cast<std::size_t>(p)] = run_rr_pair_unchecked(model, config, p);
  });
  return out;
}

CostLedger merge_ledgers(const std::vector<PathOutput>& outputs) {
  CostLedger total;
  for (const auto& o : outputs) total += o.ledger;
  return total;
}

}  // namespace sgldlab
