#include "sgldlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sgldlab/errors.hpp"

namespace sgldlab {

Functional Functional::coordinate(int j) {
  if (j < 0) throw ArgumentError("coordinate functional: index must be >= 0");
  Functional f;
  f.kind_ = Kind::Coordinate;
  f.index_ = j;
  f.name_ = "coord" + std::to_string(j);
  f.lipschitz_ = 1.0;
  return f;
}

Functional Functional::abs_sin_centered(double center) {
  Functional f;
  f.kind_ = Kind::AbsSinCentered;
  f.center_ = center;
  f.name_ = "abs_sin";
  f.lipschitz_ = 1.0;
  return f;
}

Functional Functional::squared_coordinate(int j) {
  if (j < 0) throw ArgumentError("squared functional: index must be >= 0");
  Functional f;
  f.kind_ = Kind::SquaredCoordinate;
  f.index_ = j;
  f.name_ = "sq" + std::to_string(j);
  return f;
}

Functional Functional::custom(std::string tag,
                              std::function<double(const ParamVector&)> fn,
                              std::optional<double> lipschitz) {
  if (!fn) throw ArgumentError("custom functional: empty callable");
  Functional f;
  f.kind_ = Kind::Custom;
  f.name_ = std::move(tag);
  f.custom_ = std::move(fn);
  f.lipschitz_ = lipschitz;
  return f;
}

double Functional::operator()(const ParamVector& x) const {
  switch (kind_) {
    case Kind::Coordinate:
      if (index_ >= x.size()) throw ArgumentError("functional index out of range");
      return x[index_];
    case Kind::SquaredCoordinate:
      if (index_ >= x.size()) throw ArgumentError("functional index out of range");
      return x[index_] * x[index_];
    case Kind::AbsSinCentered: {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < x.size(); ++j)
        acc += std::abs(std::sin(x[j]) - center_);
      return acc;
    }
    case Kind::Custom:
      return custom_(x);
  }
  return 0.0;
}

double stable_sum(const std::vector<double>& values) {
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

namespace {

std::vector<double> evaluate(const Functional& f,
                             const std::vector<ParamVector>& states) {
  std::vector<double> v;
  v.reserve(states.size());
  for (const auto& x : states) v.push_back(f(x));
  return v;
}

std::vector<ParamVector> finals(const std::vector<PathOutput>& outputs) {
  std::vector<ParamVector> s;
  s.reserve(outputs.size());
  for (const auto& o : outputs) s.push_back(o.final_state);
  return s;
}

double mean_of(const std::vector<double>& v) {
  return stable_sum(v) / static_cast<double>(v.size());
}

}  // namespace

double independent_paths_estimate(const Functional& f,
                                  const std::vector<ParamVector>& states) {
  if (states.empty())
    throw ArgumentError("independent_paths_estimate: no path outputs");
  return mean_of(evaluate(f, states));
}

double independent_paths_estimate(const Functional& f,
                                  const std::vector<PathOutput>& outputs) {
  return independent_paths_estimate(f, finals(outputs));
}

double posterior_std_estimate(const std::vector<ParamVector>& states,
                              const Functional& f) {
  if (states.size() < 2)
    throw ArgumentError("posterior_std_estimate: need at least 2 paths");
  const auto v = evaluate(f, states);
  std::vector<double> sq(v.size());
  std::transform(v.begin(), v.end(), sq.begin(), [](double a) { return a * a; });
  const double m = mean_of(v);
  return std::sqrt(std::max(0.0, mean_of(sq) - m * m));
}

double posterior_std_estimate(const std::vector<PathOutput>& outputs,
                              const Functional& f) {
  return posterior_std_estimate(finals(outputs), f);
}

MseReport mse_report(double reference, const std::vector<double>& replicates) {
  if (replicates.empty()) throw ArgumentError("mse_report: no replicates");
  if (!std::isfinite(reference)) throw ArgumentError("mse_report: reference not finite");
  MseReport r;
  const double m = mean_of(replicates);
  r.bias_sq = (m - reference) * (m - reference);
  if (replicates.size() >= 2) {
    std::vector<double> dev(replicates.size());
    for (std::size_t i = 0; i < replicates.size(); ++i)
      dev[i] = (replicates[i] - m) * (replicates[i] - m);
    r.variance = stable_sum(dev) / static_cast<double>(replicates.size() - 1);
  }
  r.mse = r.bias_sq + r.variance;
  r.rmse = std::sqrt(r.mse);
  return r;
}

double bootstrap_se(const std::vector<double>& samples, int B, RngStream& rng,
                    const std::function<double(const std::vector<double>&)>& stat) {
  if (samples.size() < 2) throw ArgumentError("bootstrap_se: need >= 2 samples");
  if (B < 100) throw ArgumentError("bootstrap_se: need B >= 100");
  std::vector<double> resample(samples.size());
  std::vector<double> stats(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) {
    for (auto& r : resample) r = samples[uniform_below(rng, samples.size())];
    stats[static_cast<std::size_t>(b)] = stat(resample);
  }
  const double m = mean_of(stats);
  std::vector<double> dev(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i)
    dev[i] = (stats[i] - m) * (stats[i] - m);
  return std::sqrt(stable_sum(dev) / static_cast<double>(B - 1));
}

double bootstrap_se(const std::vector<double>& samples, int B, RngStream& rng) {
  return bootstrap_se(samples, B, rng, mean_of);
}

EstimateReport make_estimate_report(const Functional& f,
                                    const std::vector<PathOutput>& outputs,
                                    const RunConfig& config, int B) {
  EstimateReport r;
  const auto v = evaluate(f, finals(outputs));
  r.point_estimate = mean_of(v);
  RngStream rng(config.seed, stream_ids::kBootstrap);
  r.bootstrap_se = v.size() >= 2 ? bootstrap_se(v, B, rng) : 0.0;
  r.P = static_cast<std::int64_t>(outputs.size());
  r.total_cost = merge_ledgers(outputs).term_evals;
  std::ostringstream echo;
  echo << "h=" << config.h << " K=" << config.step_count()
       << " P=" << config.paths << " seed=" << config.seed
       << " scheme=" << to_string(config.scheme.kind())
       << " n=" << config.scheme.batch()
       << " convention=" << to_string(config.convention);
  r.config_echo = echo.str();
  return r;
}

namespace {

double integrate_pieces(const std::function<double(double)>& g,
                        std::vector<double> cuts) {
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] > cuts[k])) continue;
    acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        g, cuts[k], cuts[k + 1], 15, 1e-13);
  }
  return acc;
}

}  // namespace

double normal_expectation(const std::function<double(double)>& f, double mean,
                          double variance) {
  if (!(variance >= 0.0)) throw ArgumentError("normal_expectation: variance < 0");
  if (variance == 0.0) return f(mean);
  const double sd = std::sqrt(variance);
  const double norm = 1.0 / (sd * std::sqrt(2.0 * std::numbers::pi));
  auto g = [&](double x) {
    const double z = (x - mean) / sd;
    return f(x) * norm * std::exp(-0.5 * z * z);
  };
  std::vector<double> cuts;
  for (int k = -12; k <= 12; k += 2) cuts.push_back(mean + k * sd);
  return integrate_pieces(g, cuts);
}

double abs_sin_expectation(double center, double mean, double variance) {
  auto f = [center](double x) { return std::abs(std::sin(x) - center); };
  if (variance == 0.0) return f(mean);
  const double sd = std::sqrt(variance);
  const double lo = mean - 12.0 * sd, hi = mean + 12.0 * sd;
  const double norm = 1.0 / (sd * std::sqrt(2.0 * std::numbers::pi));
  auto g = [&](double x) {
    const double z = (x - mean) / sd;
    return f(x) * norm * std::exp(-0.5 * z * z);
  };
  std::vector<double> cuts;
  for (int k = -12; k <= 12; k += 2) cuts.push_back(mean + k * sd);
  if (std::abs(center) <= 1.0) {
    const double base = std::asin(center);
    const double two_pi = 2.0 * std::numbers::pi;
    for (double root : {base, std::numbers::pi - base}) {
      const double first = root + two_pi * std::ceil((lo - root) / two_pi);
      for (double r = first; r < hi; r += two_pi) cuts.push_back(r);
    }
  }
  return integrate_pieces(g, cuts);
}

}  // namespace sgldlab
