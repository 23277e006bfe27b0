#include "sgldlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "sgldlab/audit.hpp"
#include "sgldlab/errors.hpp"
#include "sgldlab/estimators.hpp"
#include "sgldlab/gaussian_oracle.hpp"
#include "sgldlab/mode.hpp"
#include "sgldlab/models.hpp"
#include "sgldlab/reference_mcmc.hpp"
#include "sgldlab/subsample.hpp"

namespace sgldlab {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double epsilon_for(std::int64_t N) { return 1.0 / std::sqrt(static_cast<double>(N)); }

GaussianConjugateModel make_gaussian(std::int64_t N, const GaussianDataParams& d) {
  return generate_gaussian_data(static_cast<std::size_t>(N), d.sigma_theta_sq,
                                d.sigma_y_sq, d.theta_true, d.data_seed);
}

GradientScheme subsample_scheme(std::int64_t n, std::int64_t N) {
  return n >= N ? GradientScheme::full()
                : GradientScheme::naive(static_cast<std::size_t>(n));
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double mean_se = 0.0;
  double variance_se = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  const double P = static_cast<double>(v.size());
  m.mean = stable_sum(v) / P;
  std::vector<double> d2(v.size()), d4(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - m.mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = stable_sum(d2) / P;
  const double m4 = stable_sum(d4) / P;
  m.variance = P > 1 ? m2 * P / (P - 1.0) : 0.0;
  m.mean_se = std::sqrt(m.variance / P);
  m.variance_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / P);
  return m;
}

std::vector<double> apply(const Functional& f, const std::vector<PathOutput>& outs,
                          std::size_t begin, std::size_t end) {
  std::vector<double> v;
  v.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) v.push_back(f(outs[i].final_state));
  return v;
}

void check_ledger(const CostLedger& total, std::uint64_t expected,
                  const std::string& where) {
  if (total.term_evals != expected)
    throw std::logic_error(where + ": realized cost " +
                           std::to_string(total.term_evals) +
                           " differs from closed form " + std::to_string(expected));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

double log_horizon(double c, std::int64_t N) {
  if (N < 1) throw ArgumentError("log_horizon: N must be >= 1");
  const double Nd = static_cast<double>(N);
  return c * std::log(1.0 / epsilon_for(N)) / Nd;
}

CostRegimePrediction predict_cost(double epsilon, std::int64_t N,
                                  SchemeKind scheme) {
  if (!(epsilon > 0.0)) throw ArgumentError("predict_cost: epsilon must be > 0");
  if (N < 1) throw ArgumentError("predict_cost: N must be >= 1");
  CostRegimePrediction p;
  p.epsilon = epsilon;
  p.N = N;
  p.scheme = scheme;
  const double e = 1.0 / epsilon, Nd = static_cast<double>(N);
  const double L = std::log(e);
  const double upper = scheme == SchemeKind::NaiveSubsample ? Nd * Nd : Nd;
  const double tol = 1.0 + 1e-12;
  p.regime = e <= std::sqrt(Nd) * tol ? 1 : (e <= upper * tol ? 2 : 3);
  switch (scheme) {
    case SchemeKind::Full:
      if (p.regime == 1) { p.cost = Nd * L; p.expression = "N log(1/eps)"; }
      else if (p.regime == 2) { p.cost = e * e * L; p.expression = "eps^-2 log(1/eps)"; }
      else { p.cost = e * e * e * L; p.expression = "eps^-3 log(1/eps)"; }
      break;
    case SchemeKind::NaiveSubsample:
      if (p.regime == 1) { p.cost = Nd * L; p.expression = "N log(1/eps)"; }
      else if (p.regime == 2) { p.cost = e * e * L; p.expression = "eps^-2 log(1/eps)"; }
      else { p.cost = e * e * e / (Nd * Nd) * L; p.expression = "eps^-3 N^-2 log(1/eps)"; }
      break;
    case SchemeKind::ControlVariate:
      if (p.regime == 1) { p.cost = L; p.expression = "log(1/eps)"; }
      else if (p.regime == 2) { p.cost = e * e / Nd * L; p.expression = "eps^-2 N^-1 log(1/eps)"; }
      else { p.cost = e * e * e / (Nd * Nd) * L; p.expression = "eps^-3 N^-2 log(1/eps)"; }
      break;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Bias and variance against batch size.

ExperimentResult run_bias_variance(const BiasVarianceParams& p,
                                   const ExperimentOptions& o) {
  const auto model = make_gaussian(p.N, p.data);
  const double mu = model.posterior_mean(), s2 = model.posterior_variance();
  const double T = log_horizon(p.horizon_const, p.N);
  std::vector<std::int64_t> batches = p.batches;
  if (batches.empty()) batches = {p.N, 1000, 100, 10, 1};
  batches.erase(std::remove_if(batches.begin(), batches.end(),
                               [&](std::int64_t n) { return n < 1 || n > p.N; }),
                batches.end());

  const Functional identity = Functional::coordinate(0);
  const Functional abs_sin = Functional::abs_sin_centered(mu);
  const double ref_identity = mu;
  const double ref_abs_sin = abs_sin_expectation(mu, mu, s2);

  CsvTable t;
  t.columns = {"n", "func", "bias_sq", "bias_sq_se", "variance", "variance_se",
               "oracle_bias_sq", "oracle_variance", "mean", "mean_se",
               "oracle_mean", "z_mean", "mean_estimator_variance", "K",
               "term_evals", "status"};
  ExperimentResult r;
  std::int64_t K = 0;
  for (std::int64_t n : batches) {
    RunConfig cfg;
    cfg.h = p.h;
    cfg.horizon = T;
    cfg.paths = p.paths;
    cfg.seed = o.seed;
    cfg.scheme = subsample_scheme(n, p.N);
    cfg.initial = InitialCondition::point(ParamVector::Constant(1, p.theta0));
    cfg.convention = parse_convention(p.convention);
    cfg.allow_unstable = p.allow_unstable;
    cfg.threads = o.threads;
    K = cfg.step_count();

    const auto verdict = check_stability(model, cfg.h, cfg.convention);
    std::vector<PathOutput> outs;
    std::string status = verdict.ok ? "ok" : "unstable";
    if (verdict.ok || p.allow_unstable) {
      try {
        outs = run_paths(model, cfg);
      } catch (const DivergenceError&) {
        status = "diverged";
      }
    }
    if (outs.empty()) {
      for (const char* fn : {"identity", "abs_sin"})
        t.add_row({n, std::string(fn), kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN,
                   kNaN, kNaN, kNaN, kNaN, K, std::int64_t{0}, status});
      r.passed = false;
      continue;
    }
    const std::uint64_t cost = merge_ledgers(outs).term_evals;
    check_ledger(merge_ledgers(outs),
                 static_cast<std::uint64_t>(p.paths) * static_cast<std::uint64_t>(K) *
                     static_cast<std::uint64_t>(n),
                 "bias-variance");

    const bool ou = cfg.convention == Convention::OrnsteinUhlenbeck;
    std::optional<oracle::OracleInputs> in;
    if (ou && model.A() * p.h < 1.0)
      in = oracle::inputs_for(model,
                              n >= p.N ? SchemeKind::Full : SchemeKind::NaiveSubsample,
                              static_cast<std::size_t>(n), p.h, p.theta0, K, p.paths);

    for (int which = 0; which < 2; ++which) {
      const Functional& f = which == 0 ? identity : abs_sin;
      const double ref = which == 0 ? ref_identity : ref_abs_sin;
      const Moments m = moments(apply(f, outs, 0, outs.size()));
      const double b = m.mean - ref;
      const double b2_se = 2.0 * std::abs(b) * m.mean_se + m.mean_se * m.mean_se;
      double o_b2 = kNaN, o_var = kNaN, o_mean = kNaN, z = kNaN;
      if (which == 0 && in) {
        o_b2 = oracle::bias(*in) * oracle::bias(*in);
        o_var = oracle::variance(*in);
        o_mean = oracle::mean(*in);
        z = (m.mean - o_mean) / m.mean_se;
      }
      t.add_row({n, f.name() == "coord0" ? std::string("identity") : std::string("abs_sin"),
                 b * b, b2_se, m.variance, m.variance_se, o_b2, o_var, m.mean,
                 m.mean_se, o_mean, z, m.variance / static_cast<double>(p.paths), K,
                 static_cast<std::int64_t>(cost), status});
    }
  }
  t.sort_rows();
  r.tables["bias_variance"] = std::move(t);
  r.meta["N"] = p.N;
  r.meta["h"] = p.h;
  r.meta["steps"] = K;
  r.meta["realized_horizon"] = static_cast<double>(K) * p.h;
  r.meta["horizon"] = T;
  r.meta["epsilon"] = epsilon_for(p.N);
  r.meta["epsilon_sqrt_N"] = epsilon_for(p.N) * std::sqrt(static_cast<double>(p.N));
  r.meta["posterior_mean"] = mu;
  r.meta["posterior_variance"] = s2;
  r.meta["A"] = model.A();
  return r;
}

// ---------------------------------------------------------------------------
// RMSE along constant-cost families.

ExperimentResult run_rmse_constant_cost(const RmseConstantCostParams& p,
                                        const ExperimentOptions& o) {
  CsvTable t;
  t.columns = {"N", "h", "n", "P", "T", "scheme", "functional", "estimate",
               "bootstrap_se", "bias_sq", "variance", "rmse", "term_evals",
               "fraction", "r", "cost_per_time", "epsilon", "rmse_over_eps",
               "rmse_se", "oracle_rmse", "K"};
  ExperimentResult r;
  json horizons = json::object();
  for (std::int64_t N : p.Ns) {
    const auto model = make_gaussian(N, p.data);
    const double mu = model.posterior_mean(), s2 = model.posterior_variance();
    const double eps = epsilon_for(N);
    const double T = log_horizon(p.horizon_const, N);
    const Functional identity = Functional::coordinate(0);
    const Functional abs_sin = Functional::abs_sin_centered(mu);
    const double refs[2] = {mu, abs_sin_expectation(mu, mu, s2)};
    json realized = json::array();
    for (double f : p.fractions) {
      const std::int64_t n = std::max<std::int64_t>(1, std::llround(f * static_cast<double>(N)));
      const double h = p.r_max * f / model.A();
      RunConfig cfg;
      cfg.h = h;
      cfg.horizon = T;
      cfg.paths = p.paths * p.replicates;
      cfg.seed = o.seed;
      cfg.scheme = subsample_scheme(n, N);
      cfg.initial = InitialCondition::point(ParamVector::Constant(1, p.theta0));
      cfg.convention = Convention::OrnsteinUhlenbeck;
      cfg.threads = o.threads;
      const std::int64_t K = cfg.step_count();
      realized.push_back(static_cast<double>(K) * h);
      const auto outs = run_paths(model, cfg);
      const std::uint64_t per_estimator = static_cast<std::uint64_t>(p.paths) *
                                          static_cast<std::uint64_t>(K) *
                                          static_cast<std::uint64_t>(n);
      check_ledger(merge_ledgers(outs), per_estimator * static_cast<std::uint64_t>(p.replicates),
                   "rmse-constant-cost");

      const auto in = oracle::inputs_for(
          model, n >= N ? SchemeKind::Full : SchemeKind::NaiveSubsample,
          static_cast<std::size_t>(n), h, p.theta0, K, p.paths);

      for (int which = 0; which < 2; ++which) {
        const Functional& fn = which == 0 ? identity : abs_sin;
        const double ref = refs[which];
        std::vector<double> estimates;
        for (std::int64_t rep = 0; rep < p.replicates; ++rep) {
          const auto v = apply(fn, outs, static_cast<std::size_t>(rep * p.paths),
                               static_cast<std::size_t>((rep + 1) * p.paths));
          estimates.push_back(stable_sum(v) / static_cast<double>(v.size()));
        }
        const MseReport mr = mse_report(ref, estimates);
        RngStream boot(o.seed, stream_ids::kBootstrap);
        const double est = stable_sum(estimates) / static_cast<double>(estimates.size());
        const double est_se = estimates.size() >= 2 ? bootstrap_se(estimates, p.bootstrap, boot) : 0.0;
        double rmse_se = 0.0;
        if (estimates.size() >= 2) {
          RngStream boot2(o.seed, stream_ids::kBootstrap);
          boot2.discard(std::uint64_t{1} << 40);
          rmse_se = bootstrap_se(estimates, p.bootstrap, boot2,
                                 [ref](const std::vector<double>& s) {
                                   return mse_report(ref, s).rmse;
                                 });
        }
        const double orm = which == 0 ? std::sqrt(oracle::mse(in)) : kNaN;
        t.add_row({N, h, n, p.paths, T, to_string(cfg.scheme.kind()),
                   std::string(which == 0 ? "identity" : "abs_sin"), est, est_se,
                   mr.bias_sq, mr.variance, mr.rmse,
                   static_cast<std::int64_t>(per_estimator), f, p.r_max * f,
                   static_cast<double>(n) / h, eps, mr.rmse / eps, rmse_se, orm, K});
      }
    }
    horizons[std::to_string(N)] = realized;
  }
  t.sort_rows();
  r.tables["rmse_constant_cost"] = std::move(t);
  r.meta["realized_horizons"] = horizons;
  r.meta["epsilon_sqrt_N"] = 1.0;
  return r;
}

// ---------------------------------------------------------------------------
// Relative bias of the stationary variance estimator.

ExperimentResult run_relbias_heatmap(const HeatmapParams& p,
                                     const ExperimentOptions& o) {
  const auto model = make_gaussian(p.N, p.data);
  const double A = model.A();
  const double target = 1.0 / (2.0 * A);
  auto rel = [&](double h, double vB) {
    if (p.rr) return oracle::rr_variance_bias(A, h, vB).rr_bias / target;
    return oracle::rr_variance_bias(A, h, vB).plain_bias / target;
  };

  CsvTable grid;
  grid.columns = {"log2_fraction", "fraction", "n", "log2_r", "r", "h", "var_B",
                  "relbias", "cost_per_time", "cost_contour"};
  for (int k = 0; k < p.fraction_levels; ++k) {
    const double f = std::ldexp(1.0, -k);
    const std::int64_t n = std::llround(f * static_cast<double>(p.N));
    if (n < 1) break;
    const double vB = oracle::var_b(model, n >= p.N ? SchemeKind::Full : SchemeKind::NaiveSubsample,
                                    static_cast<std::size_t>(n));
    for (int j = 0; j < p.r_levels; ++j) {
      const double r = p.r_max * std::ldexp(1.0, -j);
      const double h = r / A;
      grid.add_row({std::int64_t{-k}, f, n, std::log2(r), r, h, vB, rel(h, vB),
                    static_cast<double>(n) / h, std::int64_t{j - k}});
    }
  }
  grid.sort_rows();

  CsvTable spots;
  spots.columns = {"fraction", "n", "r", "h", "K", "P", "measured_relbias", "se",
                   "oracle_relbias", "z", "term_evals"};
  for (const auto& [f, r] : p.spot_checks) {
    const std::int64_t n = std::max<std::int64_t>(1, std::llround(f * static_cast<double>(p.N)));
    const double h = r / A;
    RunConfig cfg;
    cfg.h = h;
    cfg.steps = static_cast<std::int64_t>(std::ceil(p.spot_horizon_factor / r));
    cfg.paths = p.spot_paths;
    cfg.seed = o.seed;
    cfg.scheme = subsample_scheme(n, p.N);
    cfg.initial = InitialCondition::point(ParamVector::Constant(1, model.posterior_mean()));
    cfg.convention = Convention::OrnsteinUhlenbeck;
    cfg.threads = o.threads;
    const SchemeKind kind = n >= p.N ? SchemeKind::Full : SchemeKind::NaiveSubsample;
    const double vB = oracle::var_b(model, kind, static_cast<std::size_t>(n));
    auto finite_var = [&](double hh, std::int64_t steps) {
      oracle::OracleInputs in = oracle::inputs_for(model, kind, static_cast<std::size_t>(n), hh,
                                                   model.posterior_mean(), steps);
      in.var_B = vB;
      return oracle::variance(in);
    };
    double measured, se, expected;
    std::uint64_t cost;
    if (!p.rr) {
      const auto outs = run_paths(model, cfg);
      cost = merge_ledgers(outs).term_evals;
      const Moments m = moments(apply(Functional::coordinate(0), outs, 0, outs.size()));
      measured = m.variance / target - 1.0;
      se = m.variance_se / target;
      expected = finite_var(h, *cfg.steps) / target - 1.0;
    } else {
      const auto pairs = run_rr_pairs(model, cfg);
      std::vector<double> coarse, fine;
      cost = 0;
      for (const auto& [c, fi] : pairs) {
        coarse.push_back(c.final_state[0]);
        fine.push_back(fi.final_state[0]);
        cost += c.ledger.term_evals + fi.ledger.term_evals;
      }
      auto stat = [&](const std::vector<double>& idx) {
        std::vector<double> c2, f2;
        for (double i : idx) {
          c2.push_back(coarse[static_cast<std::size_t>(i)]);
          f2.push_back(fine[static_cast<std::size_t>(i)]);
        }
        return (2.0 * moments(f2).variance - moments(c2).variance) / target - 1.0;
      };
      std::vector<double> idx(coarse.size());
      std::iota(idx.begin(), idx.end(), 0.0);
      measured = stat(idx);
      RngStream boot(o.seed, stream_ids::kBootstrap);
      se = bootstrap_se(idx, 200, boot, stat);
      expected = (2.0 * finite_var(0.5 * h, 2 * *cfg.steps) - finite_var(h, *cfg.steps)) / target - 1.0;
    }
    spots.add_row({f, n, r, h, *cfg.steps, p.spot_paths, measured, se, expected,
                   (measured - expected) / se, static_cast<std::int64_t>(cost)});
  }
  spots.sort_rows();

  ExperimentResult res;
  const std::string stem = p.rr ? "rr_heatmap" : "relbias_heatmap";
  res.tables[stem] = std::move(grid);
  res.tables[stem + "_spot_checks"] = std::move(spots);
  res.meta["N"] = p.N;
  res.meta["A"] = A;
  res.meta["rr"] = p.rr;
  res.meta["data_variance"] = model.data_variance();
  return res;
}

// ---------------------------------------------------------------------------
// Logistic regression RMSE at constant cost.

ExperimentResult run_logreg_rmse(const LogregRmseParams& p,
                                 const ExperimentOptions& o) {
  CsvTable t;
  t.columns = {"N", "h", "n", "P", "T", "scheme", "functional", "estimate",
               "bootstrap_se", "bias_sq", "variance", "rmse", "term_evals",
               "fraction", "cost_per_time", "K"};
  ExperimentResult res;
  json refs = json::object();
  for (std::int64_t N : p.Ns) {
    const auto ds = generate_logreg_data(p.d, static_cast<std::size_t>(N),
                                         p.prior_variance, p.data_seed);
    const auto& model = ds.model;
    const ParamVector mode = find_mode(model);

    MhConfig mh;
    mh.steps = p.mh_steps;
    mh.burn_in = p.mh_burn_in;
    mh.thin = p.mh_thin;
    mh.seed = derive_seed(o.seed, static_cast<std::uint64_t>(N));
    mh.precondition = true;
    mh.initial = mode;
    const MhResult ref = mh_sample(model, mh);
    const ParamVector ref_mean = ref.mean(), ref_sd = ref.stddev();

    const StabilityVerdict sv =
        check_stability(model, std::numeric_limits<double>::min(),
                        Convention::Langevin, o.seed);
    const double h_ref = p.h_ref_fraction * sv.limit;
    // Horizon in units of the audited relaxation time 1/m.
    const CurvatureBounds cb = estimate_curvature_bounds(model, 8, o.seed);
    const double T = p.horizon_const * std::log(1.0 / epsilon_for(N)) /
                     (drift_factor(model, Convention::Langevin) * cb.m);
    json realized = json::array();

    for (double f : p.fractions) {
      const std::int64_t n = std::max<std::int64_t>(1, std::llround(f * static_cast<double>(N)));
      RunConfig cfg;
      cfg.h = f * h_ref;
      cfg.horizon = T;
      cfg.paths = p.paths * p.replicates;
      cfg.seed = o.seed;
      cfg.scheme = subsample_scheme(n, N);
      cfg.initial = InitialCondition::point(mode);
      cfg.convention = Convention::Langevin;
      cfg.threads = o.threads;
      const std::int64_t K = cfg.step_count();
      realized.push_back(static_cast<double>(K) * cfg.h);
      const auto outs = run_paths(model, cfg);
      const std::uint64_t per_estimator = static_cast<std::uint64_t>(p.paths) *
                                          static_cast<std::uint64_t>(K) *
                                          static_cast<std::uint64_t>(n);
      check_ledger(merge_ledgers(outs), per_estimator * static_cast<std::uint64_t>(p.replicates),
                   "logreg-rmse");

      // Per-replicate estimates [rep][coordinate].
      std::vector<std::vector<double>> means(static_cast<std::size_t>(p.replicates)),
          sds(static_cast<std::size_t>(p.replicates));
      for (std::int64_t rep = 0; rep < p.replicates; ++rep) {
        std::vector<ParamVector> states;
        for (std::int64_t q = rep * p.paths; q < (rep + 1) * p.paths; ++q)
          states.push_back(outs[static_cast<std::size_t>(q)].final_state);
        for (int j = 0; j < p.d; ++j) {
          means[rep].push_back(independent_paths_estimate(Functional::coordinate(j), states));
          sds[rep].push_back(posterior_std_estimate(states, Functional::coordinate(j)));
        }
      }

      for (int which = 0; which < 2; ++which) {
        const auto& est = which == 0 ? means : sds;
        const ParamVector& truth = which == 0 ? ref_mean : ref_sd;
        const double scale = which == 0 ? std::sqrt(static_cast<double>(N))
                                        : static_cast<double>(N);
        auto summed = [&](const std::vector<double>& idx, MseReport* total) {
          double acc = 0.0;
          MseReport sum;
          for (int j = 0; j < p.d; ++j) {
            std::vector<double> v;
            for (double i : idx) v.push_back(est[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
            const MseReport m = mse_report(truth[j], v);
            acc += m.rmse;
            sum.bias_sq += m.bias_sq;
            sum.variance += m.variance;
          }
          if (total) {
            *total = sum;
            total->rmse = acc;
          }
          return acc * scale;
        };
        std::vector<double> idx(static_cast<std::size_t>(p.replicates));
        std::iota(idx.begin(), idx.end(), 0.0);
        MseReport total;
        const double scaled = summed(idx, &total);
        RngStream boot(o.seed, stream_ids::kBootstrap);
        boot.discard(static_cast<std::uint64_t>(which) << 40);
        const double se = p.replicates >= 2
            ? bootstrap_se(idx, p.bootstrap, boot,
                           [&](const std::vector<double>& s) { return summed(s, nullptr); })
            : 0.0;
        t.add_row({N, cfg.h, n, p.paths, T, to_string(cfg.scheme.kind()),
                   std::string(which == 0 ? "mean" : "std"), scaled, se,
                   total.bias_sq, total.variance, total.rmse,
                   static_cast<std::int64_t>(per_estimator), f,
                   static_cast<double>(n) / cfg.h, K});
      }
    }

    json rj;
    rj["mean"] = std::vector<double>(ref_mean.data(), ref_mean.data() + ref_mean.size());
    rj["std"] = std::vector<double>(ref_sd.data(), ref_sd.data() + ref_sd.size());
    rj["ess"] = ref.ess;
    rj["acceptance_rate"] = ref.acceptance_rate;
    rj["tuned_scale"] = ref.tuned_scale;
    rj["warnings"] = ref.warnings;
    rj["stability_limit"] = sv.limit;
    rj["h_ref"] = h_ref;
    rj["curvature_m"] = cb.m;
    rj["curvature_M"] = cb.M;
    rj["horizon"] = T;
    rj["realized_horizons"] = realized;
    rj["mode"] = std::vector<double>(mode.data(), mode.data() + mode.size());
    refs[std::to_string(N)] = rj;
  }
  t.sort_rows();
  res.tables["logreg_rmse"] = std::move(t);
  res.meta["reference"] = refs;
  return res;
}

// ---------------------------------------------------------------------------
// Oracle-certified minimal cost.

namespace {

struct CostChoice {
  bool found = false;
  double r = 0, h = 0;
  std::int64_t n = 0, M = 0, P = 0;
  double cost = std::numeric_limits<double>::infinity();
  double mse = 0;
};

// Cheapest (M, P) for fixed (h, n); cost counts term evaluations P M n.
void best_steps_paths(const oracle::OracleInputs& base, double eps2,
                      std::int64_t n, CostChoice& best, double r) {
  const double q = 1.0 - base.A * base.h;
  const double d0 = std::abs(base.theta0_mean - base.mean_B / base.A);
  std::int64_t m0 = 1;
  if (d0 * d0 >= eps2)
    m0 = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::floor(std::log(std::sqrt(eps2) / d0) / std::log(q))));
  const double v_inf = oracle::stationary_variance(base.A, base.h, base.var_B);
  for (std::int64_t M = m0;; ++M) {
    oracle::OracleInputs in = base;
    in.steps = M;
    in.paths = 1;
    const double b = oracle::bias(in);
    const double b2 = b * b;
    const double var = oracle::variance(in);
    if (b2 < eps2) {
      std::int64_t P = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(var / (eps2 - b2))));
      in.paths = P;
      while (oracle::mse(in) > eps2) in.paths = ++P;
      const double cost = static_cast<double>(P) * static_cast<double>(M) * static_cast<double>(n);
      if (cost < best.cost) {
        best = {true, r, base.h, n, M, P, cost, oracle::mse(in)};
      }
    }
    const double decay = std::pow(q, 2.0 * static_cast<double>(M));
    if (b2 < 1e-6 * eps2 && decay * std::max(var, v_inf) < 1e-6 * v_inf) break;
    if (M > m0 + 1000000) break;
  }
}

}  // namespace

ExperimentResult run_cost_regimes(const CostRegimesParams& p,
                                  const ExperimentOptions& o) {
  std::vector<double> r_grid = p.r_grid;
  if (r_grid.empty())
    for (int i = 1; i <= 19; ++i) r_grid.push_back(0.05 * i);

  CsvTable t;
  t.columns = {"N", "epsilon", "scheme", "r", "h", "n", "M", "P", "T", "cost",
               "precompute_cost", "oracle_mse", "eps_sq", "predicted_regime",
               "predicted_cost", "sim_replicates", "sim_mse", "sim_mse_se",
               "realized_term_evals"};
  std::map<SchemeKind, std::vector<double>> logN, logC;

  for (double l : p.log10_Ns) {
    const std::int64_t N = std::llround(std::pow(10.0, l));
    const auto model = make_gaussian(N, p.data);
    const double eps = epsilon_for(N), eps2 = eps * eps;
    std::vector<std::int64_t> ns;
    for (int k = 0;; ++k) {
      const std::int64_t n = std::llround(static_cast<double>(N) *
                                          std::pow(2.0, -static_cast<double>(k) / p.batch_levels_per_octave));
      if (n < 1) break;
      if (ns.empty() || ns.back() != n) ns.push_back(n);
      if (n == 1) break;
    }
    if (ns.back() != 1) ns.push_back(1);

    for (SchemeKind kind : {SchemeKind::Full, SchemeKind::NaiveSubsample,
                            SchemeKind::ControlVariate}) {
      const double theta0 = kind == SchemeKind::ControlVariate ? model.posterior_mean() : p.theta0;
      CostChoice best;
      for (double r : r_grid) {
        const double h = r / model.A();
        const std::vector<std::int64_t> cand =
            kind == SchemeKind::Full ? std::vector<std::int64_t>{N} : ns;
        for (std::int64_t n : cand) {
          oracle::OracleInputs in = oracle::inputs_for(
              model, kind, static_cast<std::size_t>(n), h, theta0, std::nullopt);
          best_steps_paths(in, eps2, n, best, r);
        }
      }
      if (!best.found) throw std::logic_error("cost-regimes: no feasible configuration");
      const auto pred = predict_cost(eps, N, kind);
      const std::int64_t precompute = kind == SchemeKind::ControlVariate ? N : 0;

      // Simulation of the chosen configuration.
      double sim_mse = kNaN, sim_se = kNaN;
      std::int64_t sim_R = 0, realized = 0;
      const double work = static_cast<double>(best.P) * static_cast<double>(best.M) *
                          (kind == SchemeKind::Full ? 1.0 : static_cast<double>(best.n)) *
                          static_cast<double>(p.sim_replicates);
      if (work <= p.sim_budget) {
        sim_R = p.sim_replicates;
        RunConfig cfg;
        cfg.h = best.h;
        cfg.steps = best.M;
        cfg.paths = best.P * sim_R;
        cfg.seed = o.seed;
        CostLedger pre;
        cfg.scheme = kind == SchemeKind::Full ? GradientScheme::full()
                     : kind == SchemeKind::NaiveSubsample
                         ? subsample_scheme(best.n, N)
                         : GradientScheme::control_variate(
                               model, ParamVector::Constant(1, model.posterior_mean()),
                               static_cast<std::size_t>(best.n), pre);
        cfg.initial = InitialCondition::point(ParamVector::Constant(1, theta0));
        cfg.convention = Convention::OrnsteinUhlenbeck;
        cfg.threads = o.threads;
        const auto outs = run_paths(model, cfg);
        const auto total = merge_ledgers(outs);
        check_ledger(total, static_cast<std::uint64_t>(best.cost) * static_cast<std::uint64_t>(sim_R),
                     "cost-regimes");
        realized = static_cast<std::int64_t>(total.term_evals / static_cast<std::uint64_t>(sim_R));
        std::vector<double> sq;
        for (std::int64_t rep = 0; rep < sim_R; ++rep) {
          const auto v = apply(Functional::coordinate(0), outs,
                               static_cast<std::size_t>(rep * best.P),
                               static_cast<std::size_t>((rep + 1) * best.P));
          const double e = stable_sum(v) / static_cast<double>(v.size()) - model.posterior_mean();
          sq.push_back(e * e);
        }
        const Moments m = moments(sq);
        sim_mse = m.mean;
        sim_se = m.mean_se;
      }

      t.add_row({N, eps, to_string(kind), best.r, best.h, best.n, best.M, best.P,
                 static_cast<double>(best.M) * best.h, best.cost, precompute,
                 best.mse, eps2, std::int64_t{pred.regime}, pred.cost, sim_R,
                 sim_mse, sim_se, realized});
      logN[kind].push_back(static_cast<double>(N));
      logC[kind].push_back(best.cost);
    }
  }
  t.sort_rows();

  CsvTable slopes;
  slopes.columns = {"scheme", "slope", "N_min", "N_max"};
  ExperimentResult res;
  for (SchemeKind kind : {SchemeKind::ControlVariate, SchemeKind::Full,
                          SchemeKind::NaiveSubsample}) {
    const auto& x = logN[kind];
    const double slope = x.size() >= 2 ? oracle::loglog_slope(x, logC[kind]) : kNaN;
    slopes.add_row({to_string(kind), slope, *std::min_element(x.begin(), x.end()),
                    *std::max_element(x.begin(), x.end())});
    res.meta["slope_" + to_string(kind)] = slope;
  }
  res.tables["cost_regimes"] = std::move(t);
  res.tables["cost_regimes_slopes"] = std::move(slopes);
  res.meta["epsilon_sqrt_N"] = 1.0;
  return res;
}

// ---------------------------------------------------------------------------
// Oracle validation battery.

ExperimentResult run_oracle_validate(const OracleValidateParams& p,
                                     const ExperimentOptions& o) {
  const auto model = make_gaussian(p.N, p.data);
  const double A = model.A();
  CsvTable t;
  t.columns = {"check", "measured", "expected", "se", "z", "pass"};
  ExperimentResult res;
  auto add = [&](const std::string& name, double measured, double expected,
                 double se, bool pass) {
    const double z = se > 0.0 ? (measured - expected) / se : kNaN;
    t.add_row({name, measured, expected, se, z, std::int64_t{pass ? 1 : 0}});
    if (!pass) res.passed = false;
  };

  // Moments of theta_M for each scheme.
  struct Case {
    std::string name;
    SchemeKind kind;
    std::int64_t n;
  };
  std::vector<Case> cases{{"full", SchemeKind::Full, p.N}};
  for (auto n : p.naive_batches)
    if (n >= 1 && n <= p.N) cases.push_back({"naive_n" + std::to_string(n), SchemeKind::NaiveSubsample, n});
  cases.push_back({"cv_n" + std::to_string(p.cv_batch), SchemeKind::ControlVariate, p.cv_batch});
  for (const auto& c : cases) {
    RunConfig cfg;
    cfg.h = p.h;
    cfg.steps = p.M;
    cfg.paths = p.paths;
    cfg.seed = o.seed;
    CostLedger pre;
    cfg.scheme = c.kind == SchemeKind::Full ? GradientScheme::full()
                 : c.kind == SchemeKind::NaiveSubsample
                     ? subsample_scheme(c.n, p.N)
                     : GradientScheme::control_variate(model, *model.closed_form_mode(),
                                                       static_cast<std::size_t>(c.n), pre);
    cfg.convention = Convention::OrnsteinUhlenbeck;
    cfg.threads = o.threads;
    const auto outs = run_paths(model, cfg);
    const Moments m = moments(apply(Functional::coordinate(0), outs, 0, outs.size()));
    const auto in = oracle::inputs_for(model, c.kind, static_cast<std::size_t>(c.n), p.h,
                                       0.0, p.M, p.paths);
    const double om = oracle::mean(in), ov = oracle::variance(in);
    add(c.name + "_mean", m.mean, om, m.mean_se, std::abs(m.mean - om) <= p.z_limit * m.mean_se);
    add(c.name + "_variance", m.variance, ov, m.variance_se,
        std::abs(m.variance - ov) <= p.z_limit * m.variance_se);
    const std::uint64_t expected_cost = static_cast<std::uint64_t>(p.paths) *
                                        static_cast<std::uint64_t>(p.M) *
                                        static_cast<std::uint64_t>(c.n);
    const auto realized = merge_ledgers(outs).term_evals;
    add(c.name + "_cost", static_cast<double>(realized), static_cast<double>(expected_cost),
        0.0, realized == expected_cost);
  }

  // Enumeration against the subsampling-variance formula on a prefix.
  {
    const std::size_t Ne = std::min<std::size_t>(10, static_cast<std::size_t>(p.N));
    std::vector<double> y(model.data().begin(), model.data().begin() + static_cast<long>(Ne));
    std::vector<Eigen::VectorXd> vals;
    for (double v : y) vals.push_back(Eigen::VectorXd::Constant(1, v / (2.0 * model.sigma_y_sq())));
    double worst = 0.0;
    for (std::size_t n = 1; n <= Ne; ++n) {
      const double enumerated = enumerate_subsample_moments(vals, n).variance;
      worst = std::max(worst, std::abs(enumerated - oracle::var_b(y, model.sigma_y_sq(), n)));
    }
    add("var_b_enumeration_max_abs_error", worst, 0.0, 0.0, worst <= 1e-12);
  }

  // Shared-noise contraction.
  {
    RunConfig cfg;
    cfg.h = p.h;
    cfg.steps = p.M;
    cfg.seed = o.seed;
    cfg.convention = Convention::OrnsteinUhlenbeck;
    cfg.initial = InitialCondition::point(ParamVector::Constant(1, 0.0));
    const auto a = run_path(model, cfg, 0);
    cfg.initial = InitialCondition::point(ParamVector::Constant(1, 1.0));
    const auto b = run_path(model, cfg, 0);
    const double measured = std::abs(b.final_state[0] - a.final_state[0]);
    const double expected = std::pow(1.0 - A * p.h, static_cast<double>(p.M));
    add("contraction_ratio", measured, expected, 0.0,
        std::abs(measured - expected) <= 1e-9 * expected + 1e-15);
  }

  // Lag-1 autocorrelation of a long stationary chain.
  {
    const double rho = 1.0 - A * p.h;
    const std::int64_t burn = static_cast<std::int64_t>(std::ceil(20.0 / (A * p.h)));
    const std::int64_t len = 1000000;
    RngStream rng(o.seed, stream_ids::kAudit);
    GradientEstimator est(GradientScheme::full(), model);
    CostLedger led;
    ParamVector x = ParamVector::Constant(1, model.posterior_mean()), g(1), xi(1);
    std::vector<double> series;
    series.reserve(static_cast<std::size_t>(len));
    const double s = std::sqrt(p.h);
    for (std::int64_t k = 0; k < burn + len; ++k) {
      est.estimate(x, rng, led, g);
      gaussian_noise(rng, xi);
      x += p.h * g + s * xi;
      if (k >= burn) series.push_back(x[0]);
    }
    const Moments m = moments(series);
    double num = 0.0;
    for (std::size_t k = 1; k < series.size(); ++k)
      num += (series[k] - m.mean) * (series[k - 1] - m.mean);
    const double rho_hat = num / (m.variance * static_cast<double>(series.size() - 1));
    // AR(1) asymptotic standard error of the lag-1 estimate.
    const double se = std::sqrt((1.0 - rho * rho) / static_cast<double>(series.size()));
    add("ar1_lag1_autocorrelation", rho_hat, rho, se,
        std::abs(rho_hat - rho) <= 0.01 && std::abs(rho_hat - rho) <= p.z_limit * se);
  }

  if (p.corrupt_factor) {
    RunConfig cfg;
    cfg.h = *p.corrupt_factor / A;
    cfg.steps = std::max<std::int64_t>(p.M, 10000);
    cfg.seed = o.seed;
    cfg.convention = Convention::OrnsteinUhlenbeck;
    cfg.allow_unstable = true;
    cfg.initial = InitialCondition::point(ParamVector::Constant(1, 0.0));
    double diverged_at = kNaN;
    try {
      run_path(model, cfg, 0);
    } catch (const DivergenceError& e) {
      diverged_at = static_cast<double>(e.step());
    }
    add("negative_control_divergence_step", diverged_at, kNaN, 0.0,
        std::isnan(diverged_at));
  }

  res.tables["oracle_validate"] = std::move(t);
  res.meta["battery_size"] = res.tables["oracle_validate"].rows.size();
  res.meta["passed"] = res.passed;
  return res;
}

// ---------------------------------------------------------------------------
// JSON dispatch.

namespace {

class Reader {
 public:
  explicit Reader(const json& j) : j_(j) {
    if (!j_.is_object()) throw ArgumentError("experiment spec must be a JSON object");
  }
  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ArgumentError(std::string("spec field '") + key + "': " + e.what());
    }
  }
  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    used_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    T v{};
    get(key, v);
    out = v;
  }
  void data(GaussianDataParams& d) {
    get("sigma_theta_sq", d.sigma_theta_sq);
    get("sigma_y_sq", d.sigma_y_sq);
    get("theta_true", d.theta_true);
    get("data_seed", d.data_seed);
  }
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k) && k != "experiment")
        throw ArgumentError("unknown spec field '" + k + "'");
  }

 private:
  const json& j_;
  std::set<std::string> used_;
};

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "bias-variance", "rmse-constant-cost", "relbias-heatmap", "rr-heatmap",
      "logreg-rmse",   "cost-regimes",       "oracle-validate"};
  return names;
}

ExperimentResult run_experiment(const std::string& name, const json& spec,
                                const ExperimentOptions& o) {
  const json& s = spec.is_null() ? json::object() : spec;
  Reader rd(s);
  ExperimentResult res;
  if (name == "bias-variance") {
    BiasVarianceParams p;
    rd.get("N", p.N);
    rd.data(p.data);
    rd.get("h", p.h);
    rd.get("horizon_const", p.horizon_const);
    rd.get("batches", p.batches);
    rd.get("paths", p.paths);
    rd.get("theta0", p.theta0);
    rd.get("convention", p.convention);
    rd.get("allow_unstable", p.allow_unstable);
    rd.finish();
    res = run_bias_variance(p, o);
  } else if (name == "rmse-constant-cost") {
    RmseConstantCostParams p;
    rd.get("Ns", p.Ns);
    rd.data(p.data);
    rd.get("horizon_const", p.horizon_const);
    rd.get("fractions", p.fractions);
    rd.get("r_max", p.r_max);
    rd.get("paths", p.paths);
    rd.get("replicates", p.replicates);
    rd.get("theta0", p.theta0);
    rd.get("bootstrap", p.bootstrap);
    rd.finish();
    res = run_rmse_constant_cost(p, o);
  } else if (name == "relbias-heatmap" || name == "rr-heatmap") {
    HeatmapParams p;
    p.rr = name == "rr-heatmap";
    rd.get("N", p.N);
    rd.data(p.data);
    rd.get("fraction_levels", p.fraction_levels);
    rd.get("r_levels", p.r_levels);
    rd.get("r_max", p.r_max);
    rd.get("spot_checks", p.spot_checks);
    rd.get("spot_paths", p.spot_paths);
    rd.get("spot_horizon_factor", p.spot_horizon_factor);
    rd.finish();
    res = run_relbias_heatmap(p, o);
  } else if (name == "logreg-rmse") {
    LogregRmseParams p;
    rd.get("d", p.d);
    rd.get("prior_variance", p.prior_variance);
    rd.get("Ns", p.Ns);
    rd.get("data_seed", p.data_seed);
    rd.get("horizon_const", p.horizon_const);
    rd.get("fractions", p.fractions);
    rd.get("h_ref_fraction", p.h_ref_fraction);
    rd.get("paths", p.paths);
    rd.get("replicates", p.replicates);
    rd.get("mh_steps", p.mh_steps);
    rd.get("mh_burn_in", p.mh_burn_in);
    rd.get("mh_thin", p.mh_thin);
    rd.get("bootstrap", p.bootstrap);
    rd.finish();
    res = run_logreg_rmse(p, o);
  } else if (name == "cost-regimes") {
    CostRegimesParams p;
    rd.get("log10_Ns", p.log10_Ns);
    rd.data(p.data);
    rd.get("theta0", p.theta0);
    rd.get("r_grid", p.r_grid);
    rd.get("batch_levels_per_octave", p.batch_levels_per_octave);
    rd.get("sim_budget", p.sim_budget);
    rd.get("sim_replicates", p.sim_replicates);
    rd.finish();
    res = run_cost_regimes(p, o);
  } else if (name == "oracle-validate") {
    OracleValidateParams p;
    rd.get("N", p.N);
    rd.data(p.data);
    rd.get("h", p.h);
    rd.get("M", p.M);
    rd.get("paths", p.paths);
    rd.get("naive_batches", p.naive_batches);
    rd.get("cv_batch", p.cv_batch);
    rd.get("z_limit", p.z_limit);
    rd.get("corrupt_factor", p.corrupt_factor);
    rd.finish();
    res = run_oracle_validate(p, o);
  } else {
    throw ArgumentError("unknown experiment '" + name + "'");
  }
  res.meta["experiment"] = name;
  res.meta["seed"] = o.seed;
  res.meta["spec"] = s;
  res.meta["config_hash"] = hex64(fnv1a64(name + "\n" + s.dump() + "\n" + std::to_string(o.seed)));
  return res;
}

void write_experiment(const ExperimentResult& result,
                      const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& [stem, table] : result.tables)
    table.write(out_dir / (stem + ".csv"));
  std::ofstream f(out_dir / "meta.json", std::ios::binary);
  if (!f) throw ArgumentError("cannot write " + (out_dir / "meta.json").string());
  f << result.meta.dump(2) << '\n';
}

}  // namespace sgldlab
