// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion; exit status
// is nonzero when any selected criterion fails.
//
//   acceptance            run all criteria
//   acceptance --only k   run criterion k

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "sgldlab/errors.hpp"
#include "sgldlab/estimators.hpp"
#include "sgldlab/experiments.hpp"
#include "sgldlab/gaussian_oracle.hpp"
#include "sgldlab/gradient.hpp"
#include "sgldlab/mode.hpp"
#include "sgldlab/models.hpp"
#include "sgldlab/sampler.hpp"
#include "sgldlab/subsample.hpp"

using namespace sgldlab;
using nlohmann::json;

namespace {

// Tolerances.
constexpr double kVarBAbsTol = 1e-12;         // criterion 1
constexpr double kZLimit = 4.0;               // criteria 2, 3, 5, 9
constexpr double kVarianceRatioRelTol = 0.10; // criterion 3b
constexpr double kRmseRatioMax = 1.5;         // criterion 4
constexpr double kSlopeTol = 0.1;             // criterion 5
constexpr double kCostSlopeLo = 0.9, kCostSlopeHi = 1.15, kCvSlopeMax = 0.2;  // 6
constexpr double kSeMultiple = 2.0;           // criterion 8
constexpr double kMinEss = 1e4;               // criterion 8
constexpr double kFdRelTol = 1e-5;            // criterion 9
constexpr double kEnumTol = 1e-12;            // criterion 9

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("violated: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double a) {
  char b[96];
  std::snprintf(b, sizeof b, f, a);
  return b;
}
std::string fmt(const char* f, double a, double c) {
  char b[128];
  std::snprintf(b, sizeof b, f, a, c);
  return b;
}
std::string fmt(const char* f, double a, double c, double d) {
  char b[160];
  std::snprintf(b, sizeof b, f, a, c, d);
  return b;
}

// 1. Subsampling variance of B by enumeration against the closed form.
Outcome criterion1() {
  Outcome o;
  RngStream rng(101, 0);
  double worst = 0.0;
  int cases = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const double sigma_y_sq = 0.5 + 1.5 * uniform01(rng);
    for (std::size_t N = 2; N <= 12; ++N) {
      std::vector<double> y(N);
      const double loc = 2.0 * standard_normal(rng);
      for (auto& v : y) v = loc + standard_normal(rng);
      std::vector<Eigen::VectorXd> terms;
      for (double v : y) terms.push_back(Eigen::VectorXd::Constant(1, v / (2.0 * sigma_y_sq)));
      double mean = 0.0;
      for (double v : y) mean += v;
      mean /= static_cast<double>(N);
      double ss = 0.0;
      for (double v : y) ss += (v - mean) * (v - mean);
      const double var_y = ss / static_cast<double>(N - 1);
      for (std::size_t n = 1; n <= N; ++n) {
        const double Nd = static_cast<double>(N), nd = static_cast<double>(n);
        const double formula =
            Nd * (Nd - nd) / nd * var_y / (4.0 * sigma_y_sq * sigma_y_sq);
        const double enumerated = enumerate_subsample_moments(terms, n).variance;
        worst = std::max(worst, std::abs(enumerated - formula));
        ++cases;
      }
    }
  }
  o.require(worst <= kVarBAbsTol, "max abs error <= 1e-12");
  o.note(std::to_string(cases) + " (dataset, N, n) cases, max abs error " + fmt("%.3g", worst));
  return o;
}

// 2. Oracle moments against simulation for all schemes.
Outcome criterion2() {
  Outcome o;
  const json spec{{"N", 100}, {"h", 1e-3}, {"M", 50}, {"paths", 100000},
                  {"naive_batches", {1, 10, 100}}, {"z_limit", kZLimit}};
  const auto r = run_experiment("oracle-validate", spec, {});
  const auto& t = r.tables.at("oracle_validate");
  const auto names = t.text_column("check");
  const auto z = t.numeric_column("z");
  const auto pass = t.numeric_column("pass");
  double max_z = 0.0;
  int moment_rows = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const bool moment = names[i].ends_with("_mean") || names[i].ends_with("_variance");
    if (moment) {
      ++moment_rows;
      max_z = std::max(max_z, std::abs(z[i]));
      o.require(std::abs(z[i]) <= kZLimit, names[i] + " |z| <= 4");
    }
    o.require(pass[i] == 1.0, names[i]);
  }
  o.require(moment_rows == 10, "ten moment rows (full, naive x3, cv)");
  o.note(std::to_string(moment_rows) + " moment checks, max |z| " + fmt("%.2f", max_z));
  return o;
}

// 3. Bias vanishes for every batch size; variance inflation matches the oracle.
Outcome criterion3() {
  Outcome o;
  const auto r = run_experiment("bias-variance", json::object(), {});
  const auto t = r.tables.at("bias_variance").filter("func", "identity");
  const auto n = t.numeric_column("n");
  const auto z = t.numeric_column("z_mean");
  const auto var = t.numeric_column("variance");
  const auto ovar = t.numeric_column("oracle_variance");
  std::map<double, std::pair<double, double>> by_n;  // n -> (variance, oracle)
  double max_z = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    max_z = std::max(max_z, std::abs(z[i]));
    o.require(std::abs(z[i]) <= kZLimit, "bias z <= 4 at n=" + fmt("%.0f", n[i]));
    by_n[n[i]] = {var[i], ovar[i]};
  }
  o.require(by_n.size() == 5, "five batch sizes");
  // Sorted ascending in n: variance must strictly decrease.
  double prev = INFINITY;
  for (const auto& [nn, v] : by_n) {
    o.require(v.first < prev, "variance strictly increasing as n decreases");
    prev = v.first;
  }
  const double measured = by_n.begin()->second.first / by_n.rbegin()->second.first;
  const double predicted = by_n.begin()->second.second / by_n.rbegin()->second.second;
  const double rel = std::abs(measured / predicted - 1.0);
  o.require(rel <= kVarianceRatioRelTol, "variance ratio within 10%");
  o.note("max |z| " + fmt("%.2f", max_z) +
         fmt(", var(n=1)/var(n=N) measured %.1f vs oracle %.1f (rel %.3f)", measured, predicted, rel));
  return o;
}

// 4. Constant cost gives constant RMSE below epsilon.
Outcome criterion4() {
  Outcome o;
  const auto r = run_experiment("rmse-constant-cost", json::object(), {});
  const auto& t = r.tables.at("rmse_constant_cost");
  const auto N = t.numeric_column("N");
  const auto fn = t.text_column("functional");
  const auto rmse = t.numeric_column("rmse");
  const auto eps = t.numeric_column("epsilon");
  const auto se = t.numeric_column("rmse_se");
  std::map<std::pair<double, std::string>, std::vector<std::size_t>> families;
  for (std::size_t i = 0; i < N.size(); ++i) families[{N[i], fn[i]}].push_back(i);
  for (const auto& [key, rows] : families) {
    o.require(rows.size() >= 4, "family of >= 4 (n, h) pairs");
    double lo = INFINITY, hi = 0.0, max_se = 0.0;
    for (auto i : rows) {
      o.require(rmse[i] <= eps[i], "RMSE <= eps (N=" + fmt("%.0f", N[i]) + ", " + fn[i] + ")");
      lo = std::min(lo, rmse[i]);
      hi = std::max(hi, rmse[i]);
      max_se = std::max(max_se, se[i]);
    }
    o.require(hi / lo <= kRmseRatioMax, "max/min RMSE <= 1.5 (N=" + fmt("%.0f", key.first) +
                                            ", " + key.second + ")");
    o.note("N=" + fmt("%.0f", key.first) + " " + key.second +
           fmt(": ratio %.3f, max RMSE/eps %.3f, bootstrap se <= %.2g", hi / lo,
               hi / eps[rows.front()], max_se));
  }
  return o;
}

// 5. Richardson-Romberg orders from the oracle plus one simulated spot-check.
Outcome criterion5() {
  Outcome o;
  const auto model = generate_gaussian_data(10000, 1.0, 1.0, 0.5, 20240601);
  const double A = model.A();
  auto slopes = [&](double var_B) {
    std::vector<double> hs, plain, rr;
    for (int k = 4; k <= 8; ++k) {
      const double h = std::ldexp(1.0, -k) / A;
      const auto b = oracle::rr_variance_bias(A, h, var_B);
      hs.push_back(h);
      plain.push_back(b.plain_bias);
      rr.push_back(b.rr_bias);
    }
    return std::pair{oracle::loglog_slope(hs, plain), oracle::loglog_slope(hs, rr)};
  };
  const auto [p0, r0] = slopes(0.0);
  o.require(std::abs(p0 - 1.0) <= kSlopeTol, "plain slope 1.0 +- 0.1 at var_B=0");
  o.require(std::abs(r0 - 2.0) <= kSlopeTol, "RR slope 2.0 +- 0.1 at var_B=0");
  const double big = 1e4 * A;
  const auto [pb, rb] = slopes(big);
  o.require(std::abs(rb - 1.0) <= kSlopeTol, "RR slope degrades toward 1 at var_B >> A");
  o.note(fmt("var_B=0: plain %.3f, RR %.3f", p0, r0) +
         fmt("; var_B=1e4 A: plain %.3f, RR %.3f", pb, rb));

  const json spec{{"N", 10000}, {"fraction_levels", 1}, {"r_levels", 1},
                  {"spot_checks", {{std::ldexp(1.0, -6), 0.45}}}, {"spot_paths", 20000}};
  const auto r = run_experiment("rr-heatmap", spec, {});
  const auto z = r.tables.at("rr_heatmap_spot_checks").numeric_column("z");
  o.require(z.size() == 1 && std::abs(z[0]) <= kZLimit, "RR spot-check |z| <= 4");
  o.note(fmt("spot-check z %.2f", z.empty() ? NAN : z[0]));
  return o;
}

// 6. Oracle-certified minimal cost against N.
Outcome criterion6() {
  Outcome o;
  const auto r = run_experiment("cost-regimes", json::object(), {});
  const auto& t = r.tables.at("cost_regimes_slopes");
  const auto scheme = t.text_column("scheme");
  const auto slope = t.numeric_column("slope");
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    if (scheme[i] == "cv") {
      o.require(slope[i] <= kCvSlopeMax, "cv slope <= 0.2");
    } else {
      o.require(slope[i] >= kCostSlopeLo && slope[i] <= kCostSlopeHi,
                scheme[i] + " slope in [0.9, 1.15]");
    }
    o.note(scheme[i] + fmt(" slope %.3f", slope[i]));
  }
  const auto& rows = r.tables.at("cost_regimes");
  const auto pre = rows.numeric_column("precompute_cost");
  const auto sch = rows.text_column("scheme");
  const auto N = rows.numeric_column("N");
  for (std::size_t i = 0; i < pre.size(); ++i)
    if (sch[i] == "cv") o.require(pre[i] == N[i], "cv precompute reported as N");
  return o;
}

// 7. Stability guard and divergence detection.
Outcome criterion7() {
  Outcome o;
  const auto model = generate_gaussian_data(10000, 1.0, 1.0, 0.5, 20240601);
  RunConfig c;
  c.steps = 10000;
  c.paths = 4;
  c.seed = 7;
  c.convention = Convention::Langevin;
  c.initial = InitialCondition::point(ParamVector::Zero(1));
  c.h = 0.9 / model.A();
  try {
    const auto outs = run_paths(model, c);
    bool finite = true;
    for (const auto& p : outs) finite = finite && p.final_state.allFinite();
    o.require(finite, "finite states at h = 0.9/A");
  } catch (const std::exception& e) {
    o.require(false, std::string("h = 0.9/A completes (") + e.what() + ")");
  }
  c.h = 1.9 / model.A();
  bool guarded = false;
  try {
    run_paths(model, c);
  } catch (const StabilityError&) {
    guarded = true;
  }
  o.require(guarded, "h = 1.9/A refused without the override");
  c.allow_unstable = true;
  std::int64_t step = -1;
  try {
    run_paths(model, c);
  } catch (const DivergenceError& e) {
    step = e.step();
  }
  o.require(step >= 1 && step <= 10000, "divergence detected within 1e4 steps");
  o.note("divergence at step " + std::to_string(step));
  return o;
}

// 8. Logistic regression: same-cost points agree; MH reference has enough ESS.
Outcome criterion8() {
  Outcome o;
  const auto r = run_experiment("logreg-rmse", json::object(), {});
  const auto t = r.tables.at("logreg_rmse").filter("functional", "mean");
  const auto est = t.numeric_column("estimate");
  const auto se = t.numeric_column("bootstrap_se");
  const auto cost = t.numeric_column("term_evals");
  o.require(est.size() == 2, "two grid points");
  if (est.size() == 2) {
    o.require(cost[0] == cost[1], "equal realized cost");
    const double band = kSeMultiple * std::sqrt(se[0] * se[0] + se[1] * se[1]);
    o.require(std::abs(est[0] - est[1]) <= band, "scaled mean-RMSE within 2 combined SEs");
    o.note(fmt("sqrt(N) mean-RMSE %.3f vs %.3f, band %.3f", est[0], est[1], band));
  }
  for (const auto& [N, ref] : r.meta["reference"].items()) {
    double min_ess = INFINITY;
    for (double e : ref["ess"]) min_ess = std::min(min_ess, e);
    o.require(min_ess >= kMinEss, "MH batch-means ESS >= 1e4");
    o.note("N=" + N + fmt(" MH min ESS %.0f", min_ess));
  }
  return o;
}

// 9. Property suites.
Outcome criterion9() {
  Outcome o;
  // Finite differences.
  const auto g = generate_gaussian_data(50, 2.0, 0.5, 0.3, 3);
  const auto lg = generate_logreg_data(3, 300, 10.0, 4);
  double worst_fd = 0.0;
  auto fd_check = [&](const PosteriorModel& m, const ParamVector& x0) {
    ParamVector x = x0;
    const ParamVector an = m.full_grad(x);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double e = 1e-5 * std::max(1.0, std::abs(x[j]));
      const double keep = x[j];
      x[j] = keep + e;
      const double fp = m.log_posterior(x);
      x[j] = keep - e;
      const double fm = m.log_posterior(x);
      x[j] = keep;
      const double num = m.drift_scale() * (fp - fm) / (2 * e);
      worst_fd = std::max(worst_fd, std::abs(num - an[j]) / std::max(1.0, std::abs(an[j])));
    }
  };
  for (double v : {-1.0, 0.2, 2.0}) fd_check(g, ParamVector::Constant(1, v));
  const ParamVector lmode = find_mode(lg.model);
  fd_check(lg.model, lmode);
  fd_check(lg.model, lmode + ParamVector::Constant(3, 0.5));
  fd_check(lg.model, ParamVector::Zero(3));
  o.require(worst_fd <= kFdRelTol, "gradient/finite-difference <= 1e-5 relative");

  // Unbiasedness by enumeration.
  double worst_enum = 0.0;
  const auto small = generate_logreg_data(2, 12, 5.0, 5);
  const ParamVector smode = find_mode(small.model);
  const ParamVector x = smode + ParamVector::Constant(2, 0.25);
  CostLedger pre;
  for (std::size_t n = 1; n <= 12; ++n) {
    const ParamVector full = small.model.full_grad(x);
    worst_enum = std::max(worst_enum, (enumerated_gradient_mean(GradientScheme::naive(n),
                                                                small.model, x) - full)
                                          .cwiseAbs().maxCoeff());
    const auto cv = GradientScheme::control_variate(small.model, smode, n, pre);
    worst_enum = std::max(worst_enum,
                          (enumerated_gradient_mean(cv, small.model, x) - full).cwiseAbs().maxCoeff());
  }
  o.require(worst_enum <= kEnumTol, "enumerated mean equals full gradient <= 1e-12");

  // Control variate vanishes at the anchor.
  bool zero = true;
  {
    const auto cv = GradientScheme::control_variate(lg.model, lmode, 10, pre);
    GradientEstimator est(cv, lg.model);
    RngStream rng(9, 0);
    CostLedger led;
    ParamVector out(3);
    for (int k = 0; k < 200; ++k) {
      est.estimate(lmode, rng, led, out);
      zero = zero && (out.array() == 0.0).all();
    }
  }
  o.require(zero, "CV gradient exactly zero at the anchor");

  // Brascamp-Lieb: Var f <= 1/m for 1-Lipschitz f, m the curvature of -log pi.
  double bl_worst_z = -INFINITY;
  {
    const auto m = generate_gaussian_data(100, 1.0, 1.0, 0.5, 6);
    const double curvature = 1.0 / m.posterior_variance();
    RunConfig c;
    c.h = 0.005 / m.A();
    c.steps = 1500;
    c.paths = 20000;
    c.seed = 10;
    c.convention = Convention::Langevin;
    c.initial = InitialCondition::point(ParamVector::Constant(1, m.posterior_mean()));
    const auto outs = run_paths(m, c);
    for (const auto& f : {Functional::coordinate(0), Functional::abs_sin_centered(m.posterior_mean())}) {
      std::vector<double> v;
      for (const auto& p : outs) v.push_back(f(p.final_state));
      double mean = 0;
      for (double a : v) mean += a;
      mean /= static_cast<double>(v.size());
      double m2 = 0, m4 = 0;
      for (double a : v) {
        const double d = (a - mean) * (a - mean);
        m2 += d;
        m4 += d * d;
      }
      m2 /= static_cast<double>(v.size());
      m4 /= static_cast<double>(v.size());
      const double se = std::sqrt((m4 - m2 * m2) / static_cast<double>(v.size()));
      const double z = (m2 - 1.0 / curvature) / se;
      bl_worst_z = std::max(bl_worst_z, z);
      o.require(m2 <= 1.0 / curvature + kZLimit * se, "Brascamp-Lieb bound for " + f.name());
    }
  }

  // Bit-identical reruns across worker counts.
  bool identical = true;
  {
    RunConfig c;
    c.h = 2e-4;
    c.steps = 100;
    c.paths = 64;
    c.seed = 11;
    c.scheme = GradientScheme::naive(30);
    c.initial = InitialCondition::gaussian(lmode, 0.2);
    std::vector<std::vector<PathOutput>> runs;
    for (int threads : {1, 2, 8}) {
      c.threads = threads;
      runs.push_back(run_paths(lg.model, c));
    }
    for (std::size_t p = 0; p < runs[0].size(); ++p)
      for (int k = 1; k < 3; ++k)
        identical = identical && runs[0][p].final_state == runs[k][p].final_state &&
                    runs[0][p].ledger == runs[k][p].ledger;
  }
  o.require(identical, "bit-identical under 1, 2, 8 workers");
  o.note(fmt("fd max rel %.2g, enumeration max abs %.2g, BL max z %.2f", worst_fd, worst_enum,
             bl_worst_z));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only k]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<std::function<Outcome()>> criteria{
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9};
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  bool all = true;
  for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) {
    if (only != 0 && k != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s (%.1f s) %s\n", k, out.pass ? "PASS" : "FAIL", secs,
                out.detail.c_str());
    std::fflush(stdout);
    all = all && out.pass;
  }
  return all ? 0 : 1;
}
