#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sgldlab/gradient.hpp"
#include "sgldlab/sampler.hpp"
#include "sgldlab/table.hpp"

namespace sgldlab {

/// Tables keyed by file stem plus metadata for `meta.json`.
struct ExperimentResult {
  std::map<std::string, CsvTable> tables;
  nlohmann::json meta = nlohmann::json::object();
  /// False when a validation check failed (nonzero exit status).
  bool passed = true;
};

struct CostRegimePrediction {
  double epsilon = 0.0;
  std::int64_t N = 0;
  SchemeKind scheme = SchemeKind::Full;
  /// 1, 2 or 3: accuracy regime with boundaries at eps^{-1} = sqrt(N) and
  /// N (full, CV) or N^2 (naive).
  int regime = 1;
  /// Cost expression of that regime with unit constant.
  double cost = 0.0;
  std::string expression;
};

/// Boundaries use "<=" with a relative tolerance of 1e-12, so eps = N^{-1/2}
/// falls in regime 1.
CostRegimePrediction predict_cost(double epsilon, std::int64_t N,
                                  SchemeKind scheme);

/// T = c log(1/eps) / N with eps = N^{-1/2}.
double log_horizon(double c, std::int64_t N);

// ---------------------------------------------------------------------------
// Parameters. Every field can be set from the JSON spec under the same name.

struct GaussianDataParams {
  double sigma_theta_sq = 1.0;
  double sigma_y_sq = 1.0;
  double theta_true = 0.5;
  std::uint64_t data_seed = 20240601;
};

struct BiasVarianceParams {
  std::int64_t N = 10000;
  GaussianDataParams data;
  double h = 1e-5;
  double horizon_const = 5.0;
  /// Defaults to {N, 1000, 100, 10, 1} (entries > N dropped).
  std::vector<std::int64_t> batches;
  std::int64_t paths = 10000;
  double theta0 = 0.0;
  std::string convention = "ou";
  bool allow_unstable = false;
};

struct RmseConstantCostParams {
  std::vector<std::int64_t> Ns{1000, 10000};
  GaussianDataParams data;
  double horizon_const = 3.0;
  /// Family member f runs at n = round(f N), h = r_max f / A.
  std::vector<double> fractions{1.0, 0.5, 0.25, 0.125};
  double r_max = 0.4;
  std::int64_t paths = 10;
  std::int64_t replicates = 200;
  double theta0 = 0.0;
  int bootstrap = 1000;
};

struct HeatmapParams {
  std::int64_t N = 1000000;
  GaussianDataParams data;
  /// Batch fractions 2^{-k}, k = 0..fraction_levels-1 (n >= 1 kept).
  int fraction_levels = 17;
  /// r = r_max 2^{-j}, j = 0..r_levels-1, h = r / A.
  int r_levels = 11;
  double r_max = 0.9;
  bool rr = false;
  /// Simulation spot-checks, each (fraction, r).
  std::vector<std::pair<double, double>> spot_checks{
      {1.0, 0.45}, {1.0, 0.1125}, {std::ldexp(1.0, -10), 0.225},
      {std::ldexp(1.0, -14), 0.05625}, {std::ldexp(1.0, -12), 0.9}};
  std::int64_t spot_paths = 2000;
  /// Spot-check chains run K = ceil(spot_horizon_factor / r) steps from x*.
  double spot_horizon_factor = 12.0;
};

struct LogregRmseParams {
  int d = 3;
  double prior_variance = 10.0;
  std::vector<std::int64_t> Ns{1000};
  std::uint64_t data_seed = 2;
  /// T = horizon_const log(1/eps) / m, m the audited strong-convexity bound.
  double horizon_const = 1.5;
  /// (fraction, stepsize factor): n = round(fraction N), h = factor * h_ref,
  /// where h_ref is the audited stability limit times `h_ref_fraction`.
  std::vector<double> fractions{1.0, 0.5};
  double h_ref_fraction = 0.5;
  std::int64_t paths = 100;
  std::int64_t replicates = 50;
  std::int64_t mh_steps = 600000;
  std::int64_t mh_burn_in = 50000;
  std::int64_t mh_thin = 10;
  int bootstrap = 1000;
};

struct CostRegimesParams {
  std::vector<double> log10_Ns{3.0, 3.5, 4.0, 4.5, 5.0, 6.0};
  GaussianDataParams data;
  double theta0 = 0.0;
  /// r = h A grid for the search.
  std::vector<double> r_grid;  // default 0.05, 0.10, ..., 0.95
  /// Batch sizes searched: round(N 2^{-k/2}) and 1.
  int batch_levels_per_octave = 2;
  /// Simulate the chosen configuration when its total cost is below this.
  double sim_budget = 2e8;
  std::int64_t sim_replicates = 20;
};

struct OracleValidateParams {
  std::int64_t N = 100;
  GaussianDataParams data;
  double h = 1e-3;
  std::int64_t M = 50;
  std::int64_t paths = 10000;
  std::vector<std::int64_t> naive_batches{1, 10, 100};
  std::int64_t cv_batch = 10;
  double z_limit = 4.0;
  /// Negative control: run at h = corrupt_factor / A with the override.
  std::optional<double> corrupt_factor;
};

struct ExperimentOptions {
  std::uint64_t seed = 1;
  int threads = 1;
};

ExperimentResult run_bias_variance(const BiasVarianceParams& p,
                                   const ExperimentOptions& o);
ExperimentResult run_rmse_constant_cost(const RmseConstantCostParams& p,
                                        const ExperimentOptions& o);
ExperimentResult run_relbias_heatmap(const HeatmapParams& p,
                                     const ExperimentOptions& o);
ExperimentResult run_logreg_rmse(const LogregRmseParams& p,
                                 const ExperimentOptions& o);
ExperimentResult run_cost_regimes(const CostRegimesParams& p,
                                  const ExperimentOptions& o);
ExperimentResult run_oracle_validate(const OracleValidateParams& p,
                                     const ExperimentOptions& o);

/// Names accepted by `run_experiment`.
const std::vector<std::string>& experiment_names();

/// Dispatches on the name; `spec` holds parameter overrides. Unknown keys
/// throw ArgumentError.
ExperimentResult run_experiment(const std::string& name,
                                const nlohmann::json& spec,
                                const ExperimentOptions& o);

/// Writes `<stem>.csv` for every table and `meta.json` (with the config hash).
void write_experiment(const ExperimentResult& result,
                      const std::filesystem::path& out_dir);

}  // namespace sgldlab
