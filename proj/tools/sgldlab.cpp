// Command-line front end: experiments, data generation, sampling, oracle, MH.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sgldlab/errors.hpp"
#include "sgldlab/experiments.hpp"
#include "sgldlab/gaussian_oracle.hpp"
#include "sgldlab/mode.hpp"
#include "sgldlab/models.hpp"
#include "sgldlab/reference_mcmc.hpp"
#include "sgldlab/sampler.hpp"
#include "sgldlab/table.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sgldlab;

namespace {

struct ModelFlags {
  std::string data;
  std::optional<double> sigma_theta_sq, sigma_y_sq, prior_variance;
};

json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw ArgumentError("cannot read " + p.string());
  return json::parse(f);
}

fs::path sidecar(const fs::path& csv) {
  fs::path s = csv;
  s.replace_extension(".json");
  return s;
}

// Loads a model from a CSV written by `generate` (or any CSV with the same
// columns). Hyperparameters come from flags, else the JSON sidecar, else 1/10.
std::unique_ptr<PosteriorModel> load_model(const ModelFlags& mf) {
  if (mf.data.empty()) throw ArgumentError("--data is required");
  const NumericCsv csv = read_numeric_csv(mf.data);
  json meta = fs::exists(sidecar(mf.data)) ? read_json(sidecar(mf.data)) : json::object();
  const auto& cols = csv.columns;
  const std::size_t yi = static_cast<std::size_t>(
      std::find(cols.begin(), cols.end(), "y") - cols.begin());
  if (yi == cols.size()) throw ArgumentError("data file has no 'y' column");
  if (cols.size() == 1) {
    const double st = mf.sigma_theta_sq.value_or(meta.value("sigma_theta_sq", 1.0));
    const double sy = mf.sigma_y_sq.value_or(meta.value("sigma_y_sq", 1.0));
    return std::make_unique<GaussianConjugateModel>(st, sy, csv.data[yi]);
  }
  const std::size_t N = csv.data[yi].size();
  const int d = static_cast<int>(cols.size()) - 1;
  LogisticRegressionModel::RowMatrix X(static_cast<Eigen::Index>(N), d);
  int c = 0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (j == yi) continue;
    for (std::size_t i = 0; i < N; ++i) X(static_cast<Eigen::Index>(i), c) = csv.data[j][i];
    ++c;
  }
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(csv.data[yi].data(),
                                                        static_cast<Eigen::Index>(N));
  const double pv = mf.prior_variance.value_or(meta.value("prior_variance", 10.0));
  return std::make_unique<LogisticRegressionModel>(std::move(X), std::move(y), pv);
}

void add_model_flags(CLI::App* app, ModelFlags& mf) {
  app->add_option("--data", mf.data, "CSV data file (y, or x1..xd,y)")->required();
  app->add_option("--sigma-theta-sq", mf.sigma_theta_sq, "Gaussian prior variance");
  app->add_option("--sigma-y-sq", mf.sigma_y_sq, "Gaussian noise variance");
  app->add_option("--prior-variance", mf.prior_variance, "logistic prior variance");
}

ParamVector parse_point(const std::string& text, const PosteriorModel& model) {
  if (text == "mode") return find_mode(model);
  if (text == "zero") return ParamVector::Zero(model.dim());
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) v.push_back(std::stod(tok));
  if (v.size() == 1 && model.dim() > 1) v.assign(static_cast<std::size_t>(model.dim()), v[0]);
  if (static_cast<int>(v.size()) != model.dim())
    throw ArgumentError("--init: expected " + std::to_string(model.dim()) + " values");
  return Eigen::Map<ParamVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw ArgumentError("cannot write " + path);
  return file;
}

std::string row(const PathOutput& p, std::optional<std::string> chain) {
  std::string s = std::to_string(p.path_id);
  if (chain) s += "," + *chain;
  for (Eigen::Index j = 0; j < p.final_state.size(); ++j)
    s += "," + format_cell(p.final_state[j]);
  s += "," + std::to_string(p.ledger.term_evals) + "," + std::to_string(p.ledger.steps);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-gradient Langevin cost laboratory"};
  app.require_subcommand(1);

  // Experiments.
  std::string config, out_dir = "results";
  ExperimentOptions eo;
  std::vector<CLI::App*> experiments;
  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config, "JSON config file (defaults when omitted)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", eo.seed, "master seed");
    sub->add_option("--threads", eo.threads, "worker threads")->check(CLI::PositiveNumber);
    experiments.push_back(sub);
  }

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
  std::string gen_kind, gen_out;
  std::size_t gen_N = 1000;
  int gen_d = 3;
  double gen_st = 1.0, gen_sy = 1.0, gen_theta = 0.5, gen_pv = 10.0;
  std::uint64_t gen_seed = 1;
  gen->add_option("kind", gen_kind, "gaussian or logistic")
      ->required()->check(CLI::IsMember({"gaussian", "logistic"}));
  gen->add_option("--N", gen_N, "number of data points");
  gen->add_option("--d", gen_d, "logistic dimension");
  gen->add_option("--sigma-theta-sq", gen_st);
  gen->add_option("--sigma-y-sq", gen_sy);
  gen->add_option("--theta-true", gen_theta);
  gen->add_option("--prior-variance", gen_pv);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out, "CSV path; a .json sidecar is written next to it")->required();

  // sample
  auto* smp = app.add_subcommand("sample", "run SGLD paths and print final states");
  ModelFlags smf;
  smp->set_help_flag("--help", "print help");
  add_model_flags(smp, smf);
  double s_h = 0.0;
  std::optional<double> s_T;
  std::optional<std::int64_t> s_steps;
  std::int64_t s_paths = 1;
  std::uint64_t s_seed = 1;
  std::string s_init = "zero", s_conv = "langevin", s_scheme = "full", s_out;
  std::size_t s_batch = 1;
  bool s_rr = false, s_unstable = false;
  int s_threads = 1;
  smp->add_option("--h", s_h, "stepsize")->required();
  auto* oT = smp->add_option("--T", s_T, "horizon");
  auto* oS = smp->add_option("--steps", s_steps, "number of steps");
  oT->excludes(oS);
  smp->add_option("--paths", s_paths);
  smp->add_option("--seed", s_seed);
  smp->add_option("--init", s_init, "mode, zero, or comma-separated point");
  smp->add_flag("--rr", s_rr, "coupled (h, h/2) chains");
  smp->add_flag("--allow-unstable", s_unstable);
  smp->add_option("--convention", s_conv)->check(CLI::IsMember({"langevin", "ou"}));
  smp->add_option("--scheme", s_scheme)->check(CLI::IsMember({"full", "naive", "cv"}));
  smp->add_option("--batch", s_batch);
  smp->add_option("--threads", s_threads);
  smp->add_option("--out", s_out, "CSV path (stdout when omitted)");

  // oracle
  auto* orc = app.add_subcommand("oracle", "print Gaussian oracle quantities as JSON");
  ModelFlags omf;
  orc->set_help_flag("--help", "print help");
  add_model_flags(orc, omf);
  double o_h = 0.0, o_theta0 = 0.0;
  std::size_t o_n = 1;
  std::int64_t o_M = 0, o_P = 1;
  std::string o_scheme = "naive";
  orc->add_option("--h", o_h)->required();
  orc->add_option("--n", o_n, "batch size");
  orc->add_option("--M", o_M, "steps (0 for stationary)");
  orc->add_option("--P", o_P, "paths");
  orc->add_option("--theta0", o_theta0);
  orc->add_option("--scheme", o_scheme)->check(CLI::IsMember({"full", "naive", "cv"}));

  // mh
  auto* mhc = app.add_subcommand("mh", "random-walk Metropolis-Hastings reference");
  ModelFlags mmf;
  add_model_flags(mhc, mmf);
  MhConfig mcfg = MhConfig::logistic_default(1);
  std::string m_out = "mh_samples.csv";
  bool m_iso = false;
  mhc->add_option("--steps", mcfg.steps);
  mhc->add_option("--burn-in", mcfg.burn_in);
  mhc->add_option("--thin", mcfg.thin);
  mhc->add_option("--seed", mcfg.seed);
  mhc->add_option("--scale", mcfg.proposal_scale, "initial proposal scale");
  mhc->add_flag("--isotropic", m_iso, "disable Laplace preconditioning");
  mhc->add_option("--out", m_out, "samples CSV; metadata goes to the .json sidecar");

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t k = 0; k < experiments.size(); ++k) {
      if (!*experiments[k]) continue;
      const json spec = config.empty() ? json::object() : read_json(config);
      const ExperimentResult res = run_experiment(experiment_names()[k], spec, eo);
      write_experiment(res, out_dir);
      std::cout << "wrote " << out_dir << " (" << res.tables.size() << " tables)\n";
      if (!res.passed) {
        std::cerr << "validation failed\n";
        return 2;
      }
      return 0;
    }

    if (*gen) {
      json meta{{"model", gen_kind}, {"N", gen_N}, {"seed", gen_seed}};
      CsvTable t;
      if (gen_kind == "gaussian") {
        const auto m = generate_gaussian_data(gen_N, gen_st, gen_sy, gen_theta, gen_seed);
        t.columns = {"y"};
        for (double y : m.data()) t.add_row({y});
        meta["sigma_theta_sq"] = gen_st;
        meta["sigma_y_sq"] = gen_sy;
        meta["theta_true"] = gen_theta;
        meta["posterior_mean"] = m.posterior_mean();
        meta["posterior_variance"] = m.posterior_variance();
      } else {
        const auto ds = generate_logreg_data(gen_d, gen_N, gen_pv, gen_seed);
        for (int j = 1; j <= gen_d; ++j) t.columns.push_back("x" + std::to_string(j));
        t.columns.push_back("y");
        const auto& X = ds.model.covariates();
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
          std::vector<Cell> r;
          for (Eigen::Index j = 0; j < X.cols(); ++j) r.emplace_back(X(i, j));
          r.emplace_back(ds.model.labels()[i]);
          t.add_row(std::move(r));
        }
        meta["d"] = gen_d;
        meta["prior_variance"] = gen_pv;
        meta["true_weights"] = std::vector<double>(ds.true_weights.data(),
                                                   ds.true_weights.data() + gen_d);
      }
      t.write(gen_out);
      std::ofstream(sidecar(gen_out)) << meta.dump(2) << '\n';
      return 0;
    }

    if (*smp) {
      const auto model = load_model(smf);
      RunConfig cfg;
      cfg.h = s_h;
      cfg.horizon = s_T;
      cfg.steps = s_steps;
      cfg.paths = s_paths;
      cfg.seed = s_seed;
      cfg.convention = parse_convention(s_conv);
      cfg.allow_unstable = s_unstable;
      cfg.threads = s_threads;
      cfg.initial = InitialCondition::point(parse_point(s_init, *model));
      CostLedger pre;
      switch (parse_scheme_kind(s_scheme)) {
        case SchemeKind::Full: cfg.scheme = GradientScheme::full(); break;
        case SchemeKind::NaiveSubsample: cfg.scheme = GradientScheme::naive(s_batch); break;
        case SchemeKind::ControlVariate:
          cfg.scheme = GradientScheme::control_variate(*model, find_mode(*model), s_batch, pre);
          std::cerr << "control-variate precompute term_evals=" << pre.term_evals << '\n';
          break;
      }
      std::ofstream file;
      std::ostream& os = output(s_out, file);
      std::string header = s_rr ? "path_id,chain" : "path_id";
      for (int j = 1; j <= model->dim(); ++j) header += ",theta_" + std::to_string(j);
      os << header << ",term_evals,steps\n";
      if (s_rr) {
        for (const auto& [coarse, fine] : run_rr_pairs(*model, cfg)) {
          os << row(coarse, "coarse") << '\n' << row(fine, "fine") << '\n';
        }
      } else {
        for (const auto& p : run_paths(*model, cfg)) os << row(p, std::nullopt) << '\n';
      }
      return 0;
    }

    if (*orc) {
      const auto model = load_model(omf);
      const auto* g = dynamic_cast<const GaussianConjugateModel*>(model.get());
      if (!g) throw ArgumentError("oracle: the data file must describe the Gaussian model");
      const SchemeKind kind = parse_scheme_kind(o_scheme);
      const auto in = oracle::inputs_for(*g, kind, o_n, o_h, o_theta0,
                                         o_M > 0 ? std::optional<std::int64_t>(o_M) : std::nullopt,
                                         o_P);
      const auto rr = oracle::rr_variance_bias(in.A, in.h, in.var_B);
      json j{{"A", in.A},
             {"mean_B", in.mean_B},
             {"var_B", in.var_B},
             {"h", in.h},
             {"n", o_n},
             {"scheme", o_scheme},
             {"posterior_mean", g->posterior_mean()},
             {"posterior_variance", g->posterior_variance()},
             {"stationary_variance", oracle::stationary_variance(in.A, in.h, in.var_B)},
             {"mean", oracle::mean(in)},
             {"bias", oracle::bias(in)},
             {"variance", oracle::variance(in)},
             {"inflation_constant", oracle::inflation_constant(in)},
             {"printed_variance", oracle::printed_variance(in)},
             {"mse", oracle::mse(in)},
             {"printed_mse", oracle::printed_mse(in)},
             {"variance_bias", rr.plain_bias},
             {"rr_variance_bias", rr.rr_bias}};
      if (o_M > 0) {
        j["M"] = o_M;
        j["P"] = o_P;
        j["variance_recursion"] = oracle::variance_recursion(in);
      }
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*mhc) {
      const auto model = load_model(mmf);
      mcfg.precondition = !m_iso;
      mcfg.initial = find_mode(*model);
      const MhResult r = mh_sample(*model, mcfg);
      CsvTable t;
      for (int j = 1; j <= model->dim(); ++j) t.columns.push_back("theta_" + std::to_string(j));
      for (const auto& s : r.samples) {
        std::vector<Cell> cells;
        for (Eigen::Index j = 0; j < s.size(); ++j) cells.emplace_back(s[j]);
        t.add_row(std::move(cells));
      }
      t.write(m_out);
      const ParamVector mu = r.mean(), sd = r.stddev();
      json meta{{"acceptance_rate", r.acceptance_rate},
                {"tuned_scale", r.tuned_scale},
                {"ess", r.ess},
                {"min_ess", r.min_ess()},
                {"samples", r.samples.size()},
                {"mean", std::vector<double>(mu.data(), mu.data() + mu.size())},
                {"std", std::vector<double>(sd.data(), sd.data() + sd.size())},
                {"preconditioned", mcfg.precondition},
                {"warnings", r.warnings}};
      std::ofstream(sidecar(m_out)) << meta.dump(2) << '\n';
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
