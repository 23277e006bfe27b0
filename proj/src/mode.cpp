#include "sgldlab/mode.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "sgldlab/errors.hpp"

namespace sgldlab {

namespace {

struct Objective {
  // Value, gradient and Hessian of a concave function to be maximised.
  std::function<double(const ParamVector&)> value;
  std::function<void(const ParamVector&, ParamVector&)> grad;
  std::function<Eigen::MatrixXd(const ParamVector&)> hessian;
};

ParamVector newton_maximise(const Objective& f, ParamVector x, double tol,
                            int max_iter, const std::string& who) {
  if (!(tol > 0.0)) throw ArgumentError(who + ": tol must be > 0");
  if (max_iter < 1) throw ArgumentError(who + ": max_iter must be >= 1");
  ParamVector g(x.size());
  f.grad(x, g);
  double gnorm = g.norm();
  double fx = f.value(x);
  for (int it = 0; it < max_iter && gnorm > tol; ++it) {
    const Eigen::MatrixXd neg_h = -f.hessian(x);
    ParamVector step;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_h);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive())
      step = ldlt.solve(g);
    else
      step = neg_h.fullPivLu().solve(g);
    if (!step.allFinite()) step = g;

    double t = 1.0;
    ParamVector trial = x + step;
    double ft = f.value(trial);
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::abs(fx));
    for (int halving = 0; halving < 60 && !(ft >= fx - slack); ++halving) {
      t *= 0.5;
      trial = x + t * step;
      ft = f.value(trial);
    }
    if (!(ft >= fx - slack)) break;
    x = trial;
    fx = ft;
    f.grad(x, g);
    gnorm = g.norm();
  }
  if (!(gnorm <= tol))
    throw ConvergenceError(who + ": gradient norm " + std::to_string(gnorm) +
                               " above tolerance " + std::to_string(tol),
                           x, gnorm);
  return x;
}

}  // namespace

double default_mode_tolerance(const PosteriorModel& model) {
  return 1e-10 * static_cast<double>(model.size());
}

ParamVector find_mode(const PosteriorModel& model, std::optional<double> tol,
                      int max_iter, std::optional<ParamVector> start) {
  const double t = tol.value_or(default_mode_tolerance(model));
  if (!(t > 0.0)) throw ArgumentError("find_mode: tol must be > 0");
  if (auto closed = model.closed_form_mode()) return *closed;
  ParamVector x0 = start.value_or(ParamVector::Zero(model.dim()));
  model.check_point(x0);
  Objective f{
      [&](const ParamVector& x) { return model.log_posterior_unchecked(x); },
      [&](const ParamVector& x, ParamVector& g) { model.full_grad_into(x, g); },
      [&](const ParamVector& x) { return model.full_hessian(x); }};
  return newton_maximise(f, std::move(x0), t, max_iter, "find_mode");
}

ParamVector find_term_mode(const PosteriorModel& model, std::size_t i,
                           std::optional<double> tol, int max_iter,
                           std::optional<ParamVector> start) {
  model.check_index(i);
  const double t = tol.value_or(1e-10);
  const double share = 1.0 / static_cast<double>(model.size());
  ParamVector x0 = start.value_or(ParamVector::Zero(model.dim()));
  model.check_point(x0);
  Objective f{
      [&](const ParamVector& x) {
        return share * model.log_prior(x) + model.log_lik_term(i, x);
      },
      [&](const ParamVector& x, ParamVector& g) {
        model.split_term_grad_into(i, x, g);
      },
      [&](const ParamVector& x) {
        return Eigen::MatrixXd(share * model.prior_hessian(x) +
                               model.lik_term_hessian(i, x));
      }};
  return newton_maximise(f, std::move(x0), t, max_iter, "find_term_mode");
}

}  // namespace sgldlab
