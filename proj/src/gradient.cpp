#include "sgldlab/gradient.hpp"

#include <cmath>
#include <numeric>

#include "sgldlab/errors.hpp"
#include "sgldlab/mode.hpp"

namespace sgldlab {

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Full: return "full";
    case SchemeKind::NaiveSubsample: return "naive";
    case SchemeKind::ControlVariate: return "cv";
  }
  return "unknown";
}

SchemeKind parse_scheme_kind(const std::string& name) {
  if (name == "full") return SchemeKind::Full;
  if (name == "naive") return SchemeKind::NaiveSubsample;
  if (name == "cv") return SchemeKind::ControlVariate;
  throw ArgumentError("unknown scheme '" + name + "' (expected full|naive|cv)");
}

GradientScheme GradientScheme::full() { return GradientScheme{}; }

GradientScheme GradientScheme::naive(std::size_t batch) {
  if (batch < 1) throw ArgumentError("naive scheme: batch must be >= 1");
  GradientScheme s;
  s.kind_ = SchemeKind::NaiveSubsample;
  s.batch_ = batch;
  return s;
}

GradientScheme GradientScheme::control_variate(const PosteriorModel& model,
                                               const ParamVector& anchor,
                                               std::size_t batch,
                                               CostLedger& ledger,
                                               std::optional<double> tol) {
  model.check_point(anchor);
  const std::size_t N = model.size();
  if (batch < 1 || batch > N)
    throw ArgumentError("control-variate scheme: need 1 <= batch <= N");
  const double t = tol.value_or(default_mode_tolerance(model));
  const double gnorm = model.full_grad(anchor).norm();
  if (!(gnorm <= 100.0 * t))
    throw AnchorQualityError("control-variate anchor is not a posterior mode: "
                             "|full_grad| = " + std::to_string(gnorm) +
                                 " > 100 * tol = " + std::to_string(100.0 * t),
                             gnorm, t);

  auto grads = std::make_shared<Eigen::MatrixXd>(model.dim(),
                                                 static_cast<Eigen::Index>(N));
  ParamVector g(model.dim());
  for (std::size_t i = 0; i < N; ++i) {
    model.split_term_grad_into(i, anchor, g);
    grads->col(static_cast<Eigen::Index>(i)) = g;
  }
  ledger.term_evals += N;

  GradientScheme s;
  s.kind_ = SchemeKind::ControlVariate;
  s.batch_ = batch;
  s.anchor_ = std::make_shared<const ParamVector>(anchor);
  s.anchor_grads_ = std::move(grads);
  return s;
}

void GradientScheme::validate(const PosteriorModel& model) const {
  const std::size_t N = model.size();
  if (kind_ != SchemeKind::Full && (batch_ < 1 || batch_ > N))
    throw ArgumentError("scheme batch " + std::to_string(batch_) +
                        " incompatible with N=" + std::to_string(N));
  if (kind_ == SchemeKind::ControlVariate) {
    if (!anchor_grads_ ||
        anchor_grads_->cols() != static_cast<Eigen::Index>(N) ||
        anchor_grads_->rows() != model.dim())
      throw ArgumentError("control-variate anchor gradients do not match model");
  }
}

GradientScheme precompute_cv(const PosteriorModel& model,
                             const ParamVector& anchor, std::size_t batch,
                             CostLedger& ledger, std::optional<double> tol) {
  return GradientScheme::control_variate(model, anchor, batch, ledger, tol);
}

GradientEstimator::GradientEstimator(const GradientScheme& scheme,
                                     const PosteriorModel& model)
    : scheme_(scheme), model_(model), n_(scheme.batch_for(model.size())) {
  scheme_.validate(model_);
  if (n_ < model_.size()) subsampler_ = &thread_subsampler(model_.size());
  if (scheme_.kind() == SchemeKind::ControlVariate && n_ == model_.size()) {
    all_.resize(model_.size());
    std::iota(all_.begin(), all_.end(), std::uint32_t{0});
  }
}

void GradientEstimator::estimate_with_subset(const ParamVector& x,
                                             std::span<const std::uint32_t> tau,
                                             ParamVector& out) const {
  const double scale =
      static_cast<double>(model_.size()) / static_cast<double>(tau.size());
  switch (scheme_.kind()) {
    case SchemeKind::Full:
      model_.full_grad_into(x, out);
      return;
    case SchemeKind::NaiveSubsample:
      out.setZero(model_.dim());
      model_.add_prior_grad(x, 1.0, out);
      model_.add_terms_grad(tau, x, scale, out);
      return;
    case SchemeKind::ControlVariate:
      out.setZero(model_.dim());
      model_.add_split_terms_diff(tau, x, scheme_.anchor_term_grads(), scale,
                                  out);
      return;
  }
}

void GradientEstimator::estimate(const ParamVector& x, RngStream& rng,
                                 CostLedger& ledger, ParamVector& out) {
  ledger.term_evals += n_;
  const bool whole = n_ == model_.size();
  switch (scheme_.kind()) {
    case SchemeKind::Full:
      model_.full_grad_into(x, out);
      return;
    case SchemeKind::NaiveSubsample:
      if (whole) {
        model_.full_grad_into(x, out);
        return;
      }
      estimate_with_subset(x, subsampler_->draw(n_, rng), out);
      return;
    case SchemeKind::ControlVariate:
      estimate_with_subset(x, whole ? std::span<const std::uint32_t>(all_)
                                    : subsampler_->draw(n_, rng),
                           out);
      return;
  }
}

ParamVector estimate_gradient(const GradientScheme& scheme,
                              const PosteriorModel& model, const ParamVector& x,
                              RngStream& rng, CostLedger& ledger) {
  model.check_point(x);
  GradientEstimator est(scheme, model);
  ParamVector out(model.dim());
  est.estimate(x, rng, ledger, out);
  return out;
}

namespace {

template <typename Visit>
void visit_enumerated(const GradientEstimator& est, const ParamVector& x,
                      Visit&& visit) {
  const std::size_t N = est.model().size();
  if (N > kEnumerationLimit)
    throw GuardError("gradient enumeration: N=" + std::to_string(N) +
                     " exceeds the enumeration limit of " +
                     std::to_string(kEnumerationLimit));
  ParamVector g(est.model().dim());
  for_each_subset(N, est.batch(), [&](std::span<const std::uint32_t> tau) {
    est.estimate_with_subset(x, tau, g);
    visit(g);
  });
}

}  // namespace

ParamVector enumerated_gradient_mean(const GradientScheme& scheme,
                                     const PosteriorModel& model,
                                     const ParamVector& x) {
  model.check_point(x);
  GradientEstimator est(scheme, model);
  ParamVector sum = ParamVector::Zero(model.dim());
  std::uint64_t count = 0;
  visit_enumerated(est, x, [&](const ParamVector& g) {
    sum += g;
    ++count;
  });
  return sum / static_cast<double>(count);
}

double gradient_variance(const GradientScheme& scheme,
                         const PosteriorModel& model, const ParamVector& x,
                         VarianceMode mode) {
  model.check_point(x);
  GradientEstimator est(scheme, model);
  std::vector<ParamVector> samples;
  if (std::holds_alternative<EnumerateMode>(mode)) {
    if (scheme.kind() == SchemeKind::Full) return 0.0;
    visit_enumerated(est, x, [&](const ParamVector& g) { samples.push_back(g); });
  } else {
    auto mc = std::get<MonteCarloMode>(mode);
    if (mc.draws < 2) throw ArgumentError("gradient_variance: need >= 2 draws");
    CostLedger scratch;
    ParamVector g(model.dim());
    for (std::size_t r = 0; r < mc.draws; ++r) {
      est.estimate(x, mc.rng, scratch, g);
      samples.push_back(g);
    }
  }
  ParamVector mean = ParamVector::Zero(model.dim());
  for (const auto& g : samples) mean += g;
  mean /= static_cast<double>(samples.size());
  double acc = 0.0;
  for (const auto& g : samples) acc += (g - mean).squaredNorm();
  const bool enumerate = std::holds_alternative<EnumerateMode>(mode);
  const double denom = static_cast<double>(samples.size()) - (enumerate ? 0.0 : 1.0);
  return acc / denom;
}

}  // namespace sgldlab
