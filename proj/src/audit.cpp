#include "sgldlab/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "sgldlab/errors.hpp"
#include "sgldlab/mode.hpp"
#include "sgldlab/rng.hpp"
#include "sgldlab/subsample.hpp"

namespace sgldlab {

namespace {

// Sample points x* + 3 L z with L L^T the Laplace covariance at the mode.
std::vector<ParamVector> probe_points(const PosteriorModel& model,
                                      const ParamVector& mode, int count,
                                      RngStream& rng) {
  const Eigen::MatrixXd precision = -model.full_hessian(mode) / model.drift_scale();
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  Eigen::MatrixXd L;
  if (llt.info() == Eigen::Success)
    L = llt.matrixL().solve(Eigen::MatrixXd::Identity(model.dim(), model.dim()))
            .transpose();
  else
    L = Eigen::MatrixXd::Identity(model.dim(), model.dim());
  std::vector<ParamVector> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    pts.push_back(mode + 3.0 * L * gaussian_noise(model.dim(), rng));
  return pts;
}

}  // namespace

CurvatureBounds estimate_curvature_bounds(const PosteriorModel& model,
                                          int sample_points,
                                          std::uint64_t seed) {
  if (sample_points < 2)
    throw ArgumentError("estimate_curvature_bounds: need >= 2 sample points");
  RngStream rng(seed, stream_ids::kAudit);
  const ParamVector mode = find_mode(model);
  const auto pts = probe_points(model, mode, sample_points, rng);
  std::vector<ParamVector> grads;
  for (const auto& p : pts) grads.push_back(model.full_grad(p));

  CurvatureBounds b;
  b.m = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t c = a + 1; c < pts.size(); ++c) {
      const ParamVector dx = pts[c] - pts[a];
      const ParamVector dg = grads[c] - grads[a];
      const double r2 = dx.squaredNorm();
      if (!(r2 > 0.0)) continue;
      b.m = std::min(b.m, -dg.dot(dx) / r2);
      b.M = std::max(b.M, dg.norm() / std::sqrt(r2));
    }
  if (!std::isfinite(b.m)) b.m = 0.0;
  b.m = std::max(b.m, 0.0);
  return b;
}

ModelAssumptionReport audit_assumptions(const PosteriorModel& model,
                                        int sample_points, int batch,
                                        std::uint64_t seed) {
  if (sample_points < 2)
    throw ArgumentError("audit_assumptions: need >= 2 sample points");
  if (batch < 1) throw ArgumentError("audit_assumptions: batch must be >= 1");

  ModelAssumptionReport report;
  const CurvatureBounds b = estimate_curvature_bounds(model, sample_points, seed);
  report.strong_convexity_lower = b.m;
  report.lipschitz_upper = b.M;

  RngStream rng(seed, stream_ids::kAudit);
  rng.discard(std::uint64_t{1} << 40);
  const ParamVector mode = find_mode(model);
  const auto pts = probe_points(model, mode, sample_points, rng);

  const std::size_t N = model.size();
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(batch), N);
  const SubsetIndex tau = sample_without_replacement(N, n, rng);

  ParamVector ga(model.dim());
  double scatter = 0.0;
  for (auto i : tau.indices) {
    std::vector<ParamVector> grads;
    for (const auto& p : pts) {
      model.split_term_grad_into(i, p, ga);
      grads.push_back(ga);
    }
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t c = a + 1; c < pts.size(); ++c) {
        const double r = (pts[c] - pts[a]).norm();
        if (r > 0.0)
          report.per_term_lipschitz_max = std::max(
              report.per_term_lipschitz_max, (grads[c] - grads[a]).norm() / r);
      }
    const ParamVector xi = find_term_mode(model, i, std::nullopt, 500, mode);
    scatter += (xi - mode).squaredNorm();
  }
  report.mode_scatter = scatter / static_cast<double>(n);

  if (!model.strongly_log_concave())
    report.flags.push_back(
        "curvature measured near the mode only; the model is not strongly "
        "log-concave, so m is a local estimate");
  if (n < N)
    report.flags.push_back("per-term quantities use a random batch of " +
                           std::to_string(n) + " of " + std::to_string(N) +
                           " terms");
  return report;
}

}  // namespace sgldlab
