#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include <Eigen/Core>

#include "sgldlab/models.hpp"
#include "sgldlab/rng.hpp"
#include "sgldlab/subsample.hpp"

namespace sgldlab {

enum class SchemeKind { Full, NaiveSubsample, ControlVariate };

std::string to_string(SchemeKind kind);
/// Accepts "full", "naive", "cv". Throws ArgumentError otherwise.
SchemeKind parse_scheme_kind(const std::string& name);

/// Exact work counters. `term_evals` counts per-datum gradient terms.
struct CostLedger {
  std::uint64_t term_evals = 0;
  std::uint64_t steps = 0;
  std::uint64_t noise_draws = 0;

  CostLedger& operator+=(const CostLedger& other) {
    term_evals += other.term_evals;
    steps += other.steps;
    noise_draws += other.noise_draws;
    return *this;
  }
  friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

/// Which gradient estimator a run uses. Immutable and cheap to copy; the
/// control-variate anchor gradients are shared.
class GradientScheme {
 public:
  static GradientScheme full();
  static GradientScheme naive(std::size_t batch);
  /// Anchor gradients grad U_i(anchor) for every i. Charges N term
  /// evaluations to `ledger`. `tol` defaults to the mode-finder tolerance;
  /// throws AnchorQualityError if |full_grad(anchor)| > 100 tol.
  static GradientScheme control_variate(const PosteriorModel& model,
                                        const ParamVector& anchor,
                                        std::size_t batch, CostLedger& ledger,
                                        std::optional<double> tol = std::nullopt);

  SchemeKind kind() const { return kind_; }
  /// Batch size n; for Full this is 0 (meaning "all").
  std::size_t batch() const { return batch_; }
  /// Effective batch for a model of size N.
  std::size_t batch_for(std::size_t N) const {
    return kind_ == SchemeKind::Full ? N : batch_;
  }
  const ParamVector& anchor() const { return *anchor_; }
  /// d x N matrix; column i is grad U_i(anchor).
  const Eigen::MatrixXd& anchor_term_grads() const { return *anchor_grads_; }
  bool has_anchor() const { return static_cast<bool>(anchor_grads_); }

  /// Throws ArgumentError if the scheme does not fit the model.
  void validate(const PosteriorModel& model) const;

 private:
  SchemeKind kind_ = SchemeKind::Full;
  std::size_t batch_ = 0;
  std::shared_ptr<const ParamVector> anchor_;
  std::shared_ptr<const Eigen::MatrixXd> anchor_grads_;
};

/// Free-function form of the precomputation.
GradientScheme precompute_cv(const PosteriorModel& model,
                             const ParamVector& anchor, std::size_t batch,
                             CostLedger& ledger,
                             std::optional<double> tol = std::nullopt);

/// Stateful evaluator owning per-worker scratch (subsampler, buffers).
///
/// Estimates:
///   Full:  full_grad(x)                                       cost N
///   Naive: grad log prior(x) + (N/n) sum_{i in tau} grad log lik_i(x)   cost n
///   CV:    (N/n) sum_{i in tau} (grad U_i(x) - grad U_i(x*))  cost n
/// With n == N no subset is drawn and the rng is untouched.
class GradientEstimator {
 public:
  GradientEstimator(const GradientScheme& scheme, const PosteriorModel& model);

  void estimate(const ParamVector& x, RngStream& rng, CostLedger& ledger,
                ParamVector& out);
  /// Same estimator for a given subset tau (no draw, no cost charged).
  void estimate_with_subset(const ParamVector& x,
                            std::span<const std::uint32_t> tau,
                            ParamVector& out) const;

  const GradientScheme& scheme() const { return scheme_; }
  const PosteriorModel& model() const { return model_; }
  std::size_t batch() const { return n_; }

 private:
  GradientScheme scheme_;
  const PosteriorModel& model_;
  std::size_t n_;
  Subsampler* subsampler_ = nullptr;
  std::vector<std::uint32_t> all_;
};

/// One-shot estimate; allocates its own scratch.
ParamVector estimate_gradient(const GradientScheme& scheme,
                              const PosteriorModel& model, const ParamVector& x,
                              RngStream& rng, CostLedger& ledger);

struct EnumerateMode {};
struct MonteCarloMode {
  std::size_t draws;
  RngStream rng;
};
using VarianceMode = std::variant<EnumerateMode, MonteCarloMode>;

/// Trace of the covariance of the estimator over tau at x. Enumeration is
/// exact and refuses N > kEnumerationLimit with GuardError; Monte Carlo
/// returns the unbiased sample variance over `draws` subsets.
double gradient_variance(const GradientScheme& scheme,
                         const PosteriorModel& model, const ParamVector& x,
                         VarianceMode mode);

/// Exact mean of the estimator over all subsets (N <= kEnumerationLimit).
ParamVector enumerated_gradient_mean(const GradientScheme& scheme,
                                     const PosteriorModel& model,
                                     const ParamVector& x);

}  // namespace sgldlab
