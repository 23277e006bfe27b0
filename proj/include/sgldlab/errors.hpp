#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace sgldlab {

/// Invalid argument: dimension mismatch, out-of-range index, bad size.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exhaustive enumeration refused because the problem is too large.
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Newton iteration ran out of iterations before the gradient tolerance was met.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate,
                   double gradient_norm)
      : std::runtime_error(what),
        last_iterate_(std::move(last_iterate)),
        gradient_norm_(gradient_norm) {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  Eigen::VectorXd last_iterate_;
  double gradient_norm_;
};

/// Control-variate anchor is too far from the posterior mode.
class AnchorQualityError : public std::runtime_error {
 public:
  AnchorQualityError(const std::string& what, double gradient_norm, double tol)
      : std::runtime_error(what), gradient_norm_(gradient_norm), tol_(tol) {}

  double gradient_norm() const { return gradient_norm_; }
  double tolerance() const { return tol_; }

 private:
  double gradient_norm_;
  double tol_;
};

/// Stepsize outside the stability region and no override was given.
class StabilityError : public std::runtime_error {
 public:
  StabilityError(const std::string& what, double limit)
      : std::runtime_error(what), limit_(limit) {}

  double limit() const { return limit_; }

 private:
  double limit_;
};

/// A chain left the finite region. `step` is 1-based: the step whose update
/// produced the offending state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::int64_t path_id,
                  std::int64_t step)
      : std::runtime_error(what), path_id_(path_id), step_(step) {}

  std::int64_t path_id() const { return path_id_; }
  std::int64_t step() const { return step_; }

 private:
  std::int64_t path_id_;
  std::int64_t step_;
};

}  // namespace sgldlab
