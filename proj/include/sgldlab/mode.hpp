#pragma once

#include <cstddef>
#include <optional>

#include "sgldlab/models.hpp"

namespace sgldlab {

/// Gradient tolerance used when the caller passes none: 1e-10 * N.
double default_mode_tolerance(const PosteriorModel& model);

/// Posterior mode by damped Newton on the full log posterior.
///
/// Returns x* with |full_grad(x*)| <= tol. Models with a closed-form mode
/// return it directly without iterating. Each Newton step is halved until the
/// log posterior does not decrease (up to rounding).
/// Throws ConvergenceError after `max_iter` iterations.
ParamVector find_mode(const PosteriorModel& model,
                      std::optional<double> tol = std::nullopt,
                      int max_iter = 100,
                      std::optional<ParamVector> start = std::nullopt);

/// Maximiser of the per-datum potential U_i = (1/N) log prior + log lik_i.
/// Default tolerance 1e-10.
ParamVector find_term_mode(const PosteriorModel& model, std::size_t i,
                           std::optional<double> tol = std::nullopt,
                           int max_iter = 200,
                           std::optional<ParamVector> start = std::nullopt);

}  // namespace sgldlab
