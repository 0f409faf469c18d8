#pragma once

// Numerical ground truth that does not go through the closed forms:
// quadrature of the branching-process extinction-time integral and a
// truncated first-step linear system for the single-colony chain.

#include <cstddef>

#include "geocat/core.hpp"

namespace geocat {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  /// Set when the integral does not converge (critical or near-critical
  /// law) or the panel budget ran out; `value` is then meaningless.
  bool diverged = false;
  std::size_t panels = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  std::size_t max_panels = 10000;
};

/// Integrates (1 - y) / (f(y) - y) over [0, 1] for the law's pgf f.
/// Throws DomainError for supercritical laws (f'(1) > 1 + 1e-12).
/// Laws with f'(1) > 1 - 1e-6 are reported as diverged.
QuadratureResult narayan_mean_time(const OffspringLaw& law, QuadratureOptions options = {});

/// The integrand itself, with the removable singularity at y = 1 filled in.
double narayan_integrand(const OffspringLaw& law, double y);

/// Boundary condition replacing h_{M+1} in the truncated system.
enum class Closure {
  Reflecting,  ///< h_{M+1} := h_M
  Killing,     ///< h_{M+1} := 0
};

struct CtmcOptions {
  std::size_t truncation = 2000;
  Closure closure = Closure::Reflecting;
};

/// Expected hitting time of 0 from state 1 for the no-dispersion chain
/// (births at rate lambda, geometric catastrophes at rate 1), truncated to
/// states 1..M. Throws DomainError when M < 10 or p >= 1/(lambda+1).
double ctmc_hitting_time(const ModelParams& params, CtmcOptions options = {});

}  // namespace geocat
