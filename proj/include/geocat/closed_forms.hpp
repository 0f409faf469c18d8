#pragma once

// Exact mean extinction times and survival thresholds.

#include <optional>
#include <string>

#include "geocat/core.hpp"

namespace geocat {

/// Expected extinction time: a finite positive number or +infinity.
class MeanTime {
 public:
  static MeanTime finite(double value);
  static MeanTime infinite() { return MeanTime(); }

  bool is_finite() const noexcept { return value_.has_value(); }
  /// Throws DomainError when infinite.
  double value() const;
  /// Finite value, or +inf as a double.
  double as_double() const noexcept;
  /// Decimal text for finite values, the literal "inf" otherwise.
  std::string to_string() const;

  friend bool operator==(const MeanTime&, const MeanTime&) = default;

 private:
  MeanTime() = default;
  std::optional<double> value_;
};

enum class Regime { SubcriticalFiniteMean, CriticalInfiniteMean, SupercriticalPositiveSurvival };

/// "subcritical", "critical" or "supercritical".
std::string regime_name(Regime regime);

/// Absolute tolerance on p - p* that counts as sitting on a threshold.
inline constexpr double kThresholdTol = 1e-12;

MeanTime mean_time_no_dispersion(const ModelParams& params);
/// d must be 2 or 3; throws UnsupportedError otherwise.
MeanTime mean_time_optimal(const ModelParams& params, int d);
MeanTime mean_time_independent(const ModelParams& params, int d);
/// Dispatches on the scheme (closed forms only: a, o2, o3, i2, i3).
MeanTime mean_time(const ModelParams& params, const Scheme& scheme);

/// Auxiliary functions of the independent d = 3 formula.
double independent3_g(double lambda, double p);
double independent3_h(double lambda, double p);

/// Mean extinction time of a unit-death-rate branching process with offspring
/// pgf p0 + p1 s + p2 s^2 + p3 s^3. Throws DomainError when the law is not
/// normalized or f'(1) > 1.
MeanTime lemma_mean_time(double p0, double p1, double p2, double p3);

/// Critical survival probability p* of the model at birth rate lambda: the
/// process dies out a.s. iff p <= p*. Rational closed forms for a, o2, o3,
/// i2, i3; other degrees solve pgf_mean(offspring_law) = 1 by bisection.
double survival_threshold(const Scheme& scheme, double lambda);

Regime classify_regime(const ModelParams& params, const Scheme& scheme);

}  // namespace geocat
