#pragma once

// Comparison of each dispersion model against the single-colony model:
// sign of the mean-time difference, its roots in p, and region maps.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "geocat/closed_forms.hpp"

namespace geocat {

enum class ComparisonPair { AvsO2, AvsI2, AvsO3, AvsI3 };

/// "a-o2", "a-i2", "a-o3", "a-i3".
std::string pair_name(ComparisonPair pair);
ComparisonPair parse_pair(const std::string& name);
Scheme dispersion_scheme(ComparisonPair pair);

enum class RegionLabel {
  DispersionBetter,       ///< gray: dispersion lives longer on average
  NoDispersionBetter,     ///< yellow
  BothInfinite,
  OnlyDispersionFinite,
  OnlyNoDispersionFinite,
  Boundary,
};

/// CSV token: gray, yellow, both_inf, only_disp_finite, only_nodisp_finite, boundary.
std::string region_name(RegionLabel label);

/// Largest p for which both models die out with finite mean time.
double joint_extinction_bound(ComparisonPair pair, double lambda);

/// Right-hand side minus left-hand side of the pair's comparison inequality:
/// positive exactly when the dispersion model has the longer mean lifetime.
/// Throws DomainError unless 0 < p < joint_extinction_bound.
double gap(ComparisonPair pair, double lambda, double p);

struct SearchInterval {
  double lo;
  double hi;
};

/// Margin kept between gap evaluations and the joint-extinction boundary.
inline constexpr double kBoundaryMargin = 1e-6;

/// Default search interval: [margin, bound - margin].
SearchInterval default_interval(ComparisonPair pair, double lambda);

/// All sign changes of gap along p: scanned on a 1e-3 step, then bisected.
std::vector<double> critical_points(ComparisonPair pair, double lambda);
std::vector<double> critical_points(ComparisonPair pair, double lambda, SearchInterval interval);

RegionLabel classify_point(ComparisonPair pair, double lambda, double p);

/// Inclusive, evenly spaced range of n >= 2 points.
struct GridRange {
  double lo;
  double hi;
  std::size_t n;

  double at(std::size_t i) const;
};

struct GridCell {
  double lambda;
  double p;
  std::optional<double> gap;
  RegionLabel region;
};

/// Row-major over lambda (outer) then p (inner). `workers` = 0 picks the
/// hardware concurrency; the output never depends on it.
std::vector<GridCell> sweep_grid(ComparisonPair pair, const GridRange& lambdas, const GridRange& ps,
                                 unsigned workers = 0);

/// Header `lambda,p,gap,region`, 9 significant digits.
void write_phase_csv(std::ostream& out, const std::vector<GridCell>& cells);

}  // namespace geocat
