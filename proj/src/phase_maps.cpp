#include "geocat/phase_maps.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace geocat {

namespace {

constexpr double kScanStep = 1e-3;
constexpr double kBisectTol = 1e-12;
constexpr double kBoundaryGap = 1e-9;

struct Classified {
  RegionLabel label;
  std::optional<double> gap;
};

double bisect(ComparisonPair pair, double lambda, double lo, double hi, double g_lo) {
  for (int iter = 0; iter < 200 && hi - lo > kBisectTol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = gap(pair, lambda, mid);
    if (g_mid == 0.0) return mid;
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Classified classify(ComparisonPair pair, double lambda, double p) {
  const ModelParams params(lambda, p);
  const Scheme scheme = dispersion_scheme(pair);
  const bool single_finite = classify_regime(params, Scheme::none()) == Regime::SubcriticalFiniteMean;
  const bool disp_finite = classify_regime(params, scheme) == Regime::SubcriticalFiniteMean;

  if (!single_finite && !disp_finite) return {RegionLabel::BothInfinite, std::nullopt};
  if (!single_finite) return {RegionLabel::OnlyDispersionFinite, std::nullopt};
  if (!disp_finite) return {RegionLabel::OnlyNoDispersionFinite, std::nullopt};

  if (p < joint_extinction_bound(pair, lambda) - kBoundaryMargin) {
    const double g = gap(pair, lambda, p);
    if (std::abs(g) < kBoundaryGap) return {RegionLabel::Boundary, g};
    return {g > 0.0 ? RegionLabel::DispersionBetter : RegionLabel::NoDispersionBetter, g};
  }
  // Next to the boundary the log terms are too noisy for the gap; the means
  // themselves are large but finite and compare cleanly.
  const double diff = mean_time(params, scheme).value() - mean_time_no_dispersion(params).value();
  if (diff == 0.0) return {RegionLabel::Boundary, std::nullopt};
  return {diff > 0.0 ? RegionLabel::DispersionBetter : RegionLabel::NoDispersionBetter, std::nullopt};
}

}  // namespace

std::string pair_name(ComparisonPair pair) {
  switch (pair) {
    case ComparisonPair::AvsO2:
      return "a-o2";
    case ComparisonPair::AvsI2:
      return "a-i2";
    case ComparisonPair::AvsO3:
      return "a-o3";
    case ComparisonPair::AvsI3:
      return "a-i3";
  }
  return "?";
}

ComparisonPair parse_pair(const std::string& name) {
  for (auto pair : {ComparisonPair::AvsO2, ComparisonPair::AvsI2, ComparisonPair::AvsO3,
                    ComparisonPair::AvsI3}) {
    if (pair_name(pair) == name) return pair;
  }
  throw DomainError("unknown comparison pair '" + name + "' (expected a-o2, a-i2, a-o3 or a-i3)");
}

Scheme dispersion_scheme(ComparisonPair pair) {
  switch (pair) {
    case ComparisonPair::AvsO2:
      return Scheme::optimal(2);
    case ComparisonPair::AvsI2:
      return Scheme::independent(2);
    case ComparisonPair::AvsO3:
      return Scheme::optimal(3);
    case ComparisonPair::AvsI3:
      return Scheme::independent(3);
  }
  throw DomainError("unknown comparison pair");
}

std::string region_name(RegionLabel label) {
  switch (label) {
    case RegionLabel::DispersionBetter:
      return "gray";
    case RegionLabel::NoDispersionBetter:
      return "yellow";
    case RegionLabel::BothInfinite:
      return "both_inf";
    case RegionLabel::OnlyDispersionFinite:
      return "only_disp_finite";
    case RegionLabel::OnlyNoDispersionFinite:
      return "only_nodisp_finite";
    case RegionLabel::Boundary:
      return "boundary";
  }
  return "?";
}

double joint_extinction_bound(ComparisonPair pair, double lambda) {
  return std::min(survival_threshold(Scheme::none(), lambda),
                  survival_threshold(dispersion_scheme(pair), lambda));
}

double gap(ComparisonPair pair, double lambda, double p) {
  if (!(std::isfinite(lambda) && lambda > 0.0)) throw DomainError("gap: lambda must be positive");
  const double bound = joint_extinction_bound(pair, lambda);
  if (!(p > 0.0 && p < bound)) {
    throw DomainError("gap: p = " + std::to_string(p) + " is outside the joint-extinction region (0, " +
                      std::to_string(bound) + "); use classify_point");
  }
  const double lp = lambda * p;
  const double slack = 1.0 - p - lp;  // 1 / E[tau_A]

  switch (pair) {
    case ComparisonPair::AvsO2: {
      const double lhs = lp / (slack * (1.0 + lp));
      const double rhs = -std::log1p(-lp / (1.0 - p));
      return rhs - lhs;
    }
    case ComparisonPair::AvsI2: {
      const double lhs = lp * (lambda + 1.0) / (slack * (lambda + 2.0) * (lp + 1.0));
      const double denom = lambda + 2.0 - p * (lambda * lambda + 2.0 * lambda + 2.0);
      const double rhs = std::log1p(lp * (lambda + 1.0) / denom);
      return rhs - lhs;
    }
    case ComparisonPair::AvsO3: {
      const double root_a = std::sqrt(p * (lambda + 1.0));
      const double root_b = std::sqrt(4.0 + lp - 3.0 * p);
      const double lhs = lp * root_b / (slack * (1.0 + lp) * root_a);
      const double rhs = 2.0 * std::atanh(lp * root_b / ((2.0 - 2.0 * p - lp) * root_a));
      return rhs - lhs;
    }
    case ComparisonPair::AvsI3: {
      const double g = independent3_g(lambda, p);
      const double h = independent3_h(lambda, p);
      const double lhs = 2.0 * h / (slack * (lp + 1.0) * (2.0 * lambda + 3.0) * (lambda + 3.0));
      const double rhs = 2.0 * std::atanh(h / g);
      return rhs - lhs;
    }
  }
  throw DomainError("unknown comparison pair");
}

SearchInterval default_interval(ComparisonPair pair, double lambda) {
  return {kBoundaryMargin, joint_extinction_bound(pair, lambda) - kBoundaryMargin};
}

std::vector<double> critical_points(ComparisonPair pair, double lambda) {
  return critical_points(pair, lambda, default_interval(pair, lambda));
}

std::vector<double> critical_points(ComparisonPair pair, double lambda, SearchInterval interval) {
  if (!(lambda > 0.0)) throw DomainError("critical_points: lambda must be positive");
  if (!(interval.lo < interval.hi)) throw DomainError("critical_points: empty search interval");
  std::vector<double> roots;
  double p_prev = interval.lo;
  double g_prev = gap(pair, lambda, p_prev);
  if (g_prev == 0.0) roots.push_back(p_prev);
  for (std::size_t k = 1;; ++k) {
    const double p = std::min(interval.lo + static_cast<double>(k) * kScanStep, interval.hi);
    const double g = gap(pair, lambda, p);
    if (g == 0.0) {
      roots.push_back(p);
    } else if (g_prev != 0.0 && (g < 0.0) != (g_prev < 0.0)) {
      roots.push_back(bisect(pair, lambda, p_prev, p, g_prev));
    }
    if (p >= interval.hi) break;
    p_prev = p;
    g_prev = g;
  }
  return roots;
}

RegionLabel classify_point(ComparisonPair pair, double lambda, double p) {
  return classify(pair, lambda, p).label;
}

double GridRange::at(std::size_t i) const {
  if (i + 1 == n) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

std::vector<GridCell> sweep_grid(ComparisonPair pair, const GridRange& lambdas, const GridRange& ps,
                                 unsigned workers) {
  if (lambdas.n < 2 || ps.n < 2) throw DomainError("sweep_grid: each range needs at least 2 points");
  if (!(lambdas.lo > 0.0 && lambdas.hi >= lambdas.lo)) throw DomainError("sweep_grid: bad lambda range");
  if (!(ps.lo > 0.0 && ps.hi < 1.0 && ps.hi >= ps.lo)) throw DomainError("sweep_grid: bad p range");

  std::vector<GridCell> cells(lambdas.n * ps.n);
  std::atomic<std::size_t> next_row{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t row = next_row++; row < lambdas.n; row = next_row++) {
        const double lambda = lambdas.at(row);
        for (std::size_t col = 0; col < ps.n; ++col) {
          const double p = ps.at(col);
          const auto [label, g] = classify(pair, lambda, p);
          cells[row * ps.n + col] = GridCell{lambda, p, g, label};
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next_row = lambdas.n;
    }
  };

  unsigned n_workers = workers ? workers : std::max(1u, std::thread::hardware_concurrency());
  n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, lambdas.n));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return cells;
}

void write_phase_csv(std::ostream& out, const std::vector<GridCell>& cells) {
  out << "lambda,p,gap,region\n";
  char buf[128];
  for (const auto& cell : cells) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,", cell.lambda, cell.p);
    out << buf;
    if (cell.gap) {
      std::snprintf(buf, sizeof buf, "%.9g", *cell.gap);
      out << buf;
    }
    out << ',' << region_name(cell.region) << '\n';
  }
}

}  // namespace geocat
