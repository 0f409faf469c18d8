#include "geocat/closed_forms.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace geocat {

namespace {

constexpr double kLawTol = 1e-12;

// ln((a + b) / (a - b)) for 0 <= b < a, without forming the ratio.
double log_ratio(double a, double b) { return 2.0 * std::atanh(b / a); }

MeanTime checked_finite(double value, const char* what) {
  if (!std::isfinite(value) || value <= 0.0) {
    std::ostringstream msg;
    msg << what << " evaluated to " << value << " below its threshold";
    throw NumericalError(msg.str());
  }
  return MeanTime::finite(value);
}

bool below_threshold(const ModelParams& params, const Scheme& scheme) {
  return classify_regime(params, scheme) == Regime::SubcriticalFiniteMean;
}

void require_closed_form_degree(int d) {
  if (d != 2 && d != 3) {
    throw UnsupportedError("closed-form mean time exists only for d = 2 and d = 3, got d = " +
                           std::to_string(d) + "; use the quadrature oracle instead");
  }
}

}  // namespace

MeanTime MeanTime::finite(double value) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw DomainError("a finite mean time must be a positive number");
  }
  MeanTime t;
  t.value_ = value;
  return t;
}

double MeanTime::value() const {
  if (!value_) throw DomainError("mean time is infinite");
  return *value_;
}

double MeanTime::as_double() const noexcept {
  return value_ ? *value_ : std::numeric_limits<double>::infinity();
}

std::string MeanTime::to_string() const {
  if (!value_) return "inf";
  std::ostringstream out;
  out.precision(17);
  out << *value_;
  return out.str();
}

std::string regime_name(Regime regime) {
  switch (regime) {
    case Regime::SubcriticalFiniteMean:
      return "subcritical";
    case Regime::CriticalInfiniteMean:
      return "critical";
    case Regime::SupercriticalPositiveSurvival:
      return "supercritical";
  }
  return "?";
}

MeanTime mean_time_no_dispersion(const ModelParams& params) {
  if (!below_threshold(params, Scheme::none())) return MeanTime::infinite();
  const double lambda = params.lambda();
  const double p = params.p();
  return checked_finite(1.0 / (1.0 - p - lambda * p), "no-dispersion mean time");
}

MeanTime mean_time_optimal(const ModelParams& params, int d) {
  require_closed_form_degree(d);
  if (!below_threshold(params, Scheme::optimal(d))) return MeanTime::infinite();
  const double lambda = params.lambda();
  const double p = params.p();
  const double lp = lambda * p;

  if (d == 2) {
    // (1 + 1/(lambda p)) ln((1-p)/(1-p-lambda p))
    const double log_term = -std::log1p(-lp / (1.0 - p));
    return checked_finite((1.0 + 1.0 / lp) * log_term, "optimal d=2 mean time");
  }

  const double root_a = std::sqrt(p * (lambda + 1.0));
  const double root_b = std::sqrt(4.0 + lp - 3.0 * p);
  const double lead = (2.0 - 2.0 * p - lp) * root_a;
  const double value = (lp + 1.0) / lp * (root_a / root_b) * log_ratio(lead, lp * root_b);
  return checked_finite(value, "optimal d=3 mean time");
}

double independent3_g(double lambda, double p) {
  return (lambda + 3.0) * (2.0 * lambda + 3.0 - 3.0 * lambda * p - 3.0 * p - lambda * lambda * p);
}

double independent3_h(double lambda, double p) {
  return lambda * std::sqrt(p * (lambda + 1.0) * (p * lambda * lambda + 4.0 * lambda + 6.0 - 3.0 * p) *
                            (lambda + 3.0));
}

MeanTime mean_time_independent(const ModelParams& params, int d) {
  require_closed_form_degree(d);
  if (!below_threshold(params, Scheme::independent(d))) return MeanTime::infinite();
  const double lambda = params.lambda();
  const double p = params.p();
  const double lp = lambda * p;

  if (d == 2) {
    // The log argument (1-p)(lambda+2) / (lambda+2 - p(lambda^2+2lambda+2))
    // equals 1 + p lambda (lambda+1) / denominator.
    const double denom = lambda + 2.0 - p * (lambda * lambda + 2.0 * lambda + 2.0);
    const double log_term = std::log1p(lp * (lambda + 1.0) / denom);
    const double value = (lambda + 2.0) * (lp + 1.0) / (lp * (lambda + 1.0)) * log_term;
    return checked_finite(value, "independent d=2 mean time");
  }

  const double g = independent3_g(lambda, p);
  const double h = independent3_h(lambda, p);
  const double value =
      (lp + 1.0) * (2.0 * lambda + 3.0) * (lambda + 3.0) / (2.0 * h) * log_ratio(g, h);
  return checked_finite(value, "independent d=3 mean time");
}

MeanTime mean_time(const ModelParams& params, const Scheme& scheme) {
  switch (scheme.kind) {
    case Scheme::Kind::NoDispersion:
      return mean_time_no_dispersion(params);
    case Scheme::Kind::Optimal:
      return mean_time_optimal(params, scheme.d);
    case Scheme::Kind::Independent:
      return mean_time_independent(params, scheme.d);
  }
  throw UnsupportedError("unknown scheme");
}

MeanTime lemma_mean_time(double p0, double p1, double p2, double p3) {
  for (double q : {p0, p1, p2, p3}) {
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("lemma_mean_time: probabilities must be in [0,1]");
  }
  if (std::abs(p0 + p1 + p2 + p3 - 1.0) > kLawTol) {
    throw DomainError("lemma_mean_time: probabilities must sum to 1");
  }
  const double mean = p1 + 2.0 * p2 + 3.0 * p3;
  if (mean > 1.0 + kLawTol) {
    throw DomainError("lemma_mean_time: supercritical law (f'(1) > 1) has no finite mean time");
  }
  if (mean >= 1.0 - kLawTol) return MeanTime::infinite();

  if (p3 == 0.0) {
    // Integrand 1/(p0 - p2 y); with p2 = 0 it is the constant 1/p0.
    if (p2 == 0.0) return MeanTime::finite(1.0 / p0);
    return checked_finite(-std::log1p(-p2 / p0) / p2, "quadratic-law mean time");
  }
  const double disc = std::sqrt(4.0 * p0 * p3 + (p2 + p3) * (p2 + p3));
  const double lead = 2.0 * p0 - p2 - p3;
  return checked_finite(log_ratio(lead, disc) / disc, "cubic-law mean time");
}

double survival_threshold(const Scheme& scheme, double lambda) {
  if (!(std::isfinite(lambda) && lambda > 0.0)) throw DomainError("lambda must be positive");
  const double l2 = lambda * lambda;
  switch (scheme.kind) {
    case Scheme::Kind::NoDispersion:
      return 1.0 / (lambda + 1.0);
    case Scheme::Kind::Optimal:
      if (scheme.d == 2) return 1.0 / (lambda + 1.0);
      if (scheme.d == 3) return (lambda + 1.0) / (2.0 * l2 + 2.0 * lambda + 1.0);
      break;
    case Scheme::Kind::Independent:
      if (scheme.d == 2) return (lambda + 2.0) / (l2 + 2.0 * lambda + 2.0);
      if (scheme.d == 3) return (lambda + 3.0) / (2.0 * l2 + 3.0 * lambda + 3.0);
      break;
  }

  // The offspring mean increases in p from 0 (p -> 0) to above 1 (p -> 1).
  auto excess = [&](double p) { return pgf_mean(offspring_law(ModelParams(lambda, p), scheme)) - 1.0; };
  double lo = 1e-15;
  double hi = 1.0 - 1e-15;
  if (excess(hi) <= 0.0) throw NumericalError("offspring mean does not cross 1 on (0,1)");
  while (hi - lo > 1e-16) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Regime classify_regime(const ModelParams& params, const Scheme& scheme) {
  const double threshold = survival_threshold(scheme, params.lambda());
  const double delta = params.p() - threshold;
  if (std::abs(delta) <= kThresholdTol) return Regime::CriticalInfiniteMean;
  return delta < 0.0 ? Regime::SubcriticalFiniteMean : Regime::SupercriticalPositiveSurvival;
}

}  // namespace geocat
