#include "geocat/oracle.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "geocat/closed_forms.hpp"

namespace geocat {

namespace {

constexpr double kSupercriticalTol = 1e-12;
constexpr double kNearCritical = 1e-6;

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
};

template <class F>
std::pair<double, double> gauss_kronrod15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

double narayan_integrand(const OffspringLaw& law, double y) {
  // f(y) - y = (1 - y) * (1 - sum_i y^i P(K > i)), so the quotient has no
  // 0/0 at y = 1, where it equals 1 / (1 - f'(1)).
  const auto probs = law.probs();
  double tail = 1.0;
  double denom = 1.0;
  double power = 1.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    tail -= probs[i];
    denom -= power * tail;
    power *= y;
  }
  return 1.0 / denom;
}

QuadratureResult narayan_mean_time(const OffspringLaw& law, QuadratureOptions options) {
  if (!(options.abs_tol > 0.0)) throw DomainError("quadrature tolerance must be positive");
  const double mean = pgf_mean(law);
  if (mean > 1.0 + kSupercriticalTol) {
    throw DomainError("supercritical offspring law (f'(1) > 1): the integral is not the mean time");
  }
  QuadratureResult result;
  if (mean > 1.0 - kNearCritical) {
    result.value = std::numeric_limits<double>::infinity();
    result.error_estimate = std::numeric_limits<double>::infinity();
    result.diverged = true;
    return result;
  }

  auto integrand = [&law](double y) { return narayan_integrand(law, y); };
  std::vector<Panel> stack{{0.0, 1.0}};
  while (!stack.empty()) {
    const Panel panel = stack.back();
    stack.pop_back();
    if (++result.panels > options.max_panels) {
      result.diverged = true;
      result.value = std::numeric_limits<double>::infinity();
      return result;
    }
    const auto [value, error] = gauss_kronrod15(integrand, panel.a, panel.b);
    const double width = panel.b - panel.a;
    if (error <= options.abs_tol * width || width < 1e-12) {
      result.value += value;
      result.error_estimate += error;
      continue;
    }
    const double mid = 0.5 * (panel.a + panel.b);
    stack.push_back({mid, panel.b});
    stack.push_back({panel.a, mid});
  }
  return result;
}

double ctmc_hitting_time(const ModelParams& params, CtmcOptions options) {
  const std::size_t m = options.truncation;
  if (m < 10) throw DomainError("CTMC truncation must be at least 10");
  if (classify_regime(params, Scheme::none()) != Regime::SubcriticalFiniteMean) {
    throw DomainError("CTMC hitting time is infinite for p >= 1/(lambda+1)");
  }
  const double lambda = params.lambda();
  const double p = params.p();
  const double q = 1.0 - p;

  // Row i (1-based) holds columns 1..i+1 (lower Hessenberg), packed
  // starting at offset i(i+1)/2 - 1.
  auto offset = [](std::size_t i) { return i * (i + 1) / 2 - 1; };
  std::vector<double> a(offset(m + 1));
  std::vector<double> rhs(m + 1, 1.0);
  std::vector<double> qpow(m + 1);
  qpow[0] = 1.0;
  for (std::size_t k = 1; k <= m; ++k) qpow[k] = qpow[k - 1] * q;

  for (std::size_t i = 1; i <= m; ++i) {
    double* row = &a[offset(i)];  // row[j-1] is column j
    for (std::size_t j = 1; j < i; ++j) row[j - 1] = -p * qpow[i - j];
    row[i - 1] = lambda + 1.0 - p;  // mu_ii = p
    if (i < m) {
      row[i] = -lambda;
    } else if (options.closure == Closure::Reflecting) {
      row[i - 1] -= lambda;
    }
  }

  // Eliminate the superdiagonal bottom-up, leaving a lower-triangular system.
  for (std::size_t i = m; i >= 1; --i) {
    double* row = &a[offset(i)];
    const double pivot = row[i - 1];
    if (!std::isfinite(pivot) || std::abs(pivot) < 1e-300) {
      std::ostringstream msg;
      msg << "CTMC system is singular at row " << i << " (pivot " << pivot << ", M = " << m << ")";
      throw NumericalError(msg.str());
    }
    if (i == 1) break;
    double* above = &a[offset(i - 1)];
    const double factor = above[i - 1] / pivot;  // column i of row i-1
    for (std::size_t j = 0; j < i; ++j) above[j] -= factor * row[j];
    above[i - 1] = 0.0;
    rhs[i - 1] -= factor * rhs[i];
  }

  const double h1 = rhs[1] / a[offset(1)];
  if (!std::isfinite(h1) || h1 <= 0.0) {
    std::ostringstream msg;
    msg << "CTMC solve produced h_1 = " << h1 << " (M = " << m << ")";
    throw NumericalError(msg.str());
  }
  return h1;
}

}  // namespace geocat
