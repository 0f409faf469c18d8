#include "geocat/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace geocat {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kClampTol = 1e-15;

using i128 = __int128;

i128 checked_mul(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer overflow in combinatorics");
  return r;
}

i128 checked_add(i128 a, i128 b) {
  i128 r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer overflow in combinatorics");
  return r;
}

i128 checked_pow(i128 base, unsigned exp) {
  i128 r = 1;
  for (unsigned i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

i128 binomial128(unsigned n, unsigned k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  i128 r = 1;
  // r * (n - i) is always divisible by (i + 1) at this point.
  for (unsigned i = 0; i < k; ++i) r = checked_mul(r, n - i) / (i + 1);
  return r;
}

std::uint64_t narrow(i128 v) {
  if (v < 0 || v > static_cast<i128>(UINT64_MAX)) {
    throw OverflowError("combinatorial result exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(v);
}

// Clamps round-off negatives and renormalizes; anything below -kClampTol is a bug.
void sanitize(std::vector<double>& probs) {
  bool clamped = false;
  for (double& q : probs) {
    if (q < 0.0) {
      if (q < -kClampTol) {
        throw NumericalError("offspring probability " + std::to_string(q) +
                             " is negative beyond round-off");
      }
      q = 0.0;
      clamped = true;
    }
  }
  if (clamped) {
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& q : probs) q /= total;
  }
}

}  // namespace

ModelParams::ModelParams(double lambda, double p) : lambda_(lambda), p_(p) {
  if (!(std::isfinite(lambda) && lambda > 0.0)) {
    throw DomainError("lambda must be a finite positive number, got " + std::to_string(lambda));
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("p must lie in (0,1), got " + std::to_string(p));
  }
}

Scheme Scheme::optimal(int d) {
  if (d < 2) throw DomainError("dispersion degree d must be >= 2");
  return {Kind::Optimal, d};
}

Scheme Scheme::independent(int d) {
  if (d < 2) throw DomainError("dispersion degree d must be >= 2");
  return {Kind::Independent, d};
}

std::string Scheme::code() const {
  switch (kind) {
    case Kind::NoDispersion:
      return "a";
    case Kind::Optimal:
      return "o" + std::to_string(d);
    case Kind::Independent:
      return "i" + std::to_string(d);
  }
  return "?";
}

Scheme Scheme::parse(const std::string& code) {
  if (code == "a") return none();
  if (code.size() >= 2 && (code[0] == 'o' || code[0] == 'i')) {
    const std::string digits = code.substr(1);
    if (digits.size() <= 3 &&
        digits.find_first_not_of("0123456789") == std::string::npos) {
      const int d = std::stoi(digits);
      return code[0] == 'o' ? optimal(d) : independent(d);
    }
  }
  throw DomainError("unknown model '" + code + "' (expected a, o<d> or i<d>)");
}

double SurvivorLaw::pmf(std::uint64_t n) const {
  if (n == 0) return beta;
  return alpha * std::pow(c, static_cast<double>(n));
}

double SurvivorLaw::tail(std::uint64_t n) const {
  if (n == 0) return 1.0;
  return alpha * std::pow(c, static_cast<double>(n)) / (1.0 - c);
}

OffspringLaw::OffspringLaw(std::vector<double> probs) : probs_(std::move(probs)), mean_(0.0) {
  if (probs_.empty()) throw DomainError("offspring law needs at least p_0");
  double total = 0.0;
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    const double q = probs_[k];
    if (!(q >= 0.0) || !std::isfinite(q)) {
      throw DomainError("offspring probability p_" + std::to_string(k) + " is not in [0,1]");
    }
    total += q;
    mean_ += static_cast<double>(k) * q;
  }
  if (std::abs(total - 1.0) > kNormTol) {
    throw DomainError("offspring probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

double catastrophe_pmf(std::uint64_t i, std::uint64_t j, double p) {
  if (i < 1) throw DomainError("catastrophe_pmf: pre-catastrophe size must be >= 1");
  if (j > i) throw DomainError("catastrophe_pmf: survivors cannot exceed the population");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("catastrophe_pmf: p must lie in (0,1)");
  if (j == 0) return std::pow(1.0 - p, static_cast<double>(i));
  return p * std::pow(1.0 - p, static_cast<double>(i - j));
}

SurvivorLaw survivor_law(const ModelParams& params) {
  const double lambda = params.lambda();
  const double p = params.p();
  return {
      .beta = (1.0 - p) / (lambda * p + 1.0),
      .alpha = (lambda + 1.0) * p / (lambda * (lambda * p + 1.0)),
      .c = lambda / (lambda + 1.0),
  };
}

std::uint64_t surjection_count(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (n == 0) return 1;  // k == 0 here: the empty map
  i128 total = 0;
  for (unsigned j = 0; j <= k; ++j) {
    i128 term = checked_mul(binomial128(k, j), checked_pow(k - j, n));
    total = checked_add(total, (j % 2 == 0) ? term : -term);
  }
  return narrow(total);
}

std::uint64_t binomial(unsigned n, unsigned k) { return narrow(binomial128(n, k)); }

OffspringLaw offspring_law(const ModelParams& params, const Scheme& scheme) {
  if (!scheme.disperses()) {
    throw UnsupportedError("the no-dispersion model is not a colony branching process");
  }
  const auto law = survivor_law(params);
  const int d = scheme.d;
  std::vector<double> probs(static_cast<std::size_t>(d) + 1, 0.0);
  probs[0] = law.beta;

  if (scheme.kind == Scheme::Kind::Optimal) {
    double ck = 1.0;
    for (int k = 1; k < d; ++k) {
      ck *= law.c;
      probs[k] = law.alpha * ck;
    }
    // 1 - beta - alpha c (1 - c^{d-1}) / (1 - c)
    probs[d] = 1.0 - law.beta - law.alpha * law.c * (1.0 - std::pow(law.c, d - 1)) / (1.0 - law.c);
  } else {
    // sum_{n>=k} T(n,k) x^n with x = c/d, after exchanging the
    // inclusion-exclusion sum with the geometric tail in n.
    const double dd = static_cast<double>(d);
    double below = probs[0];
    for (int k = 1; k < d; ++k) {
      double series = 0.0;
      for (int j = 0; j < k; ++j) {
        const double x = static_cast<double>(k - j) * law.c / dd;
        const double term = static_cast<double>(binomial(k, j)) * std::pow(x, k) / (1.0 - x);
        series += (j % 2 == 0) ? term : -term;
      }
      probs[k] = law.alpha * static_cast<double>(binomial(d, k)) * series;
      below += probs[k];
    }
    probs[d] = 1.0 - below;
  }

  sanitize(probs);
  return OffspringLaw(std::move(probs));
}

double pgf_eval(const OffspringLaw& law, double s) {
  const auto probs = law.probs();
  double acc = 0.0;
  for (auto it = probs.rbegin(); it != probs.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double pgf_mean(const OffspringLaw& law) { return law.mean(); }

}  // namespace geocat
