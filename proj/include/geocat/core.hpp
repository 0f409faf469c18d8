#pragma once

// Model parameters, the geometric catastrophe law, the post-catastrophe
// survivor distribution and the colony offspring laws of the two dispersion
// schemes. The catastrophe rate is fixed to 1; time is measured in units of
// the mean time between catastrophes.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geocat/errors.hpp"

namespace geocat {

/// Birth rate per colony and per-individual catastrophe survival probability.
class ModelParams {
 public:
  ModelParams(double lambda, double p);

  double lambda() const noexcept { return lambda_; }
  double p() const noexcept { return p_; }

 private:
  double lambda_;
  double p_;
};

/// Which process is being described: the single-colony model, or one of the
/// two dispersion schemes on the rooted tree with `d` children per vertex.
struct Scheme {
  enum class Kind { NoDispersion, Optimal, Independent };

  Kind kind = Kind::NoDispersion;
  int d = 0;

  static Scheme none() { return {Kind::NoDispersion, 0}; }
  static Scheme optimal(int d);
  static Scheme independent(int d);

  bool disperses() const noexcept { return kind != Kind::NoDispersion; }

  /// Short model code: "a", "o<d>" or "i<d>".
  std::string code() const;
  /// Inverse of code(); throws DomainError on anything else.
  static Scheme parse(const std::string& code);

  friend bool operator==(const Scheme&, const Scheme&) = default;
};

/// Law of the number N of individuals alive right after a colony's
/// catastrophe: P(N=0) = beta, P(N=n) = alpha * c^n for n >= 1.
struct SurvivorLaw {
  double beta;
  double alpha;
  double c;

  double pmf(std::uint64_t n) const;
  /// P(N >= n) for n >= 1.
  double tail(std::uint64_t n) const;
};

/// Finite law p_0..p_d of the number of colonies a colony is replaced by.
class OffspringLaw {
 public:
  /// Validates nonnegativity and normalization (|sum - 1| < 1e-12).
  explicit OffspringLaw(std::vector<double> probs);

  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t k) const { return probs_.at(k); }
  std::size_t max_offspring() const noexcept { return probs_.size() - 1; }
  double mean() const noexcept { return mean_; }

 private:
  std::vector<double> probs_;
  double mean_;
};

/// mu_ij: probability that a catastrophe reduces a population of size i to j.
double catastrophe_pmf(std::uint64_t i, std::uint64_t j, double p);

SurvivorLaw survivor_law(const ModelParams& params);

/// Number of surjections from an n-set onto a k-set, by inclusion-exclusion
/// in checked 128-bit arithmetic. Throws OverflowError when the result (or an
/// intermediate term) does not fit.
std::uint64_t surjection_count(unsigned n, unsigned k);

/// Exact binomial coefficient; throws OverflowError past 64 bits.
std::uint64_t binomial(unsigned n, unsigned k);

/// Colony offspring law for a dispersion scheme. Throws UnsupportedError for
/// Scheme::none(), which is not a colony branching process.
OffspringLaw offspring_law(const ModelParams& params, const Scheme& scheme);

double pgf_eval(const OffspringLaw& law, double s);
double pgf_mean(const OffspringLaw& law);

}  // namespace geocat
