#include <doctest.h>

#include <cmath>

#include "geocat/closed_forms.hpp"
#include "geocat/oracle.hpp"

using namespace geocat;

namespace {

// Reference values at (lambda, p) = (1, 0.2), computed with 30-digit Narayan
// quadrature of each offspring law (mpmath) and matching the closed forms.
constexpr double kA = 5.0 / 3.0;
constexpr double kO2 = 1.72609243471068556;  // 6 ln(4/3)
constexpr double kO3 = 1.83258146374831013;  // 2 ln(5/2)
constexpr double kI2 = 1.64089401114559164;  // 9 ln(1.2)
constexpr double kI3 = 1.70975062732527126;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("mean time without dispersion") {
  CHECK(mean_time_no_dispersion(ModelParams(1.0, 0.2)).value() == doctest::Approx(kA).epsilon(1e-15));
  CHECK_FALSE(mean_time_no_dispersion(ModelParams(1.0, 0.5)).is_finite());
  CHECK_FALSE(mean_time_no_dispersion(ModelParams(1.0, 0.7)).is_finite());
  for (double lambda : {0.1, 1.0, 10.0}) {
    CHECK(mean_time_no_dispersion(ModelParams(lambda, 1e-9)).value() == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("mean time with optimal dispersion") {
  const ModelParams params(1.0, 0.2);
  CHECK(mean_time_optimal(params, 2).value() == doctest::Approx(kO2).epsilon(1e-14));
  CHECK(mean_time_optimal(params, 2).value() == doctest::Approx(6.0 * std::log(4.0 / 3.0)).epsilon(1e-14));
  CHECK(mean_time_optimal(params, 3).value() == doctest::Approx(kO3).epsilon(1e-14));
  CHECK(mean_time_optimal(params, 3).value() == doctest::Approx(2.0 * std::log(2.5)).epsilon(1e-14));
  CHECK_FALSE(mean_time_optimal(ModelParams(1.0, 0.5), 2).is_finite());
  CHECK_FALSE(mean_time_optimal(ModelParams(0.4, 35.0 / 53.0), 3).is_finite());
  CHECK_THROWS_AS(mean_time_optimal(params, 4), UnsupportedError);
}

TEST_CASE("mean time with independent dispersion") {
  const ModelParams params(1.0, 0.2);
  CHECK(mean_time_independent(params, 2).value() == doctest::Approx(kI2).epsilon(1e-14));
  CHECK(mean_time_independent(params, 2).value() == doctest::Approx(9.0 * std::log(1.2)).epsilon(1e-14));
  CHECK(independent3_g(1.0, 0.2) == doctest::Approx(14.4).epsilon(1e-15));
  CHECK(independent3_h(1.0, 0.2) == doctest::Approx(std::sqrt(15.36)).epsilon(1e-15));
  CHECK(mean_time_independent(params, 3).value() == doctest::Approx(kI3).epsilon(1e-14));
  CHECK_FALSE(mean_time_independent(ModelParams(1.0, 0.6), 2).is_finite());
  CHECK_THROWS_AS(mean_time_independent(params, 5), UnsupportedError);
}

TEST_CASE("MeanTime serialization") {
  CHECK(MeanTime::infinite().to_string() == "inf");
  CHECK(MeanTime::finite(1.5).to_string() == "1.5");
  CHECK(std::isinf(MeanTime::infinite().as_double()));
  CHECK_THROWS_AS(MeanTime::infinite().value(), DomainError);
  CHECK_THROWS_AS(MeanTime::finite(0.0), DomainError);
}

TEST_CASE("mean time of laws on {0,1,2,3}") {
  CHECK(lemma_mean_time(0.5, 0.25, 0.25, 0.0).value() == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-15));
  // f'(1) = 1 in both branches.
  CHECK_FALSE(lemma_mean_time(0.25, 0.5, 0.25, 0.0).is_finite());
  CHECK_FALSE(lemma_mean_time(0.5, 0.25, 0.0, 0.25).is_finite());
  // p2 = p3 = 0: the integrand is the constant 1/p0.
  CHECK(lemma_mean_time(0.8, 0.2, 0.0, 0.0).value() == doctest::Approx(1.25));
  CHECK(lemma_mean_time(1.0, 0.0, 0.0, 0.0).value() == doctest::Approx(1.0));

  const double cubic = lemma_mean_time(0.5, 0.3, 0.1, 0.1).value();
  const auto quad = narayan_mean_time(OffspringLaw({0.5, 0.3, 0.1, 0.1}), {1e-13});
  CHECK(rel(cubic, quad.value) < 1e-10);

  CHECK_THROWS_AS(lemma_mean_time(0.1, 0.2, 0.3, 0.4), DomainError);  // supercritical
  CHECK_THROWS_AS(lemma_mean_time(0.5, 0.5, 0.5, 0.0), DomainError);  // not normalized
}

TEST_CASE("critical cubic law has infinite mean time") {
  // p1 + 2 p2 + 3 p3 = 1 with p3 > 0.
  CHECK_FALSE(lemma_mean_time(0.5, 0.2, 0.1, 0.2).is_finite());
}

TEST_CASE("closed forms agree with the generic cubic-law formula") {
  for (double lambda : {0.3, 1.0, 2.5}) {
    for (double frac : {0.1, 0.5, 0.9}) {
      for (int d : {2, 3}) {
        for (const Scheme& s : {Scheme::optimal(d), Scheme::independent(d)}) {
          const double p = frac * survival_threshold(s, lambda);
          const ModelParams params(lambda, p);
          const auto law = offspring_law(params, s);
          const double p3 = d == 3 ? law[3] : 0.0;
          const double via_generic = lemma_mean_time(law[0], law[1], law[2], p3).value();
          CHECK(rel(mean_time(params, s).value(), via_generic) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("survival thresholds") {
  CHECK(survival_threshold(Scheme::none(), 1.0) == doctest::Approx(0.5));
  CHECK(survival_threshold(Scheme::optimal(3), 0.4) == doctest::Approx(35.0 / 53.0).epsilon(1e-15));
  CHECK(survival_threshold(Scheme::independent(3), 2.2) == doctest::Approx(65.0 / 241.0).epsilon(1e-15));
  CHECK(survival_threshold(Scheme::independent(2), 1.0) == doctest::Approx(0.6));
  CHECK(survival_threshold(Scheme::none(), 2.2) == doctest::Approx(5.0 / 16.0));

  SUBCASE("numerical thresholds for general d agree with closed forms") {
    for (double lambda : {0.25, 1.0, 4.0}) {
      for (int d : {2, 3}) {
        for (const Scheme& s : {Scheme::optimal(d), Scheme::independent(d)}) {
          const double closed = survival_threshold(s, lambda);
          auto excess = [&](double p) { return pgf_mean(offspring_law(ModelParams(lambda, p), s)) - 1.0; };
          CHECK(excess(closed - 1e-9) < 0.0);
          CHECK(excess(closed + 1e-9) > 0.0);
        }
      }
    }
  }
  SUBCASE("general d by bisection") {
    for (int d : {4, 5}) {
      const double t_opt = survival_threshold(Scheme::optimal(d), 1.0);
      const double t_ind = survival_threshold(Scheme::independent(d), 1.0);
      CHECK(std::abs(pgf_mean(offspring_law(ModelParams(1.0, t_opt), Scheme::optimal(d))) - 1.0) < 1e-12);
      CHECK(std::abs(pgf_mean(offspring_law(ModelParams(1.0, t_ind), Scheme::independent(d))) - 1.0) < 1e-12);
      // more children and better dispersal lower the survival threshold
      CHECK(t_opt < survival_threshold(Scheme::optimal(d - 1), 1.0));
      CHECK(t_opt < t_ind);
    }
  }
}

TEST_CASE("regime classification") {
  CHECK(classify_regime(ModelParams(1.0, 0.2), Scheme::none()) == Regime::SubcriticalFiniteMean);
  CHECK(classify_regime(ModelParams(1.0, 0.5), Scheme::optimal(2)) == Regime::CriticalInfiniteMean);
  CHECK(classify_regime(ModelParams(0.4, 0.7), Scheme::optimal(3)) == Regime::SupercriticalPositiveSurvival);
  CHECK(classify_regime(ModelParams(0.4, 35.0 / 53.0), Scheme::optimal(3)) == Regime::CriticalInfiniteMean);
  CHECK(classify_regime(ModelParams(2.2, 65.0 / 241.0), Scheme::independent(3)) == Regime::CriticalInfiniteMean);
  CHECK(regime_name(Regime::CriticalInfiniteMean) == "critical");
}

TEST_CASE("ordering and monotonicity") {
  int violations = 0;
  for (int li = 1; li <= 40; ++li) {
    const double lambda = 0.125 * li;
    for (int pi = 1; pi <= 99; ++pi) {
      const double p = 0.01 * pi;
      const ModelParams params(lambda, p);
      for (int d : {2, 3}) {
        const auto o = mean_time_optimal(params, d);
        const auto i = mean_time_independent(params, d);
        if (o.is_finite() && i.is_finite() && o.value() < i.value() - 1e-12) ++violations;
        // optimal dispersion reaches criticality first
        if (o.is_finite() && !i.is_finite()) ++violations;
      }
      for (const Scheme& s : {Scheme::optimal(2), Scheme::independent(2)}) {
        const Scheme s3{s.kind, 3};
        const auto m2 = mean_time(params, s);
        const auto m3 = mean_time(params, s3);
        if (m3.is_finite() && m2.is_finite() && m3.value() < m2.value() - 1e-12) ++violations;
      }
      if (pi < 99) {
        const ModelParams up_p(lambda, p + 0.01);
        const ModelParams up_l(lambda + 0.125, p);
        for (const Scheme& s : {Scheme::none(), Scheme::optimal(2), Scheme::optimal(3), Scheme::independent(2),
                                Scheme::independent(3)}) {
          const auto base = mean_time(params, s);
          if (!base.is_finite()) continue;
          const auto a = mean_time(up_p, s);
          const auto b = mean_time(up_l, s);
          if (a.is_finite() && a.value() < base.value() - 1e-12) ++violations;
          if (b.is_finite() && b.value() < base.value() - 1e-12) ++violations;
        }
      }
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("mean times diverge approaching the threshold") {
  for (const Scheme& s : {Scheme::none(), Scheme::optimal(2), Scheme::optimal(3), Scheme::independent(2),
                          Scheme::independent(3)}) {
    const double threshold = survival_threshold(s, 1.0);
    double previous = 0.0;
    for (int k = 4; k <= 36; k += 4) {
      const double value = mean_time(ModelParams(1.0, threshold - std::ldexp(1.0, -k)), s).value();
      CHECK(value > previous);
      previous = value;
    }
    CHECK(previous > 10.0);
  }
}
