#include <doctest.h>

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>

#include "geocat/phase_maps.hpp"

using namespace geocat;

namespace {

constexpr ComparisonPair kPairs[] = {ComparisonPair::AvsO2, ComparisonPair::AvsI2, ComparisonPair::AvsO3,
                                     ComparisonPair::AvsI3};

double mean_difference(ComparisonPair pair, double lambda, double p) {
  const ModelParams params(lambda, p);
  return mean_time(params, dispersion_scheme(pair)).value() - mean_time_no_dispersion(params).value();
}

}  // namespace

TEST_CASE("pair names round-trip") {
  for (auto pair : kPairs) CHECK(parse_pair(pair_name(pair)) == pair);
  CHECK(pair_name(ComparisonPair::AvsI3) == "a-i3");
  CHECK(dispersion_scheme(ComparisonPair::AvsO3) == Scheme::optimal(3));
  CHECK_THROWS_AS(parse_pair("a-o4"), DomainError);
}

TEST_CASE("joint extinction bounds") {
  CHECK(joint_extinction_bound(ComparisonPair::AvsO2, 1.0) == doctest::Approx(0.5));
  CHECK(joint_extinction_bound(ComparisonPair::AvsI2, 1.0) == doctest::Approx(0.5));
  CHECK(joint_extinction_bound(ComparisonPair::AvsO3, 0.4) == doctest::Approx(35.0 / 53.0));
  CHECK(joint_extinction_bound(ComparisonPair::AvsI3, 2.2) == doctest::Approx(65.0 / 241.0));
}

TEST_CASE("gap domain") {
  CHECK_THROWS_AS(gap(ComparisonPair::AvsO2, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(gap(ComparisonPair::AvsO2, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(gap(ComparisonPair::AvsO2, -1.0, 0.2), DomainError);
  CHECK(std::isfinite(gap(ComparisonPair::AvsO2, 1.0, 0.5 - 1e-6)));
}

TEST_CASE("gap sign agrees with the mean-time difference") {
  for (auto pair : kPairs) {
    int checked = 0;
    for (int li = 1; li <= 100; ++li) {
      const double lambda = 0.05 * li;
      const double bound = joint_extinction_bound(pair, lambda);
      for (int pi = 1; pi <= 100; ++pi) {
        const double p = bound * pi / 101.0;
        const double g = gap(pair, lambda, p);
        const double diff = mean_difference(pair, lambda, p);
        if (std::abs(g) < 1e-9 || std::abs(diff) < 1e-9) continue;
        CHECK((g > 0.0) == (diff > 0.0));
        ++checked;
      }
    }
    CHECK(checked > 9000);
  }
}

TEST_CASE("critical points of the worked examples") {
  auto timed = [](ComparisonPair pair, double lambda) {
    const auto start = std::chrono::steady_clock::now();
    auto roots = critical_points(pair, lambda);
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(1));
    return roots;
  };
  auto o2 = timed(ComparisonPair::AvsO2, 1.0);
  REQUIRE(o2.size() == 1);
  CHECK(o2[0] == doctest::Approx(0.26905916).epsilon(1e-7));

  auto i2 = timed(ComparisonPair::AvsI2, 1.0);
  REQUIRE(i2.size() == 1);
  CHECK(i2[0] == doctest::Approx(0.17076729).epsilon(1e-7));

  auto o3 = timed(ComparisonPair::AvsO3, 0.4);
  REQUIRE(o3.size() == 2);
  CHECK(o3[0] == doctest::Approx(0.47248413).epsilon(1e-7));
  CHECK(o3[1] == doctest::Approx(0.65293387).epsilon(1e-7));

  auto i3 = timed(ComparisonPair::AvsI3, 2.2);
  REQUIRE(i3.size() == 2);
  CHECK(i3[0] == doctest::Approx(0.21739437).epsilon(1e-7));
  CHECK(i3[1] == doctest::Approx(0.25940631).epsilon(1e-7));
}

TEST_CASE("critical points are certified sign changes") {
  for (auto pair : kPairs) {
    for (double lambda : {0.4, 1.0, 2.2, 4.0}) {
      for (double root : critical_points(pair, lambda)) {
        CHECK(gap(pair, lambda, root - 1e-8) * gap(pair, lambda, root + 1e-8) < 0.0);
      }
    }
  }
}

TEST_CASE("critical points respect a custom interval") {
  const auto roots = critical_points(ComparisonPair::AvsO3, 0.4, {0.5, 0.66});
  REQUIRE(roots.size() == 1);
  CHECK(roots[0] == doctest::Approx(0.65293387).epsilon(1e-7));
  CHECK_THROWS_AS(critical_points(ComparisonPair::AvsO3, 0.4, {0.6, 0.5}), DomainError);
}

TEST_CASE("classify_point outside the joint-extinction region") {
  CHECK(classify_point(ComparisonPair::AvsI2, 1.0, 0.55) == RegionLabel::OnlyDispersionFinite);
  CHECK(classify_point(ComparisonPair::AvsO3, 0.4, 0.68) == RegionLabel::OnlyNoDispersionFinite);
  CHECK(classify_point(ComparisonPair::AvsO2, 1.0, 0.6) == RegionLabel::BothInfinite);
  CHECK(classify_point(ComparisonPair::AvsO2, 1.0, 0.5) == RegionLabel::BothInfinite);
}

TEST_CASE("regions along lambda = 0.4 for optimal d = 3") {
  const auto pair = ComparisonPair::AvsO3;
  const auto first = classify_point(pair, 0.4, 0.3);
  const auto middle = classify_point(pair, 0.4, 0.55);
  const auto last = classify_point(pair, 0.4, 0.656);
  CHECK(first != middle);
  CHECK(first == last);
  CHECK((first == RegionLabel::DispersionBetter || first == RegionLabel::NoDispersionBetter));
  CHECK((middle == RegionLabel::DispersionBetter || middle == RegionLabel::NoDispersionBetter));
  CHECK(classify_point(pair, 0.4, 0.70) == RegionLabel::OnlyNoDispersionFinite);
  CHECK(classify_point(pair, 0.4, 0.80) == RegionLabel::BothInfinite);
  CHECK(classify_point(pair, 0.4, 0.472484) != RegionLabel::OnlyDispersionFinite);
}

TEST_CASE("classification near a root uses the mean difference") {
  const double root = 0.26905916;
  for (double p : {root - 1e-4, root + 1e-4}) {
    const auto label = classify_point(ComparisonPair::AvsO2, 1.0, p);
    const double diff = mean_difference(ComparisonPair::AvsO2, 1.0, p);
    CHECK(label == (diff > 0.0 ? RegionLabel::DispersionBetter : RegionLabel::NoDispersionBetter));
  }
}

TEST_CASE("sweep grid layout and CSV") {
  const auto cells = sweep_grid(ComparisonPair::AvsO2, {0.5, 1.0, 2}, {0.1, 0.9, 2}, 1);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].lambda == 0.5);
  CHECK(cells[1].lambda == 0.5);
  CHECK(cells[1].p == 0.9);
  CHECK(cells[2].lambda == 1.0);
  CHECK(cells[0].gap.has_value());
  CHECK_FALSE(cells[3].gap.has_value());
  CHECK(cells[3].region == RegionLabel::BothInfinite);

  std::ostringstream out;
  write_phase_csv(out, cells);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "lambda,p,gap,region");
  std::getline(in, line);
  CHECK(line.rfind("0.5,0.1,", 0) == 0);
  std::getline(in, line);
  CHECK(line == "0.5,0.9,,both_inf");

  CHECK_THROWS_AS(sweep_grid(ComparisonPair::AvsO2, {0.5, 1.0, 1}, {0.1, 0.9, 2}), DomainError);
}

TEST_CASE("sweep is independent of the worker count") {
  const GridRange lambdas{0.1, 5.0, 40};
  const GridRange ps{0.01, 0.99, 40};
  const auto one = sweep_grid(ComparisonPair::AvsI3, lambdas, ps, 1);
  const auto many = sweep_grid(ComparisonPair::AvsI3, lambdas, ps, 3);
  REQUIRE(one.size() == many.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].region == many[i].region);
    CHECK(one[i].gap == many[i].gap);
  }
}
