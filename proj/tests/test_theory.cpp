#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dgof/statistics.hpp"
#include "dgof/theory.hpp"

using namespace dgof;

TEST_CASE("bridge estimate: m=2 is exactly 1/sqrt(2)") {
  const auto est = verify_bridge_constant(2, 500, 1);
  CHECK(est.estimate == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(est.std_error == 0.0);  // every trial gives the same value
}

TEST_CASE("bridge estimate: m=4 matches the exhaustive oracle") {
  // all 6 arrangements of ++--: max|prefix| in {2,1,1,1,1,2}, mean 4/3,
  // so the scaled estimate tends to (4/3)/2 = 2/3
  const auto est = verify_bridge_constant(4, 200000, 2);
  CHECK(std::abs(est.estimate - 2.0 / 3.0) <= 5.0 * est.std_error);
}

TEST_CASE("bridge estimate rejects odd or zero sizes") {
  CHECK_THROWS_AS(verify_bridge_constant(5, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(verify_bridge_constant(0, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(verify_bridge_constant(4, 0, 0), std::invalid_argument);
}

TEST_CASE("exact null expectation of the squared euclidean distance") {
  // point mass: (1 - 1)/n = 0
  std::vector<double> point(4, 0.0);
  point[2] = 1.0;
  CHECK(exact_null_euclid_sq(BinDistribution(point), 10) == 0.0);
  // uniform m=2, n=1: (1 - 1/2)/1
  CHECK(exact_null_euclid_sq(make_uniform(2), 1) == 0.5);
  // sparse regime: approaches 1/n
  const double big = exact_null_euclid_sq(make_uniform(10000), 100);
  CHECK(std::abs(big - 0.01) / 0.01 < 0.01);
}

TEST_CASE("null expectation of U^2 matches the closed form") {
  SUBCASE("point mass is exactly zero") {
    std::vector<double> point(3, 0.0);
    point[0] = 1.0;
    const auto est =
        null_expectation_euclid(BinDistribution(point), 5, 200, 3);
    CHECK(est.estimate == 0.0);
  }
  SUBCASE("uniform m=2, n=1") {
    const auto est = null_expectation_euclid(make_uniform(2), 1, 20000, 4);
    CHECK(est.estimate == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(est.std_error == 0.0);  // U^2 = 1/2 on both outcomes
  }
  SUBCASE("uniform m=10, n=50: 5 standard errors") {
    const auto model = make_uniform(10);
    const auto est = null_expectation_euclid(model, 50, 20000, 5);
    const double target = exact_null_euclid_sq(model, 50);
    CHECK(std::abs(est.estimate - target) <= 5.0 * est.std_error);
  }
}

TEST_CASE("null expectation of V*sqrt(n) closed cases") {
  SUBCASE("single bin: V is zero") {
    const auto est = null_expectation_ks(make_uniform(1), 5, 100, 6);
    CHECK(est.estimate == 0.0);
  }
  SUBCASE("uniform m=2, n=1: V = 1/2 always") {
    const auto est = null_expectation_ks(make_uniform(2), 1, 5000, 7);
    CHECK(est.estimate == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("power scenario closed forms") {
  const PowerScenario scenario(4, 0.1);
  const auto alt = alternating_signs(4);
  const auto sorted = sorted_signs(4);

  const auto [u1, v1] = power_scenario_stats(scenario, alt);
  CHECK(u1 == std::sqrt(4.0) * 0.1);
  CHECK(v1 == 0.1);  // minimal: alternating
  const auto [u2, v2] = power_scenario_stats(scenario, sorted);
  CHECK(u2 == u1);
  CHECK(v2 == 4.0 * 0.1 / 2.0);  // maximal: sorted

  // sign count balance is the exact zero-sum normalization
  CHECK(std::accumulate(alt.begin(), alt.end(), 0) == 0);
  CHECK(std::accumulate(sorted.begin(), sorted.end(), 0) == 0);
}

TEST_CASE("power scenario bounds hold for random orderings") {
  rng::Stream s(31, rng::Domain::data, 0);
  const PowerScenario scenario(20, 0.01);
  for (int rep = 0; rep < 50; ++rep) {
    const auto signs = shuffled_signs(20, s);
    const auto [u, v] = power_scenario_stats(scenario, signs);
    CHECK(u == std::sqrt(20.0) * 0.01);
    CHECK(v >= scenario.c);
    CHECK(v <= 20.0 * scenario.c / 2.0);
  }
}

TEST_CASE("power scenario agrees with the statistics pipeline") {
  rng::Stream s(32, rng::Domain::data, 0);
  const PowerScenario scenario(10, 0.05);
  const auto signs = shuffled_signs(10, s);
  const auto [u, v] = power_scenario_stats(scenario, signs);
  const auto alternative = power_scenario_alternative(scenario, signs);
  const auto base = make_uniform(10);

  // l2 and cumulative distances between the two distributions, computed by
  // the generic machinery on a scaled integer representation
  std::vector<double> diff_terms;
  NeumaierSum cum;
  double ks = 0.0;
  for (std::size_t j = 0; j < 10; ++j) {
    const double d = alternative.prob(j) - base.prob(j);
    diff_terms.push_back(d * d);
    cum.add(d);
    ks = std::max(ks, std::abs(cum.value()));
  }
  CHECK(std::sqrt(sorted_sum(diff_terms)) ==
        doctest::Approx(u).epsilon(1e-10));
  CHECK(ks == doctest::Approx(v).epsilon(1e-10));
}

TEST_CASE("power scenario validation") {
  CHECK_THROWS_AS(PowerScenario(3, 0.1), std::invalid_argument);   // odd
  CHECK_THROWS_AS(PowerScenario(4, 0.3), std::invalid_argument);   // c > 1/m
  CHECK_THROWS_AS(PowerScenario(4, -0.1), std::invalid_argument);
  const PowerScenario ok(4, 0.1);
  CHECK_THROWS_AS(power_scenario_stats(ok, std::vector<int>{1, 1, 1, -1}),
                  std::invalid_argument);  // unbalanced
  CHECK_THROWS_AS(power_scenario_stats(ok, std::vector<int>{1, 1, -1}),
                  std::invalid_argument);  // wrong length
}

TEST_CASE("power scenario mean ks: exhaustive small cases") {
  // m=2: both arrangements give v = c
  const auto m2 = power_scenario_mean_ks(2, 0.25, 3000, 8);
  CHECK(m2.estimate == doctest::Approx(0.25).epsilon(1e-12));
  // m=4: exhaustive mean is (2+1+1+1+1+2)c/6 = 4c/3
  const auto m4 = power_scenario_mean_ks(4, 0.1, 100000, 9);
  CHECK(std::abs(m4.estimate - 0.1 * 4.0 / 3.0) <= 5.0 * m4.std_error);
}

TEST_CASE("sparse limit check") {
  SUBCASE("a single draw never deviates") {
    const auto result = sparse_limit_check(1, 1ull << 32, 200, 10);
    CHECK(result.fraction == 0.0);
  }
  SUBCASE("n=2, M=4: deviation fraction is the collision probability 1/4") {
    const auto result = sparse_limit_check(2, 4, 4000, 11, 1.0);
    const double se = std::sqrt(0.25 * 0.75 / 4000.0);
    CHECK(std::abs(result.fraction - 0.25) <= 5.0 * se);
  }
  SUBCASE("the n/M guard rejects dense ratios by default") {
    CHECK_THROWS_AS(sparse_limit_check(1000, 1000000, 10, 0),
                    std::invalid_argument);
    CHECK_NOTHROW(sparse_limit_check(1000, 1000000, 10, 0, 1e-2));
  }
}
