#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "dgof/io.hpp"
#include "dgof/montecarlo.hpp"

using namespace dgof;

namespace {

// Exact binomial pmf via log-gamma, independent of the sampler.
double binom_pmf(std::uint64_t n, double p, std::uint64_t k) {
  const double nd = double(n), kd = double(k);
  return std::exp(std::lgamma(nd + 1) - std::lgamma(kd + 1) -
                  std::lgamma(nd - kd + 1) + kd * std::log(p) +
                  (nd - kd) * std::log1p(-p));
}

// Chi-square GOF of sampled binomial draws against the exact pmf; cells
// with expectation below 5 are pooled into the tails.
void check_binomial_distribution(std::uint64_t n, double p,
                                 std::uint64_t draws, std::uint64_t seed) {
  CAPTURE(n);
  CAPTURE(p);
  rng::Stream stream(seed, rng::Domain::data, 0);
  const double mean = double(n) * p;
  const double sd = std::sqrt(double(n) * p * (1 - p));
  const std::int64_t lo =
      std::max<std::int64_t>(0, std::llround(mean - 8 * sd) - 1);
  const std::int64_t hi =
      std::min<std::int64_t>(n, std::llround(mean + 8 * sd) + 1);
  std::vector<std::uint64_t> counts(hi - lo + 3, 0);  // [under, lo..hi, over]
  for (std::uint64_t i = 0; i < draws; ++i) {
    const auto k = static_cast<std::int64_t>(binomial_draw(n, p, stream));
    if (k < lo)
      ++counts.front();
    else if (k > hi)
      ++counts.back();
    else
      ++counts[k - lo + 1];
  }
  std::vector<double> expected(counts.size(), 0.0);
  for (std::int64_t k = lo; k <= hi; ++k)
    expected[k - lo + 1] = binom_pmf(n, p, k) * double(draws);
  double tail = double(draws);
  for (double e : expected) tail -= e;
  expected.front() = expected.back() = std::max(tail / 2, 0.0);

  // pool cells with small expectation into their neighbor toward the mode
  double chi2 = 0.0;
  int cells = 0;
  double pool_obs = 0, pool_exp = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    pool_obs += double(counts[i]);
    pool_exp += expected[i];
    if (pool_exp >= 5.0) {
      chi2 += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
      ++cells;
      pool_obs = pool_exp = 0;
    }
  }
  if (pool_exp > 0) {
    chi2 += pool_obs * pool_obs / std::max(pool_exp, 1e-9);
    ++cells;
  }
  const double df = std::max(cells - 1, 1);
  CAPTURE(chi2);
  CAPTURE(df);
  CHECK(chi2 < df + 5.0 * std::sqrt(2.0 * df));
}

}  // namespace

TEST_CASE("binomial sampler matches the exact pmf (inversion and BTRS)") {
  // inversion path (n*p < 10)
  check_binomial_distribution(25, 0.3, 200000, 101);
  check_binomial_distribution(1000, 0.002, 200000, 102);
  // BTRS path (n*p >= 10)
  check_binomial_distribution(100, 0.47, 200000, 103);
  check_binomial_distribution(8297, 0.381, 200000, 104);
  check_binomial_distribution(50, 0.5, 200000, 105);
  // flipped path (p > 0.5)
  check_binomial_distribution(80, 0.9, 200000, 106);
}

TEST_CASE("binomial sampler mean and variance at 5 sigma") {
  rng::Stream stream(55, rng::Domain::data, 0);
  const std::uint64_t n = 400;
  const double p = 0.17;
  const std::uint64_t reps = 100000;
  double sum = 0, sumsq = 0;
  for (std::uint64_t i = 0; i < reps; ++i) {
    const double k = double(binomial_draw(n, p, stream));
    sum += k;
    sumsq += k * k;
  }
  const double mean = sum / double(reps);
  const double var = sumsq / double(reps) - mean * mean;
  const double want_mean = double(n) * p;
  const double want_var = double(n) * p * (1 - p);
  CHECK(std::abs(mean - want_mean) <
        5.0 * std::sqrt(want_var / double(reps)));
  // var of sample variance ~ 2*sigma^4/reps for near-normal data
  CHECK(std::abs(var - want_var) <
        5.0 * want_var * std::sqrt(2.0 / double(reps)));
}

TEST_CASE("binomial edge cases consume no randomness") {
  rng::Stream a(1, rng::Domain::data, 0);
  rng::Stream b(1, rng::Domain::data, 0);
  CHECK(binomial_draw(10, 0.0, a) == 0);
  CHECK(binomial_draw(10, 1.0, a) == 10);
  CHECK(binomial_draw(0, 0.3, a) == 0);
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("sample_counts: point mass is forced") {
  std::vector<double> probs(5, 0.0);
  probs[3] = 1.0;
  const BinDistribution point(std::move(probs));
  rng::Stream stream(9, rng::Domain::data, 0);
  const auto counts = sample_counts(point, 7, stream);
  CHECK(counts.counts()[3] == 7);
  CHECK(counts.total() == 7);
}

TEST_CASE("sample_counts: binomial concentration at 5 sigma") {
  rng::Stream stream(10, rng::Domain::data, 0);
  const auto counts = sample_counts(make_uniform(2), 1000000, stream);
  CHECK(counts.total() == 1000000);
  const double sd = std::sqrt(1000000.0 * 0.25);
  CHECK(std::abs(double(counts.counts()[0]) - 500000.0) < 5.0 * sd);
}

TEST_CASE("sample_counts: empirical mean matches the binomial oracle") {
  const BinDistribution model({0.3, 0.7});
  double sum = 0.0;
  const std::uint64_t reps = 100000;
  for (std::uint64_t i = 0; i < reps; ++i) {
    rng::Stream stream(12, rng::Domain::data, i);
    sum += double(sample_counts(model, 10, stream).counts()[0]);
  }
  const double mean = sum / double(reps);
  const double se = std::sqrt(10.0 * 0.3 * 0.7 / double(reps));
  CHECK(std::abs(mean - 3.0) < 3.0 * se);
}

TEST_CASE("standard_error closed forms") {
  CHECK(standard_error(0.5, 4000000) == doctest::Approx(0.00025).epsilon(1e-14));
  CHECK(standard_error(0.0, 100) == 0.0);
  CHECK(standard_error(1.0, 100) == 0.0);
  CHECK(standard_error(0.0075, 4000000) ==
        doctest::Approx(4.313858482e-5).epsilon(1e-9));
  CHECK_THROWS_AS(standard_error(0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(standard_error(1.5, 10), std::invalid_argument);
}

TEST_CASE("pvalue: perfectly fitting data has p = 1 for every statistic") {
  auto spec = TestSpec::fixed_model(
      EmpiricalCounts::dense({5, 5}), make_uniform(2),
      {StatisticKind::ks, StatisticKind::euclidean, StatisticKind::chi2,
       StatisticKind::g2, StatisticKind::freeman_tukey, StatisticKind::l1},
      2000, 3);
  for (const auto& report : pvalue(spec)) {
    CHECK(report.observed == 0.0);
    CHECK(report.p_value == 1.0);
    CHECK(report.hits == 2000);
    CHECK(report.std_error == 0.0);
    CHECK(report.rng_id == "philox4x32-10");
  }
}

TEST_CASE("pvalue: ties count toward hits") {
  // uniform m=2, n=2, observed (2,0): euclid ties with the mirrored (0,2)
  // outcome, so p = P{(2,0)} + P{(0,2)} = 1/2, not 1/4
  auto spec = TestSpec::fixed_model(EmpiricalCounts::dense({2, 0}),
                                    make_uniform(2),
                                    {StatisticKind::euclidean}, 40000, 5);
  const auto reports = pvalue(spec);
  const double p = reports[0].p_value;
  const double se = standard_error(0.5, 40000);
  CHECK(std::abs(p - 0.5) < 5.0 * se);
}

TEST_CASE("pvalue is deterministic and worker-independent") {
  auto make = [](unsigned workers) {
    auto spec = TestSpec::fixed_model(
        EmpiricalCounts::dense({15, 9, 14, 11, 13}), make_uniform(5),
        {StatisticKind::ks, StatisticKind::euclidean, StatisticKind::chi2},
        5000, 42);
    spec.workers = workers;
    return pvalue(spec);
  };
  const auto r1 = make(1);
  const auto r4 = make(4);
  const auto r16 = make(16);
  REQUIRE(r1.size() == r4.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(io::report_json(r1[i]) == io::report_json(r4[i]));
    CHECK(io::report_json(r1[i]) == io::report_json(r16[i]));
  }
}

TEST_CASE("degenerate parametric family matches the fixed path bit-for-bit") {
  class ConstantFamily final : public ParametricFamily {
   public:
    explicit ConstantFamily(BinDistribution dist) : dist_(std::move(dist)) {}
    BinDistribution fit(const EmpiricalCounts&) const override {
      return dist_;
    }
    std::string name() const override { return "constant"; }

   private:
    BinDistribution dist_;
  };

  const auto data = EmpiricalCounts::dense({15, 9, 14, 11, 13});
  const std::vector<StatisticKind> kinds = {
      StatisticKind::ks, StatisticKind::euclidean, StatisticKind::g2};
  auto fixed = TestSpec::fixed_model(data, make_uniform(5), kinds, 3000, 17);
  auto degenerate = TestSpec::parametric(
      data, std::make_shared<ConstantFamily>(make_uniform(5)), kinds, 3000,
      17);
  const auto a = pvalue(fixed);
  const auto b = pvalue(degenerate);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(io::report_json(a[i]) == io::report_json(b[i]));
}

TEST_CASE("pvalue input validation") {
  auto spec = TestSpec::fixed_model(EmpiricalCounts::dense({1, 1}),
                                    make_uniform(2), {StatisticKind::ks}, 0,
                                    0);
  CHECK_THROWS_AS(pvalue(spec), std::invalid_argument);
  spec.simulations = 10;
  spec.statistics.clear();
  CHECK_THROWS_AS(pvalue(spec), std::invalid_argument);
  spec.statistics = {StatisticKind::ks};
  spec.fixed.reset();
  CHECK_THROWS_AS(pvalue(spec), std::invalid_argument);  // no model at all
  auto mismatched = TestSpec::fixed_model(EmpiricalCounts::dense({1, 1, 1}),
                                          make_uniform(2),
                                          {StatisticKind::ks}, 10, 0);
  CHECK_THROWS_AS(pvalue(mismatched), std::invalid_argument);
}

TEST_CASE("pvalue agrees with a 10x longer reference run") {
  const auto data = EmpiricalCounts::dense({15, 9, 14, 11, 13});
  auto short_spec = TestSpec::fixed_model(
      data, make_uniform(5), {StatisticKind::euclidean}, 20000, 900);
  auto long_spec = TestSpec::fixed_model(
      data, make_uniform(5), {StatisticKind::euclidean}, 200000, 901);
  const double p_short = pvalue(short_spec)[0].p_value;
  const double p_long = pvalue(long_spec)[0].p_value;
  CHECK(std::abs(p_short - p_long) <=
        5.0 * std::sqrt(p_long * (1 - p_long) / 20000.0));
}

TEST_CASE("pvalue_sparse: the 1..n stream fails ks and passes euclid") {
  std::vector<EmpiricalCounts::SparseEntry> entries;
  for (std::uint64_t i = 1; i <= 1000; ++i) entries.push_back({i, 1});
  const auto data =
      EmpiricalCounts::sparse(std::move(entries), 1ull << 32);
  const SparseUniformModel model(1ull << 32);
  const auto reports = pvalue_sparse(
      data, model, {StatisticKind::ks, StatisticKind::euclidean}, 2000, 31);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].hits == 0);
  CHECK(reports[0].p_value == 0.0);
  CHECK(reports[1].p_value >= 0.999);
}

TEST_CASE("pvalue_sparse: a single draw is always a perfect tie") {
  const auto data = EmpiricalCounts::sparse({{777, 1}}, 1ull << 32);
  const SparseUniformModel model(1ull << 32);
  const auto reports =
      pvalue_sparse(data, model, {StatisticKind::euclidean}, 500, 0);
  CHECK(reports[0].p_value == 1.0);
}

TEST_CASE("pvalue_sparse rejects unsupported statistics") {
  const auto data = EmpiricalCounts::sparse({{1, 1}}, 16);
  CHECK_THROWS_AS(pvalue_sparse(data, SparseUniformModel(16),
                                {StatisticKind::chi2}, 10, 0),
                  std::invalid_argument);
}

TEST_CASE("pvalue_sparse null calibration over repeated seeds") {
  // data drawn from the model itself: P-values should stay away from the
  // extreme lower tail (expected tail events over 200 reports: ~0.4)
  const SparseUniformModel model(1ull << 32);
  int low = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    rng::Stream stream(rep, rng::Domain::data, 77);
    const auto data = detail::sample_sparse_uniform(model, 200, stream);
    const auto reports = pvalue_sparse(
        data, model, {StatisticKind::ks, StatisticKind::euclidean}, 1000,
        rep + 1);
    for (const auto& r : reports) {
      CHECK(r.p_value <= 1.0);
      if (r.p_value <= 0.001) ++low;
    }
  }
  CHECK(low <= 5);
}
