#include "dgof/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "dgof/montecarlo.hpp"
#include "dgof/statistics.hpp"

namespace dgof {

namespace {

// Running mean / variance (Welford).
struct Accumulator {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d1 = x - mean;
    mean += d1 / static_cast<double>(n);
    m2 += d1 * (x - mean);
  }
  double std_error() const {
    if (n < 2) return 0.0;
    const double var = m2 / static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
  }
};

std::vector<int> half_signs(std::uint64_t m) {
  std::vector<int> signs(m, 1);
  for (std::uint64_t j = m / 2; j < m; ++j) signs[j] = -1;
  return signs;
}

std::int64_t max_abs_prefix(std::span<const int> signs) {
  std::int64_t cum = 0, best = 0;
  for (int s : signs) {
    cum += s;
    best = std::max(best, std::abs(cum));
  }
  return best;
}

void check_even(std::uint64_t m, const char* op) {
  if (m < 2 || m % 2 != 0)
    throw std::invalid_argument(std::string(op) + ": m must be even, >= 2");
}

}  // namespace

BridgeEstimate verify_bridge_constant(std::uint64_t m, std::uint64_t trials,
                                      std::uint64_t seed) {
  check_even(m, "verify_bridge_constant");
  if (trials == 0)
    throw std::invalid_argument("verify_bridge_constant: trials must be >= 1");
  std::vector<int> signs = half_signs(m);
  const double root_m = std::sqrt(static_cast<double>(m));
  Accumulator acc;
  for (std::uint64_t t = 0; t < trials; ++t) {
    rng::Stream stream(seed, rng::Domain::theory, t);
    for (std::uint64_t i = m - 1; i > 0; --i)
      std::swap(signs[i], signs[stream.next_below(i + 1)]);
    acc.add(static_cast<double>(max_abs_prefix(signs)) / root_m);
  }
  return {m, trials, acc.mean, acc.std_error()};
}

double exact_null_euclid_sq(const BinDistribution& model, std::uint64_t n) {
  if (n == 0)
    throw std::invalid_argument("exact_null_euclid_sq: n must be >= 1");
  std::vector<double> sq(model.probs().begin(), model.probs().end());
  for (double& p : sq) p *= p;
  return (1.0 - sorted_sum(sq)) / static_cast<double>(n);
}

MomentEstimate null_expectation_euclid(const BinDistribution& model,
                                       std::uint64_t n, std::uint64_t trials,
                                       std::uint64_t seed) {
  if (n == 0 || trials == 0)
    throw std::invalid_argument(
        "null_expectation_euclid: n and trials must be >= 1");
  Accumulator acc;
  for (std::uint64_t t = 0; t < trials; ++t) {
    rng::Stream stream(seed, rng::Domain::theory, t);
    const EmpiricalCounts sim = sample_counts(model, n, stream);
    const double u = euclidean_statistic(sim, model);
    acc.add(u * u);
  }
  return {trials, acc.mean, acc.std_error()};
}

MomentEstimate null_expectation_ks(const BinDistribution& model,
                                   std::uint64_t n, std::uint64_t trials,
                                   std::uint64_t seed) {
  if (n == 0 || trials == 0)
    throw std::invalid_argument(
        "null_expectation_ks: n and trials must be >= 1");
  const double root_n = std::sqrt(static_cast<double>(n));
  Accumulator acc;
  for (std::uint64_t t = 0; t < trials; ++t) {
    rng::Stream stream(seed, rng::Domain::theory, t);
    const EmpiricalCounts sim = sample_counts(model, n, stream);
    acc.add(ks_statistic(sim, model) * root_n);
  }
  return {trials, acc.mean, acc.std_error()};
}

PowerScenario::PowerScenario(std::uint64_t m_, double c_) : m(m_), c(c_) {
  check_even(m, "PowerScenario");
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("PowerScenario: c must be positive");
  if (static_cast<double>(m) * c > 2.0)
    throw std::invalid_argument("PowerScenario: m*c must be <= 2");
  if (c > 1.0 / static_cast<double>(m))
    throw std::invalid_argument(
        "PowerScenario: c must be <= 1/m so probabilities stay nonnegative");
}

std::vector<int> alternating_signs(std::uint64_t m) {
  std::vector<int> signs(m);
  for (std::uint64_t j = 0; j < m; ++j) signs[j] = (j % 2 == 0) ? 1 : -1;
  return signs;
}

std::vector<int> sorted_signs(std::uint64_t m) { return half_signs(m); }

std::vector<int> shuffled_signs(std::uint64_t m, rng::Stream& stream) {
  std::vector<int> signs = half_signs(m);
  for (std::uint64_t i = m - 1; i > 0; --i)
    std::swap(signs[i], signs[stream.next_below(i + 1)]);
  return signs;
}

namespace {

void check_signs(const PowerScenario& scenario, std::span<const int> signs) {
  if (signs.size() != scenario.m)
    throw std::invalid_argument("power scenario: sign count mismatch");
  std::int64_t sum = 0;
  for (int s : signs) {
    if (s != 1 && s != -1)
      throw std::invalid_argument("power scenario: signs must be +-1");
    sum += s;
  }
  if (sum != 0)
    throw std::invalid_argument(
        "power scenario: differences must sum to zero (equal sign counts)");
}

}  // namespace

std::pair<double, double> power_scenario_stats(const PowerScenario& scenario,
                                               std::span<const int> signs) {
  check_signs(scenario, signs);
  const double u = std::sqrt(static_cast<double>(scenario.m)) * scenario.c;
  const double v =
      static_cast<double>(max_abs_prefix(signs)) * scenario.c;
  return {u, v};
}

BinDistribution power_scenario_alternative(const PowerScenario& scenario,
                                           std::span<const int> signs) {
  check_signs(scenario, signs);
  const double base = 1.0 / static_cast<double>(scenario.m);
  std::vector<double> probs(scenario.m);
  for (std::uint64_t j = 0; j < scenario.m; ++j)
    probs[j] = std::max(base + static_cast<double>(signs[j]) * scenario.c, 0.0);
  return BinDistribution(std::move(probs));
}

MomentEstimate power_scenario_mean_ks(std::uint64_t m, double c,
                                      std::uint64_t trials,
                                      std::uint64_t seed) {
  const PowerScenario scenario(m, c);
  if (trials == 0)
    throw std::invalid_argument("power_scenario_mean_ks: trials must be >= 1");
  std::vector<int> signs = half_signs(m);
  Accumulator acc;
  for (std::uint64_t t = 0; t < trials; ++t) {
    rng::Stream stream(seed, rng::Domain::theory, t);
    for (std::uint64_t i = m - 1; i > 0; --i)
      std::swap(signs[i], signs[stream.next_below(i + 1)]);
    acc.add(static_cast<double>(max_abs_prefix(signs)) * scenario.c);
  }
  return {trials, acc.mean, acc.std_error()};
}

SparseLimitResult sparse_limit_check(std::uint64_t n, std::uint64_t M,
                                     std::uint64_t trials, std::uint64_t seed,
                                     double max_ratio) {
  if (n == 0 || trials == 0)
    throw std::invalid_argument(
        "sparse_limit_check: n and trials must be >= 1");
  const SparseUniformModel model(M);
  if (static_cast<double>(n) / static_cast<double>(M) > max_ratio)
    throw std::invalid_argument(
        "sparse_limit_check: n/M exceeds the allowed ratio");
  // Collision-free reference value; equals 1/sqrt(n) up to O(n/M).
  const double reference =
      std::sqrt(1.0 / static_cast<double>(n) - 1.0 / static_cast<double>(M));
  SparseLimitResult result;
  result.trials = trials;
  for (std::uint64_t t = 0; t < trials; ++t) {
    rng::Stream stream(seed, rng::Domain::theory, t);
    const EmpiricalCounts sim =
        detail::sample_sparse_uniform(model, n, stream);
    const double value = sparse_euclidean(sim, model);
    if (std::abs(value - reference) > 1e-3 * reference) ++result.deviating;
  }
  result.fraction = static_cast<double>(result.deviating) /
                    static_cast<double>(trials);
  return result;
}

}  // namespace dgof
