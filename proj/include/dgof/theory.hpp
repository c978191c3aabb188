#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "dgof/distribution.hpp"
#include "dgof/models.hpp"
#include "dgof/rng.hpp"

namespace dgof {

/// Expected maximum absolute deviation of a tied-down +-1 random walk,
/// divided by sqrt(m); tends to sqrt(pi/2)*ln(2) as m grows.
inline constexpr double kBridgeConstant = 0.8687311606361591;

struct BridgeEstimate {
  std::uint64_t m = 0;
  std::uint64_t trials = 0;
  double estimate = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(trials)
};

/// Averages max_k |sum of the first k entries| / sqrt(m) over uniformly
/// shuffled lists of m/2 ones and m/2 minus-ones. m must be even.
BridgeEstimate verify_bridge_constant(std::uint64_t m, std::uint64_t trials,
                                      std::uint64_t seed);

struct MomentEstimate {
  std::uint64_t trials = 0;
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Exact null expectation of the squared Euclidean distance,
/// (1 - sum p0^2)/n; reduces to 1/n as max p0 -> 0.
double exact_null_euclid_sq(const BinDistribution& model, std::uint64_t n);

/// Monte-Carlo estimate of E[U^2] under the null, U the Euclidean distance
/// of a simulated experiment.
MomentEstimate null_expectation_euclid(const BinDistribution& model,
                                       std::uint64_t n, std::uint64_t trials,
                                       std::uint64_t seed);

/// Monte-Carlo estimate of E[V * sqrt(n)], V the KS statistic under the
/// stored (identity) ordering.
MomentEstimate null_expectation_ks(const BinDistribution& model,
                                   std::uint64_t n, std::uint64_t trials,
                                   std::uint64_t seed);

// Power analysis scenario: alternative p = uniform(m) +- c with equally
// many + and - signs, so the differences sum to zero exactly. Requires
// c <= 1/m (probabilities stay nonnegative, which also forces m*c <= 2).
struct PowerScenario {
  std::uint64_t m = 0;
  double c = 0.0;

  PowerScenario(std::uint64_t m, double c);
};

/// Sign arrangements: strictly alternating (+-+-...), sorted (++..--), or
/// uniformly shuffled.
std::vector<int> alternating_signs(std::uint64_t m);
std::vector<int> sorted_signs(std::uint64_t m);
std::vector<int> shuffled_signs(std::uint64_t m, rng::Stream& stream);

/// (u, v): Euclidean distance u = sqrt(m)*c between the alternative and the
/// uniform base model, and KS distance v under the given sign arrangement;
/// c <= v <= m*c/2 always.
std::pair<double, double> power_scenario_stats(const PowerScenario& scenario,
                                               std::span<const int> signs);

/// Materializes the alternative distribution uniform(m) +- c for
/// cross-checks against the statistics pipeline.
BinDistribution power_scenario_alternative(const PowerScenario& scenario,
                                           std::span<const int> signs);

/// Monte-Carlo mean of v over uniformly random sign orderings; converges to
/// sqrt(m*pi/2)*ln(2)*c for large m.
MomentEstimate power_scenario_mean_ks(std::uint64_t m, double c,
                                      std::uint64_t trials,
                                      std::uint64_t seed);

struct SparseLimitResult {
  std::uint64_t trials = 0;
  std::uint64_t deviating = 0;
  double fraction = 0.0;
};

/// Draws n of M uniform indices per trial and counts trials whose sparse
/// Euclidean value deviates by more than 1e-3 (relative) from the
/// collision-free value sqrt(1/n - 1/M) ~= 1/sqrt(n). The expected fraction
/// is about the birthday collision probability n^2/(2M). Requires
/// n/M <= max_ratio.
SparseLimitResult sparse_limit_check(std::uint64_t n, std::uint64_t M,
                                     std::uint64_t trials, std::uint64_t seed,
                                     double max_ratio = 1e-6);

}  // namespace dgof
