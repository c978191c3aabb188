#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dgof/montecarlo.hpp"
#include "dgof/statistics.hpp"

namespace dgof {

/// Uniformly distributed permutation of {0..m-1} from an unbiased shuffle
/// over the stream derived from (seed, trial). Ordering randomness lives in
/// its own seed domain, so changing the trial count never perturbs
/// simulated experiments.
Ordering pseudorandom_ordering(std::uint32_t m, std::uint64_t seed,
                               std::uint32_t trial);

/// Stable FNV-1a digest of a permutation (little-endian 32-bit words).
std::uint64_t permutation_digest(std::span<const std::uint32_t> perm);

struct TrialResult {
  std::uint32_t trial = 0;
  std::uint64_t digest = 0;
  std::vector<std::uint32_t> permutation;
  std::vector<PValueReport> reports;  // one per requested statistic
};

/// Runs the full P-value computation under trial_count bin orderings:
/// trial 1 uses the spec's own (canonical) ordering, trials 2.. use
/// pseudorandom orderings. All trials share the same simulated experiments,
/// so ordering-invariant statistics are computed once and replicated.
std::vector<TrialResult> ordering_trials(const TestSpec& spec,
                                         std::uint32_t trial_count);

}  // namespace dgof
