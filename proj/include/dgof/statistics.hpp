#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dgof/distribution.hpp"
#include "dgof/models.hpp"

namespace dgof {

enum class StatisticKind {
  ks,             // discrete Kolmogorov-Smirnov (ordering-dependent)
  euclidean,      // root-sum-square of per-bin differences
  chi2,           // Pearson
  g2,             // log-likelihood-ratio
  freeman_tukey,  // 4n * sum (sqrt(phat) - sqrt(p0))^2
  l1,             // sum of absolute per-bin differences
};

std::string_view to_string(StatisticKind kind);
/// Accepts canonical names plus the aliases euclid, ft, freeman-tukey.
StatisticKind statistic_from_string(std::string_view name);

/// Only the Kolmogorov-Smirnov statistic depends on the bin ordering.
inline bool ordering_dependent(StatisticKind kind) {
  return kind == StatisticKind::ks;
}

// A bin ordering for the KS statistic. An empty permutation means the bins
// are taken in their stored order (which is the declared canonical order:
// file order for CSV models, lexicographic pair order for Hardy-Weinberg).
struct Ordering {
  enum class Kind { identity, lexicographic, seeded };

  Kind kind = Kind::identity;
  std::vector<std::uint32_t> perm;  // perm[pos] = bin index at position pos
  std::uint64_t seed = 0;           // provenance, seeded orderings only
  std::uint32_t trial = 0;

  static Ordering identity() { return {}; }
  static Ordering lexicographic() {
    return {Kind::lexicographic, {}, 0, 0};
  }
  /// Validates that `perm` is a bijection on {0..m-1}.
  static Ordering seeded(std::vector<std::uint32_t> perm, std::uint64_t seed,
                         std::uint32_t trial);
};

// Dense statistics. All take observed counts with n >= 1 and a model over
// the same number of bins. Non-KS statistics accumulate their per-bin terms
// in sorted order with compensated summation, so they are bit-identical
// under any simultaneous permutation of (counts, model).

double ks_statistic(const EmpiricalCounts& emp, const BinDistribution& model,
                    const Ordering& ordering = Ordering::identity());
double euclidean_statistic(const EmpiricalCounts& emp,
                           const BinDistribution& model);
/// Pearson chi-square; a positive count on a zero-probability bin yields
/// +infinity (an ordered sentinel, not an error).
double chi2_statistic(const EmpiricalCounts& emp,
                      const BinDistribution& model);
double g2_statistic(const EmpiricalCounts& emp, const BinDistribution& model);
double freeman_tukey_statistic(const EmpiricalCounts& emp,
                               const BinDistribution& model);
double l1_statistic(const EmpiricalCounts& emp, const BinDistribution& model);

/// KS under the data-dependent ordering that maximizes it; equals
/// l1_statistic / 2 exactly.
double worst_case_ks(const EmpiricalCounts& emp, const BinDistribution& model);

double compute_statistic(StatisticKind kind, const EmpiricalCounts& emp,
                         const BinDistribution& model,
                         const Ordering& ordering = Ordering::identity());

// Sparse statistics over huge uniform supports; only occupied bins are
// touched. Counts must be sparse with support matching the model.

double sparse_euclidean(const EmpiricalCounts& emp,
                        const SparseUniformModel& model);
/// Evaluates the deviation just before and just after each occupied bin in
/// natural index order (the maximum occurs at a jump).
double sparse_ks(const EmpiricalCounts& emp, const SparseUniformModel& model);

namespace detail {

// Span-level kernels used by the Monte-Carlo driver; preconditions are the
// caller's responsibility (sizes match, n >= 1, perm prevalidated).
double ks_span(std::span<const std::uint64_t> counts, std::uint64_t n,
               std::span<const double> probs,
               std::span<const std::uint32_t> perm);
double euclid_span(std::span<const std::uint64_t> counts, std::uint64_t n,
                   std::span<const double> probs, bool flat,
                   std::vector<double>& scratch);
double chi2_span(std::span<const std::uint64_t> counts, std::uint64_t n,
                 std::span<const double> probs, bool flat,
                 std::vector<double>& scratch);
double g2_span(std::span<const std::uint64_t> counts, std::uint64_t n,
               std::span<const double> probs, std::vector<double>& scratch);
double freeman_tukey_span(std::span<const std::uint64_t> counts,
                          std::uint64_t n, std::span<const double> probs,
                          std::vector<double>& scratch);
double l1_span(std::span<const std::uint64_t> counts, std::uint64_t n,
               std::span<const double> probs, std::vector<double>& scratch);

double compute_span(StatisticKind kind, std::span<const std::uint64_t> counts,
                    std::uint64_t n, std::span<const double> probs, bool flat,
                    std::span<const std::uint32_t> perm,
                    std::vector<double>& scratch);

}  // namespace detail

}  // namespace dgof
