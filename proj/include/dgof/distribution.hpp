#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dgof {

/// Largest support that may be materialized densely; anything bigger must
/// use the sparse representations.
inline constexpr std::uint64_t kMaxDenseBins = 1000000;

// A discrete probability model over a finite set of bins. Entries must be
// nonnegative and sum to 1 within 1e-12; inputs violating that are rejected
// rather than renormalized.
class BinDistribution {
 public:
  explicit BinDistribution(std::vector<double> probs,
                           std::vector<std::string> labels = {});

  std::size_t size() const { return probs_.size(); }
  std::span<const double> probs() const { return probs_; }
  double prob(std::size_t j) const { return probs_[j]; }

  bool has_labels() const { return !labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }

  /// True when all entries are bit-identical (uniform models); enables
  /// count-exact evaluation paths.
  bool is_flat() const { return flat_; }

 private:
  std::vector<double> probs_;
  std::vector<std::string> labels_;
  bool flat_ = false;
};

/// Observed draw counts per bin. Dense (a count per bin index) or sparse
/// (occupied bins only, over a declared support of size M with 1-based
/// indices). Immutable after construction.
class EmpiricalCounts {
 public:
  using SparseEntry = std::pair<std::uint64_t, std::uint64_t>;  // bin, count

  /// Empty placeholder (no bins, no draws); every operation rejects it.
  EmpiricalCounts() = default;

  static EmpiricalCounts dense(std::vector<std::uint64_t> counts);
  /// `entries` maps 1-based bin index -> positive count; need not be sorted.
  static EmpiricalCounts sparse(std::vector<SparseEntry> entries,
                                std::uint64_t support);

  bool is_sparse() const { return sparse_; }
  std::uint64_t total() const { return total_; }

  // dense accessors
  std::size_t size() const;
  std::span<const std::uint64_t> counts() const;

  // sparse accessors
  std::uint64_t support() const;
  std::span<const SparseEntry> entries() const;

 private:
  bool sparse_ = false;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> counts_;   // dense
  std::vector<SparseEntry> entries_;    // sparse, sorted by bin
  std::uint64_t support_ = 0;           // sparse
};

/// Uniform model over m bins, each with probability 1/m.
BinDistribution make_uniform(std::uint64_t m);

/// Dense empirical proportions count/n. Requires n >= 1 and dense counts.
BinDistribution proportions(const EmpiricalCounts& counts);

/// Sparse proportions: (bin, count/n) for occupied bins. Requires n >= 1.
std::vector<std::pair<std::uint64_t, double>> sparse_proportions(
    const EmpiricalCounts& counts);

/// Compensated (Neumaier) summation helper used throughout: the running
/// error term keeps sums reproducible and near-exact.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x);
  double value() const { return sum + comp; }
};

/// Sum of a buffer after sorting it ascending (canonical order), so the
/// result is bit-identical for any input permutation. Modifies `terms`.
double sorted_sum(std::vector<double>& terms);

}  // namespace dgof
