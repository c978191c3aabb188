#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "dgof/distribution.hpp"

namespace dgof {

// A parametric family fitted by maximum likelihood; the Monte-Carlo driver
// re-fits it to every simulated experiment before measuring discrepancy.
class ParametricFamily {
 public:
  virtual ~ParametricFamily() = default;
  virtual BinDistribution fit(const EmpiricalCounts& counts) const = 0;
  virtual std::string name() const = 0;
};

// --- Hardy-Weinberg -------------------------------------------------------

inline constexpr int kHwHaplotypes = 9;
inline constexpr int kHwBins = 45;  // ordered pairs (j,k), j >= k

/// Canonical lexicographic pair labels "11","21","22","31",... for the 45
/// bins; label "jk" means the haplotype pair (j,k).
const std::vector<std::string>& hw_labels();

/// Pair-of-haplotypes probabilities 2*theta_j*theta_k (j>k) and theta_k^2
/// (j=k), in lexicographic pair order. theta must have 9 nonnegative
/// entries summing to 1 within 1e-12.
BinDistribution hw_probabilities(std::span<const double> theta);

/// Haplotype tallies from 45 pair counts: 2*c_kk plus every c involving k.
/// Their sum is exactly 2n.
std::array<std::uint64_t, kHwHaplotypes> hw_haplotype_counts(
    const EmpiricalCounts& counts);

/// Maximum-likelihood haplotype proportions: tallies / (2n).
std::array<double, kHwHaplotypes> hw_mle(const EmpiricalCounts& counts);

class HardyWeinbergFamily final : public ParametricFamily {
 public:
  BinDistribution fit(const EmpiricalCounts& counts) const override;
  std::string name() const override { return "hardy-weinberg"; }
};

// --- truncated Poisson ----------------------------------------------------

enum class PoissonTailPolicy {
  fold,         // remaining tail mass goes into one overflow bin
  renormalize,  // retained bins rescaled to sum to 1
};

// Poisson(lambda) restricted to {0..J}: J is the smallest index whose
// untruncated tail mass P(X > J) is below tail_tol. With the fold policy
// the distribution carries one extra overflow bin.
class TruncatedPoissonModel {
 public:
  TruncatedPoissonModel(double lambda, double tail_tol,
                        PoissonTailPolicy policy);

  double lambda() const { return lambda_; }
  std::uint64_t truncation_index() const { return trunc_; }
  PoissonTailPolicy policy() const { return policy_; }
  const BinDistribution& distribution() const { return dist_; }
  bool has_overflow_bin() const {
    return policy_ == PoissonTailPolicy::fold;
  }

 private:
  double lambda_;
  std::uint64_t trunc_;
  PoissonTailPolicy policy_;
  BinDistribution dist_;
};

/// Builds the truncated model; probabilities are evaluated in log space
/// (log-gamma) for numerical stability.
TruncatedPoissonModel poisson_model(
    double lambda, double tail_tol = 1e-12,
    PoissonTailPolicy policy = PoissonTailPolicy::fold);

/// Poisson pmf exp(j*ln(lambda) - lgamma(j+1) - lambda).
double poisson_pmf(double lambda, std::uint64_t j);

// --- sparse uniform -------------------------------------------------------

/// Uniform model over bins 1..support with implicit per-bin probability
/// 1/support; never materialized (support may be 2^32).
struct SparseUniformModel {
  std::uint64_t support;

  explicit SparseUniformModel(std::uint64_t m);
  double bin_probability() const {
    return 1.0 / static_cast<double>(support);
  }
};

}  // namespace dgof
