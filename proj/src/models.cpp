#include "dgof/models.hpp"

#include <cmath>
#include <stdexcept>

namespace dgof {

const std::vector<std::string>& hw_labels() {
  static const std::vector<std::string> labels = [] {
    std::vector<std::string> v;
    v.reserve(kHwBins);
    for (int j = 1; j <= kHwHaplotypes; ++j)
      for (int k = 1; k <= j; ++k)
        v.push_back(std::to_string(j) + std::to_string(k));
    return v;
  }();
  return labels;
}

BinDistribution hw_probabilities(std::span<const double> theta) {
  if (theta.size() != kHwHaplotypes)
    throw std::invalid_argument("hw_probabilities: theta must have 9 entries");
  NeumaierSum sum;
  for (double t : theta) {
    if (!(t >= 0.0) || !std::isfinite(t))
      throw std::invalid_argument(
          "hw_probabilities: theta entries must be finite and nonnegative");
    sum.add(t);
  }
  if (std::abs(sum.value() - 1.0) > 1e-12)
    throw std::invalid_argument(
        "hw_probabilities: theta must sum to 1 within 1e-12");
  std::vector<double> probs;
  probs.reserve(kHwBins);
  for (int j = 0; j < kHwHaplotypes; ++j)
    for (int k = 0; k <= j; ++k)
      probs.push_back(j == k ? theta[k] * theta[k]
                             : 2.0 * theta[j] * theta[k]);
  return BinDistribution(std::move(probs));
}

std::array<std::uint64_t, kHwHaplotypes> hw_haplotype_counts(
    const EmpiricalCounts& counts) {
  if (counts.is_sparse() || counts.size() != kHwBins)
    throw std::invalid_argument(
        "hw_haplotype_counts: expected dense counts over 45 pair bins");
  if (counts.total() == 0)
    throw std::invalid_argument("hw_haplotype_counts: n must be >= 1");
  std::array<std::uint64_t, kHwHaplotypes> tally{};
  auto c = counts.counts();
  std::size_t idx = 0;
  for (int j = 0; j < kHwHaplotypes; ++j) {
    for (int k = 0; k <= j; ++k, ++idx) {
      tally[j] += c[idx];
      tally[k] += c[idx];
    }
  }
  return tally;
}

std::array<double, kHwHaplotypes> hw_mle(const EmpiricalCounts& counts) {
  const auto tally = hw_haplotype_counts(counts);
  const double denom = 2.0 * static_cast<double>(counts.total());
  std::array<double, kHwHaplotypes> theta{};
  for (int k = 0; k < kHwHaplotypes; ++k)
    theta[k] = static_cast<double>(tally[k]) / denom;
  return theta;
}

BinDistribution HardyWeinbergFamily::fit(const EmpiricalCounts& counts) const {
  const auto theta = hw_mle(counts);
  return hw_probabilities(theta);
}

double poisson_pmf(double lambda, std::uint64_t j) {
  return std::exp(static_cast<double>(j) * std::log(lambda) -
                  std::lgamma(static_cast<double>(j) + 1.0) - lambda);
}

TruncatedPoissonModel::TruncatedPoissonModel(double lambda, double tail_tol,
                                             PoissonTailPolicy policy)
    : lambda_(lambda),
      trunc_(0),
      policy_(policy),
      dist_([&]() -> BinDistribution {
        if (!std::isfinite(lambda) || lambda <= 0.0)
          throw std::invalid_argument(
              "poisson_model: lambda must be positive and finite");
        if (!(tail_tol > 0.0) || !(tail_tol < 1.0))
          throw std::invalid_argument(
              "poisson_model: tail_tol must lie in (0, 1)");
        std::vector<double> probs;
        NeumaierSum cum;
        std::uint64_t j = 0;
        for (;;) {
          const double p = poisson_pmf(lambda, j);
          probs.push_back(p);
          cum.add(p);
          if (1.0 - cum.value() < tail_tol) break;
          ++j;
          if (j > kMaxDenseBins)
            throw std::invalid_argument(
                "poisson_model: truncation exceeds dense support limit");
        }
        trunc_ = j;
        std::vector<std::string> labels;
        labels.reserve(probs.size() + 1);
        for (std::uint64_t i = 0; i <= j; ++i)
          labels.push_back(std::to_string(i));
        if (policy == PoissonTailPolicy::fold) {
          probs.push_back(std::max(0.0, 1.0 - cum.value()));
          labels.push_back("overflow");
        } else {
          const double total = cum.value();
          for (double& p : probs) p /= total;
        }
        return BinDistribution(std::move(probs), std::move(labels));
      }()) {}

TruncatedPoissonModel poisson_model(double lambda, double tail_tol,
                                    PoissonTailPolicy policy) {
  return TruncatedPoissonModel(lambda, tail_tol, policy);
}

SparseUniformModel::SparseUniformModel(std::uint64_t m) : support(m) {
  if (m == 0)
    throw std::invalid_argument("SparseUniformModel: support must be >= 1");
}

}  // namespace dgof
