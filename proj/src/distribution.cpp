#include "dgof/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dgof {

void NeumaierSum::add(double x) {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x)) {
    comp += (sum - t) + x;
  } else {
    comp += (x - t) + sum;
  }
  sum = t;
}

double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  NeumaierSum acc;
  for (double t : terms) acc.add(t);
  return acc.value();
}

BinDistribution::BinDistribution(std::vector<double> probs,
                                 std::vector<std::string> labels)
    : probs_(std::move(probs)), labels_(std::move(labels)) {
  if (probs_.empty())
    throw std::invalid_argument("BinDistribution: at least one bin required");
  if (probs_.size() > kMaxDenseBins)
    throw std::invalid_argument(
        "BinDistribution: support too large for dense form; use "
        "SparseUniformModel");
  if (!labels_.empty() && labels_.size() != probs_.size())
    throw std::invalid_argument("BinDistribution: labels/probs size mismatch");
  NeumaierSum acc;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw std::invalid_argument(
          "BinDistribution: probabilities must be finite and nonnegative");
    acc.add(p);
  }
  if (std::abs(acc.value() - 1.0) > 1e-12)
    throw std::invalid_argument(
        "BinDistribution: probabilities must sum to 1 within 1e-12");
  flat_ = std::all_of(probs_.begin(), probs_.end(),
                      [&](double p) { return p == probs_[0]; });
}

EmpiricalCounts EmpiricalCounts::dense(std::vector<std::uint64_t> counts) {
  if (counts.empty())
    throw std::invalid_argument("EmpiricalCounts: at least one bin required");
  if (counts.size() > kMaxDenseBins)
    throw std::invalid_argument(
        "EmpiricalCounts: support too large for dense form; use sparse");
  EmpiricalCounts e;
  e.sparse_ = false;
  for (std::uint64_t c : counts) {
    if (e.total_ > UINT64_MAX - c)
      throw std::invalid_argument("EmpiricalCounts: total count overflow");
    e.total_ += c;
  }
  e.counts_ = std::move(counts);
  return e;
}

EmpiricalCounts EmpiricalCounts::sparse(std::vector<SparseEntry> entries,
                                        std::uint64_t support) {
  if (support == 0)
    throw std::invalid_argument("EmpiricalCounts: support must be >= 1");
  std::sort(entries.begin(), entries.end());
  EmpiricalCounts e;
  e.sparse_ = true;
  e.support_ = support;
  std::uint64_t prev = 0;
  for (const auto& [bin, count] : entries) {
    if (bin < 1 || bin > support)
      throw std::invalid_argument(
          "EmpiricalCounts: sparse bin index out of range [1, M]");
    if (bin == prev)
      throw std::invalid_argument("EmpiricalCounts: duplicate sparse bin");
    if (count == 0)
      throw std::invalid_argument(
          "EmpiricalCounts: sparse counts must be strictly positive");
    if (e.total_ > UINT64_MAX - count)
      throw std::invalid_argument("EmpiricalCounts: total count overflow");
    e.total_ += count;
    prev = bin;
  }
  e.entries_ = std::move(entries);
  return e;
}

std::size_t EmpiricalCounts::size() const {
  if (sparse_)
    throw std::logic_error("EmpiricalCounts: size() on sparse counts");
  return counts_.size();
}

std::span<const std::uint64_t> EmpiricalCounts::counts() const {
  if (sparse_)
    throw std::logic_error("EmpiricalCounts: counts() on sparse counts");
  return counts_;
}

std::uint64_t EmpiricalCounts::support() const {
  if (!sparse_)
    throw std::logic_error("EmpiricalCounts: support() on dense counts");
  return support_;
}

std::span<const EmpiricalCounts::SparseEntry> EmpiricalCounts::entries()
    const {
  if (!sparse_)
    throw std::logic_error("EmpiricalCounts: entries() on dense counts");
  return entries_;
}

BinDistribution make_uniform(std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("make_uniform: m must be >= 1");
  if (m > kMaxDenseBins)
    throw std::invalid_argument(
        "make_uniform: m too large for dense form; use SparseUniformModel");
  return BinDistribution(
      std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

BinDistribution proportions(const EmpiricalCounts& counts) {
  if (counts.is_sparse())
    throw std::invalid_argument(
        "proportions: sparse counts; use sparse_proportions");
  if (counts.total() == 0)
    throw std::invalid_argument("proportions: n must be >= 1");
  const double n = static_cast<double>(counts.total());
  std::vector<double> p;
  p.reserve(counts.size());
  for (std::uint64_t c : counts.counts())
    p.push_back(static_cast<double>(c) / n);
  return BinDistribution(std::move(p));
}

std::vector<std::pair<std::uint64_t, double>> sparse_proportions(
    const EmpiricalCounts& counts) {
  if (!counts.is_sparse())
    throw std::invalid_argument("sparse_proportions: dense counts given");
  if (counts.total() == 0)
    throw std::invalid_argument("sparse_proportions: n must be >= 1");
  const double n = static_cast<double>(counts.total());
  std::vector<std::pair<std::uint64_t, double>> out;
  out.reserve(counts.entries().size());
  for (const auto& [bin, c] : counts.entries())
    out.emplace_back(bin, static_cast<double>(c) / n);
  return out;
}

}  // namespace dgof
