#include "dgof/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dgof {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dense_pair(const EmpiricalCounts& emp, const BinDistribution& model,
                      const char* op) {
  if (emp.is_sparse())
    throw std::invalid_argument(std::string(op) +
                                ": sparse counts need the sparse operations");
  if (emp.size() != model.size())
    throw std::invalid_argument(std::string(op) + ": bin count mismatch");
  if (emp.total() == 0)
    throw std::invalid_argument(std::string(op) + ": n must be >= 1");
}

void check_sparse_pair(const EmpiricalCounts& emp,
                       const SparseUniformModel& model, const char* op) {
  if (!emp.is_sparse())
    throw std::invalid_argument(std::string(op) + ": dense counts given");
  if (emp.support() != model.support)
    throw std::invalid_argument(std::string(op) + ": support mismatch");
  if (emp.total() == 0)
    throw std::invalid_argument(std::string(op) + ": n must be >= 1");
}

// Whether every empirical proportion is bit-equal to the (flat) model value;
// the exact-zero case of the count-based fast path.
bool proportions_equal_flat(std::span<const std::uint64_t> counts,
                            std::uint64_t n, double p) {
  const double nd = static_cast<double>(n);
  for (std::uint64_t c : counts)
    if (static_cast<double>(c) / nd != p) return false;
  return true;
}

// Sum of squared counts, exact as long as it stays below 2^53.
bool sum_sq_counts(std::span<const std::uint64_t> counts, double& out) {
  unsigned __int128 acc = 0;
  for (std::uint64_t c : counts)
    acc += static_cast<unsigned __int128>(c) * c;
  if (acc > (static_cast<unsigned __int128>(1) << 53)) return false;
  out = static_cast<double>(static_cast<std::uint64_t>(acc));
  return true;
}

// For a flat model the squared Euclidean distance collapses to
// sum(c^2)/n^2 - 2p + m p^2, a monotone function of the integer sum(c^2).
// Evaluating through that integer makes mathematically tied outcomes tie
// bit-for-bit, which the Monte-Carlo comparison relies on.
bool flat_sq_euclid(std::span<const std::uint64_t> counts, std::uint64_t n,
                    std::size_t m, double p, double& out) {
  double sq;
  if (!sum_sq_counts(counts, sq)) return false;
  const double nd = static_cast<double>(n);
  const double s =
      sq / (nd * nd) - 2.0 * p + static_cast<double>(m) * (p * p);
  out = std::max(s, 0.0);
  return true;
}

}  // namespace

std::string_view to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::ks: return "ks";
    case StatisticKind::euclidean: return "euclidean";
    case StatisticKind::chi2: return "chi2";
    case StatisticKind::g2: return "g2";
    case StatisticKind::freeman_tukey: return "freeman_tukey";
    case StatisticKind::l1: return "l1";
  }
  return "?";
}

StatisticKind statistic_from_string(std::string_view name) {
  if (name == "ks") return StatisticKind::ks;
  if (name == "euclidean" || name == "euclid") return StatisticKind::euclidean;
  if (name == "chi2") return StatisticKind::chi2;
  if (name == "g2") return StatisticKind::g2;
  if (name == "freeman_tukey" || name == "freeman-tukey" || name == "ft")
    return StatisticKind::freeman_tukey;
  if (name == "l1") return StatisticKind::l1;
  throw std::invalid_argument("unknown statistic: " + std::string(name));
}

Ordering Ordering::seeded(std::vector<std::uint32_t> perm, std::uint64_t seed,
                          std::uint32_t trial) {
  std::vector<bool> seen(perm.size(), false);
  for (std::uint32_t v : perm) {
    if (v >= perm.size() || seen[v])
      throw std::invalid_argument("Ordering: permutation is not a bijection");
    seen[v] = true;
  }
  return {Kind::seeded, std::move(perm), seed, trial};
}

namespace detail {

double ks_span(std::span<const std::uint64_t> counts, std::uint64_t n,
               std::span<const double> probs,
               std::span<const std::uint32_t> perm) {
  const double nd = static_cast<double>(n);
  NeumaierSum cum;
  double best = 0.0;
  const std::size_t m = counts.size();
  for (std::size_t pos = 0; pos < m; ++pos) {
    const std::size_t j = perm.empty() ? pos : perm[pos];
    cum.add(static_cast<double>(counts[j]) / nd - probs[j]);
    best = std::max(best, std::abs(cum.value()));
  }
  return std::min(best, 1.0);
}

double euclid_span(std::span<const std::uint64_t> counts, std::uint64_t n,
                   std::span<const double> probs, bool flat,
                   std::vector<double>& scratch) {
  if (flat) {
    const double p = probs[0];
    if (proportions_equal_flat(counts, n, p)) return 0.0;
    double s;
    if (flat_sq_euclid(counts, n, probs.size(), p, s)) return std::sqrt(s);
  }
  const double nd = static_cast<double>(n);
  scratch.clear();
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const double d = static_cast<double>(counts[j]) / nd - probs[j];
    scratch.push_back(d * d);
  }
  return std::sqrt(std::max(sorted_sum(scratch), 0.0));
}

double chi2_span(std::span<const std::uint64_t> counts, std::uint64_t n,
                 std::span<const double> probs, bool flat,
                 std::vector<double>& scratch) {
  const double nd = static_cast<double>(n);
  if (flat && probs[0] > 0.0) {
    const double p = probs[0];
    if (proportions_equal_flat(counts, n, p)) return 0.0;
    double s;
    if (flat_sq_euclid(counts, n, probs.size(), p, s)) return nd * s / p;
  }
  scratch.clear();
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (probs[j] <= 0.0) {
      if (counts[j] > 0) return kInf;  // ordered sentinel
      continue;
    }
    const double d = static_cast<double>(counts[j]) / nd - probs[j];
    scratch.push_back(d * d / probs[j]);
  }
  return nd * std::max(sorted_sum(scratch), 0.0);
}

double g2_span(std::span<const std::uint64_t> counts, std::uint64_t n,
               std::span<const double> probs, std::vector<double>& scratch) {
  const double nd = static_cast<double>(n);
  scratch.clear();
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] == 0) continue;  // 0 * ln 0 := 0
    if (probs[j] <= 0.0) return kInf;
    const double ph = static_cast<double>(counts[j]) / nd;
    scratch.push_back(ph * std::log(ph / probs[j]));
  }
  return 2.0 * nd * std::max(sorted_sum(scratch), 0.0);
}

double freeman_tukey_span(std::span<const std::uint64_t> counts,
                          std::uint64_t n, std::span<const double> probs,
                          std::vector<double>& scratch) {
  const double nd = static_cast<double>(n);
  scratch.clear();
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const double d =
        std::sqrt(static_cast<double>(counts[j]) / nd) - std::sqrt(probs[j]);
    scratch.push_back(d * d);
  }
  return 4.0 * nd * std::max(sorted_sum(scratch), 0.0);
}

double l1_span(std::span<const std::uint64_t> counts, std::uint64_t n,
               std::span<const double> probs, std::vector<double>& scratch) {
  const double nd = static_cast<double>(n);
  scratch.clear();
  for (std::size_t j = 0; j < counts.size(); ++j)
    scratch.push_back(
        std::abs(static_cast<double>(counts[j]) / nd - probs[j]));
  return std::max(sorted_sum(scratch), 0.0);
}

double compute_span(StatisticKind kind, std::span<const std::uint64_t> counts,
                    std::uint64_t n, std::span<const double> probs, bool flat,
                    std::span<const std::uint32_t> perm,
                    std::vector<double>& scratch) {
  switch (kind) {
    case StatisticKind::ks: return ks_span(counts, n, probs, perm);
    case StatisticKind::euclidean:
      return euclid_span(counts, n, probs, flat, scratch);
    case StatisticKind::chi2:
      return chi2_span(counts, n, probs, flat, scratch);
    case StatisticKind::g2: return g2_span(counts, n, probs, scratch);
    case StatisticKind::freeman_tukey:
      return freeman_tukey_span(counts, n, probs, scratch);
    case StatisticKind::l1: return l1_span(counts, n, probs, scratch);
  }
  throw std::logic_error("compute_span: bad kind");
}

}  // namespace detail

double ks_statistic(const EmpiricalCounts& emp, const BinDistribution& model,
                    const Ordering& ordering) {
  check_dense_pair(emp, model, "ks_statistic");
  if (!ordering.perm.empty() && ordering.perm.size() != emp.size())
    throw std::invalid_argument("ks_statistic: ordering size mismatch");
  return detail::ks_span(emp.counts(), emp.total(), model.probs(),
                         ordering.perm);
}

double euclidean_statistic(const EmpiricalCounts& emp,
                           const BinDistribution& model) {
  check_dense_pair(emp, model, "euclidean_statistic");
  std::vector<double> scratch;
  return detail::euclid_span(emp.counts(), emp.total(), model.probs(),
                             model.is_flat(), scratch);
}

double chi2_statistic(const EmpiricalCounts& emp,
                      const BinDistribution& model) {
  check_dense_pair(emp, model, "chi2_statistic");
  std::vector<double> scratch;
  return detail::chi2_span(emp.counts(), emp.total(), model.probs(),
                           model.is_flat(), scratch);
}

double g2_statistic(const EmpiricalCounts& emp, const BinDistribution& model) {
  check_dense_pair(emp, model, "g2_statistic");
  std::vector<double> scratch;
  return detail::g2_span(emp.counts(), emp.total(), model.probs(), scratch);
}

double freeman_tukey_statistic(const EmpiricalCounts& emp,
                               const BinDistribution& model) {
  check_dense_pair(emp, model, "freeman_tukey_statistic");
  std::vector<double> scratch;
  return detail::freeman_tukey_span(emp.counts(), emp.total(), model.probs(),
                                    scratch);
}

double l1_statistic(const EmpiricalCounts& emp, const BinDistribution& model) {
  check_dense_pair(emp, model, "l1_statistic");
  std::vector<double> scratch;
  return detail::l1_span(emp.counts(), emp.total(), model.probs(), scratch);
}

double worst_case_ks(const EmpiricalCounts& emp,
                     const BinDistribution& model) {
  check_dense_pair(emp, model, "worst_case_ks");
  // Sorting the differences descending turns KS into half the l1 distance.
  std::vector<double> scratch;
  return 0.5 * detail::l1_span(emp.counts(), emp.total(), model.probs(),
                               scratch);
}

double compute_statistic(StatisticKind kind, const EmpiricalCounts& emp,
                         const BinDistribution& model,
                         const Ordering& ordering) {
  switch (kind) {
    case StatisticKind::ks: return ks_statistic(emp, model, ordering);
    case StatisticKind::euclidean: return euclidean_statistic(emp, model);
    case StatisticKind::chi2: return chi2_statistic(emp, model);
    case StatisticKind::g2: return g2_statistic(emp, model);
    case StatisticKind::freeman_tukey:
      return freeman_tukey_statistic(emp, model);
    case StatisticKind::l1: return l1_statistic(emp, model);
  }
  throw std::logic_error("compute_statistic: bad kind");
}

double sparse_euclidean(const EmpiricalCounts& emp,
                        const SparseUniformModel& model) {
  check_sparse_pair(emp, model, "sparse_euclidean");
  const double q = model.bin_probability();
  const double nd = static_cast<double>(emp.total());
  std::vector<double> terms;
  terms.reserve(emp.entries().size());
  for (const auto& [bin, c] : emp.entries()) {
    const double d = static_cast<double>(c) / nd - q;
    terms.push_back(d * d);
  }
  const double occupied = sorted_sum(terms);
  const double unoccupied =
      static_cast<double>(model.support - emp.entries().size()) * (q * q);
  return std::sqrt(std::max(occupied + unoccupied, 0.0));
}

double sparse_ks(const EmpiricalCounts& emp, const SparseUniformModel& model) {
  check_sparse_pair(emp, model, "sparse_ks");
  const double q = model.bin_probability();
  const double nd = static_cast<double>(emp.total());
  double best = 0.0;
  std::uint64_t cum = 0;
  for (const auto& [bin, c] : emp.entries()) {
    // deviation just before the jump at `bin`, then just after it
    const double before = static_cast<double>(cum) / nd -
                          static_cast<double>(bin - 1) * q;
    cum += c;
    const double after =
        static_cast<double>(cum) / nd - static_cast<double>(bin) * q;
    best = std::max({best, std::abs(before), std::abs(after)});
  }
  return std::min(best, 1.0);
}

}  // namespace dgof
