#include "dgof/orderings.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace dgof {

Ordering pseudorandom_ordering(std::uint32_t m, std::uint64_t seed,
                               std::uint32_t trial) {
  if (m == 0)
    throw std::invalid_argument("pseudorandom_ordering: m must be >= 1");
  std::vector<std::uint32_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0u);
  rng::Stream stream(seed, rng::Domain::ordering, trial);
  for (std::uint32_t i = m - 1; i > 0; --i) {
    const auto j = static_cast<std::uint32_t>(stream.next_below(i + 1));
    std::swap(perm[i], perm[j]);
  }
  Ordering ord;
  ord.kind = Ordering::Kind::seeded;
  ord.perm = std::move(perm);
  ord.seed = seed;
  ord.trial = trial;
  return ord;
}

std::uint64_t permutation_digest(std::span<const std::uint32_t> perm) {
  std::uint64_t h = 14695981039346656037ull;  // FNV-1a offset basis
  for (std::uint32_t v : perm) {
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xFFu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

std::vector<TrialResult> ordering_trials(const TestSpec& spec,
                                         std::uint32_t trial_count) {
  if (trial_count == 0)
    throw std::invalid_argument("ordering_trials: trial count must be >= 1");
  if (std::find(spec.statistics.begin(), spec.statistics.end(),
                StatisticKind::ks) == spec.statistics.end())
    throw std::invalid_argument("ordering_trials: ks must be requested");
  if (spec.data.is_sparse())
    throw std::invalid_argument("ordering_trials: dense data required");

  const auto m = static_cast<std::uint32_t>(spec.data.size());
  std::vector<Ordering> orderings;
  orderings.reserve(trial_count);
  orderings.push_back(spec.ordering);  // trial 1: canonical
  for (std::uint32_t t = 2; t <= trial_count; ++t)
    orderings.push_back(pseudorandom_ordering(m, spec.seed, t));

  // One slot per (ks, ordering), plus each ordering-invariant kind once.
  std::vector<detail::Slot> slots;
  std::vector<std::size_t> invariant_slot(spec.statistics.size(), SIZE_MAX);
  for (std::uint32_t t = 0; t < trial_count; ++t)
    slots.push_back({StatisticKind::ks, &orderings[t]});
  for (std::size_t s = 0; s < spec.statistics.size(); ++s) {
    if (spec.statistics[s] == StatisticKind::ks) continue;
    invariant_slot[s] = slots.size();
    slots.push_back({spec.statistics[s], nullptr});
  }

  const auto results = detail::run_dense(
      spec.data, spec.fixed ? &*spec.fixed : nullptr, spec.family.get(),
      slots, spec.simulations, spec.seed, spec.workers);

  auto make_report = [&](StatisticKind kind, const detail::SlotResult& r) {
    PValueReport rep;
    rep.kind = kind;
    rep.observed = r.observed;
    rep.hits = r.hits;
    rep.simulations = spec.simulations;
    rep.p_value = static_cast<double>(r.hits) /
                  static_cast<double>(spec.simulations);
    rep.std_error = standard_error(rep.p_value, spec.simulations);
    rep.seed = spec.seed;
    return rep;
  };

  std::vector<TrialResult> trials(trial_count);
  for (std::uint32_t t = 0; t < trial_count; ++t) {
    TrialResult& tr = trials[t];
    tr.trial = t + 1;
    if (orderings[t].perm.empty()) {
      std::vector<std::uint32_t> ident(m);
      std::iota(ident.begin(), ident.end(), 0u);
      tr.permutation = std::move(ident);
    } else {
      tr.permutation = orderings[t].perm;
    }
    tr.digest = permutation_digest(tr.permutation);
    tr.reports.reserve(spec.statistics.size());
    for (std::size_t s = 0; s < spec.statistics.size(); ++s) {
      if (spec.statistics[s] == StatisticKind::ks)
        tr.reports.push_back(make_report(StatisticKind::ks, results[t]));
      else
        tr.reports.push_back(make_report(spec.statistics[s],
                                         results[invariant_slot[s]]));
    }
  }
  return trials;
}

}  // namespace dgof
