#include "dgof/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace dgof {

namespace {

// Stirling series remainder ln(k!) - [(k+1/2)ln(k+1) - (k+1) + ln(sqrt(2pi))];
// table for k <= 9, three-term asymptotic beyond.
double stirling_tail(double k) {
  static constexpr double kTable[] = {
      0.0810614667953272,  0.0413406959554092,  0.0276779256849983,
      0.02079067210376509, 0.0166446911898211,  0.0138761288230707,
      0.0118967099458917,  0.0104112652619720,  0.00925546218271273,
      0.00833056343336287};
  if (k <= 9.0) return kTable[static_cast<int>(k)];
  const double kp1sq = (k + 1.0) * (k + 1.0);
  return (1.0 / 12 - (1.0 / 360 - 1.0 / 1260 / kp1sq) / kp1sq) / (k + 1.0);
}

// CDF walk; expected cost O(n*p + 1), used when n*p < 10.
std::uint64_t binomial_inversion(std::uint64_t n, double p,
                                 rng::Stream& stream) {
  const double r = p / (1.0 - p);
  double f = std::exp(static_cast<double>(n) * std::log1p(-p));
  double u = stream.next_unit();
  std::uint64_t k = 0;
  while (u > f && k < n) {
    u -= f;
    ++k;
    f *= r * static_cast<double>(n - k + 1) / static_cast<double>(k);
  }
  return k;
}

// Transformed rejection with squeeze (Hormann's BTRS); requires p <= 0.5
// and n*p >= 10.
std::uint64_t binomial_btrs(std::uint64_t n, double p, rng::Stream& stream) {
  const double nf = static_cast<double>(n);
  const double spq = std::sqrt(nf * p * (1.0 - p));
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nf * p + 0.5;
  const double vr = 0.92 - 4.2 / b;
  const double r = p / (1.0 - p);
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double mode = std::floor((nf + 1.0) * p);
  const double h = stirling_tail(mode) + stirling_tail(nf - mode);
  for (;;) {
    const double u = stream.next_unit() - 0.5;
    double v = stream.next_unit();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + c);
    if (kf < 0.0 || kf > nf) continue;
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
    v = std::log(v * alpha / (a / (us * us) + b));
    const double bound =
        (mode + 0.5) * std::log((mode + 1.0) / (r * (nf - mode + 1.0))) +
        (nf + 1.0) * std::log((nf - mode + 1.0) / (nf - kf + 1.0)) +
        (kf + 0.5) * std::log(r * (nf - kf + 1.0) / (kf + 1.0)) + h -
        stirling_tail(kf) - stirling_tail(nf - kf);
    if (v <= bound) return static_cast<std::uint64_t>(kf);
  }
}

// Tail sums over the model, suffix[j] = sum of probs[j..m-1]; shared by all
// simulations from the same model.
std::vector<double> suffix_sums(std::span<const double> probs) {
  std::vector<double> suffix(probs.size());
  NeumaierSum acc;
  for (std::size_t j = probs.size(); j-- > 0;) {
    acc.add(probs[j]);
    suffix[j] = std::max(acc.value(), probs[j]);
  }
  return suffix;
}

void sample_counts_into(std::span<const double> probs,
                        std::span<const double> suffix, std::uint64_t n,
                        rng::Stream& stream, std::vector<std::uint64_t>& out) {
  const std::size_t m = probs.size();
  out.assign(m, 0);
  std::uint64_t remaining = n;
  for (std::size_t j = 0; j < m && remaining > 0; ++j) {
    if (probs[j] <= 0.0) continue;
    if (j + 1 == m || suffix[j] <= probs[j]) {
      out[j] = remaining;
      remaining = 0;
      break;
    }
    const double cond = std::min(probs[j] / suffix[j], 1.0);
    const std::uint64_t c = binomial_draw(remaining, cond, stream);
    out[j] = c;
    remaining -= c;
  }
  if (remaining > 0) out[m - 1] += remaining;  // residual float mass
}

}  // namespace

double standard_error(double p_hat, std::uint64_t sims) {
  if (sims == 0)
    throw std::invalid_argument("standard_error: sims must be >= 1");
  if (p_hat < 0.0 || p_hat > 1.0)
    throw std::invalid_argument("standard_error: p_hat must lie in [0, 1]");
  return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(sims));
}

std::uint64_t binomial_draw(std::uint64_t n, double p, rng::Stream& stream) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  const bool flip = p > 0.5;
  const double q = flip ? 1.0 - p : p;
  const std::uint64_t k = (static_cast<double>(n) * q < 10.0)
                              ? binomial_inversion(n, q, stream)
                              : binomial_btrs(n, q, stream);
  return flip ? n - k : k;
}

EmpiricalCounts sample_counts(const BinDistribution& model, std::uint64_t n,
                              rng::Stream& stream) {
  if (n == 0) throw std::invalid_argument("sample_counts: n must be >= 1");
  const auto suffix = suffix_sums(model.probs());
  std::vector<std::uint64_t> counts;
  sample_counts_into(model.probs(), suffix, n, stream, counts);
  return EmpiricalCounts::dense(std::move(counts));
}

TestSpec TestSpec::fixed_model(EmpiricalCounts data, BinDistribution model,
                               std::vector<StatisticKind> statistics,
                               std::uint64_t simulations, std::uint64_t seed) {
  TestSpec spec;
  spec.data = std::move(data);
  spec.fixed = std::move(model);
  spec.statistics = std::move(statistics);
  spec.simulations = simulations;
  spec.seed = seed;
  return spec;
}

TestSpec TestSpec::parametric(EmpiricalCounts data,
                              std::shared_ptr<const ParametricFamily> family,
                              std::vector<StatisticKind> statistics,
                              std::uint64_t simulations, std::uint64_t seed) {
  TestSpec spec;
  spec.data = std::move(data);
  spec.family = std::move(family);
  spec.statistics = std::move(statistics);
  spec.simulations = simulations;
  spec.seed = seed;
  return spec;
}

namespace detail {

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

std::vector<SlotResult> run_dense(const EmpiricalCounts& data,
                                  const BinDistribution* fixed,
                                  const ParametricFamily* family,
                                  std::span<const Slot> slots,
                                  std::uint64_t sims, std::uint64_t seed,
                                  unsigned workers) {
  if (sims == 0) throw std::invalid_argument("pvalue: sims must be >= 1");
  if (slots.empty())
    throw std::invalid_argument("pvalue: no statistics requested");
  if (data.is_sparse())
    throw std::invalid_argument("pvalue: sparse data needs pvalue_sparse");
  if (data.total() == 0)
    throw std::invalid_argument("pvalue: data must contain draws");
  if (!fixed && !family)
    throw std::invalid_argument("pvalue: no model given");

  // Model the hypothetical experiments draw from: the family fitted to the
  // observed data, or the fixed model as-is.
  const BinDistribution sampling_model =
      family ? family->fit(data) : *fixed;
  if (sampling_model.size() != data.size())
    throw std::invalid_argument("pvalue: data/model bin count mismatch");
  for (const Slot& slot : slots) {
    if (slot.ordering && !slot.ordering->perm.empty() &&
        slot.ordering->perm.size() != data.size())
      throw std::invalid_argument("pvalue: ordering size mismatch");
  }

  const std::size_t ns = slots.size();
  const std::uint64_t n = data.total();
  const auto suffix = suffix_sums(sampling_model.probs());

  std::vector<double> observed(ns);
  {
    std::vector<double> scratch;
    for (std::size_t s = 0; s < ns; ++s) {
      const auto perm = slots[s].ordering
                            ? std::span<const std::uint32_t>(
                                  slots[s].ordering->perm)
                            : std::span<const std::uint32_t>();
      observed[s] = compute_span(slots[s].kind, data.counts(), n,
                                 sampling_model.probs(),
                                 sampling_model.is_flat(), perm, scratch);
    }
  }

  const unsigned nworkers = static_cast<unsigned>(std::min<std::uint64_t>(
      resolve_workers(workers), sims));
  std::vector<std::vector<std::uint64_t>> hits(
      nworkers, std::vector<std::uint64_t>(ns, 0));

  auto worker = [&](unsigned w, std::uint64_t lo, std::uint64_t hi) {
    std::vector<std::uint64_t> counts;
    std::vector<double> scratch;
    auto& local = hits[w];
    for (std::uint64_t i = lo; i < hi; ++i) {
      rng::Stream stream(seed, rng::Domain::simulation, i);
      sample_counts_into(sampling_model.probs(), suffix, n, stream, counts);
      std::optional<BinDistribution> fitted;
      if (family)
        fitted = family->fit(EmpiricalCounts::dense(
            std::vector<std::uint64_t>(counts.begin(), counts.end())));
      const BinDistribution& eval_model = family ? *fitted : sampling_model;
      for (std::size_t s = 0; s < ns; ++s) {
        const auto perm = slots[s].ordering
                              ? std::span<const std::uint32_t>(
                                    slots[s].ordering->perm)
                              : std::span<const std::uint32_t>();
        const double v =
            compute_span(slots[s].kind, counts, n, eval_model.probs(),
                         eval_model.is_flat(), perm, scratch);
        if (v >= observed[s]) ++local[s];  // ties are inclusive
      }
    }
  };

  if (nworkers == 1) {
    worker(0, 0, sims);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    const std::uint64_t chunk = sims / nworkers;
    const std::uint64_t extra = sims % nworkers;
    std::uint64_t lo = 0;
    for (unsigned w = 0; w < nworkers; ++w) {
      const std::uint64_t hi = lo + chunk + (w < extra ? 1 : 0);
      pool.emplace_back(worker, w, lo, hi);
      lo = hi;
    }
    for (auto& t : pool) t.join();
  }

  std::vector<SlotResult> results(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    results[s].observed = observed[s];
    for (unsigned w = 0; w < nworkers; ++w) results[s].hits += hits[w][s];
  }
  return results;
}

EmpiricalCounts sample_sparse_uniform(const SparseUniformModel& model,
                                      std::uint64_t n, rng::Stream& stream) {
  if (n == 0)
    throw std::invalid_argument("sample_sparse_uniform: n must be >= 1");
  std::vector<std::uint64_t> draws;
  draws.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i)
    draws.push_back(stream.next_below(model.support) + 1);
  std::sort(draws.begin(), draws.end());
  std::vector<EmpiricalCounts::SparseEntry> entries;
  for (std::size_t i = 0; i < draws.size();) {
    std::size_t j = i;
    while (j < draws.size() && draws[j] == draws[i]) ++j;
    entries.emplace_back(draws[i], j - i);
    i = j;
  }
  return EmpiricalCounts::sparse(std::move(entries), model.support);
}

}  // namespace detail

std::vector<PValueReport> pvalue(const TestSpec& spec) {
  std::vector<detail::Slot> slots;
  slots.reserve(spec.statistics.size());
  for (StatisticKind kind : spec.statistics) {
    detail::Slot slot;
    slot.kind = kind;
    slot.ordering = ordering_dependent(kind) ? &spec.ordering : nullptr;
    slots.push_back(slot);
  }
  const auto results = detail::run_dense(
      spec.data, spec.fixed ? &*spec.fixed : nullptr, spec.family.get(),
      slots, spec.simulations, spec.seed, spec.workers);

  std::vector<PValueReport> reports(results.size());
  for (std::size_t s = 0; s < results.size(); ++s) {
    auto& r = reports[s];
    r.kind = spec.statistics[s];
    r.observed = results[s].observed;
    r.hits = results[s].hits;
    r.simulations = spec.simulations;
    r.p_value = static_cast<double>(r.hits) /
                static_cast<double>(spec.simulations);
    r.std_error = standard_error(r.p_value, spec.simulations);
    r.seed = spec.seed;
  }
  return reports;
}

std::vector<PValueReport> pvalue_sparse(const EmpiricalCounts& data,
                                        const SparseUniformModel& model,
                                        std::vector<StatisticKind> kinds,
                                        std::uint64_t simulations,
                                        std::uint64_t seed, unsigned workers) {
  if (simulations == 0)
    throw std::invalid_argument("pvalue_sparse: sims must be >= 1");
  if (kinds.empty())
    throw std::invalid_argument("pvalue_sparse: no statistics requested");
  for (StatisticKind kind : kinds)
    if (kind != StatisticKind::ks && kind != StatisticKind::euclidean)
      throw std::invalid_argument(
          "pvalue_sparse: unsupported statistic for the sparse path: " +
          std::string(to_string(kind)));

  const std::size_t ns = kinds.size();
  const std::uint64_t n = data.total();
  std::vector<double> observed(ns);
  for (std::size_t s = 0; s < ns; ++s)
    observed[s] = kinds[s] == StatisticKind::ks
                      ? sparse_ks(data, model)
                      : sparse_euclidean(data, model);

  const unsigned nworkers = static_cast<unsigned>(std::min<std::uint64_t>(
      detail::resolve_workers(workers), simulations));
  std::vector<std::vector<std::uint64_t>> hits(
      nworkers, std::vector<std::uint64_t>(ns, 0));

  auto worker = [&](unsigned w, std::uint64_t lo, std::uint64_t hi) {
    auto& local = hits[w];
    for (std::uint64_t i = lo; i < hi; ++i) {
      rng::Stream stream(seed, rng::Domain::simulation, i);
      const EmpiricalCounts sim =
          detail::sample_sparse_uniform(model, n, stream);
      for (std::size_t s = 0; s < ns; ++s) {
        const double v = kinds[s] == StatisticKind::ks
                             ? sparse_ks(sim, model)
                             : sparse_euclidean(sim, model);
        if (v >= observed[s]) ++local[s];
      }
    }
  };

  if (nworkers == 1) {
    worker(0, 0, simulations);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    const std::uint64_t chunk = simulations / nworkers;
    const std::uint64_t extra = simulations % nworkers;
    std::uint64_t lo = 0;
    for (unsigned w = 0; w < nworkers; ++w) {
      const std::uint64_t hi = lo + chunk + (w < extra ? 1 : 0);
      pool.emplace_back(worker, w, lo, hi);
      lo = hi;
    }
    for (auto& t : pool) t.join();
  }

  std::vector<PValueReport> reports(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    auto& r = reports[s];
    r.kind = kinds[s];
    r.observed = observed[s];
    for (unsigned w = 0; w < nworkers; ++w) r.hits += hits[w][s];
    r.simulations = simulations;
    r.p_value =
        static_cast<double>(r.hits) / static_cast<double>(simulations);
    r.std_error = standard_error(r.p_value, simulations);
    r.seed = seed;
  }
  return reports;
}

}  // namespace dgof
