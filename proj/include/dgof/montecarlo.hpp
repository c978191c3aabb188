#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dgof/distribution.hpp"
#include "dgof/models.hpp"
#include "dgof/rng.hpp"
#include "dgof/statistics.hpp"

namespace dgof {

/// Monte-Carlo standard error sqrt(p(1-p)/sims).
double standard_error(double p_hat, std::uint64_t sims);

struct PValueReport {
  StatisticKind kind{};
  double observed = 0.0;
  double p_value = 0.0;   // hits / simulations, exactly
  double std_error = 0.0;
  std::uint64_t simulations = 0;
  std::uint64_t hits = 0;  // simulations with statistic >= observed
  std::uint64_t seed = 0;
  std::string rng_id{rng::kRngId};
};

// Everything that determines a test run. Exactly one of `fixed` /`family`
// is set; with a family the model is re-fitted to every simulated
// experiment. Reports are a pure function of this struct: worker count
// never changes results.
struct TestSpec {
  EmpiricalCounts data;
  std::optional<BinDistribution> fixed;
  std::shared_ptr<const ParametricFamily> family;
  std::vector<StatisticKind> statistics;
  Ordering ordering = Ordering::identity();
  std::uint64_t simulations = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0 = hardware concurrency

  static TestSpec fixed_model(EmpiricalCounts data, BinDistribution model,
                              std::vector<StatisticKind> statistics,
                              std::uint64_t simulations, std::uint64_t seed);
  static TestSpec parametric(EmpiricalCounts data,
                             std::shared_ptr<const ParametricFamily> family,
                             std::vector<StatisticKind> statistics,
                             std::uint64_t simulations, std::uint64_t seed);
};

/// One draw from Binomial(n, p). Inversion for small n*p, transformed
/// rejection (BTRS) otherwise.
std::uint64_t binomial_draw(std::uint64_t n, double p, rng::Stream& stream);

/// n i.i.d. draws from the model, tallied per bin: multinomial counts via
/// the conditional-binomial decomposition (m binomial draws, not n
/// categorical ones).
EmpiricalCounts sample_counts(const BinDistribution& model, std::uint64_t n,
                              rng::Stream& stream);

/// Monte-Carlo P-values for every requested statistic. All statistics are
/// evaluated on the same simulated experiments, so the reported P-values
/// are paired (and correlated). Ties count toward hits.
std::vector<PValueReport> pvalue(const TestSpec& spec);

/// Sparse-support variant: simulations draw n indices uniformly from 1..M.
/// Only ks and euclidean are available.
std::vector<PValueReport> pvalue_sparse(const EmpiricalCounts& data,
                                        const SparseUniformModel& model,
                                        std::vector<StatisticKind> kinds,
                                        std::uint64_t simulations,
                                        std::uint64_t seed,
                                        unsigned workers = 0);

namespace detail {

// One statistic to track through a simulation run: a kind plus (for ks)
// the ordering it is evaluated under.
struct Slot {
  StatisticKind kind{};
  const Ordering* ordering = nullptr;  // null = identity
};

struct SlotResult {
  double observed = 0.0;
  std::uint64_t hits = 0;
};

/// Shared dense engine behind pvalue and ordering_trials: one pass over
/// `sims` simulated experiments, evaluating every slot per experiment.
std::vector<SlotResult> run_dense(const EmpiricalCounts& data,
                                  const BinDistribution* fixed,
                                  const ParametricFamily* family,
                                  std::span<const Slot> slots,
                                  std::uint64_t sims, std::uint64_t seed,
                                  unsigned workers);

/// Uniform index draws in [1, M], tallied sparsely.
EmpiricalCounts sample_sparse_uniform(const SparseUniformModel& model,
                                      std::uint64_t n, rng::Stream& stream);

unsigned resolve_workers(unsigned requested);

}  // namespace detail

}  // namespace dgof
