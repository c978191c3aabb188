#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dgof/distribution.hpp"
#include "dgof/models.hpp"
#include "dgof/montecarlo.hpp"
#include "dgof/orderings.hpp"

namespace dgof::io {

inline constexpr std::string_view kVersion = "0.1.0";

/// Data/usage error carrying the offending file and 1-based line (0 when
/// the location is not line-oriented).
class DataError : public std::runtime_error {
 public:
  DataError(std::string file, std::size_t line, const std::string& what);
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// --- CSV ------------------------------------------------------------------

/// Reads a `label,count` CSV (UTF-8, no thousands separators, base-10
/// nonnegative integer counts). Duplicate labels are rejected.
std::vector<std::pair<std::string, std::uint64_t>> read_counts_csv(
    const std::string& path);

/// Reads a `label,prob` CSV into a validated distribution.
BinDistribution read_model_csv(const std::string& path);

// --- model specifications ---------------------------------------------------

// A parsed model spec: builtin `uniform:m`, `poisson:lambda`, `hw`,
// `sparse-uniform:M`, or a path to a `label,prob` CSV. Exactly one of
// dense/family/sparse is populated (family implies the hw bin layout).
struct LoadedModel {
  std::string spec;
  std::optional<BinDistribution> dense;
  std::shared_ptr<const ParametricFamily> family;
  std::optional<SparseUniformModel> sparse;
  std::optional<std::uint64_t> poisson_trunc;  // set for poisson builtins

  bool is_sparse() const { return sparse.has_value(); }
};

LoadedModel parse_model_spec(const std::string& spec);

/// Aligns labelled counts to a dense model: by label when the model carries
/// labels (missing labels mean zero; for poisson builtins integer labels
/// beyond the truncation fold into the overflow bin), else by file order
/// (the row count must equal the bin count).
EmpiricalCounts align_counts(
    const std::vector<std::pair<std::string, std::uint64_t>>& rows,
    const LoadedModel& model, const std::string& file);

/// Sparse counts from labelled rows whose labels are 1-based bin indices.
EmpiricalCounts sparse_counts_from_rows(
    const std::vector<std::pair<std::string, std::uint64_t>>& rows,
    std::uint64_t support, const std::string& file);

// --- raw draw streams -------------------------------------------------------

/// Reads a draw stream into sparse counts over 1..support. Text format: one
/// base-10 integer per line. Binary format: little-endian unsigned 32-bit
/// words. `one_based` states whether raw values are already 1-based;
/// zero-based values are shifted up by one. Out-of-range draws raise
/// DataError naming the line (text) or byte offset (binary).
EmpiricalCounts read_draws(const std::string& path, std::uint64_t support,
                           bool binary, bool one_based);

// --- reports ----------------------------------------------------------------

/// Doubles rendered with 17 significant digits ("%.17g"); non-finite values
/// become the strings "inf"/"-inf"/"nan".
std::string format_double(double x);

std::string report_json(const PValueReport& report);

/// Whole-run output object: {"meta": {...}, "reports": [...]} followed by a
/// newline. `command` is the canonical re-run command embedded in meta.
std::string run_output_json(std::span<const PValueReport> reports,
                            const std::string& command, std::uint64_t seed,
                            std::uint64_t simulations);

/// One JSON line per trial; the permutation is included when m <= 64.
std::string trial_json_line(const TrialResult& trial);

// --- plot data --------------------------------------------------------------

struct PlotSeries {
  enum class Kind { pmf, cmf, trial_pvalues };
  Kind kind{};
  std::vector<double> x;
  std::vector<std::string> names;            // one per y series
  std::vector<std::vector<double>> series;   // series[i].size() == x.size()
};

/// CSV with an `x` column followed by one column per named series.
std::string plot_csv(const PlotSeries& plot);

/// The fixed observed dataset of the Poisson example: one draw at each of
/// 100..109 (n = 10).
std::vector<std::pair<std::string, std::uint64_t>> poisson_observed_rows();

/// pmf or cmf series (model vs observed/simulated) for the Poisson
/// experiment; `experiment` is one of poisson-pmf-observed,
/// poisson-pmf-simulated, poisson-cmf-observed, poisson-cmf-simulated.
PlotSeries poisson_plot(const std::string& experiment, std::uint64_t seed);

/// Per-trial P-value series (x = trial index, one column per statistic).
PlotSeries trial_pvalue_plot(std::span<const TrialResult> trials);

// --- run configuration ------------------------------------------------------

// Parsed CLI flags; round-trips through JSON so runs can be archived and
// replayed.
struct RunConfig {
  std::string subcommand;
  std::string data_path;
  std::string model_spec;
  std::vector<std::string> statistics;
  std::uint64_t simulations = 100000;
  std::uint64_t seed = 0;
  std::uint32_t trials = 10;
  std::string ordering = "identity";
  unsigned workers = 0;  // 0 = auto
  std::string output_path;

  bool operator==(const RunConfig&) const = default;
};

std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& json_text);

}  // namespace dgof::io
