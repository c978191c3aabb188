#include "dgof/io.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace dgof::io {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::uint64_t parse_u64(std::string_view text, const std::string& file,
                        std::size_t line, const char* what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw DataError(file, line,
                    std::string("expected a base-10 nonnegative integer ") +
                        what + ", got \"" + std::string(text) + "\"");
  return value;
}

double parse_prob(std::string_view text, const std::string& file,
                  std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw DataError(file, line, "expected a probability, got \"" +
                                    std::string(text) + "\"");
  return value;
}

// label,value rows shared by the two CSV readers
template <typename ParseValue>
auto read_two_column_csv(const std::string& path, const char* header,
                         ParseValue&& parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path, 0, "cannot open file");
  std::string line;
  if (!std::getline(in, line))
    throw DataError(path, 1, "empty file; expected header " +
                                 std::string(header));
  if (strip_cr(line) != header)
    throw DataError(path, 1, "expected header \"" + std::string(header) +
                                 "\", got \"" + strip_cr(line) + "\"");
  using Value = decltype(parse(std::string_view{}, std::size_t{}));
  std::vector<std::pair<std::string, Value>> rows;
  std::unordered_set<std::string> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError(path, lineno, "expected \"label,value\", got \"" +
                                        line + "\"");
    std::string label = line.substr(0, comma);
    if (label.empty()) throw DataError(path, lineno, "empty label");
    if (!seen.insert(label).second)
      throw DataError(path, lineno, "duplicate label \"" + label + "\"");
    rows.emplace_back(std::move(label),
                      parse(std::string_view(line).substr(comma + 1), lineno));
  }
  if (rows.empty()) throw DataError(path, lineno, "no data rows");
  return rows;
}

}  // namespace

DataError::DataError(std::string file, std::size_t line,
                     const std::string& what)
    : std::runtime_error(file + (line > 0 ? ":" + std::to_string(line) : "") +
                         ": " + what),
      file_(std::move(file)),
      line_(line) {}

std::vector<std::pair<std::string, std::uint64_t>> read_counts_csv(
    const std::string& path) {
  return read_two_column_csv(
      path, "label,count", [&](std::string_view text, std::size_t line) {
        return parse_u64(text, path, line, "count");
      });
}

BinDistribution read_model_csv(const std::string& path) {
  auto rows = read_two_column_csv(
      path, "label,prob", [&](std::string_view text, std::size_t line) {
        return parse_prob(text, path, line);
      });
  std::vector<double> probs;
  std::vector<std::string> labels;
  probs.reserve(rows.size());
  labels.reserve(rows.size());
  for (auto& [label, p] : rows) {
    labels.push_back(std::move(label));
    probs.push_back(p);
  }
  try {
    return BinDistribution(std::move(probs), std::move(labels));
  } catch (const std::invalid_argument& e) {
    throw DataError(path, 0, e.what());
  }
}

LoadedModel parse_model_spec(const std::string& spec) {
  LoadedModel model;
  model.spec = spec;
  auto arg_after = [&](std::string_view prefix) {
    return spec.substr(prefix.size());
  };
  if (spec.rfind("uniform:", 0) == 0) {
    const std::uint64_t m =
        parse_u64(arg_after("uniform:"), spec, 0, "bin count");
    model.dense = make_uniform(m);
    return model;
  }
  if (spec.rfind("poisson:", 0) == 0) {
    const std::string arg{arg_after("poisson:")};
    double lambda = 0.0;
    double tail_tol = 1e-12;
    const auto colon = arg.find(':');
    const std::string lam_text = colon == std::string::npos
                                     ? arg
                                     : arg.substr(0, colon);
    lambda = parse_prob(lam_text, spec, 0);
    if (colon != std::string::npos)
      tail_tol = parse_prob(arg.substr(colon + 1), spec, 0);
    const TruncatedPoissonModel pm = poisson_model(lambda, tail_tol);
    model.dense = pm.distribution();
    model.poisson_trunc = pm.truncation_index();
    return model;
  }
  if (spec == "hw") {
    model.family = std::make_shared<HardyWeinbergFamily>();
    return model;
  }
  if (spec.rfind("sparse-uniform:", 0) == 0) {
    const std::uint64_t m =
        parse_u64(arg_after("sparse-uniform:"), spec, 0, "support size");
    model.sparse = SparseUniformModel(m);
    return model;
  }
  model.dense = read_model_csv(spec);
  return model;
}

EmpiricalCounts align_counts(
    const std::vector<std::pair<std::string, std::uint64_t>>& rows,
    const LoadedModel& model, const std::string& file) {
  if (model.is_sparse())
    return sparse_counts_from_rows(rows, model.sparse->support, file);

  std::vector<std::string> labels;
  if (model.family) {
    labels = hw_labels();
  } else if (model.dense->has_labels()) {
    labels = model.dense->labels();
  }

  if (labels.empty()) {
    // unlabeled model: counts align by file order
    if (rows.size() != model.dense->size())
      throw DataError(file, 0,
                      "model has " + std::to_string(model.dense->size()) +
                          " bins but the counts file has " +
                          std::to_string(rows.size()) + " rows");
    std::vector<std::uint64_t> counts;
    counts.reserve(rows.size());
    for (const auto& [label, c] : rows) counts.push_back(c);
    return EmpiricalCounts::dense(std::move(counts));
  }

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < labels.size(); ++j) index.emplace(labels[j], j);
  std::vector<std::uint64_t> counts(labels.size(), 0);
  for (const auto& [label, c] : rows) {
    const auto it = index.find(label);
    if (it != index.end()) {
      counts[it->second] += c;
      continue;
    }
    if (model.poisson_trunc) {
      // integer labels beyond the truncation fold into the overflow bin
      std::uint64_t j = 0;
      const auto [ptr, ec] =
          std::from_chars(label.data(), label.data() + label.size(), j);
      if (ec == std::errc() && ptr == label.data() + label.size() &&
          j > *model.poisson_trunc) {
        counts.back() += c;
        continue;
      }
    }
    throw DataError(file, 0, "label \"" + label +
                                 "\" does not name a model bin");
  }
  return EmpiricalCounts::dense(std::move(counts));
}

EmpiricalCounts sparse_counts_from_rows(
    const std::vector<std::pair<std::string, std::uint64_t>>& rows,
    std::uint64_t support, const std::string& file) {
  std::vector<EmpiricalCounts::SparseEntry> entries;
  entries.reserve(rows.size());
  for (const auto& [label, c] : rows) {
    if (c == 0) continue;
    const std::uint64_t bin = parse_u64(label, file, 0, "bin index");
    if (bin < 1 || bin > support)
      throw DataError(file, 0, "bin index " + label +
                                   " outside the support [1, " +
                                   std::to_string(support) + "]");
    entries.emplace_back(bin, c);
  }
  try {
    return EmpiricalCounts::sparse(std::move(entries), support);
  } catch (const std::invalid_argument& e) {
    throw DataError(file, 0, e.what());
  }
}

EmpiricalCounts read_draws(const std::string& path, std::uint64_t support,
                           bool binary, bool one_based) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path, 0, "cannot open file");
  std::vector<std::uint64_t> draws;
  if (binary) {
    unsigned char word[4];
    std::size_t offset = 0;
    while (in.read(reinterpret_cast<char*>(word), 4)) {
      const std::uint64_t raw = static_cast<std::uint64_t>(word[0]) |
                                (static_cast<std::uint64_t>(word[1]) << 8) |
                                (static_cast<std::uint64_t>(word[2]) << 16) |
                                (static_cast<std::uint64_t>(word[3]) << 24);
      const std::uint64_t bin = one_based ? raw : raw + 1;
      if (bin < 1 || bin > support)
        throw DataError(path, 0,
                        "draw " + std::to_string(raw) + " at byte offset " +
                            std::to_string(offset) +
                            " outside the support [1, " +
                            std::to_string(support) + "]");
      draws.push_back(bin);
      offset += 4;
    }
    if (in.gcount() != 0)
      throw DataError(path, 0, "trailing partial word at byte offset " +
                                   std::to_string(offset));
  } else {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = strip_cr(line);
      if (line.empty()) continue;
      const std::uint64_t raw = parse_u64(line, path, lineno, "draw");
      const std::uint64_t bin = one_based ? raw : raw + 1;
      if (bin < 1 || bin > support)
        throw DataError(path, lineno,
                        "draw " + line + " outside the support [1, " +
                            std::to_string(support) + "]");
      draws.push_back(bin);
    }
  }
  if (draws.empty()) throw DataError(path, 0, "no draws in stream");
  std::sort(draws.begin(), draws.end());
  std::vector<EmpiricalCounts::SparseEntry> entries;
  for (std::size_t i = 0; i < draws.size();) {
    std::size_t j = i;
    while (j < draws.size() && draws[j] == draws[i]) ++j;
    entries.emplace_back(draws[i], j - i);
    i = j;
  }
  return EmpiricalCounts::sparse(std::move(entries), support);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "\"nan\"";
  if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string report_json(const PValueReport& report) {
  std::ostringstream out;
  out << "{\"statistic\":\"" << to_string(report.kind) << "\""
      << ",\"observed\":" << format_double(report.observed)
      << ",\"p_value\":" << format_double(report.p_value)
      << ",\"std_error\":" << format_double(report.std_error)
      << ",\"simulations\":" << report.simulations
      << ",\"hits\":" << report.hits << ",\"seed\":" << report.seed
      << ",\"rng_id\":\"" << report.rng_id << "\"}";
  return out.str();
}

std::string run_output_json(std::span<const PValueReport> reports,
                            const std::string& command, std::uint64_t seed,
                            std::uint64_t simulations) {
  std::ostringstream out;
  out << "{\"meta\":{\"version\":\"" << kVersion << "\",\"rng_id\":\""
      << rng::kRngId << "\",\"seed\":" << seed
      << ",\"simulations\":" << simulations << ",\"command\":"
      << nlohmann::json(command).dump() << "},\"reports\":[";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i) out << ",";
    out << report_json(reports[i]);
  }
  out << "]}\n";
  return out.str();
}

std::string trial_json_line(const TrialResult& trial) {
  std::ostringstream out;
  char digest[20];
  std::snprintf(digest, sizeof digest, "%016" PRIx64, trial.digest);
  out << "{\"trial\":" << trial.trial << ",\"digest\":\"" << digest << "\"";
  if (trial.permutation.size() <= 64) {
    out << ",\"permutation\":[";
    for (std::size_t i = 0; i < trial.permutation.size(); ++i) {
      if (i) out << ",";
      out << trial.permutation[i];
    }
    out << "]";
  }
  out << ",\"reports\":[";
  for (std::size_t i = 0; i < trial.reports.size(); ++i) {
    if (i) out << ",";
    out << report_json(trial.reports[i]);
  }
  out << "]}";
  return out.str();
}

std::string plot_csv(const PlotSeries& plot) {
  std::ostringstream out;
  out << "x";
  for (const auto& name : plot.names) out << "," << name;
  out << "\n";
  for (std::size_t i = 0; i < plot.x.size(); ++i) {
    out << format_double(plot.x[i]);
    for (const auto& series : plot.series)
      out << "," << format_double(series[i]);
    out << "\n";
  }
  return out.str();
}

std::vector<std::pair<std::string, std::uint64_t>> poisson_observed_rows() {
  std::vector<std::pair<std::string, std::uint64_t>> rows;
  for (int j = 100; j <= 109; ++j) rows.emplace_back(std::to_string(j), 1);
  return rows;
}

PlotSeries poisson_plot(const std::string& experiment, std::uint64_t seed) {
  const bool cmf = experiment == "poisson-cmf-observed" ||
                   experiment == "poisson-cmf-simulated";
  const bool pmf = experiment == "poisson-pmf-observed" ||
                   experiment == "poisson-pmf-simulated";
  if (!cmf && !pmf)
    throw std::invalid_argument("unknown plot experiment: " + experiment);
  const bool simulated = experiment.ends_with("simulated");

  const TruncatedPoissonModel model = poisson_model(100.0);
  LoadedModel loaded;
  loaded.spec = "poisson:100";
  loaded.dense = model.distribution();
  loaded.poisson_trunc = model.truncation_index();

  EmpiricalCounts counts = [&] {
    if (!simulated) return align_counts(poisson_observed_rows(), loaded, "");
    rng::Stream stream(seed, rng::Domain::data, 0);
    return sample_counts(model.distribution(), 10, stream);
  }();

  const std::size_t m = model.distribution().size();
  PlotSeries plot;
  plot.kind = cmf ? PlotSeries::Kind::cmf : PlotSeries::Kind::pmf;
  plot.names = {"model", simulated ? "simulated" : "observed"};
  plot.series.resize(2);
  const double n = static_cast<double>(counts.total());
  NeumaierSum cum_model, cum_data;
  for (std::size_t j = 0; j < m; ++j) {
    plot.x.push_back(static_cast<double>(j));  // overflow bin sits at J+1
    const double pj = model.distribution().prob(j);
    const double dj = static_cast<double>(counts.counts()[j]) / n;
    if (cmf) {
      cum_model.add(pj);
      cum_data.add(dj);
      plot.series[0].push_back(cum_model.value());
      plot.series[1].push_back(cum_data.value());
    } else {
      plot.series[0].push_back(pj);
      plot.series[1].push_back(dj);
    }
  }
  return plot;
}

PlotSeries trial_pvalue_plot(std::span<const TrialResult> trials) {
  PlotSeries plot;
  plot.kind = PlotSeries::Kind::trial_pvalues;
  if (trials.empty()) return plot;
  for (const auto& report : trials.front().reports)
    plot.names.emplace_back(to_string(report.kind));
  plot.series.resize(plot.names.size());
  for (const auto& trial : trials) {
    plot.x.push_back(static_cast<double>(trial.trial));
    for (std::size_t s = 0; s < trial.reports.size(); ++s)
      plot.series[s].push_back(trial.reports[s].p_value);
  }
  return plot;
}

std::string run_config_to_json(const RunConfig& config) {
  nlohmann::ordered_json j;
  j["subcommand"] = config.subcommand;
  j["data_path"] = config.data_path;
  j["model_spec"] = config.model_spec;
  j["statistics"] = config.statistics;
  j["simulations"] = config.simulations;
  j["seed"] = config.seed;
  j["trials"] = config.trials;
  j["ordering"] = config.ordering;
  j["workers"] = config.workers;
  j["output_path"] = config.output_path;
  return j.dump();
}

RunConfig run_config_from_json(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  RunConfig config;
  config.subcommand = j.at("subcommand").get<std::string>();
  config.data_path = j.at("data_path").get<std::string>();
  config.model_spec = j.at("model_spec").get<std::string>();
  config.statistics = j.at("statistics").get<std::vector<std::string>>();
  config.simulations = j.at("simulations").get<std::uint64_t>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.trials = j.at("trials").get<std::uint32_t>();
  config.ordering = j.at("ordering").get<std::string>();
  config.workers = j.at("workers").get<unsigned>();
  config.output_path = j.at("output_path").get<std::string>();
  return config;
}

}  // namespace dgof::io
