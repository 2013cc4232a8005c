#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reflab/config.hpp"
#include "reflab/inequalities.hpp"

namespace reflab {

struct RunFlags {
  std::optional<std::uint64_t> seed;  ///< overrides every experiment's seed
  int jobs = 1;
  bool richardson = false;  ///< simulate and local-time also run at h/2
  bool strict_class_d = false;
  std::string dump_dir;  ///< non-empty: simulate writes path dumps here
};

struct ResultRow {
  std::string experiment;
  std::string estimator;
  std::string x;
  std::optional<double> t;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n = 0;
  double h = 0.0;
  std::uint64_t seed = 0;
  std::string digest;
};

struct ExperimentResult {
  std::string label;
  std::string kind;
  std::string digest;
  std::uint64_t seed = 0;
  std::vector<ResultRow> rows;
  std::vector<CheckReport> reports;
  std::vector<std::pair<std::string, std::string>> files;  ///< extra plot-ready CSVs
  int failures = 0;  ///< failed positive checks plus negatives that did not fail
  std::string summary;
  double wall_seconds = 0.0;
};

/// Runs one section as `kind`. Throws ConfigError for configurations that
/// cannot be run.
ExperimentResult run_experiment(ExperimentConfig c, const std::string& kind, const RunFlags& flags);

/// Sections selected by a subcommand: `all` takes every section with a
/// kind; otherwise sections of that kind or without one.
std::vector<ExperimentConfig> select(const SuiteConfig& suite, const std::string& subcommand);

std::string results_csv(const std::vector<ExperimentResult>& results);
std::string reports_jsonl(const std::vector<ExperimentResult>& results);

}  // namespace reflab
