#pragma once

// Pipelines behind the CLI subcommands. Each writes its artifacts under an
// output directory and returns a JSON summary of what it produced.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhanes/experiment.hpp"
#include "nhanes/ingest.hpp"

namespace nhanes::commands {

using Path = std::filesystem::path;
using Json = nlohmann::ordered_json;

struct DownloadOptions {
  std::vector<std::string> cycles;      ///< labels; empty = all eight
  std::vector<std::string> components;  ///< manifest names; empty = all
  Path manifest = ingest::default_component_manifest();
  Path cache_root = ingest::default_cache_root();
  std::string base_url = std::string(ingest::kDefaultBaseUrl);
  ingest::FetchOptions fetch;
};

/// Fetches the requested component files into the cache and writes
/// download_report.json (present and absent files) under `out`.
Json cmd_download(const DownloadOptions& options, ingest::Transport& transport, const Path& out);

struct CleanOptions {
  Path rules = harmonize::default_rule_file();
  Path manifest = ingest::default_component_manifest();
  Path cache_root = ingest::default_cache_root();
  std::vector<std::string> cycles;
  std::vector<std::string> views;  ///< empty = every view in the rule file
  bool strict = false;
};

/// Builds every harmonized view from cached files only; writes
/// `<out>/<view>.csv` plus sidecars and clean_report.json.
Json cmd_clean(const CleanOptions& options, const Path& out);

struct EdaOptions {
  Path view;
  std::string column = "age";
  double bin_width = 5;
  std::optional<std::string> group_by;
  bool adult_only = true;
  std::string age_column = "age";
};

/// summary.csv/json, histogram.csv/json and histogram.svg.
Json cmd_eda(const EdaOptions& options, const Path& out);

struct PcaOptions {
  Path view;
  int k = 2;
  std::vector<std::string> columns;  ///< empty = every non-key column
  bool standardize = true;
};

/// pca_model.json and pca_loadings.csv.
Json cmd_pca(const PcaOptions& options, const Path& out);

struct CcaOptions {
  Path x_view;
  Path y_view;
  int k = 2;
  double ridge = cca::kDefaultRidge;
  std::vector<std::string> x_columns;
  std::vector<std::string> y_columns;
};

/// cca_model.json and cca_loadings.csv.
Json cmd_cca(const CcaOptions& options, const Path& out);

/// reports.csv, reports.json, run.json and roc_<variant>.{csv,svg}.
Json cmd_experiment(const task::ExperimentConfig& config, const Path& out,
                    const task::ProgressFn& progress = {});

/// Writes the synthetic cohort as view files.
Json cmd_synth(const synthetic::SyntheticOptions& options, const Path& out);

/// XPORT file to CSV; missing codes go to `<name>__missing` columns when kept.
Json cmd_dump(const Path& xpt, const Path& csv, bool keep_missing_codes);

/// Global run settings read by --config. Unknown keys are rejected.
struct RunConfig {
  std::optional<Path> cache_dir;
  std::optional<Path> rules;
  std::optional<Path> manifest;
  std::optional<Path> out;
  std::vector<std::string> cycles;
  std::optional<std::uint64_t> seed;
  std::optional<task::ExperimentConfig> experiment;
};

RunConfig parse_run_config(const nlohmann::json& j, const Path& base_dir = {});
RunConfig load_run_config(const Path& path);

/// File-system safe version of a variant name.
std::string slug(std::string_view name);

}  // namespace nhanes::commands
