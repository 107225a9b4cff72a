#pragma once

#include "aeknn/pipeline.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace aeknn::cli {

/// One sweep: every dataset crossed with every reducer configuration.
struct ExperimentSpec {
  std::vector<std::filesystem::path> datasets;
  std::vector<ReducerSpec> configurations;
  CsvOptions csv;
  std::size_t k = 5;
  std::size_t repetitions = 2;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::size_t positive_class = 1;
  bool normalize = true;
  unsigned jobs = 1;
  std::filesystem::path out_dir;

  void validate() const;
  /// Everything that determines the results, in a stable layout.
  nlohmann::json resolved() const;
};

/// Expands reducer names and PPL strings into the configuration list:
/// identity contributes one column, every other reducer one per PPL.
std::vector<ReducerSpec> expand_configurations(const std::vector<std::string>& reducers,
                                               const std::vector<std::string>& ppls,
                                               const TrainConfig& train);

struct EvalOutcome {
  nlohmann::json manifest;
  std::size_t failed_cells = 0;
};

/// Runs the sweep and writes accuracy.csv, fscore.csv, auc.csv, time.csv,
/// per-cell prediction audits, fold-plan sidecars and manifest.json into
/// spec.out_dir. Failed cells are recorded, never thrown.
EvalOutcome run_experiment(const ExperimentSpec& spec);

/// Writes plot_<metric>.csv files ("dataset,configuration,value") from a
/// manifest and returns the paths written.
std::vector<std::filesystem::path> write_plot_data(const nlohmann::json& manifest,
                                                   const std::filesystem::path& out_dir);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace aeknn::cli
