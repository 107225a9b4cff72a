#pragma once

#include "aeknn/dataset.hpp"
#include "aeknn/knn.hpp"
#include "aeknn/reducers.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace aeknn {

struct PipelineConfig {
  ReducerSpec reducer;
  std::size_t k = 5;
  bool normalize = true;
  /// Positive class for binary F-Score and AUC.
  std::size_t positive_class = 1;
  unsigned classify_threads = 1;
};

/// Everything learned from a training fold: normalizer, reducer and the kNN
/// model over the encoded training rows.
struct FittedPipeline {
  std::optional<NormalizationStats> normalizer;
  std::unique_ptr<Reducer> reducer;
  std::unique_ptr<KnnModel> knn;

  Matrix encode(const Matrix& raw) const;
};

FittedPipeline fit_pipeline(const Dataset& data, const std::vector<std::size_t>& train_rows,
                            const PipelineConfig& cfg);

struct FoldResult {
  std::size_t repetition = 0;
  std::size_t fold = 0;
  std::vector<std::size_t> test_rows;
  std::vector<int> truth;
  std::vector<int> predicted;
  /// Per-class vote fractions, one row per test sample.
  std::vector<std::vector<double>> scores;
  std::size_t encoded_dim = 0;
  std::size_t requested_dim = 0;
  double fit_seconds = 0.0;
  double encode_seconds = 0.0;
  double classify_seconds = 0.0;

  double error_rate() const;
  /// Time to classify the test fold: encoding plus kNN search.
  double classification_seconds() const { return encode_seconds + classify_seconds; }
};

FoldResult run_fold(const Dataset& data, const std::vector<std::size_t>& train_rows,
                    const std::vector<std::size_t>& test_rows, const PipelineConfig& cfg);

struct FoldMetrics {
  double accuracy = 0.0;
  double f_score = 0.0;
  double auc = 0.0;
};

/// Positive-class F and binary AUC for two classes, macro averages otherwise.
FoldMetrics evaluate_fold(const FoldResult& fold, std::size_t n_classes, std::size_t positive_class);

struct CvResult {
  std::vector<FoldResult> folds;
  std::vector<FoldMetrics> fold_metrics;
  FoldMetrics mean;
  double mean_classification_seconds = 0.0;
  double mean_fit_seconds = 0.0;
  std::size_t encoded_dim = 0;
  std::size_t requested_dim = 0;
};

/// Seed used for the reducer of one (repetition, fold) cell.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t repetition, std::size_t fold);

/// Runs every train/test split of the plan and averages the metrics over all
/// folds. The AE seed of each fold is fold_seed(cfg.reducer.train.seed, r, f).
CvResult run_cv(const Dataset& data, const FoldPlan& plan, const PipelineConfig& cfg);

/// Audit CSV: repetition,fold,row,true,predicted,score:<class>...
void write_predictions(std::ostream& out, const Dataset& data, const CvResult& result);

}  // namespace aeknn
