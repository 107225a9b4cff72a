#include "aeknn/pipeline.hpp"

#include "aeknn/csv.hpp"
#include "aeknn/metrics.hpp"

#include <chrono>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace aeknn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

Matrix FittedPipeline::encode(const Matrix& raw) const {
  return reducer->transform(normalizer ? normalizer->transform(raw) : raw);
}

FittedPipeline fit_pipeline(const Dataset& data, const std::vector<std::size_t>& train_rows,
                            const PipelineConfig& cfg) {
  if (train_rows.empty()) throw std::invalid_argument("pipeline: empty training fold");
  FittedPipeline fitted;
  Matrix train = gather_rows(data.features, train_rows);
  if (cfg.normalize) {
    std::vector<std::size_t> all(train_rows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    fitted.normalizer = fit_normalizer(train, all);
    train = fitted.normalizer->transform(train);
  }
  const auto labels = data.labels_at(train_rows);
  fitted.reducer = fit_reducer(cfg.reducer, train, labels);
  fitted.knn = std::make_unique<KnnModel>(fitted.reducer->transform(train), labels,
                                          data.n_classes(), cfg.k);
  return fitted;
}

double FoldResult::error_rate() const {
  if (truth.empty()) return 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (truth[i] != predicted[i]) ++errors;
  return static_cast<double>(errors) / static_cast<double>(truth.size());
}

FoldResult run_fold(const Dataset& data, const std::vector<std::size_t>& train_rows,
                    const std::vector<std::size_t>& test_rows, const PipelineConfig& cfg) {
  FoldResult r;
  auto start = Clock::now();
  const FittedPipeline fitted = fit_pipeline(data, train_rows, cfg);
  r.fit_seconds = seconds_since(start);

  start = Clock::now();
  const Matrix encoded = fitted.encode(gather_rows(data.features, test_rows));
  r.encode_seconds = seconds_since(start);

  start = Clock::now();
  const auto predictions = fitted.knn->classify_batch(encoded, cfg.classify_threads);
  r.classify_seconds = seconds_since(start);

  r.test_rows = test_rows;
  r.truth = data.labels_at(test_rows);
  r.encoded_dim = fitted.reducer->effective_dim();
  r.requested_dim = fitted.reducer->requested_dim();
  r.predicted.reserve(predictions.size());
  r.scores.reserve(predictions.size());
  for (const auto& p : predictions) {
    r.predicted.push_back(p.label);
    r.scores.push_back(p.votes);
  }
  return r;
}

FoldMetrics evaluate_fold(const FoldResult& fold, std::size_t n_classes, std::size_t positive_class) {
  const ConfusionMatrix cm(fold.truth, fold.predicted, n_classes);
  FoldMetrics m;
  m.accuracy = accuracy(cm);
  if (n_classes == 2) {
    m.f_score = f_score(cm, FAveraging::BinaryPositive, positive_class);
    m.auc = auc(fold.scores, fold.truth, AucAveraging::Binary, positive_class);
  } else {
    m.f_score = f_score(cm, FAveraging::Macro);
    m.auc = auc(fold.scores, fold.truth, AucAveraging::MacroOvr);
  }
  return m;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t repetition, std::size_t fold) {
  // splitmix64 finalizer over the packed cell coordinates.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (1 + repetition * 1000 + fold);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CvResult run_cv(const Dataset& data, const FoldPlan& plan, const PipelineConfig& cfg) {
  if (plan.n_samples() != data.n_samples())
    throw std::invalid_argument("run_cv: fold plan built for " + std::to_string(plan.n_samples()) +
                                " samples, dataset has " + std::to_string(data.n_samples()));
  CvResult out;
  for (std::size_t r = 0; r < plan.repetitions(); ++r) {
    for (std::size_t f = 0; f < plan.folds(); ++f) {
      PipelineConfig fold_cfg = cfg;
      fold_cfg.reducer.train.seed = fold_seed(cfg.reducer.train.seed, r, f);
      FoldResult fold = run_fold(data, plan.train_rows(r, f), plan.test_rows(r, f), fold_cfg);
      fold.repetition = r;
      fold.fold = f;
      out.fold_metrics.push_back(evaluate_fold(fold, data.n_classes(), cfg.positive_class));
      out.folds.push_back(std::move(fold));
    }
  }
  for (std::size_t i = 0; i < out.folds.size(); ++i) {
    out.mean.accuracy += out.fold_metrics[i].accuracy;
    out.mean.f_score += out.fold_metrics[i].f_score;
    out.mean.auc += out.fold_metrics[i].auc;
    out.mean_classification_seconds += out.folds[i].classification_seconds();
    out.mean_fit_seconds += out.folds[i].fit_seconds;
  }
  if (!out.folds.empty()) {
    const double n = static_cast<double>(out.folds.size());
    out.mean.accuracy /= n;
    out.mean.f_score /= n;
    out.mean.auc /= n;
    out.mean_classification_seconds /= n;
    out.mean_fit_seconds /= n;
    out.encoded_dim = out.folds.front().encoded_dim;
    out.requested_dim = out.folds.front().requested_dim;
  }
  return out;
}

void write_predictions(std::ostream& out, const Dataset& data, const CvResult& result) {
  std::vector<std::string> header{"repetition", "fold", "row", "true", "predicted"};
  for (const auto& name : data.class_names) header.push_back("score:" + name);
  out << csv::join(header) << "\n";
  for (const auto& fold : result.folds) {
    for (std::size_t i = 0; i < fold.test_rows.size(); ++i) {
      std::vector<std::string> fields{
          std::to_string(fold.repetition), std::to_string(fold.fold), std::to_string(fold.test_rows[i]),
          data.class_names[static_cast<std::size_t>(fold.truth[i])],
          data.class_names[static_cast<std::size_t>(fold.predicted[i])]};
      for (const double s : fold.scores[i]) fields.push_back(csv::format_double(s));
      out << csv::join(fields) << "\n";
    }
  }
}

}  // namespace aeknn
