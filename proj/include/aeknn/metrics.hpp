#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aeknn {

/// counts[i][j] = samples of true class i predicted as class j.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes);
  ConfusionMatrix(std::span<const int> truth, std::span<const int> predicted, std::size_t n_classes);

  void add(int truth, int predicted);
  std::size_t n_classes() const { return n_; }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * n_ + predicted]; }
  std::size_t total() const;

  std::size_t true_positives(std::size_t c) const { return at(c, c); }
  std::size_t false_positives(std::size_t c) const;
  std::size_t false_negatives(std::size_t c) const;
  std::size_t true_negatives(std::size_t c) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

enum class FAveraging { BinaryPositive, Macro };
enum class AucAveraging { Binary, MacroOvr };

double accuracy(const ConfusionMatrix& cm);
double precision(const ConfusionMatrix& cm, std::size_t c);
double recall(const ConfusionMatrix& cm, std::size_t c);
/// One-vs-rest F for class c; 0 when precision + recall is 0.
double f_score_class(const ConfusionMatrix& cm, std::size_t c);
/// BinaryPositive requires two classes and scores `positive_class`; Macro is
/// the unweighted mean over all classes of the matrix.
double f_score(const ConfusionMatrix& cm, FAveraging averaging, std::size_t positive_class = 1);
/// Micro-averaged F. Equal to accuracy for single-label data.
double micro_f_score(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr;
  double tpr;
};

/// ROC points from (0,0) to (1,1), one per distinct score threshold.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const bool> relevant);
double trapezoid_area(std::span<const RocPoint> curve);

/// Mann-Whitney AUC with mid-ranks for tied scores.
double roc_auc_binary(std::span<const double> scores, std::span<const bool> relevant);

/// `scores` holds one row of per-class scores per sample. Binary uses the
/// score of `positive_class`; MacroOvr averages one-vs-rest AUC over classes
/// present in `labels`.
double auc(const std::vector<std::vector<double>>& scores, std::span<const int> labels,
           AucAveraging averaging, std::size_t positive_class = 1);

}  // namespace aeknn
