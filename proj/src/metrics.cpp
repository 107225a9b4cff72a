#include "aeknn/metrics.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

namespace aeknn {

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes) : n_(n_classes), counts_(n_classes * n_classes, 0) {
  if (n_classes < 1) throw std::invalid_argument("confusion matrix: no classes");
}

ConfusionMatrix::ConfusionMatrix(std::span<const int> truth, std::span<const int> predicted,
                                 std::size_t n_classes)
    : ConfusionMatrix(n_classes) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("confusion matrix: truth and predictions differ in length");
  for (std::size_t i = 0; i < truth.size(); ++i) add(truth[i], predicted[i]);
}

void ConfusionMatrix::add(int truth, int predicted) {
  if (truth < 0 || predicted < 0 || static_cast<std::size_t>(truth) >= n_ ||
      static_cast<std::size_t>(predicted) >= n_)
    throw std::invalid_argument("confusion matrix: class index out of range");
  ++counts_[static_cast<std::size_t>(truth) * n_ + static_cast<std::size_t>(predicted)];
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::false_positives(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < n_; ++i)
    if (i != c) s += at(i, c);
  return s;
}

std::size_t ConfusionMatrix::false_negatives(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < n_; ++j)
    if (j != c) s += at(c, j);
  return s;
}

std::size_t ConfusionMatrix::true_negatives(std::size_t c) const {
  return total() - true_positives(c) - false_positives(c) - false_negatives(c);
}

double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw std::invalid_argument("accuracy: empty confusion matrix");
  std::size_t hits = 0;
  for (std::size_t c = 0; c < cm.n_classes(); ++c) hits += cm.at(c, c);
  return static_cast<double>(hits) / static_cast<double>(total);
}

double precision(const ConfusionMatrix& cm, std::size_t c) {
  const auto denom = cm.true_positives(c) + cm.false_positives(c);
  return denom ? static_cast<double>(cm.true_positives(c)) / static_cast<double>(denom) : 0.0;
}

double recall(const ConfusionMatrix& cm, std::size_t c) {
  const auto denom = cm.true_positives(c) + cm.false_negatives(c);
  return denom ? static_cast<double>(cm.true_positives(c)) / static_cast<double>(denom) : 0.0;
}

double f_score_class(const ConfusionMatrix& cm, std::size_t c) {
  const double p = precision(cm, c);
  const double r = recall(cm, c);
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double f_score(const ConfusionMatrix& cm, FAveraging averaging, std::size_t positive_class) {
  if (cm.total() == 0) throw std::invalid_argument("f_score: empty confusion matrix");
  if (averaging == FAveraging::BinaryPositive) {
    if (cm.n_classes() != 2)
      throw std::invalid_argument("f_score: binary averaging on " + std::to_string(cm.n_classes()) +
                                  " classes");
    if (positive_class > 1) throw std::invalid_argument("f_score: positive class out of range");
    return f_score_class(cm, positive_class);
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < cm.n_classes(); ++c) sum += f_score_class(cm, c);
  return sum / static_cast<double>(cm.n_classes());
}

double micro_f_score(const ConfusionMatrix& cm) {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t c = 0; c < cm.n_classes(); ++c) {
    tp += cm.true_positives(c);
    fp += cm.false_positives(c);
    fn += cm.false_negatives(c);
  }
  const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

namespace {

void check_binary_input(std::span<const double> scores, std::span<const bool> relevant,
                        std::size_t& positives, std::size_t& negatives) {
  if (scores.size() != relevant.size())
    throw std::invalid_argument("auc: scores and relevance differ in length");
  positives = static_cast<std::size_t>(std::count(relevant.begin(), relevant.end(), true));
  negatives = relevant.size() - positives;
  if (positives == 0 || negatives == 0)
    throw std::invalid_argument("auc: need at least one positive and one negative");
}

}  // namespace

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const bool> relevant) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  check_binary_input(scores, relevant, pos, neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i)
      relevant[order[i]] ? ++tp : ++fp;
    curve.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                     static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  return area;
}

double roc_auc_binary(std::span<const double> scores, std::span<const bool> relevant) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  check_binary_input(scores, relevant, pos, neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of mid-ranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t)
      if (relevant[order[t]]) rank_sum += mid;
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

double auc(const std::vector<std::vector<double>>& scores, std::span<const int> labels,
           AucAveraging averaging, std::size_t positive_class) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auc: scores and labels differ in length");
  if (scores.empty()) throw std::invalid_argument("auc: no samples");
  const std::size_t n_classes = scores.front().size();
  for (const auto& row : scores)
    if (row.size() != n_classes) throw std::invalid_argument("auc: ragged score rows");

  auto one_vs_rest = [&](std::size_t c) {
    std::vector<double> s(scores.size());
    auto rel = std::make_unique<bool[]>(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      s[i] = scores[i][c];
      rel[i] = labels[i] == static_cast<int>(c);
    }
    return roc_auc_binary(s, std::span<const bool>(rel.get(), scores.size()));
  };

  if (averaging == AucAveraging::Binary) {
    if (n_classes != 2 || positive_class > 1)
      throw std::invalid_argument("auc: binary averaging needs two classes");
    return one_vs_rest(positive_class);
  }
  std::vector<bool> present(n_classes, false);
  for (const int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= n_classes)
      throw std::invalid_argument("auc: label outside score columns");
    present[static_cast<std::size_t>(l)] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2)
    throw std::invalid_argument("auc: need at least two classes present");
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (!present[c]) continue;
    sum += one_vs_rest(c);
    ++used;
  }
  return sum / static_cast<double>(used);
}

}  // namespace aeknn
