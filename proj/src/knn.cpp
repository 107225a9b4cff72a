#include "aeknn/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace aeknn {

KnnModel::KnnModel(Matrix reference, std::vector<int> labels, std::size_t n_classes, std::size_t k)
    : reference_(std::move(reference)), labels_(std::move(labels)), n_classes_(n_classes), k_(k) {
  if (static_cast<std::size_t>(reference_.rows()) != labels_.size())
    throw std::invalid_argument("knn: reference rows and labels differ in length");
  if (k_ < 1 || k_ > labels_.size())
    throw std::invalid_argument("knn: k=" + std::to_string(k_) + " outside [1, " +
                                std::to_string(labels_.size()) + "]");
  for (const int l : labels_)
    if (l < 0 || static_cast<std::size_t>(l) >= n_classes_)
      throw std::invalid_argument("knn: label outside class range");
  if (!reference_.allFinite()) throw std::invalid_argument("knn: non-finite reference value");
}

std::vector<Neighbor> KnnModel::neighbors(const Vector& query) const {
  if (static_cast<std::size_t>(query.size()) != dim())
    throw std::invalid_argument("knn: query has " + std::to_string(query.size()) +
                                " values, model expects " + std::to_string(dim()));
  // Ordered on squared distance; sqrt is monotone so the order is the same.
  // `all` is a max-heap on (distance, index) holding the k best so far.
  const auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  };
  const RowVector q = query.transpose();
  std::vector<Neighbor> all;
  all.reserve(k_ + 1);
  for (Eigen::Index i = 0; i < reference_.rows(); ++i) {
    const Neighbor candidate{static_cast<std::size_t>(i), (reference_.row(i) - q).squaredNorm()};
    if (all.size() < k_) {
      all.push_back(candidate);
      std::push_heap(all.begin(), all.end(), closer);
    } else if (closer(candidate, all.front())) {
      std::pop_heap(all.begin(), all.end(), closer);
      all.back() = candidate;
      std::push_heap(all.begin(), all.end(), closer);
    }
  }
  std::sort_heap(all.begin(), all.end(), closer);
  for (auto& n : all) n.distance = std::sqrt(n.distance);
  return all;
}

Prediction KnnModel::vote(std::vector<Neighbor> nearest) const {
  Prediction p;
  std::vector<std::size_t> counts(n_classes_, 0);
  std::vector<double> closest(n_classes_, INFINITY);
  for (const auto& n : nearest) {
    const auto c = static_cast<std::size_t>(labels_[n.index]);
    ++counts[c];
    closest[c] = std::min(closest[c], n.distance);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < n_classes_; ++c) {
    if (counts[c] > counts[best] || (counts[c] == counts[best] && closest[c] < closest[best]))
      best = c;
  }
  p.label = static_cast<int>(best);
  p.votes.resize(n_classes_);
  for (std::size_t c = 0; c < n_classes_; ++c)
    p.votes[c] = static_cast<double>(counts[c]) / static_cast<double>(k_);
  p.neighbors = std::move(nearest);
  return p;
}

Prediction KnnModel::classify(const Vector& query) const { return vote(neighbors(query)); }

std::vector<Prediction> KnnModel::classify_batch(const Matrix& queries, unsigned threads) const {
  if (queries.rows() > 0 && static_cast<std::size_t>(queries.cols()) != dim())
    throw std::invalid_argument("knn: query matrix has " + std::to_string(queries.cols()) +
                                " columns, model expects " + std::to_string(dim()));
  const auto n = static_cast<std::size_t>(queries.rows());
  std::vector<Prediction> out(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = classify(queries.row(static_cast<Eigen::Index>(i)).transpose());
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    work(0, n);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t begin = 0; begin < n; begin += chunk)
      pool.emplace_back(work, begin, std::min(n, begin + chunk));
  }
  return out;
}

}  // namespace aeknn
