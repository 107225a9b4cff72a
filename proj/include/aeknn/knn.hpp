#pragma once

#include "aeknn/linalg.hpp"

#include <cstddef>
#include <vector>

namespace aeknn {

struct Neighbor {
  std::size_t index;
  double distance;
};

struct Prediction {
  int label = -1;
  /// Fraction of the k neighbors voting for each class; sums to 1.
  std::vector<double> votes;
  std::vector<Neighbor> neighbors;
};

/// Exact Euclidean k-nearest-neighbor classifier over a fixed reference set.
///
/// Neighbor order is ascending distance with ties going to the lower
/// reference index. Vote ties go to the tied class whose closest neighbor is
/// nearest, then to the lower class index.
class KnnModel {
 public:
  KnnModel(Matrix reference, std::vector<int> labels, std::size_t n_classes, std::size_t k);

  std::size_t k() const { return k_; }
  std::size_t dim() const { return static_cast<std::size_t>(reference_.cols()); }
  std::size_t n_classes() const { return n_classes_; }
  std::size_t size() const { return labels_.size(); }

  std::vector<Neighbor> neighbors(const Vector& query) const;
  Prediction classify(const Vector& query) const;
  /// Row-wise classify. `threads` > 1 splits the rows across worker threads.
  std::vector<Prediction> classify_batch(const Matrix& queries, unsigned threads = 1) const;

 private:
  Prediction vote(std::vector<Neighbor> nearest) const;

  Matrix reference_;
  std::vector<int> labels_;
  std::size_t n_classes_;
  std::size_t k_;
};

}  // namespace aeknn
