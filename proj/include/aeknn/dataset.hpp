#pragma once

#include "aeknn/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aeknn {

/// Raised for malformed input files. `row` and `column` are 1-based positions
/// in the source file (0 when not applicable).
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t row = 0, std::size_t column = 0);
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// A labeled feature matrix. Class indices are dense in [0, n_classes) and
/// assigned in order of first appearance in the source.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::string name;

  std::size_t n_samples() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }
  std::size_t n_classes() const { return class_names.size(); }

  /// Throws DataError if any invariant is broken (row/label count mismatch,
  /// out-of-range label, unused class, non-finite feature).
  void validate() const;

  std::vector<int> labels_at(const std::vector<std::size_t>& rows) const;
};

struct CsvOptions {
  bool has_header = false;
  /// Column index of the label; negative values count from the end
  /// (-1 = last column, the default).
  int label_column = -1;
};

Dataset read_csv(std::istream& in, const CsvOptions& options = {}, std::string name = {});
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Per-feature min/max fitted on a training partition. Constant features are
/// stored with max = min + 1 so they transform to 0.
struct NormalizationStats {
  Vector min;
  Vector max;

  std::size_t n_features() const { return static_cast<std::size_t>(min.size()); }
  /// Scale to [0, 1] and clamp values that fall outside the fitted range.
  Matrix transform(const Matrix& x) const;
  /// Maps normalized values back; exact inverse for in-range inputs.
  Matrix inverse(const Matrix& normalized) const;
};

NormalizationStats fit_normalizer(const Matrix& features, const std::vector<std::size_t>& rows);
NormalizationStats fit_normalizer(const Dataset& data, const std::vector<std::size_t>& rows);
Dataset transform(const Dataset& data, const NormalizationStats& stats);

/// Stratified assignment of samples to folds for repeated k-fold CV.
class FoldPlan {
 public:
  FoldPlan() = default;
  FoldPlan(std::size_t folds, std::vector<std::vector<int>> assignments, std::uint64_t seed);

  std::size_t repetitions() const { return assignments_.size(); }
  std::size_t folds() const { return folds_; }
  std::size_t n_samples() const { return assignments_.empty() ? 0 : assignments_.front().size(); }
  std::uint64_t seed() const { return seed_; }
  const std::vector<int>& assignment(std::size_t repetition) const { return assignments_.at(repetition); }

  std::vector<std::size_t> test_rows(std::size_t repetition, std::size_t fold) const;
  std::vector<std::size_t> train_rows(std::size_t repetition, std::size_t fold) const;

  /// Plain-text sidecar for exact experiment replay.
  void write(std::ostream& out) const;
  static FoldPlan read(std::istream& in);
  std::string fingerprint() const;

  friend bool operator==(const FoldPlan&, const FoldPlan&) = default;

 private:
  std::size_t folds_ = 0;
  std::vector<std::vector<int>> assignments_;
  std::uint64_t seed_ = 0;
};

FoldPlan make_folds(const std::vector<int>& labels, std::size_t repetitions, std::size_t folds,
                    std::uint64_t seed);
FoldPlan make_folds(const Dataset& data, std::size_t repetitions, std::size_t folds,
                    std::uint64_t seed);

/// 64-bit FNV-1a, used for manifest and fold-plan fingerprints.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

}  // namespace aeknn
