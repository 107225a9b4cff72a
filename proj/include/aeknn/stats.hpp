#pragma once

#include "aeknn/linalg.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace aeknn {

/// Datasets (rows, the blocks) by configurations (columns) score table.
struct ResultMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;
  Matrix values;

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return column_labels.size(); }

  /// At least 2 rows and 2 columns, labels match the value shape, all finite.
  void validate() const;
  std::size_t column_index(const std::string& label) const;
  ResultMatrix select_columns(const std::vector<std::string>& labels) const;
  std::vector<double> column(std::size_t j) const;

  /// Header "dataset,<col>,<col>..." then one labeled row per dataset.
  /// Non-finite values are written as NA, which read_csv rejects.
  static ResultMatrix read_csv(std::istream& in);
  static ResultMatrix load_csv(const std::filesystem::path& path);
  void write_csv(std::ostream& out) const;
};

enum class Direction { HigherIsBetter, LowerIsBetter };

enum class FriedmanForm {
  ChiSquare,     // chi^2_F against chi-square with k - 1 dof
  ImanDavenport  // F_F against F with (k - 1, (k - 1)(n - 1)) dof
};

struct TestReport {
  bool defined = true;
  double statistic = 0.0;
  double p_value = 1.0;
  /// Friedman only, in column order; rank 1 is best.
  std::vector<double> average_ranks;
  /// Wilcoxon only: pairs left after dropping zero differences.
  std::size_t effective_pairs = 0;
  std::string method;
};

/// Mid-ranks (1-based) of `values` in ascending order.
std::vector<double> mid_ranks(std::span<const double> values);

TestReport friedman(const ResultMatrix& results, Direction direction,
                    FriedmanForm form = FriedmanForm::ChiSquare);

/// Two-sided Wilcoxon signed-rank test on d = a - b. Zero differences are
/// dropped; |d| is mid-ranked; W = min(W+, W-). The p-value is exact (all 2^m
/// sign assignments, counted by dynamic programming) for m <= 20 and
/// otherwise uses the tie- and continuity-corrected normal approximation.
TestReport wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double x, std::size_t dof);

}  // namespace aeknn
