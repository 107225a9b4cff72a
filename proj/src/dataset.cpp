#include "aeknn/dataset.hpp"

#include "aeknn/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace aeknn {
namespace {

std::string locate(const std::string& what, std::size_t row, std::size_t column) {
  std::ostringstream os;
  os << what;
  if (row) os << " (row " << row;
  if (row && column) os << ", column " << column;
  if (row) os << ")";
  return os.str();
}

}  // namespace

DataError::DataError(const std::string& what, std::size_t row, std::size_t column)
    : std::runtime_error(locate(what, row, column)), row_(row), column_(column) {}

void Dataset::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw DataError("feature rows and label count differ");
  std::vector<bool> seen(class_names.size(), false);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || static_cast<std::size_t>(l) >= class_names.size())
      throw DataError("label index out of range", i + 1);
    seen[static_cast<std::size_t>(l)] = true;
  }
  for (std::size_t c = 0; c < seen.size(); ++c)
    if (!seen[c]) throw DataError("class '" + class_names[c] + "' has no samples");
  if (!features.allFinite()) throw DataError("non-finite feature value");
}

std::vector<int> Dataset::labels_at(const std::vector<std::size_t>& rows) const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto r : rows) out.push_back(labels.at(r));
  return out;
}

Dataset read_csv(std::istream& in, const CsvOptions& options, std::string name) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = options.has_header;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = csv::split_line(line);
    if (width == 0) {
      width = fields.size();
      if (width < 2) throw DataError("need at least one feature and one label column", line_no);
    } else if (fields.size() != width) {
      throw DataError("expected " + std::to_string(width) + " columns, found " +
                          std::to_string(fields.size()),
                      line_no);
    }
    const int w = static_cast<int>(width);
    const int label_col = options.label_column < 0 ? w + options.label_column : options.label_column;
    if (label_col < 0 || label_col >= w) throw DataError("label column out of range", line_no);

    std::vector<double> values;
    values.reserve(width - 1);
    for (int c = 0; c < w; ++c) {
      const auto& f = fields[static_cast<std::size_t>(c)];
      if (c == label_col) {
        if (f.empty()) throw DataError("empty label", line_no, static_cast<std::size_t>(c) + 1);
        raw_labels.push_back(f);
        continue;
      }
      double v = 0.0;
      if (!csv::parse_double(f, v))
        throw DataError("cannot parse '" + f + "' as a finite number", line_no,
                        static_cast<std::size_t>(c) + 1);
      values.push_back(v);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError("no data rows");

  Dataset d;
  d.name = std::move(name);
  d.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j + 1 < width; ++j)
      d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

  std::unordered_map<std::string, int> index;
  d.labels.reserve(raw_labels.size());
  for (const auto& l : raw_labels) {
    auto [it, inserted] = index.try_emplace(l, static_cast<int>(d.class_names.size()));
    if (inserted) d.class_names.push_back(l);
    d.labels.push_back(it->second);
  }
  if (d.class_names.size() < 2) throw DataError("dataset has a single class");
  d.validate();
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_csv(in, options, path.stem().string());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

NormalizationStats fit_normalizer(const Matrix& features, const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw std::invalid_argument("fit_normalizer: empty row subset");
  const Eigen::Index d = features.cols();
  NormalizationStats s;
  s.min = features.row(static_cast<Eigen::Index>(rows.front())).transpose();
  s.max = s.min;
  for (const auto r : rows) {
    const auto row = features.row(static_cast<Eigen::Index>(r)).transpose();
    s.min = s.min.cwiseMin(row);
    s.max = s.max.cwiseMax(row);
  }
  for (Eigen::Index j = 0; j < d; ++j)
    if (!(s.max(j) > s.min(j))) s.max(j) = s.min(j) + 1.0;
  return s;
}

NormalizationStats fit_normalizer(const Dataset& data, const std::vector<std::size_t>& rows) {
  return fit_normalizer(data.features, rows);
}

Matrix NormalizationStats::transform(const Matrix& x) const {
  if (x.cols() != min.size())
    throw std::invalid_argument("normalizer fitted on " + std::to_string(min.size()) +
                                " features, got " + std::to_string(x.cols()));
  Matrix out(x.rows(), x.cols());
  const RowVector lo = min.transpose();
  const RowVector range = (max - min).transpose();
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out.row(i) = ((x.row(i) - lo).array() / range.array()).cwiseMax(0.0).cwiseMin(1.0).matrix();
  return out;
}

Matrix NormalizationStats::inverse(const Matrix& normalized) const {
  if (normalized.cols() != min.size())
    throw std::invalid_argument("normalizer feature-count mismatch");
  Matrix out(normalized.rows(), normalized.cols());
  const RowVector lo = min.transpose();
  const RowVector range = (max - min).transpose();
  for (Eigen::Index i = 0; i < normalized.rows(); ++i)
    out.row(i) = (normalized.row(i).array() * range.array() + lo.array()).matrix();
  return out;
}

Dataset transform(const Dataset& data, const NormalizationStats& stats) {
  Dataset out = data;
  out.features = stats.transform(data.features);
  return out;
}

FoldPlan::FoldPlan(std::size_t folds, std::vector<std::vector<int>> assignments, std::uint64_t seed)
    : folds_(folds), assignments_(std::move(assignments)), seed_(seed) {
  for (const auto& a : assignments_) {
    if (a.size() != n_samples()) throw std::invalid_argument("fold plan: ragged repetitions");
    for (const int f : a)
      if (f < 0 || static_cast<std::size_t>(f) >= folds_)
        throw std::invalid_argument("fold plan: fold index out of range");
  }
}

std::vector<std::size_t> FoldPlan::test_rows(std::size_t repetition, std::size_t fold) const {
  std::vector<std::size_t> out;
  const auto& a = assignments_.at(repetition);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (static_cast<std::size_t>(a[i]) == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t repetition, std::size_t fold) const {
  std::vector<std::size_t> out;
  const auto& a = assignments_.at(repetition);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (static_cast<std::size_t>(a[i]) != fold) out.push_back(i);
  return out;
}

void FoldPlan::write(std::ostream& out) const {
  out << "aeknn-foldplan 1\n";
  out << "seed " << seed_ << "\n";
  out << "folds " << folds_ << "\n";
  out << "repetitions " << repetitions() << "\n";
  out << "samples " << n_samples() << "\n";
  for (const auto& a : assignments_) {
    for (std::size_t i = 0; i < a.size(); ++i) out << (i ? " " : "") << a[i];
    out << "\n";
  }
}

FoldPlan FoldPlan::read(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "aeknn-foldplan" || version != 1) throw DataError("not a fold plan sidecar");
  auto field = [&](const char* key) {
    std::string k;
    std::uint64_t v = 0;
    if (!(in >> k >> v) || k != key) throw DataError(std::string("fold plan: expected ") + key);
    return v;
  };
  const auto seed = field("seed");
  const auto folds = field("folds");
  const auto reps = field("repetitions");
  const auto samples = field("samples");
  std::vector<std::vector<int>> assignments(reps, std::vector<int>(samples));
  for (auto& a : assignments)
    for (auto& f : a)
      if (!(in >> f)) throw DataError("fold plan: truncated assignment");
  return FoldPlan(folds, std::move(assignments), seed);
}

std::string FoldPlan::fingerprint() const {
  std::ostringstream os;
  write(os);
  return hex64(fnv1a(os.str()));
}

FoldPlan make_folds(const std::vector<int>& labels, std::size_t repetitions, std::size_t folds,
                    std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("make_folds: need at least 2 folds");
  if (repetitions < 1) throw std::invalid_argument("make_folds: need at least 1 repetition");
  int max_label = -1;
  for (const int l : labels) max_label = std::max(max_label, l);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw std::invalid_argument("make_folds: negative label");
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (std::size_t c = 0; c < members.size(); ++c)
    if (!members[c].empty() && members[c].size() < folds)
      throw std::invalid_argument("make_folds: class " + std::to_string(c) + " has " +
                                  std::to_string(members[c].size()) + " samples, fewer than " +
                                  std::to_string(folds) + " folds");

  std::vector<std::vector<int>> assignments;
  for (std::size_t r = 0; r < repetitions; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r), 0x464f4c44u};
    std::mt19937_64 rng(seq);
    std::vector<int> fold_of(labels.size(), 0);
    // Dealing class-by-class from one running counter keeps every class within
    // one of its proportional share and every fold within one of n/k.
    std::size_t position = 0;
    for (auto shuffled : members) {
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      for (const auto i : shuffled) fold_of[i] = static_cast<int>(position++ % folds);
    }
    assignments.push_back(std::move(fold_of));
  }
  return FoldPlan(folds, std::move(assignments), seed);
}

FoldPlan make_folds(const Dataset& data, std::size_t repetitions, std::size_t folds,
                    std::uint64_t seed) {
  return make_folds(data.labels, repetitions, folds, seed);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state) {
  for (const unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::string hex64(std::uint64_t value) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << value;
  return os.str();
}

}  // namespace aeknn
