#include "aeknn/csv.hpp"
#include "aeknn/dataset.hpp"
#include "aeknn/stats.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace aeknn {

void ResultMatrix::validate() const {
  if (rows() < 2 || cols() < 2)
    throw DataError("result matrix needs at least 2 rows and 2 columns, got " +
                    std::to_string(rows()) + "x" + std::to_string(cols()));
  if (static_cast<std::size_t>(values.rows()) != rows() ||
      static_cast<std::size_t>(values.cols()) != cols())
    throw DataError("result matrix labels do not match its values");
  if (!values.allFinite()) throw DataError("result matrix has non-finite entries");
}

std::size_t ResultMatrix::column_index(const std::string& label) const {
  for (std::size_t j = 0; j < column_labels.size(); ++j)
    if (column_labels[j] == label) return j;
  throw DataError("no column named '" + label + "'");
}

ResultMatrix ResultMatrix::select_columns(const std::vector<std::string>& labels) const {
  ResultMatrix out;
  out.row_labels = row_labels;
  out.column_labels = labels;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j)
    out.values.col(static_cast<Eigen::Index>(j)) =
        values.col(static_cast<Eigen::Index>(column_index(labels[j])));
  return out;
}

std::vector<double> ResultMatrix::column(std::size_t j) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i)
    out[i] = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

ResultMatrix ResultMatrix::read_csv(std::istream& in) {
  ResultMatrix m;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = csv::split_line(line);
    if (m.column_labels.empty()) {
      if (fields.size() < 2) throw DataError("result matrix header needs label columns", line_no);
      m.column_labels.assign(fields.begin() + 1, fields.end());
      continue;
    }
    if (fields.size() != m.column_labels.size() + 1)
      throw DataError("expected " + std::to_string(m.column_labels.size() + 1) + " fields", line_no);
    m.row_labels.push_back(fields.front());
    std::vector<double> values;
    for (std::size_t j = 1; j < fields.size(); ++j) {
      double v = 0.0;
      if (!csv::parse_double(fields[j], v))
        throw DataError("cannot parse '" + fields[j] + "'", line_no, j + 1);
      values.push_back(v);
    }
    rows.push_back(std::move(values));
  }
  if (m.column_labels.empty()) throw DataError("empty result matrix");
  m.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(m.column_labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

ResultMatrix ResultMatrix::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_csv(in);
}

void ResultMatrix::write_csv(std::ostream& out) const {
  std::vector<std::string> header{"dataset"};
  header.insert(header.end(), column_labels.begin(), column_labels.end());
  out << csv::join(header) << "\n";
  for (std::size_t i = 0; i < row_labels.size(); ++i) {
    std::vector<std::string> fields{row_labels[i]};
    for (std::size_t j = 0; j < column_labels.size(); ++j) {
      const double v = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      fields.push_back(std::isfinite(v) ? csv::format_double(v) : "NA");
    }
    out << csv::join(fields) << "\n";
  }
}

}  // namespace aeknn
