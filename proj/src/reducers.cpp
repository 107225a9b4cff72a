#include "aeknn/reducers.hpp"

#include "aeknn/csv.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace aeknn {
namespace {

Matrix project(const Matrix& x, const Vector& mean, const Eigen::MatrixXd& basis) {
  if (x.cols() != mean.size())
    throw std::invalid_argument("reducer: input has " + std::to_string(x.cols()) +
                                " columns, fitted on " + std::to_string(mean.size()));
  Matrix centered = x;
  centered.rowwise() -= mean.transpose();
  return centered * basis;
}

template <typename M>
void write_matrix(std::ostream& out, const char* tag, const M& m) {
  out << tag << " " << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << csv::format_double(m(i, j));
    out << "\n";
  }
}

Eigen::MatrixXd read_matrix(std::istream& in, const char* tag) {
  std::string word;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  if (!(in >> word >> rows >> cols) || word != tag)
    throw std::runtime_error(std::string("reducer: expected '") + tag + "' block");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::string token;
      double v = 0.0;
      if (!(in >> token) || !csv::parse_double(token, v))
        throw std::runtime_error(std::string("reducer: bad value in '") + tag + "'");
      m(i, j) = v;
    }
  return m;
}

void write_header(std::ostream& out, ReducerKind kind) {
  out << "aeknn-reducer 1\nkind " << to_string(kind) << "\n";
}

}  // namespace

std::string_view to_string(ReducerKind kind) {
  switch (kind) {
    case ReducerKind::Identity: return "identity";
    case ReducerKind::AeStack: return "ae";
    case ReducerKind::Pca: return "pca";
    case ReducerKind::Lda: return "lda";
  }
  return "?";
}

ReducerKind parse_reducer_kind(std::string_view name) {
  if (name == "identity" || name == "knn") return ReducerKind::Identity;
  if (name == "ae" || name == "aeknn") return ReducerKind::AeStack;
  if (name == "pca") return ReducerKind::Pca;
  if (name == "lda") return ReducerKind::Lda;
  throw std::invalid_argument("unknown reducer '" + std::string(name) + "'");
}

Matrix PcaModel::transform(const Matrix& x) const { return project(x, mean, components); }

PcaModel fit_pca(const Matrix& train, std::size_t target_dim) {
  const auto d = static_cast<std::size_t>(train.cols());
  if (target_dim < 1 || target_dim > d)
    throw std::invalid_argument("fit_pca: target_dim " + std::to_string(target_dim) +
                                " outside [1, " + std::to_string(d) + "]");
  if (train.rows() < 2) throw std::invalid_argument("fit_pca: need at least 2 rows");

  PcaModel m;
  m.mean = train.colwise().mean().transpose();
  Matrix centered = train;
  centered.rowwise() -= m.mean.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(train.rows() - 1);
  SymmetricEigen eig = jacobi_eigen(cov);
  m.eigenvalues = std::move(eig.values);
  m.components = eig.vectors.leftCols(static_cast<Eigen::Index>(target_dim));
  return m;
}

Matrix LdaModel::transform(const Matrix& x) const { return project(x, mean, projection); }

LdaModel fit_lda(const Matrix& train, const std::vector<int>& labels, std::size_t target_dim) {
  if (static_cast<std::size_t>(train.rows()) != labels.size())
    throw std::invalid_argument("fit_lda: rows and labels differ in length");
  if (target_dim < 1) throw std::invalid_argument("fit_lda: target_dim must be >= 1");
  const Eigen::Index d = train.cols();

  int max_label = -1;
  for (const int l : labels) {
    if (l < 0) throw std::invalid_argument("fit_lda: negative label");
    max_label = std::max(max_label, l);
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(max_label + 1), 0);
  for (const int l : labels) ++counts[static_cast<std::size_t>(l)];

  LdaModel m;
  m.requested_dim = target_dim;
  m.mean = train.colwise().mean().transpose();
  m.class_means.assign(counts.size(), Vector::Zero(d));
  for (Eigen::Index i = 0; i < train.rows(); ++i)
    m.class_means[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] +=
        train.row(i).transpose();

  std::size_t present = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    if (counts[c] < 2)
      throw std::invalid_argument("fit_lda: class " + std::to_string(c) + " has a single sample");
    ++present;
    m.class_means[c] /= static_cast<double>(counts[c]);
  }
  if (present < 2) throw std::invalid_argument("fit_lda: need at least two classes");

  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < train.rows(); ++i) {
    const Vector r =
        train.row(i).transpose() - m.class_means[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    within.noalias() += r * r.transpose();
  }
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    const Vector r = m.class_means[c] - m.mean;
    between.noalias() += static_cast<double>(counts[c]) * r * r.transpose();
  }

  const double trace = within.trace();
  if (!(trace > 0.0)) throw std::runtime_error("fit_lda: within-class scatter is zero");
  within.diagonal().array() += 1e-6 * trace / static_cast<double>(d);

  const Eigen::LLT<Eigen::MatrixXd> chol(within);
  if (chol.info() != Eigen::Success)
    throw std::runtime_error("fit_lda: regularized within-class scatter is not positive definite");
  const auto lower = chol.matrixL();
  // Whitened problem: L^-1 S_b L^-T u = lambda u, then v = L^-T u.
  const Eigen::MatrixXd half = lower.solve(between);
  const Eigen::MatrixXd whitened = lower.solve(half.transpose()).transpose();
  const SymmetricEigen eig = jacobi_eigen(whitened);

  const auto eff = static_cast<Eigen::Index>(
      std::min({target_dim, present - 1, static_cast<std::size_t>(d)}));
  Eigen::MatrixXd dirs = lower.transpose().solve(eig.vectors.leftCols(eff));
  for (Eigen::Index j = 0; j < eff; ++j) dirs.col(j).normalize();
  normalize_column_signs(dirs);
  if (!dirs.allFinite()) throw std::runtime_error("fit_lda: non-finite projection");
  m.projection = std::move(dirs);
  m.eigenvalues = eig.values.head(eff);
  return m;
}

Matrix IdentityReducer::transform(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != dim_)
    throw std::invalid_argument("identity reducer: column count mismatch");
  return x;
}

void IdentityReducer::save(std::ostream& out) const {
  write_header(out, kind());
  out << "dim " << dim_ << "\n";
}

void AeReducer::save(std::ostream& out) const {
  write_header(out, kind());
  stack_.save(out);
}

void PcaReducer::save(std::ostream& out) const {
  write_header(out, kind());
  write_matrix(out, "mean", model_.mean.transpose());
  write_matrix(out, "eigenvalues", model_.eigenvalues.transpose());
  write_matrix(out, "components", model_.components);
}

void LdaReducer::save(std::ostream& out) const {
  write_header(out, kind());
  out << "requested " << model_.requested_dim << "\n";
  write_matrix(out, "mean", model_.mean.transpose());
  write_matrix(out, "eigenvalues", model_.eigenvalues.transpose());
  write_matrix(out, "projection", model_.projection);
  Eigen::MatrixXd means(static_cast<Eigen::Index>(model_.class_means.size()), model_.mean.size());
  for (std::size_t c = 0; c < model_.class_means.size(); ++c)
    means.row(static_cast<Eigen::Index>(c)) = model_.class_means[c].transpose();
  write_matrix(out, "class_means", means);
}

std::unique_ptr<Reducer> load_reducer(std::istream& in) {
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "aeknn-reducer" || version != 1)
    throw std::runtime_error("reducer: unrecognized header");
  if (!(in >> word) || word != "kind") throw std::runtime_error("reducer: missing kind");
  in >> word;
  switch (parse_reducer_kind(word)) {
    case ReducerKind::Identity: {
      std::size_t dim = 0;
      if (!(in >> word >> dim) || word != "dim") throw std::runtime_error("reducer: missing dim");
      return std::make_unique<IdentityReducer>(dim);
    }
    case ReducerKind::AeStack: return std::make_unique<AeReducer>(AutoencoderStack::load(in));
    case ReducerKind::Pca: {
      PcaModel m;
      m.mean = read_matrix(in, "mean").transpose();
      m.eigenvalues = read_matrix(in, "eigenvalues").transpose();
      m.components = read_matrix(in, "components");
      return std::make_unique<PcaReducer>(std::move(m));
    }
    case ReducerKind::Lda: {
      LdaModel m;
      if (!(in >> word >> m.requested_dim) || word != "requested")
        throw std::runtime_error("reducer: missing requested dim");
      m.mean = read_matrix(in, "mean").transpose();
      m.eigenvalues = read_matrix(in, "eigenvalues").transpose();
      m.projection = read_matrix(in, "projection");
      const Eigen::MatrixXd means = read_matrix(in, "class_means");
      for (Eigen::Index c = 0; c < means.rows(); ++c) m.class_means.push_back(means.row(c).transpose());
      return std::make_unique<LdaReducer>(std::move(m));
    }
  }
  throw std::runtime_error("reducer: unknown kind");
}

std::size_t ReducerSpec::resolved_target(std::size_t n_features) const {
  if (target_dim > 0) return target_dim;
  if (ppl.empty()) return n_features;
  return layer_size(n_features, ppl.fractions().back());
}

std::string ReducerSpec::label() const {
  switch (kind) {
    case ReducerKind::Identity: return "kNN";
    case ReducerKind::AeStack: return "AEkNN " + ppl.to_string();
    case ReducerKind::Pca:
      return target_dim ? "PCA (d=" + std::to_string(target_dim) + ")" : "PCA " + ppl.to_string();
    case ReducerKind::Lda:
      return target_dim ? "LDA (d=" + std::to_string(target_dim) + ")" : "LDA " + ppl.to_string();
  }
  return "?";
}

std::unique_ptr<Reducer> fit_reducer(const ReducerSpec& spec, const Matrix& train,
                                     const std::vector<int>& labels) {
  const auto d = static_cast<std::size_t>(train.cols());
  switch (spec.kind) {
    case ReducerKind::Identity: return std::make_unique<IdentityReducer>(d);
    case ReducerKind::AeStack:
      return std::make_unique<AeReducer>(build_stack(train, spec.ppl, spec.train));
    case ReducerKind::Pca:
      return std::make_unique<PcaReducer>(fit_pca(train, std::min(d, spec.resolved_target(d))));
    case ReducerKind::Lda:
      return std::make_unique<LdaReducer>(fit_lda(train, labels, spec.resolved_target(d)));
  }
  throw std::invalid_argument("fit_reducer: unknown kind");
}

}  // namespace aeknn
