#pragma once

#include "aeknn/autoencoder.hpp"
#include "aeknn/linalg.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace aeknn {

enum class ReducerKind { Identity, AeStack, Pca, Lda };

std::string_view to_string(ReducerKind kind);
/// Accepts "identity", "ae", "pca", "lda".
ReducerKind parse_reducer_kind(std::string_view name);

/// Principal components of the mean-centered training covariance
/// (divisor n - 1), computed with the Jacobi eigensolver.
struct PcaModel {
  Vector mean;
  Eigen::MatrixXd components;  // d x m, orthonormal columns
  Vector eigenvalues;          // all d, non-increasing

  Matrix transform(const Matrix& x) const;
};

PcaModel fit_pca(const Matrix& train, std::size_t target_dim);

/// Fisher discriminant directions from S_b v = lambda (S_w + eps I) v, with
/// eps = 1e-6 * trace(S_w) / d. Directions are unit length.
struct LdaModel {
  std::vector<Vector> class_means;
  Vector mean;
  Eigen::MatrixXd projection;  // d x effective_dim
  Vector eigenvalues;          // effective_dim, non-increasing
  std::size_t requested_dim = 0;

  std::size_t effective_dim() const { return static_cast<std::size_t>(projection.cols()); }
  Matrix transform(const Matrix& x) const;
};

/// effective_dim = min(target_dim, classes - 1, d).
LdaModel fit_lda(const Matrix& train, const std::vector<int>& labels, std::size_t target_dim);

class Reducer {
 public:
  virtual ~Reducer() = default;
  virtual ReducerKind kind() const = 0;
  virtual std::size_t input_dim() const = 0;
  /// Column count produced by transform. May be below the requested size
  /// (LDA caps at classes - 1).
  virtual std::size_t effective_dim() const = 0;
  virtual std::size_t requested_dim() const { return effective_dim(); }
  virtual Matrix transform(const Matrix& x) const = 0;
  /// Text payload tagged by kind; read back with load_reducer.
  virtual void save(std::ostream& out) const = 0;
};

class IdentityReducer final : public Reducer {
 public:
  explicit IdentityReducer(std::size_t dim) : dim_(dim) {}
  ReducerKind kind() const override { return ReducerKind::Identity; }
  std::size_t input_dim() const override { return dim_; }
  std::size_t effective_dim() const override { return dim_; }
  Matrix transform(const Matrix& x) const override;
  void save(std::ostream& out) const override;

 private:
  std::size_t dim_;
};

class AeReducer final : public Reducer {
 public:
  explicit AeReducer(AutoencoderStack stack) : stack_(std::move(stack)) {}
  ReducerKind kind() const override { return ReducerKind::AeStack; }
  std::size_t input_dim() const override { return stack_.input_dim(); }
  std::size_t effective_dim() const override { return stack_.output_dim(); }
  Matrix transform(const Matrix& x) const override { return stack_.encode(x); }
  void save(std::ostream& out) const override;
  const AutoencoderStack& stack() const { return stack_; }

 private:
  AutoencoderStack stack_;
};

class PcaReducer final : public Reducer {
 public:
  explicit PcaReducer(PcaModel model) : model_(std::move(model)) {}
  ReducerKind kind() const override { return ReducerKind::Pca; }
  std::size_t input_dim() const override { return static_cast<std::size_t>(model_.mean.size()); }
  std::size_t effective_dim() const override {
    return static_cast<std::size_t>(model_.components.cols());
  }
  Matrix transform(const Matrix& x) const override { return model_.transform(x); }
  void save(std::ostream& out) const override;
  const PcaModel& model() const { return model_; }

 private:
  PcaModel model_;
};

class LdaReducer final : public Reducer {
 public:
  explicit LdaReducer(LdaModel model) : model_(std::move(model)) {}
  ReducerKind kind() const override { return ReducerKind::Lda; }
  std::size_t input_dim() const override { return static_cast<std::size_t>(model_.mean.size()); }
  std::size_t effective_dim() const override { return model_.effective_dim(); }
  std::size_t requested_dim() const override { return model_.requested_dim; }
  Matrix transform(const Matrix& x) const override { return model_.transform(x); }
  void save(std::ostream& out) const override;
  const LdaModel& model() const { return model_; }

 private:
  LdaModel model_;
};

/// What to fit. PCA and LDA target the size of the AE stack's final layer
/// (layer_size(d, last PPL fraction)) unless target_dim is set.
struct ReducerSpec {
  ReducerKind kind = ReducerKind::AeStack;
  PplSpec ppl = PplSpec({0.75});
  std::size_t target_dim = 0;
  TrainConfig train;

  std::size_t resolved_target(std::size_t n_features) const;
  /// Column label used in result tables, e.g. "AEkNN (0.75)", "PCA (0.5)", "kNN".
  std::string label() const;
};

std::unique_ptr<Reducer> fit_reducer(const ReducerSpec& spec, const Matrix& train,
                                     const std::vector<int>& labels);

std::unique_ptr<Reducer> load_reducer(std::istream& in);

}  // namespace aeknn
