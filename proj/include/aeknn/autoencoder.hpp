#pragma once

#include "aeknn/linalg.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aeknn {

enum class Activation { Sigmoid, Relu };

double activate(Activation kind, double pre);
/// Derivative with respect to the pre-activation. Relu uses 0 at the kink.
double activate_derivative(Activation kind, double pre);
std::string_view to_string(Activation kind);
Activation parse_activation(std::string_view name);

/// One single-hidden-layer autoencoder:
///   hidden         = g_hidden(encoder_weights * x + encoder_bias)
///   reconstruction = g_output(decoder_weights * hidden + decoder_bias)
/// Encoder and decoder weights are independent (untied).
struct LayerParams {
  Matrix encoder_weights;  // hidden x input
  Vector encoder_bias;     // hidden
  Matrix decoder_weights;  // input x hidden
  Vector decoder_bias;     // input
  Activation hidden_activation = Activation::Sigmoid;
  Activation output_activation = Activation::Sigmoid;

  std::size_t input_dim() const { return static_cast<std::size_t>(encoder_weights.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(encoder_weights.rows()); }
  void check_shapes() const;

  /// Shape-aware exact equality of every parameter.
  friend bool operator==(const LayerParams& a, const LayerParams& b);
};

struct LayerForward {
  Vector hidden;
  Vector reconstruction;
};

LayerForward forward(const LayerParams& layer, const Vector& x);

/// Batch loss: mean over rows of ||x - reconstruction||^2 / input_dim.
double reconstruction_loss(const LayerParams& layer, const Matrix& batch);

struct LayerGradients {
  Matrix encoder_weights;
  Vector encoder_bias;
  Matrix decoder_weights;
  Vector decoder_bias;
};

/// Exact gradients of reconstruction_loss(layer, batch). Optionally reports
/// the loss value computed on the same forward pass.
LayerGradients gradients(const LayerParams& layer, const Matrix& batch, double* loss = nullptr);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 3.0;
  std::uint64_t seed = 1;
  bool shuffle_each_epoch = true;
  Activation hidden_activation = Activation::Sigmoid;
  Activation output_activation = Activation::Sigmoid;

  void validate() const;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t epoch, std::size_t batch);
  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

/// Uniform Glorot initialization: weights in [-r, r] with
/// r = sqrt(6 / (fan_in + fan_out)); biases zero.
LayerParams init_layer(std::size_t input_dim, std::size_t hidden_dim, const TrainConfig& cfg);

struct TrainedLayer {
  LayerParams params;
  /// Mean per-sample loss of each epoch, accumulated over its mini-batches
  /// before each update.
  std::vector<double> epoch_loss;
};

/// Mini-batch gradient descent on the reconstruction loss. The last short
/// batch of an epoch is used as is.
TrainedLayer train_layer(const Matrix& data, std::size_t hidden_dim, const TrainConfig& cfg);
/// Continue training from given parameters (used by train_layer after init).
TrainedLayer train_layer(const Matrix& data, LayerParams init, const TrainConfig& cfg);

/// Hidden layer sizes as fractions of the original feature count.
class PplSpec {
 public:
  PplSpec() = default;
  explicit PplSpec(std::vector<double> fractions);

  /// Accepts "0.75", "(1.5, 0.25, 1.5)", "1.5,0.25,1.5" and the named
  /// configurations "aeknn1".."aeknn6" (case and spaces ignored).
  static PplSpec parse(std::string_view text);
  /// The six configurations compared in the PPL study, in order.
  static std::vector<PplSpec> standard_configurations();

  const std::vector<double>& fractions() const { return fractions_; }
  bool empty() const { return fractions_.empty(); }
  std::vector<std::size_t> layer_sizes(std::size_t n_features) const;
  /// "(0.75)" or "(1.5, 0.25, 1.5)".
  std::string to_string() const;

  friend bool operator==(const PplSpec&, const PplSpec&) = default;

 private:
  std::vector<double> fractions_;
};

/// round(fraction * n_features), half away from zero, at least 1.
std::size_t layer_size(std::size_t n_features, double fraction);

struct EncoderLayer {
  Matrix weights;  // output x input
  Vector bias;
  Activation activation = Activation::Sigmoid;

  friend bool operator==(const EncoderLayer& a, const EncoderLayer& b);
};

/// Encoder halves of greedily trained autoencoder layers, applied in order.
class AutoencoderStack {
 public:
  AutoencoderStack() = default;
  AutoencoderStack(std::size_t input_dim, std::vector<EncoderLayer> layers);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const;
  const std::vector<EncoderLayer>& layers() const { return layers_; }

  Vector encode(const Vector& x) const;
  Matrix encode(const Matrix& x) const;

  /// Per-layer epoch loss recorded by build_stack; not serialized.
  const std::vector<std::vector<double>>& training_loss() const { return training_loss_; }
  void set_training_loss(std::vector<std::vector<double>> loss) { training_loss_ = std::move(loss); }

  void save(std::ostream& out) const;
  static AutoencoderStack load(std::istream& in);

  friend bool operator==(const AutoencoderStack& a, const AutoencoderStack& b) {
    return a.input_dim_ == b.input_dim_ && a.layers_ == b.layers_;
  }

 private:
  std::size_t input_dim_ = 0;
  std::vector<EncoderLayer> layers_;
  std::vector<std::vector<double>> training_loss_;
};

/// Greedy layer-wise construction: every layer is a standalone autoencoder
/// trained on the encoding produced by the layers before it. Layer sizes are
/// fractions of the ORIGINAL feature count. Layer i uses seed cfg.seed + i.
AutoencoderStack build_stack(const Matrix& train, const PplSpec& ppl, const TrainConfig& cfg);

}  // namespace aeknn
