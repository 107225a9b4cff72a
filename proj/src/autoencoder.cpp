#include "aeknn/autoencoder.hpp"

#include "aeknn/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace aeknn {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix apply(Activation kind, const Matrix& pre) {
  return pre.unaryExpr([kind](double v) { return activate(kind, v); });
}

Matrix apply_derivative(Activation kind, const Matrix& pre) {
  return pre.unaryExpr([kind](double v) { return activate_derivative(kind, v); });
}

// Pre-activation of an affine map applied to every row of x.
Matrix affine(const Matrix& x, const Matrix& weights, const Vector& bias) {
  Matrix pre = x * weights.transpose();
  pre.rowwise() += bias.transpose();
  return pre;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

std::string lower_no_space(std::string_view s) {
  std::string out;
  for (const char c : s)
    if (!std::isspace(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

}  // namespace

double activate(Activation kind, double pre) {
  switch (kind) {
    case Activation::Sigmoid: return sigmoid(pre);
    case Activation::Relu: return pre > 0.0 ? pre : 0.0;
  }
  return pre;
}

double activate_derivative(Activation kind, double pre) {
  switch (kind) {
    case Activation::Sigmoid: {
      const double s = sigmoid(pre);
      return s * (1.0 - s);
    }
    case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

std::string_view to_string(Activation kind) {
  return kind == Activation::Sigmoid ? "sigmoid" : "relu";
}

Activation parse_activation(std::string_view name) {
  const auto n = lower_no_space(name);
  if (n == "sigmoid") return Activation::Sigmoid;
  if (n == "relu") return Activation::Relu;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

void LayerParams::check_shapes() const {
  const auto h = encoder_weights.rows();
  const auto d = encoder_weights.cols();
  if (encoder_bias.size() != h || decoder_weights.rows() != d || decoder_weights.cols() != h ||
      decoder_bias.size() != d)
    throw std::invalid_argument("autoencoder layer: inconsistent parameter shapes");
}

bool operator==(const LayerParams& a, const LayerParams& b) {
  return identical(a.encoder_weights, b.encoder_weights) &&
         identical(a.encoder_bias, b.encoder_bias) &&
         identical(a.decoder_weights, b.decoder_weights) &&
         identical(a.decoder_bias, b.decoder_bias) &&
         a.hidden_activation == b.hidden_activation && a.output_activation == b.output_activation;
}

bool operator==(const EncoderLayer& a, const EncoderLayer& b) {
  return identical(a.weights, b.weights) && identical(a.bias, b.bias) &&
         a.activation == b.activation;
}

LayerForward forward(const LayerParams& layer, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != layer.input_dim())
    throw std::invalid_argument("forward: input has " + std::to_string(x.size()) +
                                " values, layer expects " + std::to_string(layer.input_dim()));
  LayerForward out;
  out.hidden = (layer.encoder_weights * x + layer.encoder_bias)
                   .unaryExpr([&](double v) { return activate(layer.hidden_activation, v); });
  out.reconstruction = (layer.decoder_weights * out.hidden + layer.decoder_bias)
                           .unaryExpr([&](double v) { return activate(layer.output_activation, v); });
  return out;
}

double reconstruction_loss(const LayerParams& layer, const Matrix& batch) {
  if (static_cast<std::size_t>(batch.cols()) != layer.input_dim())
    throw std::invalid_argument("reconstruction_loss: dimension mismatch");
  if (batch.rows() == 0) throw std::invalid_argument("reconstruction_loss: empty batch");
  const Matrix hidden = apply(layer.hidden_activation,
                              affine(batch, layer.encoder_weights, layer.encoder_bias));
  const Matrix rec = apply(layer.output_activation,
                           affine(hidden, layer.decoder_weights, layer.decoder_bias));
  return (rec - batch).squaredNorm() / static_cast<double>(batch.rows() * batch.cols());
}

LayerGradients gradients(const LayerParams& layer, const Matrix& batch, double* loss) {
  if (static_cast<std::size_t>(batch.cols()) != layer.input_dim())
    throw std::invalid_argument("gradients: batch has " + std::to_string(batch.cols()) +
                                " columns, layer expects " + std::to_string(layer.input_dim()));
  if (batch.rows() == 0) throw std::invalid_argument("gradients: empty batch");
  layer.check_shapes();

  const Matrix pre_hidden = affine(batch, layer.encoder_weights, layer.encoder_bias);
  const Matrix hidden = apply(layer.hidden_activation, pre_hidden);
  const Matrix pre_out = affine(hidden, layer.decoder_weights, layer.decoder_bias);
  const Matrix residual = apply(layer.output_activation, pre_out) - batch;

  const double scale = 1.0 / static_cast<double>(batch.rows() * batch.cols());
  if (loss) *loss = residual.squaredNorm() * scale;

  const Matrix delta_out =
      ((2.0 * scale) * residual).cwiseProduct(apply_derivative(layer.output_activation, pre_out));
  const Matrix delta_hidden = (delta_out * layer.decoder_weights)
                                  .cwiseProduct(apply_derivative(layer.hidden_activation, pre_hidden));

  LayerGradients g;
  g.decoder_weights = delta_out.transpose() * hidden;
  g.decoder_bias = delta_out.colwise().sum().transpose();
  g.encoder_weights = delta_hidden.transpose() * batch;
  g.encoder_bias = delta_hidden.colwise().sum().transpose();
  return g;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("train config: learning_rate must be finite and non-negative");
}

TrainingDiverged::TrainingDiverged(std::size_t epoch, std::size_t batch)
    : std::runtime_error("autoencoder training diverged: non-finite loss at epoch " +
                         std::to_string(epoch) + ", batch " + std::to_string(batch)),
      epoch_(epoch),
      batch_(batch) {}

LayerParams init_layer(std::size_t input_dim, std::size_t hidden_dim, const TrainConfig& cfg) {
  if (input_dim < 1 || hidden_dim < 1) throw std::invalid_argument("init_layer: empty layer");
  auto rng = make_rng(cfg.seed, 0x494e4954u);
  const double r = std::sqrt(6.0 / static_cast<double>(input_dim + hidden_dim));
  std::uniform_real_distribution<double> uniform(-r, r);
  const auto d = static_cast<Eigen::Index>(input_dim);
  const auto h = static_cast<Eigen::Index>(hidden_dim);

  LayerParams p;
  p.encoder_weights.resize(h, d);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < d; ++j) p.encoder_weights(i, j) = uniform(rng);
  p.decoder_weights.resize(d, h);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < h; ++j) p.decoder_weights(i, j) = uniform(rng);
  p.encoder_bias = Vector::Zero(h);
  p.decoder_bias = Vector::Zero(d);
  p.hidden_activation = cfg.hidden_activation;
  p.output_activation = cfg.output_activation;
  return p;
}

TrainedLayer train_layer(const Matrix& data, std::size_t hidden_dim, const TrainConfig& cfg) {
  cfg.validate();
  return train_layer(data, init_layer(static_cast<std::size_t>(data.cols()), hidden_dim, cfg), cfg);
}

TrainedLayer train_layer(const Matrix& data, LayerParams init, const TrainConfig& cfg) {
  cfg.validate();
  if (data.rows() < 1) throw std::invalid_argument("train_layer: no training rows");
  if (static_cast<std::size_t>(data.cols()) != init.input_dim())
    throw std::invalid_argument("train_layer: data width does not match layer input");
  init.check_shapes();

  TrainedLayer out{std::move(init), {}};
  LayerParams& p = out.params;
  auto rng = make_rng(cfg.seed, 0x53485546u);
  const auto n = static_cast<std::size_t>(data.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  out.epoch_loss.reserve(cfg.epochs);

  Matrix batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle_each_epoch) std::shuffle(order.begin(), order.end(), rng);
    double weighted_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      batch.resize(static_cast<Eigen::Index>(stop - start), data.cols());
      for (std::size_t i = start; i < stop; ++i)
        batch.row(static_cast<Eigen::Index>(i - start)) = data.row(static_cast<Eigen::Index>(order[i]));

      double loss = 0.0;
      const LayerGradients g = gradients(p, batch, &loss);
      if (!std::isfinite(loss)) throw TrainingDiverged(epoch, batch_index);
      weighted_loss += loss * static_cast<double>(stop - start);

      p.encoder_weights -= cfg.learning_rate * g.encoder_weights;
      p.encoder_bias -= cfg.learning_rate * g.encoder_bias;
      p.decoder_weights -= cfg.learning_rate * g.decoder_weights;
      p.decoder_bias -= cfg.learning_rate * g.decoder_bias;
    }
    out.epoch_loss.push_back(weighted_loss / static_cast<double>(n));
  }
  return out;
}

PplSpec::PplSpec(std::vector<double> fractions) : fractions_(std::move(fractions)) {
  for (const double f : fractions_)
    if (!(f > 0.0) || !std::isfinite(f))
      throw std::invalid_argument("PPL fractions must be positive and finite");
}

std::vector<PplSpec> PplSpec::standard_configurations() {
  return {PplSpec({0.25}), PplSpec({0.5}), PplSpec({0.75}),
          PplSpec({1.5, 0.25, 1.5}), PplSpec({1.5, 0.5, 1.5}), PplSpec({1.5, 0.75, 1.5})};
}

PplSpec PplSpec::parse(std::string_view text) {
  const auto key = lower_no_space(text);
  if (key.rfind("aeknn", 0) == 0 && key.size() == 6 && key[5] >= '1' && key[5] <= '6')
    return standard_configurations()[static_cast<std::size_t>(key[5] - '1')];

  std::string body = key;
  if (!body.empty() && body.front() == '(' && body.back() == ')')
    body = body.substr(1, body.size() - 2);
  std::vector<double> fractions;
  for (const auto& field : csv::split_line(body)) {
    double v = 0.0;
    if (!csv::parse_double(field, v))
      throw std::invalid_argument("cannot parse PPL '" + std::string(text) + "'");
    fractions.push_back(v);
  }
  if (fractions.empty()) throw std::invalid_argument("empty PPL");
  return PplSpec(std::move(fractions));
}

std::vector<std::size_t> PplSpec::layer_sizes(std::size_t n_features) const {
  std::vector<std::size_t> sizes;
  for (const double f : fractions_) sizes.push_back(layer_size(n_features, f));
  return sizes;
}

std::string PplSpec::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < fractions_.size(); ++i) {
    if (i) out += ", ";
    out += csv::format_double(fractions_[i]);
  }
  return out + ")";
}

std::size_t layer_size(std::size_t n_features, double fraction) {
  const double rounded = std::round(fraction * static_cast<double>(n_features));
  return rounded < 1.0 ? 1 : static_cast<std::size_t>(rounded);
}

AutoencoderStack::AutoencoderStack(std::size_t input_dim, std::vector<EncoderLayer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  std::size_t width = input_dim_;
  for (const auto& l : layers_) {
    if (static_cast<std::size_t>(l.weights.cols()) != width || l.bias.size() != l.weights.rows())
      throw std::invalid_argument("autoencoder stack: layer shapes do not chain");
    width = static_cast<std::size_t>(l.weights.rows());
  }
}

std::size_t AutoencoderStack::output_dim() const {
  return layers_.empty() ? input_dim_ : static_cast<std::size_t>(layers_.back().weights.rows());
}

Vector AutoencoderStack::encode(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim_)
    throw std::invalid_argument("encode: expected " + std::to_string(input_dim_) + " values, got " +
                                std::to_string(x.size()));
  Vector z = x;
  for (const auto& l : layers_)
    z = (l.weights * z + l.bias).unaryExpr([&](double v) { return activate(l.activation, v); });
  return z;
}

Matrix AutoencoderStack::encode(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim_)
    throw std::invalid_argument("encode: expected " + std::to_string(input_dim_) +
                                " columns, got " + std::to_string(x.cols()));
  Matrix z = x;
  for (const auto& l : layers_) z = apply(l.activation, affine(z, l.weights, l.bias));
  return z;
}

void AutoencoderStack::save(std::ostream& out) const {
  out << "aeknn-stack 1\n";
  out << "input_dim " << input_dim_ << "\n";
  out << "layers " << layers_.size() << "\n";
  for (const auto& l : layers_) {
    out << "layer " << l.weights.rows() << " " << l.weights.cols() << " " << to_string(l.activation)
        << "\n";
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j)
        out << (j ? " " : "") << csv::format_double(l.weights(i, j));
      out << "\n";
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i)
      out << (i ? " " : "") << csv::format_double(l.bias(i));
    out << "\n";
  }
}

AutoencoderStack AutoencoderStack::load(std::istream& in) {
  auto fail = [](const std::string& what) -> std::runtime_error {
    return std::runtime_error("autoencoder stack: " + what);
  };
  auto number = [&]() {
    std::string token;
    double v = 0.0;
    if (!(in >> token) || !csv::parse_double(token, v)) throw fail("bad or missing number");
    return v;
  };
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "aeknn-stack" || version != 1)
    throw fail("unrecognized header");
  std::size_t input_dim = 0;
  std::size_t count = 0;
  if (!(in >> word >> input_dim) || word != "input_dim") throw fail("missing input_dim");
  if (!(in >> word >> count) || word != "layers") throw fail("missing layer count");
  std::vector<EncoderLayer> layers;
  for (std::size_t k = 0; k < count; ++k) {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::string act;
    if (!(in >> word >> rows >> cols >> act) || word != "layer") throw fail("bad layer header");
    EncoderLayer l;
    l.activation = parse_activation(act);
    l.weights.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) l.weights(i, j) = number();
    l.bias.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) l.bias(i) = number();
    layers.push_back(std::move(l));
  }
  return AutoencoderStack(input_dim, std::move(layers));
}

AutoencoderStack build_stack(const Matrix& train, const PplSpec& ppl, const TrainConfig& cfg) {
  cfg.validate();
  const auto n_features = static_cast<std::size_t>(train.cols());
  std::vector<EncoderLayer> layers;
  std::vector<std::vector<double>> losses;
  Matrix model_data = train;
  std::size_t index = 0;
  for (const std::size_t size : ppl.layer_sizes(n_features)) {
    TrainConfig layer_cfg = cfg;
    layer_cfg.seed = cfg.seed + index++;
    TrainedLayer trained = train_layer(model_data, size, layer_cfg);
    EncoderLayer enc{std::move(trained.params.encoder_weights),
                     std::move(trained.params.encoder_bias), trained.params.hidden_activation};
    model_data = apply(enc.activation, affine(model_data, enc.weights, enc.bias));
    layers.push_back(std::move(enc));
    losses.push_back(std::move(trained.epoch_loss));
  }
  AutoencoderStack stack(n_features, std::move(layers));
  stack.set_training_loss(std::move(losses));
  return stack;
}

}  // namespace aeknn
