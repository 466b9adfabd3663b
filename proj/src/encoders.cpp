#include "ahgfc/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace ahgfc {

namespace {

void apply_activation(Matrix& m, Activation act) {
  switch (act) {
    case Activation::linear:
      break;
    case Activation::tanh:
      m = m.array().tanh().matrix();
      break;
    case Activation::relu:
      m = m.cwiseMax(0.0);
      break;
  }
}

// dL/dpre from dL/dout, using the layer output.
Matrix activation_backward(const Matrix& grad_out, const Matrix& out, Activation act) {
  switch (act) {
    case Activation::linear:
      return grad_out;
    case Activation::tanh:
      return (grad_out.array() * (1.0 - out.array().square())).matrix();
    case Activation::relu:
      return (grad_out.array() * (out.array() > 0.0).cast<double>()).matrix();
  }
  return grad_out;
}

Matrix layer_forward(const DenseLayer& layer, const Matrix& in) {
  Matrix out = in * layer.weight;
  out.rowwise() += layer.bias.transpose();
  apply_activation(out, layer.activation);
  return out;
}

Matrix run_stack(const std::vector<DenseLayer>& stack, Matrix m) {
  for (const DenseLayer& layer : stack) m = layer_forward(layer, m);
  return m;
}

DenseLayer glorot_layer(int in, int out, Activation act, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayer layer;
  layer.weight.resize(in, out);
  for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = dist(rng);
  }
  layer.bias = Vector::Zero(out);
  layer.activation = act;
  return layer;
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Matrix loss_output_grad(const Matrix& output, const Matrix& target, ReconLoss kind) {
  const double n = static_cast<double>(output.size());
  if (kind == ReconLoss::mse) return (2.0 / n) * (output - target);
  const Matrix sig = (1.0 / (1.0 + (-output.array()).exp())).matrix();
  return (sig - target) / n;
}

template <typename Params, typename Fn>
void for_each_tensor(Params& p, Fn&& fn) {
  for (auto* stack : {&p.encoder, &p.decoder}) {
    for (auto& layer : *stack) {
      fn(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
      fn(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

int AutoEncoderParams::input_dim() const {
  return encoder.empty() ? 0 : static_cast<int>(encoder.front().weight.rows());
}

int AutoEncoderParams::latent_dim() const {
  return encoder.empty() ? 0 : static_cast<int>(encoder.back().weight.cols());
}

std::size_t AutoEncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* stack : {&encoder, &decoder}) {
    for (const DenseLayer& l : *stack) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  }
  return n;
}

AutoEncoderParams AutoEncoderParams::zeros_like() const {
  AutoEncoderParams z = *this;
  for_each_tensor(z, [](double* p, std::size_t n) { std::fill(p, p + n, 0.0); });
  return z;
}

void AutoEncoderParams::validate() const {
  if (encoder.empty() || decoder.empty()) throw DimensionError("autoencoder: empty stack");
  const auto check_chain = [](const std::vector<DenseLayer>& stack, const char* name) {
    for (std::size_t i = 0; i < stack.size(); ++i) {
      if (stack[i].bias.size() != stack[i].weight.cols()) {
        throw DimensionError(std::string("autoencoder: ") + name + " layer " + std::to_string(i) +
                             " bias width mismatch");
      }
      if (i > 0 && stack[i].weight.rows() != stack[i - 1].weight.cols()) {
        throw DimensionError(std::string("autoencoder: ") + name + " layer " + std::to_string(i) +
                             " input width mismatch");
      }
    }
  };
  check_chain(encoder, "encoder");
  check_chain(decoder, "decoder");
  if (decoder.front().weight.rows() != latent_dim()) throw DimensionError("autoencoder: decoder input != latent width");
  if (decoder.back().weight.cols() != input_dim()) throw DimensionError("autoencoder: decoder output != input width");
  if (latent_dim() > input_dim()) throw DimensionError("autoencoder: latent width exceeds input width");
}

void EmbeddingPair::validate() const {
  if (z_x.rows() != z_a.rows() || z_x.cols() != z_a.cols()) {
    throw DimensionError("EmbeddingPair: z_x is " + std::to_string(z_x.rows()) + "x" +
                         std::to_string(z_x.cols()) + " but z_a is " + std::to_string(z_a.rows()) +
                         "x" + std::to_string(z_a.cols()));
  }
  if (!z_x.allFinite() || !z_a.allFinite()) throw NumericError("EmbeddingPair: non-finite entry");
}

AutoEncoderParams make_autoencoder(int input_dim, int hidden_dim, int latent_dim,
                                   Activation hidden_activation, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1 || latent_dim < 1) throw ConfigError("make_autoencoder: widths must be positive");
  if (latent_dim > input_dim) throw ConfigError("make_autoencoder: latent width exceeds input width");
  std::mt19937_64 rng(seed);
  AutoEncoderParams p;
  p.encoder.push_back(glorot_layer(input_dim, hidden_dim, hidden_activation, rng));
  p.encoder.push_back(glorot_layer(hidden_dim, latent_dim, Activation::linear, rng));
  p.decoder.push_back(glorot_layer(latent_dim, hidden_dim, hidden_activation, rng));
  p.decoder.push_back(glorot_layer(hidden_dim, input_dim, Activation::linear, rng));
  return p;
}

Matrix encode(const AutoEncoderParams& params, const Matrix& input) {
  if (input.cols() != params.input_dim()) {
    throw DimensionError("encode: input has " + std::to_string(input.cols()) + " columns, encoder expects " +
                         std::to_string(params.input_dim()));
  }
  return run_stack(params.encoder, input);
}

Matrix decode(const AutoEncoderParams& params, const Matrix& latent) {
  if (latent.cols() != params.latent_dim()) throw DimensionError("decode: latent width mismatch");
  return run_stack(params.decoder, latent);
}

double reconstruction_error(const Matrix& output, const Matrix& target, ReconLoss loss) {
  if (output.rows() != target.rows() || output.cols() != target.cols()) {
    throw DimensionError("reconstruction_error: shape mismatch");
  }
  const double n = static_cast<double>(output.size());
  if (n == 0.0) return 0.0;
  if (loss == ReconLoss::mse) return (output - target).squaredNorm() / n;
  double total = 0.0;
  for (Eigen::Index i = 0; i < output.size(); ++i) {
    const double o = output.data()[i];
    total += softplus(o) - target.data()[i] * o;
  }
  return total / n;
}

double reconstruction_loss(const AutoEncoderParams& params_x, const AutoEncoderParams& params_a,
                           const Matrix& x, const Matrix& a, ReconLoss loss_a) {
  const double lx = reconstruction_error(decode(params_x, encode(params_x, x)), x, ReconLoss::mse);
  const double la = reconstruction_error(decode(params_a, encode(params_a, a)), a, loss_a);
  const double total = lx + la;
  if (!std::isfinite(total)) throw NumericError("reconstruction_loss: non-finite value");
  return total;
}

// ---------------------------------------------------------------------------

AutoEncoderPass::AutoEncoderPass(const AutoEncoderParams& params, const Matrix& input)
    : params_(params), input_(input) {
  if (input.cols() != params.input_dim()) {
    throw DimensionError("AutoEncoderPass: input has " + std::to_string(input.cols()) +
                         " columns, encoder expects " + std::to_string(params.input_dim()));
  }
  outputs_.reserve(params.encoder.size() + params.decoder.size());
  const Matrix* cur = &input;
  for (const DenseLayer& layer : params.encoder) {
    outputs_.push_back(layer_forward(layer, *cur));
    cur = &outputs_.back();
  }
  latent_ = outputs_.back();
  for (const DenseLayer& layer : params.decoder) {
    outputs_.push_back(layer_forward(layer, *cur));
    cur = &outputs_.back();
  }
}

double AutoEncoderPass::loss(ReconLoss kind) const { return reconstruction_error(output(), input_, kind); }

AutoEncoderParams AutoEncoderPass::backward(ReconLoss kind, double loss_scale,
                                            const Matrix* latent_grad) const {
  AutoEncoderParams grads = params_.zeros_like();
  const std::size_t n_enc = params_.encoder.size();
  const std::size_t n_total = n_enc + params_.decoder.size();

  Matrix grad = loss_scale * loss_output_grad(output(), input_, kind);
  for (std::size_t idx = n_total; idx-- > 0;) {
    const bool in_decoder = idx >= n_enc;
    const DenseLayer& layer = in_decoder ? params_.decoder[idx - n_enc] : params_.encoder[idx];
    DenseLayer& g = in_decoder ? grads.decoder[idx - n_enc] : grads.encoder[idx];
    if (idx == n_enc - 1 && latent_grad != nullptr) grad += *latent_grad;

    const Matrix& layer_in = idx == 0 ? input_ : outputs_[idx - 1];
    const Matrix pre_grad = activation_backward(grad, outputs_[idx], layer.activation);
    g.weight.noalias() = layer_in.transpose() * pre_grad;
    g.bias = pre_grad.colwise().sum().transpose();
    if (idx > 0) grad = pre_grad * layer.weight.transpose();
  }
  return grads;
}

AutoEncoderParams gradient(const AutoEncoderParams& params, ReconLoss loss, const Matrix& batch) {
  const AutoEncoderPass pass(params, batch);
  if (!std::isfinite(pass.loss(loss))) throw NumericError("gradient: loss is not finite");
  AutoEncoderParams g = pass.backward(loss, 1.0, nullptr);
  for (double v : flatten(g)) {
    if (!std::isfinite(v)) throw NumericError("gradient: non-finite gradient entry");
  }
  return g;
}

std::vector<double> flatten(const AutoEncoderParams& params) {
  std::vector<double> out;
  out.reserve(params.parameter_count());
  for_each_tensor(params, [&](const double* p, std::size_t n) { out.insert(out.end(), p, p + n); });
  return out;
}

void unflatten(std::span<const double> values, AutoEncoderParams& params) {
  if (values.size() != params.parameter_count()) throw DimensionError("unflatten: size mismatch");
  std::size_t offset = 0;
  for_each_tensor(params, [&](double* p, std::size_t n) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), n, p);
    offset += n;
  });
}

// ---------------------------------------------------------------------------

AdamOptimizer::AdamOptimizer(std::size_t size, double learning_rate, double beta1, double beta2,
                             double epsilon)
    : m_(size, 0.0), v_(size, 0.0), lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) throw DimensionError("AdamOptimizer: size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

// ---------------------------------------------------------------------------

int effective_latent_dim(const EncoderConfig& cfg, int x_dim, int a_dim) {
  return std::max(1, std::min({cfg.latent_dim, x_dim, a_dim}));
}

int effective_hidden_dim(const EncoderConfig& cfg, int latent_dim) {
  return cfg.hidden_dim > 0 ? cfg.hidden_dim : std::max(256, 4 * latent_dim);
}

TrainedEncoders train_autoencoders(const Matrix& x, const Matrix& a, const EncoderConfig& cfg) {
  if (x.rows() != a.rows()) throw DimensionError("train_autoencoders: x and a disagree on row count");
  if (cfg.epochs < 0 || !(cfg.learning_rate > 0.0)) throw ConfigError("train_autoencoders: bad epochs / learning rate");
  const int latent = effective_latent_dim(cfg, static_cast<int>(x.cols()), static_cast<int>(a.cols()));
  const int hidden = effective_hidden_dim(cfg, latent);

  TrainedEncoders out;
  // Distinct streams for the two stacks so that their initializations differ.
  out.params_x = make_autoencoder(static_cast<int>(x.cols()), hidden, latent, cfg.activation, cfg.seed * 2 + 1);
  out.params_a = make_autoencoder(static_cast<int>(a.cols()), hidden, latent, cfg.activation, cfg.seed * 2 + 2);

  AdamOptimizer opt_x(out.params_x.parameter_count(), cfg.learning_rate);
  AdamOptimizer opt_a(out.params_a.parameter_count(), cfg.learning_rate);
  std::vector<double> flat_x = flatten(out.params_x);
  std::vector<double> flat_a = flatten(out.params_a);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const AutoEncoderPass px(out.params_x, x);
    const AutoEncoderPass pa(out.params_a, a);
    const double loss = px.loss(ReconLoss::mse) + pa.loss(cfg.a_loss);
    if (!std::isfinite(loss)) {
      throw NumericError("train_autoencoders: L_Rec diverged at epoch " + std::to_string(epoch), epoch - 1);
    }
    const std::vector<double> gx = flatten(px.backward(ReconLoss::mse, 1.0, nullptr));
    const std::vector<double> ga = flatten(pa.backward(cfg.a_loss, 1.0, nullptr));
    opt_x.step(flat_x, gx);
    opt_a.step(flat_a, ga);
    unflatten(flat_x, out.params_x);
    unflatten(flat_a, out.params_a);
    out.loss_history.push_back(loss);
  }

  out.embeddings.z_x = encode(out.params_x, x);
  out.embeddings.z_a = encode(out.params_a, a);
  out.embeddings.validate();
  return out;
}

}  // namespace ahgfc
