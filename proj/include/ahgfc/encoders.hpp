#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ahgfc/graph_core.hpp"

namespace ahgfc {

enum class Activation { linear, tanh, relu };
enum class ReconLoss { mse, bce };

/// y = act(x * weight + bias^T); weight is (in x out).
struct DenseLayer {
  Matrix weight;
  Vector bias;
  Activation activation = Activation::linear;
};

/// Encoder stack (input -> latent) and mirrored decoder stack (latent -> input).
/// Also used as the container for parameter gradients.
struct AutoEncoderParams {
  std::vector<DenseLayer> encoder;
  std::vector<DenseLayer> decoder;

  int input_dim() const;
  int latent_dim() const;
  std::size_t parameter_count() const;
  AutoEncoderParams zeros_like() const;
  void validate() const;  // throws DimensionError
};

/// Z_x and Z_a for one view.
struct EmbeddingPair {
  Matrix z_x;
  Matrix z_a;
  void validate() const;  // shapes agree, entries finite
};

/// d -> hidden -> latent -> hidden -> d, `hidden_activation` on hidden layers,
/// linear outputs, Glorot-uniform weights and zero biases drawn from `seed`.
AutoEncoderParams make_autoencoder(int input_dim, int hidden_dim, int latent_dim,
                                   Activation hidden_activation, std::uint64_t seed);

Matrix encode(const AutoEncoderParams& params, const Matrix& input);
Matrix decode(const AutoEncoderParams& params, const Matrix& latent);

/// Per-entry loss between a decoder output and its target, averaged over all entries.
/// For bce the output is read as logits.
double reconstruction_error(const Matrix& output, const Matrix& target, ReconLoss loss);

/// MSE (or the chosen loss) of both autoencoders on their own inputs, summed.
double reconstruction_loss(const AutoEncoderParams& params_x, const AutoEncoderParams& params_a,
                           const Matrix& x, const Matrix& a, ReconLoss loss_a = ReconLoss::mse);

/// Forward pass that keeps every layer output for a later backward pass.
class AutoEncoderPass {
 public:
  AutoEncoderPass(const AutoEncoderParams& params, const Matrix& input);

  const Matrix& latent() const { return latent_; }
  const Matrix& output() const { return outputs_.back(); }
  double loss(ReconLoss kind) const;

  /// Gradients of (reconstruction loss + <latent_grad, latent>) w.r.t. every
  /// parameter. `latent_grad` may be null.
  AutoEncoderParams backward(ReconLoss kind, double loss_scale, const Matrix* latent_grad) const;

 private:
  const AutoEncoderParams& params_;
  const Matrix& input_;
  // outputs_[l] is the activation after layer l, encoder layers first.
  std::vector<Matrix> outputs_;
  Matrix latent_;
};

/// Reverse-mode gradient of reconstruction_error(decode(encode(batch)), batch).
AutoEncoderParams gradient(const AutoEncoderParams& params, ReconLoss loss, const Matrix& batch);

std::vector<double> flatten(const AutoEncoderParams& params);
void unflatten(std::span<const double> values, AutoEncoderParams& params);

/// Adam with bias-corrected moment estimates over a flat parameter vector.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::size_t size, double learning_rate = 1e-3, double beta1 = 0.9,
                         double beta2 = 0.999, double epsilon = 1e-8);
  void step(std::span<double> params, std::span<const double> grads);

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  long t_ = 0;
};

struct EncoderConfig {
  int epochs = 100;
  double learning_rate = 1e-3;
  int latent_dim = 64;
  int hidden_dim = 0;  // 0: max(256, 4 * latent_dim)
  Activation activation = Activation::tanh;
  ReconLoss a_loss = ReconLoss::mse;
  std::uint64_t seed = 0;
};

/// Latent width actually used: latent_dim clamped to both input widths.
int effective_latent_dim(const EncoderConfig& cfg, int x_dim, int a_dim);
int effective_hidden_dim(const EncoderConfig& cfg, int latent_dim);

struct TrainedEncoders {
  AutoEncoderParams params_x;
  AutoEncoderParams params_a;
  EmbeddingPair embeddings;
  std::vector<double> loss_history;  // L_Rec evaluated before each epoch's update
};

/// Initializes both autoencoders from `cfg.seed` and runs full-batch Adam on L_Rec.
/// Throws NumericError carrying the last finite epoch on divergence.
TrainedEncoders train_autoencoders(const Matrix& x, const Matrix& a, const EncoderConfig& cfg);

}  // namespace ahgfc
