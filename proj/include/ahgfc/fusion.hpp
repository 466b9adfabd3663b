#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ahgfc/clustering.hpp"
#include "ahgfc/encoders.hpp"
#include "ahgfc/filterbank.hpp"
#include "ahgfc/graph_core.hpp"
#include "ahgfc/report.hpp"

namespace ahgfc {

// ---------------------------------------------------------------------------
// View weighting and consensus

/// Mean over nodes of the cosine similarity between matching rows; rows with
/// zero norm contribute 0.
double evaluate_view(const Matrix& h_v, const Matrix& h_bar);

struct FusionResult {
  std::vector<double> weights;  // nonnegative, sum 1
  Matrix consensus;             // sum_v weights[v] * H^v
  int rounds = 0;
  bool fallback_uniform = false;
};

/// Fixed point of w_v = (eva_v / max eva)^rho, renormalized to sum 1, with the
/// consensus recomputed after every round (50 rounds or max |dw| < 1e-6).
FusionResult fuse_views(std::span<const Matrix> embeddings, double rho, Warnings* warnings = nullptr);

Matrix weighted_sum(std::span<const Matrix> embeddings, std::span<const double> weights);

/// hr^v = homophily_ratio(A^v, pseudo) for every view.
std::vector<double> update_hr(const MultiViewGraph& g, const OneHotLabels& pseudo);

// ---------------------------------------------------------------------------
// Soft assignments and the KL objective

/// Student-t (one degree of freedom) soft assignment, rows normalized.
Matrix soft_assignment(const Matrix& h, const Matrix& centers);

/// p_ij proportional to q_ij^2 / f_j with f_j = sum_i q_ij, rows normalized.
/// Columns with zero total mass are left at zero (with a warning).
Matrix target_distribution(const Matrix& q, Warnings* warnings = nullptr);

/// sum_ij p_ij log(p_ij / q_ij), 0 log 0 = 0; q is floored at 1e-12 where p > 0.
double kl_divergence(const Matrix& p, const Matrix& q, Warnings* warnings = nullptr);

struct Distributions {
  std::vector<Matrix> q_per_view;
  std::vector<Matrix> p_per_view;
  Matrix q_bar;
  Matrix p_bar;
  std::vector<Matrix> view_centers;  // c x d per view
  Matrix consensus_centers;          // c x d
};

/// sum_v KL(P_bar || Q^v) + sum_v KL(P^v || Q^v) + KL(P_bar || Q_bar).
double kl_loss(const Distributions& d, Warnings* warnings = nullptr);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  int epochs = 200;
  int hr_refresh_interval = 5;
  double rho = 1.0;
  double gamma_rec = 1.0;
  double gamma_kl = 0.1;
  FilterConfig filter;
  EncoderConfig encoder;  // pretraining schedule and architecture; learning rate reused in training
  std::uint64_t seed = 0;
  std::optional<bool> detach_s;  // unset: detach above 2000 nodes
  int kmeans_restarts = 10;

  void validate() const;  // throws ConfigError
  bool detach_for(int n_nodes) const { return detach_s.value_or(n_nodes > 2000); }
};

double total_loss(double rec, double kl, const TrainConfig& cfg);

/// Encoder/decoder parameters for one view.
struct ViewEncoders {
  AutoEncoderParams x;
  AutoEncoderParams a;
};

/// Forward pass of one view, keeping what the backward pass needs.
struct ViewForward {
  AutoEncoderPass x_pass;
  AutoEncoderPass a_pass;
  Matrix gram;    // S (only for the joint aggregation source)
  Matrix kernel;  // s_rw, or a_rw for the raw adjacency source
  std::vector<Matrix> lp_chain;  // kernel^j X, j = 0..k
  std::vector<Matrix> hp_chain;  // (I - kernel)^j X, j = 0..k
  double lp_weight = 0.5;
  Matrix h;  // lp_weight * lp_chain[k] + (1 - lp_weight) * hp_chain[k]
};

/// Forward state of every view. References `g` and `model`; both must outlive it.
struct ModelForward {
  std::vector<ViewForward> views;
  double l_rec = 0.0;  // summed over views

  /// Re-mixes every H^v for new hr values without recomputing kernels.
  void set_hr(std::span<const double> hr, const FilterConfig& filter);
};

ModelForward forward_model(const MultiViewGraph& g, const std::vector<ViewEncoders>& model,
                           std::span<const double> hr, const TrainConfig& cfg, Warnings* warnings = nullptr);

/// Quantities held fixed while differentiating one epoch's objective: view
/// weights, cluster centers and the sharpened targets.
struct EpochTargets {
  std::vector<double> weights;
  std::vector<Matrix> view_centers;
  Matrix consensus_centers;
  std::vector<Matrix> p_per_view;
  Matrix p_bar;
};

/// Fuses the views, takes cluster centers as per-cluster means under `pseudo`,
/// and freezes the target distributions of the resulting soft assignments.
EpochTargets make_targets(const ModelForward& f, const OneHotLabels& pseudo, const TrainConfig& cfg,
                          Warnings* warnings = nullptr);

Distributions distributions(const ModelForward& f, const EpochTargets& t);

struct ObjectiveTerms {
  double l_rec = 0.0;
  double l_kl = 0.0;
  double total = 0.0;
};

/// l_kl is left at 0 when cfg.gamma_kl == 0.
ObjectiveTerms objective_terms(const ModelForward& f, const EpochTargets& t, const TrainConfig& cfg);

/// Reverse-mode gradient of objective_terms().total w.r.t. every encoder and
/// decoder parameter. KL gradients reach the encoders through S unless S is
/// detached or the raw adjacency is the filter kernel.
std::vector<ViewEncoders> objective_gradient(const MultiViewGraph& g, const ModelForward& f,
                                             const EpochTargets& t, const TrainConfig& cfg);

/// Per-cluster means of the rows of h under `labels`.
Matrix cluster_means(const Matrix& h, const OneHotLabels& labels);

struct TrainResult {
  TrainReport report;
  Matrix consensus;
  std::vector<int> predicted;
  std::vector<double> hr;
  std::vector<double> weights;
  std::vector<ViewEncoders> model;
};

/// Pretrains the per-view autoencoders, runs the filter / fuse / pseudo-label /
/// KL loop for cfg.epochs, and clusters the final consensus embedding.
TrainResult train(const MultiViewGraph& g, const TrainConfig& cfg);

/// Pretraining only: per-view autoencoders trained on L_Rec.
std::vector<TrainedEncoders> pretrain(const MultiViewGraph& g, const TrainConfig& cfg);

}  // namespace ahgfc
