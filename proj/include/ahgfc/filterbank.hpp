#pragma once

#include <vector>

#include "ahgfc/encoders.hpp"
#include "ahgfc/graph_core.hpp"

namespace ahgfc {

enum class FilterFamily { adaptive_hybrid, low_pass, high_pass, fixed_mix };
enum class MatrixSource { joint_aggregation, raw_adjacency };

struct FilterConfig {
  int order = 2;
  double hr = 0.5;
  FilterFamily family = FilterFamily::adaptive_hybrid;
  double alpha = 0.5;  // low-pass share for fixed_mix
  MatrixSource matrix_source = MatrixSource::joint_aggregation;

  void validate() const;  // throws ConfigError
  /// Weight on the low-pass branch implied by family / hr / alpha.
  double low_pass_weight() const;
};

/// Diagonal jitter added before row-normalizing the clamped joint aggregation matrix.
inline constexpr double kJointEpsilon = 1e-8;

/// z = Z_a Z_x^T, s = z z^T, s_rw = rownorm(max(s, 0) + eps I).
struct JointAggregation {
  Matrix z;
  Matrix s;
  Matrix s_rw;
};

JointAggregation build_joint_aggregation(const EmbeddingPair& pair, Warnings* warnings = nullptr);

/// s = Z_a (Z_x^T Z_x) Z_a^T without materializing z; equal to build_joint_aggregation().s.
Matrix joint_aggregation_gram(const EmbeddingPair& pair);

/// Row-normalizes max(s, 0) + eps I; warns once per call about rows that were
/// all non-positive before the jitter.
Matrix row_stochastic_from_gram(const Matrix& s, Warnings* warnings = nullptr);

/// Applies (kernel)^order to x by repeated products.
Matrix propagate(const Matrix& kernel, const Matrix& x, int order);

/// lp_weight (s_rw)^k x + (1 - lp_weight) (I - s_rw)^k x for the configured family.
Matrix apply_filter(const Matrix& s_rw, const Matrix& x, const FilterConfig& cfg);

/// Kernel used for `view` under cfg.matrix_source: s_rw built from `pair`, or
/// the adjacency's random-walk normalization.
Matrix view_kernel(const MultiViewGraph& g, int view, const EmbeddingPair& pair,
                   const FilterConfig& cfg, Warnings* warnings = nullptr);

/// H^v: the configured filter with hr = hr_v applied to the shared features.
Matrix per_view_embedding(const MultiViewGraph& g, int view, const EmbeddingPair& pair, double hr_v,
                          const FilterConfig& cfg, Warnings* warnings = nullptr);

struct FrequencyResponse {
  std::vector<double> lambda;
  std::vector<double> gain;
};

/// g(lambda) = w (1 - lambda)^k + (1 - w) lambda^k on `samples` evenly spaced
/// points of [0, 2], w the low-pass weight of cfg.
FrequencyResponse filter_frequency_response(const FilterConfig& cfg, int samples = 201);
double filter_gain(const FilterConfig& cfg, double lambda);

}  // namespace ahgfc
