#include "ahgfc/filterbank.hpp"

#include <cmath>
#include <string>

namespace ahgfc {

void FilterConfig::validate() const {
  if (order < 1) throw ConfigError("filter: order must be >= 1, got " + std::to_string(order));
  if (!(hr >= 0.0 && hr <= 1.0)) throw ConfigError("filter: hr must lie in [0, 1]");
  if (family == FilterFamily::fixed_mix && !(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("filter: alpha must lie in [0, 1]");
  }
}

double FilterConfig::low_pass_weight() const {
  switch (family) {
    case FilterFamily::adaptive_hybrid:
      return hr;
    case FilterFamily::low_pass:
      return 1.0;
    case FilterFamily::high_pass:
      return 0.0;
    case FilterFamily::fixed_mix:
      return alpha;
  }
  return hr;
}

Matrix joint_aggregation_gram(const EmbeddingPair& pair) {
  pair.validate();
  const Matrix metric = pair.z_x.transpose() * pair.z_x;
  Matrix s = pair.z_a * metric * pair.z_a.transpose();
  // Exact symmetry regardless of summation order.
  s = 0.5 * (s + s.transpose()).eval();
  return s;
}

Matrix row_stochastic_from_gram(const Matrix& s, Warnings* warnings) {
  if (s.rows() != s.cols()) throw DimensionError("row_stochastic_from_gram: matrix is not square");
  const Eigen::Index n = s.rows();
  Matrix t = s.cwiseMax(0.0);
  int empty_rows = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (t.row(i).sum() == 0.0) ++empty_rows;
  }
  if (empty_rows > 0) {
    warn(warnings, "joint aggregation: " + std::to_string(empty_rows) +
                       " row(s) had no positive similarity; kept alive by the diagonal jitter");
  }
  t.diagonal().array() += kJointEpsilon;
  const Vector row_sums = t.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) t.row(i) /= row_sums(i);
  return t;
}

JointAggregation build_joint_aggregation(const EmbeddingPair& pair, Warnings* warnings) {
  pair.validate();
  JointAggregation out;
  out.z = pair.z_a * pair.z_x.transpose();
  out.s = out.z * out.z.transpose();
  out.s = 0.5 * (out.s + out.s.transpose()).eval();
  out.s_rw = row_stochastic_from_gram(out.s, warnings);
  return out;
}

Matrix propagate(const Matrix& kernel, const Matrix& x, int order) {
  Matrix y = x;
  for (int step = 0; step < order; ++step) y = kernel * y;
  return y;
}

Matrix apply_filter(const Matrix& s_rw, const Matrix& x, const FilterConfig& cfg) {
  cfg.validate();
  if (s_rw.rows() != s_rw.cols() || s_rw.cols() != x.rows()) {
    throw DimensionError("apply_filter: kernel is " + std::to_string(s_rw.rows()) + "x" +
                         std::to_string(s_rw.cols()) + ", signal has " + std::to_string(x.rows()) + " rows");
  }
  const double w = cfg.low_pass_weight();
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  if (w != 0.0) out += w * propagate(s_rw, x, cfg.order);
  if (w != 1.0) {
    Matrix y = x;
    for (int step = 0; step < cfg.order; ++step) y = y - s_rw * y;
    out += (1.0 - w) * y;
  }
  return out;
}

Matrix view_kernel(const MultiViewGraph& g, int view, const EmbeddingPair& pair, const FilterConfig& cfg,
                   Warnings* warnings) {
  if (view < 0 || view >= g.n_views()) throw DimensionError("view index out of range");
  if (cfg.matrix_source == MatrixSource::raw_adjacency) {
    return random_walk_normalize(g.adjacency(view), false).a_rw;
  }
  if (pair.z_a.rows() != g.n_nodes()) throw DimensionError("embedding row count != node count");
  return row_stochastic_from_gram(joint_aggregation_gram(pair), warnings);
}

Matrix per_view_embedding(const MultiViewGraph& g, int view, const EmbeddingPair& pair, double hr_v,
                          const FilterConfig& cfg, Warnings* warnings) {
  FilterConfig view_cfg = cfg;
  view_cfg.hr = hr_v;
  view_cfg.validate();
  return apply_filter(view_kernel(g, view, pair, cfg, warnings), g.features(), view_cfg);
}

double filter_gain(const FilterConfig& cfg, double lambda) {
  const double w = cfg.low_pass_weight();
  return w * std::pow(1.0 - lambda, cfg.order) + (1.0 - w) * std::pow(lambda, cfg.order);
}

FrequencyResponse filter_frequency_response(const FilterConfig& cfg, int samples) {
  cfg.validate();
  if (samples < 2) throw ConfigError("filter_frequency_response: need at least 2 samples");
  FrequencyResponse r;
  r.lambda.reserve(static_cast<std::size_t>(samples));
  r.gain.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double lambda = 2.0 * static_cast<double>(i) / static_cast<double>(samples - 1);
    r.lambda.push_back(lambda);
    r.gain.push_back(filter_gain(cfg, lambda));
  }
  return r;
}

}  // namespace ahgfc
