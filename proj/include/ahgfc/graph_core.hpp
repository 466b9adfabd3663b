#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "ahgfc/errors.hpp"

namespace ahgfc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Random-walk normalized affinity a_rw = D^-1 A and its Laplacian l_rw = I - a_rw.
struct NormalizedGraph {
  Matrix a_rw;
  Matrix l_rw;
};

/// One-hot class membership matrix (n x c), exactly one 1 per row.
class OneHotLabels {
 public:
  /// Throws DomainError if any label is outside [0, n_classes).
  OneHotLabels(std::span<const int> labels, int n_classes);
  /// Throws DomainError unless `p` is a 0/1 matrix with unit row sums.
  static OneHotLabels from_matrix(const Matrix& p);

  const Matrix& matrix() const noexcept { return p_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int n_nodes() const noexcept { return static_cast<int>(labels_.size()); }
  int n_classes() const noexcept { return static_cast<int>(p_.cols()); }

 private:
  OneHotLabels() = default;
  Matrix p_;
  std::vector<int> labels_;
};

/// Multi-view attributed graph: V symmetric 0/1 adjacencies over a shared node
/// set and one shared feature matrix.
class MultiViewGraph {
 public:
  /// Validates every invariant; throws DimensionError / DomainError.
  MultiViewGraph(Matrix features, std::vector<Matrix> adjacencies,
                 std::optional<std::vector<int>> labels, int n_clusters);

  int n_nodes() const noexcept { return static_cast<int>(features_.rows()); }
  int n_views() const noexcept { return static_cast<int>(adjacencies_.size()); }
  int n_features() const noexcept { return static_cast<int>(features_.cols()); }
  int n_clusters() const noexcept { return n_clusters_; }

  const Matrix& features() const noexcept { return features_; }
  const Matrix& adjacency(int view) const { return adjacencies_.at(view); }
  const std::vector<Matrix>& adjacencies() const noexcept { return adjacencies_; }
  const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }

  bool operator==(const MultiViewGraph&) const = default;

 private:
  Matrix features_;
  std::vector<Matrix> adjacencies_;
  std::optional<std::vector<int>> labels_;
  int n_clusters_;
};

/// D^-1 (A or A + I). Zero-degree rows become the one-hot self row.
NormalizedGraph random_walk_normalize(const Matrix& a, bool add_self_loops);

/// Fraction of (off-diagonal) edges whose endpoints share a label.
/// Throws UndefinedRatioError for an edgeless graph.
double homophily_ratio(const Matrix& a, const OneHotLabels& labels);

/// Per-view homophily ratio under the ground-truth labels.
std::vector<double> true_homophily_report(const MultiViewGraph& g);

}  // namespace ahgfc
