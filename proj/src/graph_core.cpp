#include "ahgfc/graph_core.hpp"

#include <cmath>
#include <string>

namespace ahgfc {

OneHotLabels::OneHotLabels(std::span<const int> labels, int n_classes)
    : p_(Matrix::Zero(static_cast<Eigen::Index>(labels.size()), n_classes)),
      labels_(labels.begin(), labels.end()) {
  if (n_classes < 1) throw DomainError("OneHotLabels: need at least one class");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || l >= n_classes) {
      throw DomainError("OneHotLabels: label " + std::to_string(l) + " at node " +
                        std::to_string(i) + " outside [0, " + std::to_string(n_classes) + ")");
    }
    p_(static_cast<Eigen::Index>(i), l) = 1.0;
  }
}

OneHotLabels OneHotLabels::from_matrix(const Matrix& p) {
  OneHotLabels out;
  out.p_ = p;
  out.labels_.resize(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    int hot = -1;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const double v = p(i, j);
      if (v == 1.0) {
        if (hot >= 0) throw DomainError("OneHotLabels: row " + std::to_string(i) + " has two ones");
        hot = static_cast<int>(j);
      } else if (v != 0.0) {
        throw DomainError("OneHotLabels: non-binary entry in row " + std::to_string(i));
      }
    }
    if (hot < 0) throw DomainError("OneHotLabels: row " + std::to_string(i) + " has no one");
    out.labels_[static_cast<std::size_t>(i)] = hot;
  }
  return out;
}

MultiViewGraph::MultiViewGraph(Matrix features, std::vector<Matrix> adjacencies,
                               std::optional<std::vector<int>> labels, int n_clusters)
    : features_(std::move(features)),
      adjacencies_(std::move(adjacencies)),
      labels_(std::move(labels)),
      n_clusters_(n_clusters) {
  const Eigen::Index n = features_.rows();
  if (adjacencies_.empty()) throw DimensionError("MultiViewGraph: at least one view required");
  if (n_clusters_ < 1) throw DomainError("MultiViewGraph: n_clusters must be >= 1");
  if (!features_.allFinite()) throw DomainError("MultiViewGraph: non-finite feature entry");
  for (std::size_t v = 0; v < adjacencies_.size(); ++v) {
    const Matrix& a = adjacencies_[v];
    const std::string tag = "MultiViewGraph: view " + std::to_string(v);
    if (a.rows() != n || a.cols() != n) {
      throw DimensionError(tag + " adjacency is " + std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + ", expected " + std::to_string(n) +
                           "x" + std::to_string(n));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (a(i, i) != 0.0) throw DomainError(tag + " has a self-loop at node " + std::to_string(i));
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double x = a(i, j);
        if (x != 0.0 && x != 1.0) throw DomainError(tag + " has a non-binary entry");
        if (x != a(j, i)) throw DomainError(tag + " is not symmetric");
      }
    }
  }
  if (labels_) {
    if (static_cast<Eigen::Index>(labels_->size()) != n) {
      throw DimensionError("MultiViewGraph: label count " + std::to_string(labels_->size()) +
                           " != node count " + std::to_string(n));
    }
    for (int l : *labels_) {
      if (l < 0 || l >= n_clusters_) {
        throw DomainError("MultiViewGraph: label " + std::to_string(l) + " outside [0, " +
                          std::to_string(n_clusters_) + ")");
      }
    }
  }
}

NormalizedGraph random_walk_normalize(const Matrix& a, bool add_self_loops) {
  if (a.rows() != a.cols()) {
    throw DimensionError("random_walk_normalize: matrix is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()));
  }
  if ((a.array() < 0.0).any()) throw DomainError("random_walk_normalize: negative entry");
  const Eigen::Index n = a.rows();
  NormalizedGraph out;
  out.a_rw = a;
  if (add_self_loops) out.a_rw.diagonal().array() += 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double degree = out.a_rw.row(i).sum();
    if (degree > 0.0) {
      out.a_rw.row(i) /= degree;
    } else {
      out.a_rw(i, i) = 1.0;
    }
  }
  out.l_rw = Matrix::Identity(n, n) - out.a_rw;
  return out;
}

double homophily_ratio(const Matrix& a, const OneHotLabels& labels) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || labels.n_nodes() != n) {
    throw DimensionError("homophily_ratio: adjacency and labels disagree on node count");
  }
  const auto& l = labels.labels();
  double intra = 0.0;
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const double w = a(i, j);
      total += w;
      if (l[static_cast<std::size_t>(i)] == l[static_cast<std::size_t>(j)]) intra += w;
    }
  }
  if (total == 0.0) throw UndefinedRatioError("homophily_ratio: graph has no edges");
  return intra / total;
}

std::vector<double> true_homophily_report(const MultiViewGraph& g) {
  if (!g.labels()) throw DomainError("true_homophily_report: graph has no ground-truth labels");
  const OneHotLabels truth(*g.labels(), g.n_clusters());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(g.n_views()));
  for (const Matrix& a : g.adjacencies()) out.push_back(homophily_ratio(a, truth));
  return out;
}

}  // namespace ahgfc
