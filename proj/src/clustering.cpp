#include "ahgfc/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace ahgfc {

namespace {

double squared_distance(const Matrix& points, Eigen::Index i, const Matrix& centers, Eigen::Index j) {
  return (points.row(i) - centers.row(j)).squaredNorm();
}

Matrix kmeanspp_seed(const Matrix& points, int c, std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  Matrix centers(c, points.cols());
  centers.row(0) = points.row(pick(rng));
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (int k = 1; k < c; ++k) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& d = d2[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(points, i, centers, k - 1));
      total += d;
    }
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc > target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(k) = points.row(chosen);
  }
  return centers;
}

// Nearest center per point, ties to the lowest index. Returns the inertia.
double assign(const Matrix& points, const Matrix& centers, std::vector<int>& labels) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (Eigen::Index k = 0; k < centers.rows(); ++k) {
      const double d = squared_distance(points, i, centers, k);
      if (d < best) {
        best = d;
        best_k = static_cast<int>(k);
      }
    }
    labels[static_cast<std::size_t>(i)] = best_k;
    inertia += best;
  }
  return inertia;
}

// Recomputes centers as cluster means; an empty cluster takes over the point
// farthest from its current center. Returns the number of re-seeds performed.
int update_centers(const Matrix& points, std::vector<int>& labels, Matrix& centers) {
  const Eigen::Index c = centers.rows();
  int reseeds = 0;
  for (;;) {
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(c), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    const auto empty = std::find(counts.begin(), counts.end(), 0);
    if (empty == counts.end()) break;
    const int k = static_cast<int>(empty - counts.begin());
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(l)] <= 1) continue;
      const double d = squared_distance(points, i, centers, l);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) break;  // cannot happen for n >= c
    labels[static_cast<std::size_t>(far)] = k;
    centers.row(k) = points.row(far);
    ++reseeds;
  }
  Matrix sums = Matrix::Zero(c, points.cols());
  Vector counts = Vector::Zero(c);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    sums.row(l) += points.row(i);
    counts(l) += 1.0;
  }
  for (Eigen::Index k = 0; k < c; ++k) centers.row(k) = sums.row(k) / counts(k);
  return reseeds;
}

ClusterAssignment lloyd(const Matrix& points, Matrix centers, const KMeansOptions& options) {
  ClusterAssignment out;
  out.labels.assign(static_cast<std::size_t>(points.rows()), -1);
  std::vector<int> next(out.labels.size());
  int reseeds = 0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double inertia = assign(points, centers, next);
    out.inertia_trace.push_back(inertia);
    out.iterations = iter + 1;
    if (next == out.labels) break;
    out.labels = next;
    reseeds += update_centers(points, out.labels, centers);
    if (reseeds > options.max_reseeds) {
      throw NumericError("kmeans: empty clusters persisted after " + std::to_string(options.max_reseeds) +
                         " re-seeds");
    }
  }
  out.centers = std::move(centers);
  out.inertia = kmeans_inertia(points, out.labels, out.centers);
  return out;
}

double entropy_of(const Vector& counts, double n) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (counts(i) > 0.0) {
      const double p = counts(i) / n;
      h -= p * std::log(p);
    }
  }
  return h;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

void check_lengths(std::span<const int> pred, std::span<const int> truth, const char* what) {
  if (pred.size() != truth.size()) {
    throw DimensionError(std::string(what) + ": " + std::to_string(pred.size()) + " predictions for " +
                         std::to_string(truth.size()) + " labels");
  }
  if (pred.empty()) throw DimensionError(std::string(what) + ": empty labeling");
}

}  // namespace

double kmeans_inertia(const Matrix& points, std::span<const int> labels, const Matrix& centers) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += squared_distance(points, i, centers, labels[static_cast<std::size_t>(i)]);
  }
  return total;
}

ClusterAssignment kmeans(const Matrix& points, int c, std::uint64_t seed, const std::optional<Matrix>& warm_centers,
                         const KMeansOptions& options) {
  if (c < 1 || points.rows() < c) {
    throw DomainError("kmeans: need n >= c >= 1 (n = " + std::to_string(points.rows()) +
                      ", c = " + std::to_string(c) + ")");
  }
  if (!points.allFinite()) throw NumericError("kmeans: non-finite point coordinates");
  if (warm_centers) {
    if (warm_centers->rows() != c || warm_centers->cols() != points.cols()) {
      throw DimensionError("kmeans: warm centers have the wrong shape");
    }
    return lloyd(points, *warm_centers, options);
  }
  std::mt19937_64 rng(seed);
  std::optional<ClusterAssignment> best;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    ClusterAssignment run = lloyd(points, kmeanspp_seed(points, c, rng), options);
    if (!best || run.inertia < best->inertia) best = std::move(run);
  }
  return std::move(*best);
}

std::vector<int> hungarian_min_cost(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw DimensionError("hungarian_min_cost: cost matrix must be square");
  // Potentials formulation, 1-indexed with a virtual column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return assignment;
}

Matrix contingency(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred, truth, "contingency");
  const int np = *std::max_element(pred.begin(), pred.end()) + 1;
  const int nt = *std::max_element(truth.begin(), truth.end()) + 1;
  if (*std::min_element(pred.begin(), pred.end()) < 0 || *std::min_element(truth.begin(), truth.end()) < 0) {
    throw DomainError("contingency: negative label id");
  }
  Matrix table = Matrix::Zero(np, nt);
  for (std::size_t i = 0; i < pred.size(); ++i) table(pred[i], truth[i]) += 1.0;
  return table;
}

std::vector<int> best_label_mapping(std::span<const int> pred, std::span<const int> truth) {
  const Matrix table = contingency(pred, truth);
  const Eigen::Index k = std::max(table.rows(), table.cols());
  // Lexicographic objective: matched counts first, then the summed per-pair F1
  // (which lies in [0, k], so the 1 / (k + 1) scale never outweighs one count).
  const Vector pred_sizes = table.rowwise().sum();
  const Vector true_sizes = table.colwise().sum().transpose();
  const double tie_scale = 1.0 / static_cast<double>(k + 1);
  Matrix cost = Matrix::Zero(k, k);
  for (Eigen::Index p = 0; p < table.rows(); ++p) {
    for (Eigen::Index t = 0; t < table.cols(); ++t) {
      const double tp = table(p, t);
      const double f1 = tp > 0.0 ? 2.0 * tp / (pred_sizes(p) + true_sizes(t)) : 0.0;
      cost(p, t) = -(tp + tie_scale * f1);
    }
  }
  const std::vector<int> assignment = hungarian_min_cost(cost);
  std::vector<int> mapping(static_cast<std::size_t>(table.rows()), -1);
  for (Eigen::Index p = 0; p < table.rows(); ++p) {
    const int t = assignment[static_cast<std::size_t>(p)];
    if (t < table.cols()) mapping[static_cast<std::size_t>(p)] = t;
  }
  return mapping;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  const Matrix table = contingency(pred, truth);
  const std::vector<int> mapping = best_label_mapping(pred, truth);
  double hits = 0.0;
  for (std::size_t p = 0; p < mapping.size(); ++p) {
    if (mapping[p] >= 0) hits += table(static_cast<Eigen::Index>(p), mapping[p]);
  }
  return hits / static_cast<double>(pred.size());
}

double nmi(std::span<const int> pred, std::span<const int> truth, Warnings* warnings) {
  const Matrix table = contingency(pred, truth);
  const double n = static_cast<double>(pred.size());
  const Vector row = table.rowwise().sum();
  const Vector col = table.colwise().sum().transpose();
  const double h_truth = entropy_of(col, n);
  if (h_truth == 0.0) {
    warn(warnings, "nmi: ground truth has a single class; NMI defined as 0");
    return 0.0;
  }
  const double h_pred = entropy_of(row, n);
  double mi = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      const double nij = table(i, j);
      if (nij > 0.0) mi += nij / n * std::log(n * nij / (row(i) * col(j)));
    }
  }
  return std::clamp(mi / (0.5 * (h_pred + h_truth)), 0.0, 1.0);
}

double ari(std::span<const int> pred, std::span<const int> truth) {
  const Matrix table = contingency(pred, truth);
  const double n = static_cast<double>(pred.size());
  double index = 0.0;
  for (Eigen::Index i = 0; i < table.size(); ++i) index += comb2(table.data()[i]);
  double sum_rows = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) sum_rows += comb2(table.row(i).sum());
  double sum_cols = 0.0;
  for (Eigen::Index j = 0; j < table.cols(); ++j) sum_cols += comb2(table.col(j).sum());
  const double expected = sum_rows * sum_cols / comb2(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  // Both partitions trivial (all singletons or a single block): identical.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double macro_f1(std::span<const int> pred, std::span<const int> truth) {
  const Matrix table = contingency(pred, truth);
  const std::vector<int> mapping = best_label_mapping(pred, truth);
  std::vector<int> cluster_for_class(static_cast<std::size_t>(table.cols()), -1);
  for (std::size_t p = 0; p < mapping.size(); ++p) {
    if (mapping[p] >= 0) cluster_for_class[static_cast<std::size_t>(mapping[p])] = static_cast<int>(p);
  }
  double total = 0.0;
  int classes = 0;
  for (Eigen::Index t = 0; t < table.cols(); ++t) {
    const double class_size = table.col(t).sum();
    if (class_size == 0.0) continue;
    ++classes;
    const int p = cluster_for_class[static_cast<std::size_t>(t)];
    if (p < 0) continue;
    const double tp = table(p, t);
    if (tp == 0.0) continue;
    const double precision = tp / table.row(p).sum();
    const double recall = tp / class_size;
    total += 2.0 * precision * recall / (precision + recall);
  }
  return total / static_cast<double>(classes);
}

Metrics evaluate_clustering(std::span<const int> pred, std::span<const int> truth, Warnings* warnings) {
  return Metrics{nmi(pred, truth, warnings), ari(pred, truth), accuracy(pred, truth), macro_f1(pred, truth)};
}

OneHotLabels pseudo_labels(const Matrix& h_bar, int c, std::uint64_t seed, const std::optional<Matrix>& warm,
                           const KMeansOptions& options) {
  const ClusterAssignment a = kmeans(h_bar, c, seed, warm, options);
  return OneHotLabels(a.labels, c);
}

}  // namespace ahgfc
