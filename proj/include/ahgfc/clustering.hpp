#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ahgfc/graph_core.hpp"
#include "ahgfc/report.hpp"

namespace ahgfc {

struct ClusterAssignment {
  std::vector<int> labels;
  Matrix centers;  // c x d
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> inertia_trace;  // inertia after each assignment step
};

struct KMeansOptions {
  int max_iterations = 300;
  int restarts = 1;     // independent k-means++ seedings; lowest inertia wins (ignored with warm start)
  int max_reseeds = 5;  // empty-cluster repairs tolerated before giving up
};

/// Lloyd's algorithm from k-means++ seeding (or the given warm centers) until the
/// assignment stops changing. Empty clusters are re-seeded at the point farthest
/// from its center; more than max_reseeds repairs throws NumericError.
ClusterAssignment kmeans(const Matrix& points, int c, std::uint64_t seed,
                         const std::optional<Matrix>& warm_centers = std::nullopt,
                         const KMeansOptions& options = {});

/// Sum of squared distances from each point to its assigned center.
double kmeans_inertia(const Matrix& points, std::span<const int> labels, const Matrix& centers);

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method).
/// Returns assignment[row] = column.
std::vector<int> hungarian_min_cost(const Matrix& cost);

/// n_pred x n_true counts; ids must be non-negative.
Matrix contingency(std::span<const int> pred, std::span<const int> truth);

/// Predicted cluster -> true class map maximizing agreement, ties broken toward the
/// highest summed per-class F1 (-1 if unmatched).
std::vector<int> best_label_mapping(std::span<const int> pred, std::span<const int> truth);

double accuracy(std::span<const int> pred, std::span<const int> truth);
/// Arithmetic-mean normalization; 0 (with a warning) when truth has one class.
double nmi(std::span<const int> pred, std::span<const int> truth, Warnings* warnings = nullptr);
double ari(std::span<const int> pred, std::span<const int> truth);
/// Macro F1 over the non-empty true classes under best_label_mapping.
double macro_f1(std::span<const int> pred, std::span<const int> truth);

Metrics evaluate_clustering(std::span<const int> pred, std::span<const int> truth,
                            Warnings* warnings = nullptr);

/// One-hot encoding of kmeans(h_bar, c, seed, warm) labels.
OneHotLabels pseudo_labels(const Matrix& h_bar, int c, std::uint64_t seed,
                           const std::optional<Matrix>& warm = std::nullopt,
                           const KMeansOptions& options = {});

}  // namespace ahgfc
