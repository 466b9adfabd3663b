#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "ahgfc/graph_core.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(AHGFC_FIXTURE_DIR) / name / "manifest.json";
}

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ahgfc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline ahgfc::Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  ahgfc::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

// Symmetric 0/1 matrix with zero diagonal, each pair an edge with probability p.
inline ahgfc::Matrix random_graph(std::mt19937_64& rng, int n, double p) {
  std::bernoulli_distribution edge(p);
  ahgfc::Matrix a = ahgfc::Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (edge(rng)) a(i, j) = a(j, i) = 1.0;
    }
  }
  return a;
}

}  // namespace testing
