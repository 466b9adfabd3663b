#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ahgfc/graph_core.hpp"
#include "ahgfc/report.hpp"

namespace ahgfc {

/// On-disk description of a dataset. File paths are relative to the manifest's
/// directory unless absolute.
struct DatasetManifest {
  std::string name;
  int n_nodes = 0;
  int n_views = 0;
  int n_features = 0;
  int n_clusters = 0;
  std::string feature_file;
  std::string label_file;  // may be empty: unlabeled dataset
  std::vector<std::string> graph_files;
};

nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

/// Stochastic-block-model views over equal-size classes plus Gaussian class
/// features. Class j has mean mu * e_j, so n_features must be >= n_clusters.
struct SyntheticSpec {
  std::string name = "synthetic";
  int n_nodes = 500;
  int n_clusters = 2;
  int n_views = 1;
  std::vector<double> p_in{0.2};   // one entry per view
  std::vector<double> p_out{0.01};
  int n_features = 16;
  double mu = 1.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

nlohmann::json to_json(const SyntheticSpec& s);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

/// Class id of node i under the generator's equal-size partition.
int synthetic_label(const SyntheticSpec& spec, int node);

/// p_in * intra_pairs / (p_in * intra_pairs + p_out * inter_pairs) for one view.
double expected_homophily(const SyntheticSpec& spec, int view);

MultiViewGraph generate_synthetic(const SyntheticSpec& spec);

/// Reads a manifest and its files. Edge lists are deduplicated, symmetrized and
/// stripped of self-loops; each repair is appended to `repairs`.
MultiViewGraph load_dataset(const std::filesystem::path& manifest_path,
                            Warnings* repairs = nullptr);

/// Writes manifest.json, features.csv, labels.csv (if labeled) and one edge
/// list per view into `dir`. Returns the manifest path.
std::filesystem::path save_dataset(const MultiViewGraph& g, const std::string& name,
                                   const std::filesystem::path& dir);

/// Headerless CSV, '.' decimal, ',' separator, every line '\n'-terminated.
void save_embedding(const Matrix& m, const std::filesystem::path& path);
Matrix load_matrix_csv(const std::filesystem::path& path);

void save_report(const TrainReport& report, const std::filesystem::path& path);
TrainReport load_report(const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double ("1", "0.5", "0.1").
std::string format_double(double x);

}  // namespace ahgfc
