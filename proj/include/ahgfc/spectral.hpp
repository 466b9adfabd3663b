#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ahgfc/encoders.hpp"
#include "ahgfc/graph_core.hpp"

namespace ahgfc {

enum class MatrixTag { adjacency_rw, joint_aggregation_rw, other };

struct SpectrumSummary {
  double min = 0.0;
  double max = 0.0;
  double spread = 0.0;         // max - min
  double low_band_mass = 0.0;  // fraction of eigenvalues with |lambda| < 0.5
  double largest_gap = 0.0;    // largest consecutive gap of the sorted spectrum
};

struct SpectrumReport {
  Vector eigenvalues;  // ascending
  MatrixTag matrix_tag = MatrixTag::other;
  SpectrumSummary summary;
};

/// Eigenvalues of m (or of (m + m^T) / 2 when `symmetrize`) via a symmetric
/// eigensolver. Without `symmetrize` only the lower triangle of m is read.
SpectrumReport spectrum(const Matrix& m, bool symmetrize, MatrixTag tag = MatrixTag::other);

SpectrumSummary summarize_spectrum(const Vector& sorted_eigenvalues);

/// max_i (lambda_{i+1} - lambda_i); 0 for fewer than two eigenvalues.
double largest_consecutive_gap(const Vector& sorted_eigenvalues);

struct SpectraComparison {
  SpectrumReport adjacency;  // random-walk normalized A^v
  SpectrumReport joint;      // s_rw built from the view's embeddings
};

SpectraComparison compare_spectra(const MultiViewGraph& g, int view, const EmbeddingPair& pair);

const char* to_string(MatrixTag tag);
nlohmann::json to_json(const SpectrumReport& r);

/// One eigenvalue per line, shortest round-trip formatting.
void save_spectrum_csv(const SpectrumReport& r, const std::filesystem::path& path);
Vector load_spectrum_csv(const std::filesystem::path& path);

}  // namespace ahgfc
