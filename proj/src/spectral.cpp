#include "ahgfc/spectral.hpp"

#include <Eigen/Eigenvalues>

#include "ahgfc/dataset_io.hpp"
#include "ahgfc/filterbank.hpp"

namespace ahgfc {

double largest_consecutive_gap(const Vector& ev) {
  double gap = 0.0;
  for (Eigen::Index i = 1; i < ev.size(); ++i) gap = std::max(gap, ev(i) - ev(i - 1));
  return gap;
}

SpectrumSummary summarize_spectrum(const Vector& ev) {
  SpectrumSummary s;
  if (ev.size() == 0) return s;
  s.min = ev.minCoeff();
  s.max = ev.maxCoeff();
  s.spread = s.max - s.min;
  s.low_band_mass = static_cast<double>((ev.array().abs() < 0.5).count()) / static_cast<double>(ev.size());
  s.largest_gap = largest_consecutive_gap(ev);
  return s;
}

SpectrumReport spectrum(const Matrix& m, bool symmetrize, MatrixTag tag) {
  if (m.rows() != m.cols()) throw DimensionError("spectrum: matrix is not square");
  if (!m.allFinite()) throw NumericError("spectrum: non-finite entry");
  SpectrumReport r;
  r.matrix_tag = tag;
  if (m.rows() == 0) return r;
  const Matrix sym = symmetrize ? Matrix(0.5 * (m + m.transpose())) : m;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("spectrum: eigensolver did not converge");
  r.eigenvalues = solver.eigenvalues();  // ascending
  r.summary = summarize_spectrum(r.eigenvalues);
  return r;
}

SpectraComparison compare_spectra(const MultiViewGraph& g, int view, const EmbeddingPair& pair) {
  if (view < 0 || view >= g.n_views()) throw DimensionError("compare_spectra: view index out of range");
  SpectraComparison out;
  out.adjacency = spectrum(random_walk_normalize(g.adjacency(view), false).a_rw, true, MatrixTag::adjacency_rw);
  out.joint = spectrum(build_joint_aggregation(pair).s_rw, true, MatrixTag::joint_aggregation_rw);
  return out;
}

const char* to_string(MatrixTag tag) {
  switch (tag) {
    case MatrixTag::adjacency_rw:
      return "adjacency_rw";
    case MatrixTag::joint_aggregation_rw:
      return "joint_aggregation_rw";
    case MatrixTag::other:
      return "other";
  }
  return "other";
}

nlohmann::json to_json(const SpectrumReport& r) {
  return {{"matrix_tag", to_string(r.matrix_tag)},
          {"n", r.eigenvalues.size()},
          {"min", r.summary.min},
          {"max", r.summary.max},
          {"spread", r.summary.spread},
          {"low_band_mass", r.summary.low_band_mass},
          {"largest_gap", r.summary.largest_gap}};
}

void save_spectrum_csv(const SpectrumReport& r, const std::filesystem::path& path) {
  save_embedding(Matrix(r.eigenvalues), path);
}

Vector load_spectrum_csv(const std::filesystem::path& path) {
  const Matrix m = load_matrix_csv(path);
  if (m.size() > 0 && m.cols() != 1) throw DimensionError("spectrum CSV must have one value per line");
  return m.size() == 0 ? Vector() : Vector(m.col(0));
}

}  // namespace ahgfc
