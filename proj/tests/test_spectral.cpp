#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "ahgfc/dataset_io.hpp"
#include "ahgfc/graph_core.hpp"
#include "ahgfc/spectral.hpp"
#include "helpers.hpp"

using namespace ahgfc;

TEST_CASE("spectrum of the identity") {
  const SpectrumReport r = spectrum(Matrix::Identity(4, 4), false);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(r.eigenvalues(i) == doctest::Approx(1.0));
  CHECK(r.summary.spread == doctest::Approx(0.0));
  CHECK(r.summary.largest_gap == doctest::Approx(0.0));
}

TEST_CASE("spectrum of the swap matrix") {
  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  const SpectrumReport r = spectrum(swap, true, MatrixTag::adjacency_rw);
  CHECK(r.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(r.eigenvalues(1) == doctest::Approx(1.0));
  CHECK(r.summary.largest_gap == doctest::Approx(2.0));
  CHECK(r.summary.low_band_mass == 0.0);
  CHECK(std::string(to_string(r.matrix_tag)) == "adjacency_rw");
}

TEST_CASE("largest consecutive gap") {
  Vector v(4);
  v << -0.5, 0.1, 0.2, 0.9;
  CHECK(largest_consecutive_gap(v) == doctest::Approx(0.7));
  CHECK(largest_consecutive_gap(Vector::Ones(1)) == 0.0);
}

TEST_CASE("spectral invariants of symmetrized stochastic matrices") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 8 + trial;
    Matrix a = testing::random_graph(rng, n, 0.4);
    for (int i = 0; i < n; ++i) {
      if (a.row(i).sum() == 0.0) a(i, (i + 1) % n) = a((i + 1) % n, i) = 1.0;
    }
    const Matrix m = random_walk_normalize(a, false).a_rw;
    const Matrix sym = 0.5 * (m + m.transpose());
    const SpectrumReport r = spectrum(m, true);
    CHECK(std::abs(r.eigenvalues.sum() - sym.trace()) < 1e-8 * n);
    for (Eigen::Index i = 1; i < r.eigenvalues.size(); ++i) CHECK(r.eigenvalues(i) >= r.eigenvalues(i - 1));

    // I - M has the mirrored spectrum 1 - lambda
    const SpectrumReport dual = spectrum(Matrix::Identity(n, n) - m, true);
    for (Eigen::Index i = 0; i < n; ++i) {
      CHECK(std::abs(dual.eigenvalues(i) - (1.0 - r.eigenvalues(n - 1 - i))) < 1e-9);
    }
  }
}

TEST_CASE("symmetric row-stochastic spectra lie in [-1, 1]") {
  // convex mixtures of symmetrized permutation matrices
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6 + trial;
    Matrix m = Matrix::Zero(n, n);
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
      std::vector<int> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Matrix p = Matrix::Zero(n, n);
      for (int i = 0; i < n; ++i) p(i, perm[static_cast<std::size_t>(i)]) = 1.0;
      const double c = u(rng);
      m += c * 0.5 * (p + p.transpose());
      total += c;
    }
    m /= total;
    const SpectrumReport r = spectrum(m, false);
    CHECK(r.eigenvalues.cwiseAbs().maxCoeff() <= 1.0 + 1e-8);
    CHECK(r.eigenvalues.maxCoeff() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("symmetric row-stochastic matrix has Perron eigenvalue 1") {
  // the random-walk matrix of a regular graph is symmetric
  Matrix cycle = Matrix::Zero(6, 6);
  for (int i = 0; i < 6; ++i) cycle(i, (i + 1) % 6) = cycle((i + 1) % 6, i) = 0.5;
  const SpectrumReport r = spectrum(cycle, false);
  CHECK(r.eigenvalues.maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.eigenvalues.minCoeff() == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("compare_spectra with identity embeddings") {
  const MultiViewGraph g = load_dataset(testing::fixture("tiny3"));
  const EmbeddingPair eye{Matrix::Identity(3, 3), Matrix::Identity(3, 3)};
  const SpectraComparison c = compare_spectra(g, 0, eye);
  CHECK(c.adjacency.matrix_tag == MatrixTag::adjacency_rw);
  CHECK(c.joint.matrix_tag == MatrixTag::joint_aggregation_rw);
  // S = I, so s_rw = I
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(c.joint.eigenvalues(i) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(c.adjacency.eigenvalues.size() == 3);
}

TEST_CASE("spectrum CSV round trip") {
  std::mt19937_64 rng(2);
  const Matrix m = testing::random_matrix(rng, 12, 12);
  const SpectrumReport r = spectrum(m, true);
  const auto dir = testing::scratch_dir("spectrum");
  save_spectrum_csv(r, dir / "s.csv");
  const Vector back = load_spectrum_csv(dir / "s.csv");
  REQUIRE(back.size() == 12);
  CHECK((back - r.eigenvalues).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(to_json(r)["n"] == 12);
}
