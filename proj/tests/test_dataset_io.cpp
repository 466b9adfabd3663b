#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "ahgfc/dataset_io.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace ahgfc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
}

// Copy of tiny3 in a scratch dir, with one file replaced.
fs::path tiny3_variant(const std::string& tag, const std::string& file, const std::string& text) {
  const fs::path dir = testing::scratch_dir("tiny3_" + tag);
  for (const auto& entry : fs::directory_iterator(testing::fixture("tiny3").parent_path())) {
    fs::copy_file(entry.path(), dir / entry.path().filename());
  }
  spit(dir / file, text);
  return dir / "manifest.json";
}

}  // namespace

TEST_CASE("tiny3 fixture loads") {
  const MultiViewGraph g = load_dataset(testing::fixture("tiny3"));
  CHECK(g.n_nodes() == 3);
  CHECK(g.n_views() == 2);
  CHECK(g.n_clusters() == 2);
  CHECK(g.adjacency(0)(0, 1) == 1.0);
  CHECK(g.adjacency(1)(0, 2) == 1.0);
  CHECK(g.adjacency(1).sum() == 2.0);
  REQUIRE(g.labels());
  CHECK(*g.labels() == std::vector<int>{0, 0, 1});
}

TEST_CASE("feature rows must match the node count") {
  const fs::path m = tiny3_variant("rows", "features.csv", "1,0\n0.9,0.1\n");
  CHECK_THROWS_AS(load_dataset(m), DimensionError);
}

TEST_CASE("duplicate, reversed and self-loop edge lines are repaired") {
  const fs::path m = tiny3_variant("dups", "graph_0.txt", "0 1\n1 0\n0 1\n1 2\n2 2\n");
  Warnings repairs;
  const MultiViewGraph repaired = load_dataset(m, &repairs);
  const MultiViewGraph clean = load_dataset(testing::fixture("tiny3"));
  CHECK(repaired == clean);
  CHECK(!repairs.empty());
}

TEST_CASE("non-binary weights and out-of-range nodes are rejected") {
  CHECK_THROWS_AS(load_dataset(tiny3_variant("weight", "graph_0.txt", "0 1 2\n")), DomainError);
  CHECK_THROWS_AS(load_dataset(tiny3_variant("range", "graph_0.txt", "0 3\n")), DimensionError);
  CHECK_THROWS_AS(load_dataset(tiny3_variant("label", "labels.csv", "0\n0\n2\n")), DomainError);
}

TEST_CASE("synthetic homophily follows the generator's expected ratio") {
  SyntheticSpec s;
  s.n_nodes = 500;
  s.p_in = {0.2};
  s.p_out = {0.01};
  s.seed = 1;
  CHECK(true_homophily_report(generate_synthetic(s))[0] > 0.8);

  s.p_in = {0.01};
  s.p_out = {0.2};
  CHECK(true_homophily_report(generate_synthetic(s))[0] < 0.2);

  s.p_in = {0.05};
  s.p_out = {0.05};
  const double intra_fraction = 2.0 * (250.0 * 249.0 / 2.0) / (500.0 * 499.0 / 2.0);
  CHECK(expected_homophily(s, 0) == doctest::Approx(intra_fraction).epsilon(1e-12));
  CHECK(std::abs(true_homophily_report(generate_synthetic(s))[0] - intra_fraction) < 0.03);
}

TEST_CASE("synthetic hr converges at n = 2000") {
  SyntheticSpec s;
  s.n_nodes = 2000;
  s.n_clusters = 4;
  s.n_views = 2;
  s.p_in = {0.02, 0.004};
  s.p_out = {0.002, 0.02};
  s.seed = 9;
  const MultiViewGraph g = generate_synthetic(s);
  const std::vector<double> hr = true_homophily_report(g);
  for (int v = 0; v < 2; ++v) CHECK(std::abs(hr[v] - expected_homophily(s, v)) < 0.03);
}

TEST_CASE("synthetic generation is deterministic and validated") {
  SyntheticSpec s;
  s.n_nodes = 60;
  s.n_views = 2;
  s.p_in = {0.3, 0.1};
  s.p_out = {0.05, 0.2};
  s.seed = 4;
  CHECK(generate_synthetic(s) == generate_synthetic(s));
  s.seed = 5;
  const MultiViewGraph other = generate_synthetic(s);
  s.seed = 4;
  CHECK(!(generate_synthetic(s) == other));

  SyntheticSpec zero = s;
  zero.p_in = {0.0, 0.1};
  zero.p_out = {0.0, 0.1};
  CHECK_THROWS_AS(generate_synthetic(zero), UndefinedRatioError);
  SyntheticSpec bad = s;
  bad.sigma = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.p_in = {1.5, 0.1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("save then load reproduces a synthetic graph") {
  SyntheticSpec s;
  s.n_nodes = 80;
  s.n_clusters = 3;
  s.n_views = 2;
  s.p_in = {0.2, 0.05};
  s.p_out = {0.02, 0.1};
  s.seed = 8;
  const MultiViewGraph g = generate_synthetic(s);
  const fs::path dir = testing::scratch_dir("roundtrip");
  const MultiViewGraph back = load_dataset(save_dataset(g, "rt", dir));
  CHECK(back.adjacencies() == g.adjacencies());
  CHECK(back.labels() == g.labels());
  CHECK((back.features() - g.features()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("embedding CSV format") {
  const fs::path dir = testing::scratch_dir("csv");
  save_embedding(Matrix::Identity(2, 2), dir / "eye.csv");
  CHECK(slurp(dir / "eye.csv") == "1,0\n0,1\n");

  std::mt19937_64 rng(2);
  const Matrix m = testing::random_matrix(rng, 10, 4);
  save_embedding(m, dir / "m.csv");
  CHECK((load_matrix_csv(dir / "m.csv") - m).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(save_embedding(m, dir / "missing" / "x.csv"), IoError);
}

TEST_CASE("report JSON round trip") {
  TrainReport r;
  r.pretrain_l_rec = {0.5, 0.25};
  r.epochs.push_back({0, 1.5, 0.25, 1.525, {0.8, 0.6}, {0.4, 0.6}});
  r.final = Metrics{0.5, 0.25, 0.75, 0.625};
  r.warnings = {"note"};
  CHECK(to_json(r)["final"]["nmi"] == 0.5);

  const fs::path dir = testing::scratch_dir("report");
  save_report(r, dir / "r.json");
  const TrainReport back = load_report(dir / "r.json");
  CHECK(back.pretrain_l_rec == r.pretrain_l_rec);
  REQUIRE(back.epochs.size() == 1);
  CHECK(back.epochs[0].hr == r.epochs[0].hr);
  CHECK(back.epochs[0].l_total == r.epochs[0].l_total);
  REQUIRE(back.final);
  CHECK(back.final->f1 == 0.625);
  CHECK(back.warnings == r.warnings);

  TrainReport unlabeled;
  CHECK(to_json(unlabeled)["final"].is_null());
}

TEST_CASE("manifest JSON round trip") {
  DatasetManifest m{"d", 3, 2, 2, 2, "features.csv", "labels.csv", {"graph_0.txt", "graph_1.txt"}};
  const DatasetManifest back = manifest_from_json(to_json(m));
  CHECK(back.name == m.name);
  CHECK(back.graph_files == m.graph_files);
  CHECK(back.n_clusters == 2);
}

TEST_CASE("shortest round-trip number formatting") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
