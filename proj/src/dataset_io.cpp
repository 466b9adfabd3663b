#include "ahgfc/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <utility>

namespace ahgfc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view tok, const fs::path& path, std::size_t line) {
  tok = trim(tok);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": bad number '" +
                  std::string(tok) + "'");
  }
  return v;
}

long parse_index(std::string_view tok, const fs::path& path, std::size_t line) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw IoError(path.string() + ":" + std::to_string(line) + ": bad integer '" +
                  std::string(tok) + "'");
  }
  return v;
}

fs::path resolve(const fs::path& base, const std::string& file) {
  const fs::path p(file);
  return p.is_absolute() ? p : base / p;
}

Matrix read_edge_list(const fs::path& path, int n, int view, Warnings* repairs) {
  auto in = open_in(path);
  Matrix a = Matrix::Zero(n, n);
  std::set<std::pair<long, long>> seen;
  std::size_t duplicates = 0;
  std::size_t self_loops = 0;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream tokens{std::string(body)};
    std::vector<std::string> parts;
    for (std::string t; tokens >> t;) parts.push_back(t);
    if (parts.size() != 2 && parts.size() != 3) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected 'i j'");
    }
    const long i = parse_index(parts[0], path, lineno);
    const long j = parse_index(parts[1], path, lineno);
    if (parts.size() == 3 && parse_double(parts[2], path, lineno) != 1.0) {
      throw DomainError(path.string() + ":" + std::to_string(lineno) +
                        ": non-binary adjacency entry");
    }
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw DimensionError(path.string() + ":" + std::to_string(lineno) + ": node index out of [0, " +
                           std::to_string(n) + ")");
    }
    if (i == j) {
      ++self_loops;
      continue;
    }
    if (!seen.emplace(std::min(i, j), std::max(i, j)).second) ++duplicates;
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  const std::string tag = "view " + std::to_string(view) + " (" + path.filename().string() + "): ";
  if (duplicates > 0) warn(repairs, tag + "dropped " + std::to_string(duplicates) + " duplicate edge(s)");
  if (self_loops > 0) warn(repairs, tag + "dropped " + std::to_string(self_loops) + " self-loop(s)");
  return a;
}

std::vector<int> read_labels(const fs::path& path) {
  auto in = open_in(path);
  std::vector<int> labels;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto body = trim(line);
    if (body.empty()) continue;
    labels.push_back(static_cast<int>(parse_index(body, path, lineno)));
  }
  return labels;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Manifest

json to_json(const DatasetManifest& m) {
  json j = json::object();
  j["name"] = m.name;
  j["n_nodes"] = m.n_nodes;
  j["n_views"] = m.n_views;
  j["n_features"] = m.n_features;
  j["n_clusters"] = m.n_clusters;
  j["feature_file"] = m.feature_file;
  j["label_file"] = m.label_file;
  j["graph_files"] = m.graph_files;
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    m.n_nodes = j.at("n_nodes").get<int>();
    m.n_views = j.at("n_views").get<int>();
    m.n_features = j.at("n_features").get<int>();
    m.n_clusters = j.at("n_clusters").get<int>();
    m.feature_file = j.at("feature_file").get<std::string>();
    m.label_file = j.value("label_file", std::string{});
    m.graph_files = j.at("graph_files").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  if (m.n_nodes < 1 || m.n_views < 1 || m.n_features < 1 || m.n_clusters < 1) {
    throw ConfigError("manifest: counts must be positive");
  }
  if (static_cast<int>(m.graph_files.size()) != m.n_views) {
    throw DimensionError("manifest: " + std::to_string(m.graph_files.size()) +
                         " graph files for n_views = " + std::to_string(m.n_views));
  }
  return m;
}

MultiViewGraph load_dataset(const fs::path& manifest_path, Warnings* repairs) {
  json j;
  {
    auto in = open_in(manifest_path);
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError("manifest '" + manifest_path.string() + "': " + e.what());
    }
  }
  const DatasetManifest m = manifest_from_json(j);
  const fs::path base = manifest_path.parent_path();

  const fs::path feature_path = resolve(base, m.feature_file);
  Matrix x = load_matrix_csv(feature_path);
  if (x.rows() != m.n_nodes || x.cols() != m.n_features) {
    throw DimensionError("features '" + feature_path.string() + "' are " +
                         std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                         ", manifest says " + std::to_string(m.n_nodes) + "x" +
                         std::to_string(m.n_features));
  }

  std::vector<Matrix> views;
  for (int v = 0; v < m.n_views; ++v) {
    views.push_back(read_edge_list(resolve(base, m.graph_files[static_cast<std::size_t>(v)]),
                                   m.n_nodes, v, repairs));
  }

  std::optional<std::vector<int>> labels;
  if (!m.label_file.empty()) {
    labels = read_labels(resolve(base, m.label_file));
    if (static_cast<int>(labels->size()) != m.n_nodes) {
      throw DimensionError("labels: " + std::to_string(labels->size()) + " entries for " +
                           std::to_string(m.n_nodes) + " nodes");
    }
  }
  return MultiViewGraph(std::move(x), std::move(views), std::move(labels), m.n_clusters);
}

fs::path save_dataset(const MultiViewGraph& g, const std::string& name, const fs::path& dir) {
  fs::create_directories(dir);
  DatasetManifest m;
  m.name = name;
  m.n_nodes = g.n_nodes();
  m.n_views = g.n_views();
  m.n_features = g.n_features();
  m.n_clusters = g.n_clusters();
  m.feature_file = "features.csv";
  save_embedding(g.features(), dir / m.feature_file);

  if (g.labels()) {
    m.label_file = "labels.csv";
    const fs::path p = dir / m.label_file;
    auto out = open_out(p);
    for (int l : *g.labels()) out << l << '\n';
    close_checked(out, p);
  }

  for (int v = 0; v < g.n_views(); ++v) {
    const std::string file = "graph_" + std::to_string(v) + ".txt";
    m.graph_files.push_back(file);
    const fs::path p = dir / file;
    auto out = open_out(p);
    const Matrix& a = g.adjacency(v);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index k = i + 1; k < a.cols(); ++k) {
        if (a(i, k) != 0.0) out << i << ' ' << k << '\n';
      }
    }
    close_checked(out, p);
  }

  const fs::path manifest_path = dir / "manifest.json";
  auto out = open_out(manifest_path);
  out << to_json(m).dump(2) << '\n';
  close_checked(out, manifest_path);
  return manifest_path;
}

// ---------------------------------------------------------------------------
// Synthetic generator

void SyntheticSpec::validate() const {
  if (n_nodes < 2) throw ConfigError("synthetic: n_nodes must be >= 2");
  if (n_clusters < 1 || n_clusters > n_nodes) throw ConfigError("synthetic: need 1 <= n_clusters <= n_nodes");
  if (n_views < 1) throw ConfigError("synthetic: n_views must be >= 1");
  if (static_cast<int>(p_in.size()) != n_views || static_cast<int>(p_out.size()) != n_views) {
    throw ConfigError("synthetic: p_in / p_out need one entry per view");
  }
  for (int v = 0; v < n_views; ++v) {
    const double pi = p_in[static_cast<std::size_t>(v)];
    const double po = p_out[static_cast<std::size_t>(v)];
    if (!(pi >= 0.0 && pi <= 1.0 && po >= 0.0 && po <= 1.0)) {
      throw ConfigError("synthetic: edge probabilities must lie in [0, 1]");
    }
  }
  if (n_features < n_clusters) throw ConfigError("synthetic: n_features must be >= n_clusters");
  if (!(sigma > 0.0)) throw ConfigError("synthetic: sigma must be > 0");
  if (!std::isfinite(mu)) throw ConfigError("synthetic: mu must be finite");
}

json to_json(const SyntheticSpec& s) {
  json j = json::object();
  j["name"] = s.name;
  j["n_nodes"] = s.n_nodes;
  j["n_clusters"] = s.n_clusters;
  j["n_views"] = s.n_views;
  j["p_in"] = s.p_in;
  j["p_out"] = s.p_out;
  j["n_features"] = s.n_features;
  j["mu"] = s.mu;
  j["sigma"] = s.sigma;
  j["seed"] = s.seed;
  return j;
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
  SyntheticSpec s;
  try {
    s.name = j.value("name", s.name);
    s.n_nodes = j.value("n_nodes", s.n_nodes);
    s.n_clusters = j.value("n_clusters", s.n_clusters);
    s.n_views = j.value("n_views", s.n_views);
    const auto per_view = [&](const char* key, double fallback) {
      if (!j.contains(key)) return std::vector<double>(static_cast<std::size_t>(s.n_views), fallback);
      const json& v = j.at(key);
      if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(s.n_views), v.get<double>());
      return v.get<std::vector<double>>();
    };
    s.p_in = per_view("p_in", 0.2);
    s.p_out = per_view("p_out", 0.01);
    s.n_features = j.value("n_features", s.n_features);
    s.mu = j.value("mu", s.mu);
    s.sigma = j.value("sigma", s.sigma);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

int synthetic_label(const SyntheticSpec& spec, int node) {
  return static_cast<int>(static_cast<long long>(node) * spec.n_clusters / spec.n_nodes);
}

double expected_homophily(const SyntheticSpec& spec, int view) {
  std::vector<double> sizes(static_cast<std::size_t>(spec.n_clusters), 0.0);
  for (int i = 0; i < spec.n_nodes; ++i) sizes[static_cast<std::size_t>(synthetic_label(spec, i))] += 1.0;
  double intra = 0.0;
  for (double s : sizes) intra += s * (s - 1.0) / 2.0;
  const double n = spec.n_nodes;
  const double inter = n * (n - 1.0) / 2.0 - intra;
  const double pi = spec.p_in.at(static_cast<std::size_t>(view));
  const double po = spec.p_out.at(static_cast<std::size_t>(view));
  const double denom = pi * intra + po * inter;
  if (denom == 0.0) throw UndefinedRatioError("expected_homophily: expected edge count is 0");
  return pi * intra / denom;
}

MultiViewGraph generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const int n = spec.n_nodes;
  for (int v = 0; v < spec.n_views; ++v) {
    // Surfaces UndefinedRatioError when this view can never receive an edge.
    expected_homophily(spec, v);
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = synthetic_label(spec, i);

  std::vector<Matrix> views;
  views.reserve(static_cast<std::size_t>(spec.n_views));
  for (int v = 0; v < spec.n_views; ++v) {
    const double pi = spec.p_in[static_cast<std::size_t>(v)];
    const double po = spec.p_out[static_cast<std::size_t>(v)];
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double p = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? pi : po;
        if (unit(rng) < p) {
          a(i, j) = 1.0;
          a(j, i) = 1.0;
        }
      }
    }
    views.push_back(std::move(a));
  }

  std::normal_distribution<double> noise(0.0, spec.sigma);
  Matrix x(n, spec.n_features);
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < spec.n_features; ++f) {
      const double mean = f == labels[static_cast<std::size_t>(i)] ? spec.mu : 0.0;
      x(i, f) = mean + noise(rng);
    }
  }
  return MultiViewGraph(std::move(x), std::move(views), std::move(labels), spec.n_clusters);
}

// ---------------------------------------------------------------------------
// Matrices and reports

void save_embedding(const Matrix& m, const fs::path& path) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  close_checked(out, path);
}

Matrix load_matrix_csv(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto body = trim(line);
    if (body.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      row.push_back(parse_double(body.substr(start, comma - start), path, lineno));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DimensionError(path.string() + ":" + std::to_string(lineno) + ": ragged row (" +
                           std::to_string(row.size()) + " vs " +
                           std::to_string(rows.front().size()) + " columns)");
    }
    rows.push_back(std::move(row));
  }
  const auto cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  }
  return m;
}

void save_report(const TrainReport& report, const fs::path& path) {
  auto out = open_out(path);
  out << to_json(report).dump(2) << '\n';
  close_checked(out, path);
}

TrainReport load_report(const fs::path& path) {
  auto in = open_in(path);
  try {
    return report_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw IoError("report '" + path.string() + "': " + e.what());
  }
}

json to_json(const TrainReport& r) {
  json epochs = json::array();
  for (const EpochRecord& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"l_rec", e.l_rec},
                      {"l_kl", e.l_kl},
                      {"l_total", e.l_total},
                      {"hr", e.hr},
                      {"weights", e.weights}});
  }
  json j = json::object();
  j["pretrain"] = {{"l_rec", r.pretrain_l_rec}};
  j["epochs"] = std::move(epochs);
  if (r.final) {
    j["final"] = {{"nmi", r.final->nmi}, {"ari", r.final->ari}, {"acc", r.final->acc}, {"f1", r.final->f1}};
  } else {
    j["final"] = nullptr;
  }
  j["warnings"] = r.warnings;
  return j;
}

TrainReport report_from_json(const json& j) {
  TrainReport r;
  r.pretrain_l_rec = j.at("pretrain").at("l_rec").get<std::vector<double>>();
  for (const json& e : j.at("epochs")) {
    EpochRecord rec;
    rec.epoch = e.at("epoch").get<int>();
    rec.l_rec = e.at("l_rec").get<double>();
    rec.l_kl = e.at("l_kl").get<double>();
    rec.l_total = e.at("l_total").get<double>();
    rec.hr = e.at("hr").get<std::vector<double>>();
    rec.weights = e.at("weights").get<std::vector<double>>();
    r.epochs.push_back(std::move(rec));
  }
  if (!j.at("final").is_null()) {
    const json& f = j.at("final");
    r.final = Metrics{f.at("nmi").get<double>(), f.at("ari").get<double>(), f.at("acc").get<double>(),
                      f.at("f1").get<double>()};
  }
  r.warnings = j.value("warnings", std::vector<std::string>{});
  return r;
}

}  // namespace ahgfc
