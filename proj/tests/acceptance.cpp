// Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "ahgfc/cli.hpp"
#include "ahgfc/clustering.hpp"
#include "ahgfc/dataset_io.hpp"
#include "ahgfc/filterbank.hpp"
#include "ahgfc/fusion.hpp"
#include "ahgfc/spectral.hpp"
#include "gradient_check.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace ahgfc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Class-mean separation of the synthetic features (mean mu * e_class, unit noise).
constexpr double kMu = 3.0;
// Schedule for the 15 seeded runs of the ablation comparisons.
constexpr int kAblationPretrainEpochs = 50;
constexpr int kAblationEpochs = 50;
constexpr int kSeeds = 5;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out + "]";
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

SyntheticSpec homophilous(std::uint64_t seed) {
  SyntheticSpec s;
  s.name = "homophilous";
  s.n_nodes = 1000;
  s.n_clusters = 4;
  s.n_views = 2;
  s.p_in = {0.1, 0.1};
  s.p_out = {0.005, 0.005};
  s.n_features = 16;
  s.mu = kMu;
  s.sigma = 1.0;
  s.seed = seed;
  return s;
}

SyntheticSpec heterophilous(std::uint64_t seed) {
  SyntheticSpec s = homophilous(seed);
  s.name = "heterophilous";
  s.p_in = {0.005, 0.005};
  s.p_out = {0.1, 0.1};
  return s;
}

double run_acc(const MultiViewGraph& g, TrainConfig cfg) {
  return train(g, cfg).report.final->acc;
}

Outcome ac1() {
  const SyntheticSpec spec = homophilous(1);
  const MultiViewGraph g = generate_synthetic(spec);
  TrainConfig cfg;
  cfg.seed = 1;
  const auto t0 = Clock::now();
  const TrainResult r = train(g, cfg);
  const double elapsed = seconds_since(t0);
  const std::vector<double> truth = true_homophily_report(g);
  double hr_err = 0.0;
  for (std::size_t v = 0; v < truth.size(); ++v) hr_err = std::max(hr_err, std::abs(r.hr[v] - truth[v]));
  const double acc = r.report.final->acc;
  return {acc >= 0.90 && hr_err <= 0.1 && elapsed < 300.0,
          "ACC=" + fmt(acc) + " max|hr-true|=" + fmt(hr_err) + " runtime=" + fmt(elapsed) + "s"};
}

struct AblationAccs {
  std::vector<double> full, low_pass, raw;
};

AblationAccs ablation_runs() {
  AblationAccs a;
  for (int s = 1; s <= kSeeds; ++s) {
    const MultiViewGraph g = generate_synthetic(heterophilous(static_cast<std::uint64_t>(s)));
    TrainConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.epochs = kAblationEpochs;
    cfg.encoder.epochs = kAblationPretrainEpochs;
    a.full.push_back(run_acc(g, cfg));
    TrainConfig lp = cfg;
    apply_variant(lp, Variant::low_pass_only);
    a.low_pass.push_back(run_acc(g, lp));
    TrainConfig raw = cfg;
    apply_variant(raw, Variant::raw_adjacency);
    a.raw.push_back(run_acc(g, raw));
  }
  return a;
}

Outcome ac2(const AblationAccs& a) {
  const double full = median(a.full), lp = median(a.low_pass);
  return {full - lp >= 0.10, "median ACC default=" + fmt(full) + " low_pass_only=" + fmt(lp) +
                                 " per seed default=" + fmt_list(a.full) + " low_pass_only=" + fmt_list(a.low_pass)};
}

Outcome ac3(const AblationAccs& a) {
  const double full = median(a.full), lp = median(a.low_pass), raw = median(a.raw);
  return {full > raw && full > lp,
          "median ACC default=" + fmt(full) + " raw_adjacency=" + fmt(raw) + " low_pass_only=" + fmt(lp) +
              " per seed raw_adjacency=" + fmt_list(a.raw)};
}

Outcome ac4() {
  int passed = 0;
  std::string detail;
  for (int s = 1; s <= kSeeds; ++s) {
    const MultiViewGraph g = generate_synthetic(homophilous(static_cast<std::uint64_t>(s)));
    TrainConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    const std::vector<TrainedEncoders> trained = pretrain(g, cfg);
    bool ok = true;
    for (int v = 0; v < g.n_views(); ++v) {
      const SpectraComparison c = compare_spectra(g, v, trained[static_cast<std::size_t>(v)].embeddings);
      ok = ok && c.joint.summary.largest_gap >= c.adjacency.summary.largest_gap;
      detail += " s" + std::to_string(s) + "v" + std::to_string(v) + ":" + fmt(c.joint.summary.largest_gap) + "/" +
                fmt(c.adjacency.summary.largest_gap);
    }
    passed += ok;
  }
  return {passed >= 4, std::to_string(passed) + "/5 seeds; gap s_rw/a_rw" + detail};
}

Outcome ac5() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5);

  // encoders alone, every parameter
  double enc_err = 0.0;
  for (ReconLoss loss : {ReconLoss::mse, ReconLoss::bce}) {
    const AutoEncoderParams p = make_autoencoder(6, 5, 3, Activation::tanh, 2);
    Matrix batch = testing::random_matrix(rng, 8, 6);
    if (loss == ReconLoss::bce) batch = (batch.array() > 0.0).cast<double>().matrix();
    const std::vector<double> analytic = flatten(gradient(p, loss, batch));
    std::vector<std::size_t> idx(analytic.size());
    std::iota(idx.begin(), idx.end(), 0);
    const auto f = [&](const std::vector<double>& theta) {
      AutoEncoderParams q = p;
      unflatten(theta, q);
      return reconstruction_error(decode(q, encode(q, batch)), batch, loss);
    };
    enc_err = std::max(enc_err, oracle::max_fd_error(flatten(p), analytic, idx, f));
  }

  // end to end on 20 nodes, S not detached, 10 sampled parameters
  SyntheticSpec s;
  s.n_nodes = 20;
  s.n_clusters = 2;
  s.n_views = 2;
  s.p_in = {0.5, 0.1};
  s.p_out = {0.1, 0.4};
  s.n_features = 4;
  s.mu = 1.5;
  s.seed = 5;
  const MultiViewGraph g = generate_synthetic(s);
  TrainConfig cfg;
  cfg.encoder.latent_dim = 3;
  cfg.encoder.hidden_dim = 6;
  cfg.encoder.epochs = 5;
  cfg.detach_s = false;
  cfg.gamma_kl = 0.5;
  cfg.seed = 5;
  std::vector<ViewEncoders> model;
  for (TrainedEncoders& t : pretrain(g, cfg)) model.push_back({t.params_x, t.params_a});
  const std::vector<double> hr{0.7, 0.35};
  const ModelForward fwd = forward_model(g, model, hr, cfg);
  std::vector<Matrix> hs;
  for (const ViewForward& vf : fwd.views) hs.push_back(vf.h);
  const OneHotLabels pseudo = pseudo_labels(fuse_views(hs, cfg.rho).consensus, 2, 1);
  const EpochTargets targets = make_targets(fwd, pseudo, cfg);
  const std::vector<double> analytic = testing::flatten_model(objective_gradient(g, fwd, targets, cfg));
  const auto objective = [&](const std::vector<double>& theta) {
    std::vector<ViewEncoders> m = model;
    testing::unflatten_model(theta, m);
    return objective_terms(forward_model(g, m, hr, cfg), targets, cfg).total;
  };
  const std::vector<std::size_t> idx = testing::smooth_sample(g, model, hr, cfg, 10, rng);
  const double e2e_err = oracle::max_fd_error(testing::flatten_model(model), analytic, idx, objective);

  const double elapsed = seconds_since(t0);
  return {enc_err < 1e-4 && idx.size() == 10 && e2e_err < 1e-3 && elapsed < 30.0,
          "encoder rel err=" + fmt(enc_err) + " end-to-end rel err=" + fmt(e2e_err) + " runtime=" + fmt(elapsed) + "s"};
}

Outcome ac6() {
  std::mt19937_64 rng(6);
  double worst = 0.0;
  bool negative_ari = false;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 11);
    const std::vector<int> pred = oracle::random_labels(rng, n, 1 + static_cast<int>(rng() % 4));
    const std::vector<int> truth = oracle::random_labels(rng, n, 1 + static_cast<int>(rng() % 4));
    const oracle::MatchScores m = oracle::best_match(pred, truth);
    const Metrics got = evaluate_clustering(pred, truth);
    worst = std::max({worst, std::abs(got.acc - m.acc), std::abs(got.f1 - m.f1),
                      std::abs(got.ari - oracle::ari(pred, truth)), std::abs(got.nmi - oracle::nmi(pred, truth))});
    negative_ari = negative_ari || got.ari < 0.0;
  }
  return {worst <= 1e-12 && negative_ari,
          "max deviation=" + fmt(worst) + (negative_ari ? " (negative ARI seen)" : " (no negative ARI)")};
}

Outcome ac7() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double linear = 0.0, constant = 0.0, materialized = 0.0;
  for (int n : {5, 12, 30}) {
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = u(rng);
    k = (k.array().colwise() / k.rowwise().sum().array()).matrix();
    const Matrix x = testing::random_matrix(rng, n, 4);
    for (int order : {1, 2, 3}) {
      FilterConfig c;
      c.order = order;
      c.hr = 1.0;
      const Matrix lp = apply_filter(k, x, c);
      const Matrix lp1 = apply_filter(k, Matrix::Ones(n, 1), c);
      c.hr = 0.0;
      const Matrix hp = apply_filter(k, x, c);
      const Matrix hp1 = apply_filter(k, Matrix::Ones(n, 1), c);
      constant = std::max({constant, (lp1 - Matrix::Ones(n, 1)).cwiseAbs().maxCoeff(), hp1.cwiseAbs().maxCoeff()});
      for (double hr : {0.0, 0.2, 0.5, 0.9, 1.0}) {
        c.hr = hr;
        const Matrix h = apply_filter(k, x, c);
        linear = std::max(linear, (h - (hr * lp + (1.0 - hr) * hp)).cwiseAbs().maxCoeff());
        materialized = std::max(materialized, (h - oracle::materialized_filter(k, x, hr, order)).cwiseAbs().maxCoeff());
      }
    }
  }
  return {linear < 1e-10 && constant < 1e-8 && materialized < 1e-9,
          "hr-linearity=" + fmt(linear) + " constant-vector=" + fmt(constant) + " materialized=" + fmt(materialized)};
}

Outcome ac8() {
  const std::vector<std::pair<std::string, std::vector<double>>> fixtures{
      {"acm_like", {0.82, 0.64}}, {"texas_like", {0.09, 0.09}}, {"chameleon_like", {0.23, 0.23}}};
  double worst = 0.0;
  for (const auto& [name, expected] : fixtures) {
    const MultiViewGraph g = load_dataset(testing::fixture(name));
    const std::vector<double> hr = update_hr(g, OneHotLabels(*g.labels(), g.n_clusters()));
    for (std::size_t v = 0; v < expected.size(); ++v) worst = std::max(worst, std::abs(hr[v] - expected[v]));
  }
  return {worst <= 1e-9, "max |hr - constructed| over 3 fixtures=" + fmt(worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome ac9() {
  const fs::path dir = testing::scratch_dir("acceptance_determinism");
  RunConfig cfg;
  SyntheticSpec s = homophilous(9);
  s.n_nodes = 200;
  cfg.synthetic = s;
  cfg.train.seed = 9;
  cfg.train.epochs = 20;
  cfg.train.encoder.epochs = 20;
  std::ostringstream out, err;
  cfg.out_dir = dir / "a";
  const int a = cmd_run(cfg, out, err);
  cfg.out_dir = dir / "b";
  const int b = cmd_run(cfg, out, err);
  const std::string ra = slurp(dir / "a" / "report.json");
  const bool same = a == 0 && b == 0 && !ra.empty() && ra == slurp(dir / "b" / "report.json");
  return {same, same ? "reports byte-identical (" + std::to_string(ra.size()) + " bytes)" : "reports differ: " + err.str()};
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](const char* id, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << id << (o.pass ? " PASS " : " FAIL ") << o.detail << std::endl;
  };

  report("AC-1", ac1);
  AblationAccs ablations;
  bool ablations_ok = true;
  std::string ablation_error;
  try {
    ablations = ablation_runs();
  } catch (const std::exception& e) {
    ablations_ok = false;
    ablation_error = e.what();
  }
  const auto needs_ablations = [&](Outcome (*f)(const AblationAccs&)) {
    return [&, f]() -> Outcome {
      if (!ablations_ok) return {false, "exception: " + ablation_error};
      return f(ablations);
    };
  };
  report("AC-2", needs_ablations(ac2));
  report("AC-3", needs_ablations(ac3));
  report("AC-4", ac4);
  report("AC-5", ac5);
  report("AC-6", ac6);
  report("AC-7", ac7);
  report("AC-8", ac8);
  report("AC-9", ac9);
  return failures == 0 ? 0 : 1;
}
