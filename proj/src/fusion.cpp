#include "ahgfc/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ahgfc {

namespace {

constexpr double kProbabilityFloor = 1e-12;
constexpr double kFusionTolerance = 1e-6;
constexpr int kFusionRounds = 50;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// dKL(P || Q(h)) / dh for the Student-t kernel with frozen centers.
Matrix kl_embedding_grad(const Matrix& p, const Matrix& q, const Matrix& h, const Matrix& centers) {
  const Eigen::Index n = h.rows();
  const Eigen::Index c = centers.rows();
  Matrix coeff(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      const double kernel = 1.0 / (1.0 + (h.row(i) - centers.row(j)).squaredNorm());
      coeff(i, j) = 2.0 * (p(i, j) - q(i, j)) * kernel;
    }
  }
  Matrix grad = coeff.rowwise().sum().asDiagonal() * h;
  grad.noalias() -= coeff * centers;
  return grad;
}

// Gradient of sum(grad_h .* H) w.r.t. the kernel, H the mixed LP/HP output.
Matrix kernel_grad(const ViewForward& vf, const Matrix& grad_h) {
  const Matrix& k = vf.kernel;
  Matrix gk = Matrix::Zero(k.rows(), k.cols());
  const int order = static_cast<int>(std::max(vf.lp_chain.size(), vf.hp_chain.size())) - 1;
  if (vf.lp_weight != 0.0) {
    Matrix g = vf.lp_weight * grad_h;
    for (int j = order; j >= 1; --j) {
      gk.noalias() += g * vf.lp_chain[static_cast<std::size_t>(j - 1)].transpose();
      if (j > 1) g = (k.transpose() * g).eval();
    }
  }
  if (vf.lp_weight != 1.0) {
    Matrix g = (1.0 - vf.lp_weight) * grad_h;
    for (int j = order; j >= 1; --j) {
      gk.noalias() -= g * vf.hp_chain[static_cast<std::size_t>(j - 1)].transpose();
      if (j > 1) g = (g - k.transpose() * g).eval();
    }
  }
  return gk;
}

}  // namespace

// ---------------------------------------------------------------------------

double evaluate_view(const Matrix& h_v, const Matrix& h_bar) {
  if (h_v.rows() != h_bar.rows() || h_v.cols() != h_bar.cols()) {
    throw DimensionError("evaluate_view: shape mismatch");
  }
  if (h_v.rows() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < h_v.rows(); ++i) {
    const double na = h_v.row(i).norm();
    const double nb = h_bar.row(i).norm();
    if (na == 0.0 || nb == 0.0) continue;
    total += h_v.row(i).dot(h_bar.row(i)) / (na * nb);
  }
  return total / static_cast<double>(h_v.rows());
}

Matrix weighted_sum(std::span<const Matrix> embeddings, std::span<const double> weights) {
  if (embeddings.empty() || embeddings.size() != weights.size()) {
    throw DimensionError("weighted_sum: need one weight per embedding");
  }
  Matrix out = weights[0] * embeddings[0];
  for (std::size_t v = 1; v < embeddings.size(); ++v) {
    if (embeddings[v].rows() != out.rows() || embeddings[v].cols() != out.cols()) {
      throw DimensionError("weighted_sum: embeddings differ in shape");
    }
    out += weights[v] * embeddings[v];
  }
  return out;
}

FusionResult fuse_views(std::span<const Matrix> embeddings, double rho, Warnings* warnings) {
  if (embeddings.empty()) throw DimensionError("fuse_views: need at least one view");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigError("fuse_views: rho must be finite and >= 0");
  const std::size_t n_views = embeddings.size();
  FusionResult out;
  out.weights.assign(n_views, 1.0 / static_cast<double>(n_views));
  out.consensus = weighted_sum(embeddings, out.weights);

  std::vector<double> eva(n_views);
  for (int round = 0; round < kFusionRounds; ++round) {
    out.rounds = round + 1;
    for (std::size_t v = 0; v < n_views; ++v) eva[v] = evaluate_view(embeddings[v], out.consensus);
    const double best = *std::max_element(eva.begin(), eva.end());
    if (!(best > 0.0)) {
      warn(warnings, "fuse_views: no view agrees with the consensus; using uniform weights");
      out.weights.assign(n_views, 1.0 / static_cast<double>(n_views));
      out.consensus = weighted_sum(embeddings, out.weights);
      out.fallback_uniform = true;
      return out;
    }
    std::vector<double> next(n_views);
    double sum = 0.0;
    for (std::size_t v = 0; v < n_views; ++v) {
      // Negative agreement gets zero weight: a negative base has no real power for fractional rho.
      next[v] = std::pow(std::max(eva[v], 0.0) / best, rho);
      sum += next[v];
    }
    double change = 0.0;
    for (std::size_t v = 0; v < n_views; ++v) {
      next[v] /= sum;
      change = std::max(change, std::abs(next[v] - out.weights[v]));
    }
    out.weights = std::move(next);
    out.consensus = weighted_sum(embeddings, out.weights);
    if (change < kFusionTolerance) break;
  }
  return out;
}

std::vector<double> update_hr(const MultiViewGraph& g, const OneHotLabels& pseudo) {
  std::vector<double> hr;
  hr.reserve(static_cast<std::size_t>(g.n_views()));
  for (const Matrix& a : g.adjacencies()) hr.push_back(homophily_ratio(a, pseudo));
  return hr;
}

// ---------------------------------------------------------------------------

Matrix soft_assignment(const Matrix& h, const Matrix& centers) {
  if (h.cols() != centers.cols()) throw DimensionError("soft_assignment: embedding and centers differ in width");
  if (!centers.allFinite()) throw NumericError("soft_assignment: non-finite cluster center");
  Matrix q(h.rows(), centers.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < centers.rows(); ++j) {
      q(i, j) = 1.0 / (1.0 + (h.row(i) - centers.row(j)).squaredNorm());
    }
    const double s = q.row(i).sum();
    if (s > 0.0 && std::isfinite(s)) {
      q.row(i) /= s;
    } else {
      q.row(i).setConstant(1.0 / static_cast<double>(centers.rows()));
    }
  }
  return q;
}

Matrix target_distribution(const Matrix& q, Warnings* warnings) {
  const Vector mass = q.colwise().sum().transpose();
  Matrix p = Matrix::Zero(q.rows(), q.cols());
  int dropped = 0;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (mass(j) > 0.0) {
      p.col(j) = q.col(j).array().square().matrix() / mass(j);
    } else {
      ++dropped;
    }
  }
  if (dropped > 0) {
    warn(warnings, "target_distribution: " + std::to_string(dropped) + " cluster(s) with zero mass left unsharpened");
  }
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double s = p.row(i).sum();
    if (s > 0.0) p.row(i) /= s;
  }
  return p;
}

double kl_divergence(const Matrix& p, const Matrix& q, Warnings* warnings) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) throw DimensionError("kl_divergence: shape mismatch");
  double total = 0.0;
  int floored = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p.data()[i];
    if (pi <= 0.0) continue;
    double qi = q.data()[i];
    if (qi < kProbabilityFloor) {
      qi = kProbabilityFloor;
      ++floored;
    }
    total += pi * std::log(pi / qi);
  }
  if (floored > 0) warn(warnings, "kl_divergence: " + std::to_string(floored) + " q entries floored at 1e-12");
  return std::max(total, 0.0);
}

double kl_loss(const Distributions& d, Warnings* warnings) {
  if (d.q_per_view.size() != d.p_per_view.size()) throw DimensionError("kl_loss: view count mismatch");
  double total = 0.0;
  for (const Matrix& q : d.q_per_view) total += kl_divergence(d.p_bar, q, warnings);
  for (std::size_t v = 0; v < d.q_per_view.size(); ++v) total += kl_divergence(d.p_per_view[v], d.q_per_view[v], warnings);
  total += kl_divergence(d.p_bar, d.q_bar, warnings);
  return total;
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (hr_refresh_interval < 1) throw ConfigError("train: hr_refresh_interval must be >= 1");
  const auto nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  if (!nonneg(rho)) throw ConfigError("train: rho must be finite and >= 0");
  if (!nonneg(gamma_rec)) throw ConfigError("train: gamma_rec must be finite and >= 0");
  if (!nonneg(gamma_kl)) throw ConfigError("train: gamma_kl must be finite and >= 0");
  filter.validate();
  if (encoder.epochs < 0) throw ConfigError("train: pretraining epochs must be >= 0");
  if (!(encoder.learning_rate > 0.0) || !std::isfinite(encoder.learning_rate)) {
    throw ConfigError("train: learning rate must be finite and > 0");
  }
  if (encoder.latent_dim < 1) throw ConfigError("train: latent_dim must be >= 1");
  if (encoder.hidden_dim < 0) throw ConfigError("train: hidden_dim must be >= 0");
  if (kmeans_restarts < 1) throw ConfigError("train: kmeans_restarts must be >= 1");
}

double total_loss(double rec, double kl, const TrainConfig& cfg) { return cfg.gamma_rec * rec + cfg.gamma_kl * kl; }

void ModelForward::set_hr(std::span<const double> hr, const FilterConfig& filter) {
  if (hr.size() != views.size()) throw DimensionError("set_hr: need one hr per view");
  for (std::size_t v = 0; v < views.size(); ++v) {
    FilterConfig cfg = filter;
    cfg.hr = hr[v];
    cfg.validate();
    ViewForward& vf = views[v];
    vf.lp_weight = cfg.low_pass_weight();
    vf.h = Matrix::Zero(vf.kernel.rows(), (vf.lp_chain.empty() ? vf.hp_chain : vf.lp_chain).front().cols());
    if (vf.lp_weight != 0.0) vf.h += vf.lp_weight * vf.lp_chain.back();
    if (vf.lp_weight != 1.0) vf.h += (1.0 - vf.lp_weight) * vf.hp_chain.back();
  }
}

ModelForward forward_model(const MultiViewGraph& g, const std::vector<ViewEncoders>& model, std::span<const double> hr,
                           const TrainConfig& cfg, Warnings* warnings) {
  if (static_cast<int>(model.size()) != g.n_views()) throw DimensionError("forward_model: one encoder pair per view");
  const FilterConfig& filter = cfg.filter;
  ModelForward f;
  f.views.reserve(model.size());
  for (int v = 0; v < g.n_views(); ++v) {
    const ViewEncoders& enc = model[static_cast<std::size_t>(v)];
    AutoEncoderPass xp(enc.x, g.features());
    AutoEncoderPass ap(enc.a, g.adjacency(v));
    f.l_rec += xp.loss(ReconLoss::mse) + ap.loss(cfg.encoder.a_loss);
    Matrix gram;
    Matrix kernel;
    if (filter.matrix_source == MatrixSource::joint_aggregation) {
      gram = joint_aggregation_gram(EmbeddingPair{xp.latent(), ap.latent()});
      kernel = row_stochastic_from_gram(gram, warnings);
    } else {
      kernel = random_walk_normalize(g.adjacency(v), false).a_rw;
    }
    ViewForward vf{std::move(xp), std::move(ap), std::move(gram), std::move(kernel), {}, {}, 0.5, {}};
    if (filter.family != FilterFamily::high_pass) {
      vf.lp_chain.push_back(g.features());
      for (int j = 0; j < filter.order; ++j) vf.lp_chain.push_back(vf.kernel * vf.lp_chain.back());
    }
    if (filter.family != FilterFamily::low_pass) {
      vf.hp_chain.push_back(g.features());
      for (int j = 0; j < filter.order; ++j) {
        const Matrix& prev = vf.hp_chain.back();
        vf.hp_chain.push_back(prev - vf.kernel * prev);
      }
    }
    f.views.push_back(std::move(vf));
  }
  f.set_hr(hr, filter);
  return f;
}

Matrix cluster_means(const Matrix& h, const OneHotLabels& labels) {
  if (labels.n_nodes() != h.rows()) throw DimensionError("cluster_means: label count != row count");
  const Matrix& p = labels.matrix();
  Matrix means = p.transpose() * h;
  const Vector counts = p.colwise().sum().transpose();
  const Eigen::RowVectorXd overall = h.colwise().mean();
  for (Eigen::Index j = 0; j < means.rows(); ++j) {
    if (counts(j) > 0.0) {
      means.row(j) /= counts(j);
    } else {
      means.row(j) = overall;
    }
  }
  return means;
}

EpochTargets make_targets(const ModelForward& f, const OneHotLabels& pseudo, const TrainConfig& cfg,
                          Warnings* warnings) {
  std::vector<Matrix> hs;
  hs.reserve(f.views.size());
  for (const ViewForward& vf : f.views) hs.push_back(vf.h);
  FusionResult fusion = fuse_views(hs, cfg.rho, warnings);

  EpochTargets t;
  t.weights = fusion.weights;
  for (const Matrix& h : hs) {
    t.view_centers.push_back(cluster_means(h, pseudo));
    t.p_per_view.push_back(target_distribution(soft_assignment(h, t.view_centers.back()), warnings));
  }
  t.consensus_centers = cluster_means(fusion.consensus, pseudo);
  t.p_bar = target_distribution(soft_assignment(fusion.consensus, t.consensus_centers), warnings);
  return t;
}

Distributions distributions(const ModelForward& f, const EpochTargets& t) {
  Distributions d;
  std::vector<Matrix> hs;
  for (std::size_t v = 0; v < f.views.size(); ++v) {
    hs.push_back(f.views[v].h);
    d.q_per_view.push_back(soft_assignment(f.views[v].h, t.view_centers[v]));
  }
  d.p_per_view = t.p_per_view;
  d.q_bar = soft_assignment(weighted_sum(hs, t.weights), t.consensus_centers);
  d.p_bar = t.p_bar;
  d.view_centers = t.view_centers;
  d.consensus_centers = t.consensus_centers;
  return d;
}

ObjectiveTerms objective_terms(const ModelForward& f, const EpochTargets& t, const TrainConfig& cfg) {
  ObjectiveTerms terms;
  terms.l_rec = f.l_rec;
  // gamma_kl = 0 disables the term outright; the report then records 0.
  if (cfg.gamma_kl != 0.0) terms.l_kl = kl_loss(distributions(f, t));
  terms.total = total_loss(terms.l_rec, terms.l_kl, cfg);
  return terms;
}

std::vector<ViewEncoders> objective_gradient(const MultiViewGraph& g, const ModelForward& f, const EpochTargets& t,
                                             const TrainConfig& cfg) {
  const std::size_t n_views = f.views.size();
  const bool kl_reaches_encoders = cfg.gamma_kl != 0.0 && cfg.filter.matrix_source == MatrixSource::joint_aggregation &&
                                   !cfg.detach_for(g.n_nodes());

  std::vector<Matrix> grad_h(n_views);
  if (kl_reaches_encoders) {
    const Distributions d = distributions(f, t);
    std::vector<Matrix> hs;
    for (const ViewForward& vf : f.views) hs.push_back(vf.h);
    const Matrix h_bar = weighted_sum(hs, t.weights);
    const Matrix grad_bar = kl_embedding_grad(d.p_bar, d.q_bar, h_bar, d.consensus_centers);
    for (std::size_t v = 0; v < n_views; ++v) {
      grad_h[v] = kl_embedding_grad(d.p_bar, d.q_per_view[v], hs[v], d.view_centers[v]) +
                  kl_embedding_grad(d.p_per_view[v], d.q_per_view[v], hs[v], d.view_centers[v]) +
                  t.weights[v] * grad_bar;
      grad_h[v] *= cfg.gamma_kl;
    }
  }

  std::vector<ViewEncoders> grads;
  grads.reserve(n_views);
  for (std::size_t v = 0; v < n_views; ++v) {
    const ViewForward& vf = f.views[v];
    if (!kl_reaches_encoders) {
      grads.push_back({vf.x_pass.backward(ReconLoss::mse, cfg.gamma_rec, nullptr),
                       vf.a_pass.backward(cfg.encoder.a_loss, cfg.gamma_rec, nullptr)});
      continue;
    }
    // H -> kernel -> clamped, jittered Gram -> S = Z_a (Z_x^T Z_x) Z_a^T.
    const Matrix gk = kernel_grad(vf, grad_h[v]);
    const Matrix& s = vf.gram;
    const Vector row_sums = s.cwiseMax(0.0).rowwise().sum().array() + kJointEpsilon;
    const Vector inner = (gk.array() * vf.kernel.array()).rowwise().sum();
    Matrix ds = gk.colwise() - inner;
    ds = (ds.array().colwise() / row_sums.array()).matrix();
    ds = (ds.array() * (s.array() > 0.0).cast<double>()).matrix();
    const Matrix sym = 0.5 * (ds + ds.transpose());

    const Matrix& z_x = vf.x_pass.latent();
    const Matrix& z_a = vf.a_pass.latent();
    const Matrix metric = z_x.transpose() * z_x;
    const Matrix sym_za = sym * z_a;
    const Matrix grad_za = 2.0 * sym_za * metric;
    const Matrix grad_metric = z_a.transpose() * sym_za;
    const Matrix grad_zx = 2.0 * z_x * grad_metric;

    grads.push_back({vf.x_pass.backward(ReconLoss::mse, cfg.gamma_rec, &grad_zx),
                     vf.a_pass.backward(cfg.encoder.a_loss, cfg.gamma_rec, &grad_za)});
  }
  return grads;
}

// ---------------------------------------------------------------------------

std::vector<TrainedEncoders> pretrain(const MultiViewGraph& g, const TrainConfig& cfg) {
  std::vector<TrainedEncoders> out;
  for (int v = 0; v < g.n_views(); ++v) {
    EncoderConfig enc = cfg.encoder;
    enc.seed = derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(v));
    out.push_back(train_autoencoders(g.features(), g.adjacency(v), enc));
  }
  return out;
}

TrainResult train(const MultiViewGraph& g, const TrainConfig& cfg) {
  cfg.validate();
  const int c = g.n_clusters();
  const std::size_t n_views = static_cast<std::size_t>(g.n_views());
  TrainResult result;
  TrainReport& report = result.report;
  Warnings& warnings = report.warnings;

  // (1) per-view autoencoder pretraining on L_Rec
  std::vector<TrainedEncoders> pre = pretrain(g, cfg);
  report.pretrain_l_rec.assign(static_cast<std::size_t>(cfg.encoder.epochs), 0.0);
  std::vector<ViewEncoders> model;
  for (TrainedEncoders& t : pre) {
    for (std::size_t e = 0; e < t.loss_history.size(); ++e) report.pretrain_l_rec[e] += t.loss_history[e];
    model.push_back({std::move(t.params_x), std::move(t.params_a)});
  }

  // Bootstrap: equal-weight hybrid, then the first pseudo-labels.
  std::vector<double> hr(n_views, 0.5);
  const KMeansOptions cold{300, cfg.kmeans_restarts, 5};
  const KMeansOptions warm{300, 1, 5};
  std::uint64_t kmeans_stream = 0;
  const auto consensus_of = [&](const ModelForward& f) {
    std::vector<Matrix> hs;
    for (const ViewForward& vf : f.views) hs.push_back(vf.h);
    return fuse_views(hs, cfg.rho, &warnings);
  };

  ModelForward fwd = forward_model(g, model, hr, cfg, &warnings);
  ClusterAssignment km = kmeans(consensus_of(fwd).consensus, c, derive_seed(cfg.seed, kmeans_stream++), std::nullopt, cold);
  OneHotLabels pseudo(km.labels, c);
  Matrix centers = km.centers;
  hr = update_hr(g, pseudo);
  fwd.set_hr(hr, cfg.filter);

  // (2) joint training
  std::vector<AdamOptimizer> opt_x;
  std::vector<AdamOptimizer> opt_a;
  std::vector<std::vector<double>> flat_x;
  std::vector<std::vector<double>> flat_a;
  for (const ViewEncoders& m : model) {
    opt_x.emplace_back(m.x.parameter_count(), cfg.encoder.learning_rate);
    opt_a.emplace_back(m.a.parameter_count(), cfg.encoder.learning_rate);
    flat_x.push_back(flatten(m.x));
    flat_a.push_back(flatten(m.a));
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch > 0) fwd = forward_model(g, model, hr, cfg, &warnings);
    if (epoch > 0 && epoch % cfg.hr_refresh_interval == 0) {
      km = kmeans(consensus_of(fwd).consensus, c, derive_seed(cfg.seed, kmeans_stream++), centers, warm);
      pseudo = OneHotLabels(km.labels, c);
      centers = km.centers;
      hr = update_hr(g, pseudo);
      fwd.set_hr(hr, cfg.filter);
    }
    const EpochTargets targets = make_targets(fwd, pseudo, cfg, &warnings);
    const ObjectiveTerms terms = objective_terms(fwd, targets, cfg);
    if (!std::isfinite(terms.total)) {
      throw NumericError("train: loss diverged at epoch " + std::to_string(epoch), epoch - 1);
    }
    report.epochs.push_back({epoch, terms.l_rec, terms.l_kl, terms.total, hr, targets.weights});

    const std::vector<ViewEncoders> grads = objective_gradient(g, fwd, targets, cfg);
    for (std::size_t v = 0; v < n_views; ++v) {
      const std::vector<double> gx = flatten(grads[v].x);
      const std::vector<double> ga = flatten(grads[v].a);
      const auto finite = [](const std::vector<double>& xs) {
        return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
      };
      if (!finite(gx) || !finite(ga)) {
        throw NumericError("train: non-finite gradient at epoch " + std::to_string(epoch), epoch - 1);
      }
      opt_x[v].step(flat_x[v], gx);
      opt_a[v].step(flat_a[v], ga);
      unflatten(flat_x[v], model[v].x);
      unflatten(flat_a[v], model[v].a);
    }
  }

  // (3) final clustering of the consensus embedding
  if (cfg.epochs > 0) fwd = forward_model(g, model, hr, cfg, &warnings);
  const FusionResult fusion = consensus_of(fwd);
  const ClusterAssignment final_km = kmeans(fusion.consensus, c, derive_seed(cfg.seed, 1000), std::nullopt, cold);

  result.consensus = fusion.consensus;
  result.weights = fusion.weights;
  result.predicted = final_km.labels;
  result.hr = hr;
  if (g.labels()) report.final = evaluate_clustering(result.predicted, *g.labels(), &warnings);
  // Collapse repeated notes from the epoch loop.
  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
  result.model = std::move(model);
  return result;
}

}  // namespace ahgfc
