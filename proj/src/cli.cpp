#include "ahgfc/cli.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <utility>

#include <CLI11.hpp>

#include "ahgfc/clustering.hpp"
#include "ahgfc/spectral.hpp"

namespace ahgfc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class E, std::size_t N>
E enum_from(const std::array<std::pair<const char*, E>, N>& table, const std::string& name, const char* what) {
  for (const auto& [key, value] : table) {
    if (name == key) return value;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + name + "'");
}

template <class E, std::size_t N>
const char* enum_name(const std::array<std::pair<const char*, E>, N>& table, E value) {
  for (const auto& [key, v] : table) {
    if (v == value) return key;
  }
  return "?";
}

constexpr std::array<std::pair<const char*, Variant>, 5> kVariants{{
    {"no_rec", Variant::no_rec},
    {"no_kl", Variant::no_kl},
    {"raw_adjacency", Variant::raw_adjacency},
    {"low_pass_only", Variant::low_pass_only},
    {"raw_adjacency_low_pass", Variant::raw_adjacency_low_pass},
}};
constexpr std::array<std::pair<const char*, FilterFamily>, 4> kFamilies{{
    {"adaptive_hybrid", FilterFamily::adaptive_hybrid},
    {"low_pass", FilterFamily::low_pass},
    {"high_pass", FilterFamily::high_pass},
    {"fixed_mix", FilterFamily::fixed_mix},
}};
constexpr std::array<std::pair<const char*, MatrixSource>, 2> kSources{{
    {"joint_aggregation", MatrixSource::joint_aggregation},
    {"raw_adjacency", MatrixSource::raw_adjacency},
}};
constexpr std::array<std::pair<const char*, Activation>, 3> kActivations{{
    {"linear", Activation::linear},
    {"tanh", Activation::tanh},
    {"relu", Activation::relu},
}};
constexpr std::array<std::pair<const char*, ReconLoss>, 2> kLosses{{
    {"mse", ReconLoss::mse},
    {"bce", ReconLoss::bce},
}};

const std::set<std::string> kConfigKeys{
    "manifest",      "synthetic",   "out",         "variant",        "seed",          "epochs",
    "pretrain_epochs", "hr_refresh_interval", "rho", "gamma_rec",    "gamma_kl",      "order",
    "family",        "alpha",       "matrix_source", "learning_rate", "latent_dim",   "hidden_dim",
    "activation",    "a_loss",      "detach_s",    "kmeans_restarts",
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

// Maps library exceptions onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const NumericError& e) {
    err << "error: numeric divergence: " << e.what() << " (last finite epoch " << e.epoch() << ")\n";
    return 2;
  } catch (const json::exception& e) {
    err << "error: config: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int train_and_write(const RunConfig& cfg, std::ostream& out) {
  Warnings load_notes;
  const MultiViewGraph g = load_graph(cfg, &load_notes);
  TrainResult result = train(g, cfg.train);
  result.report.warnings.insert(result.report.warnings.begin(), load_notes.begin(), load_notes.end());

  prepare_out_dir(cfg.out_dir);
  save_report(result.report, cfg.out_dir / "report.json");
  save_embedding(result.consensus, cfg.out_dir / "embedding.csv");
  if (result.report.final) out << metrics_line(*result.report.final) << '\n';
  return 0;
}

}  // namespace

Variant parse_variant(const std::string& name) { return enum_from(kVariants, name, "variant"); }

const char* to_string(Variant v) { return enum_name(kVariants, v); }

void apply_variant(TrainConfig& cfg, Variant v) {
  switch (v) {
    case Variant::no_rec:
      cfg.gamma_rec = 0.0;
      break;
    case Variant::no_kl:
      cfg.gamma_kl = 0.0;
      break;
    case Variant::raw_adjacency:
      cfg.filter.matrix_source = MatrixSource::raw_adjacency;
      break;
    case Variant::low_pass_only:
      cfg.filter.family = FilterFamily::low_pass;
      break;
    case Variant::raw_adjacency_low_pass:
      cfg.filter.matrix_source = MatrixSource::raw_adjacency;
      cfg.filter.family = FilterFamily::low_pass;
      break;
  }
}

void RunConfig::validate() const {
  if (manifest.has_value() == synthetic.has_value()) {
    throw ConfigError("config: exactly one of 'manifest' and 'synthetic' is required");
  }
  if (synthetic) synthetic->validate();
  if (out_dir.empty()) throw ConfigError("config: empty output directory");
  train.validate();
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!kConfigKeys.count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }
  RunConfig cfg;
  try {
    if (j.contains("manifest")) {
      fs::path p = j.at("manifest").get<std::string>();
      cfg.manifest = p.is_relative() ? base_dir / p : p;
    }
    if (j.contains("synthetic")) cfg.synthetic = synthetic_spec_from_json(j.at("synthetic"));
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("variant")) cfg.variant = parse_variant(j.at("variant").get<std::string>());

    TrainConfig& t = cfg.train;
    t.seed = j.value("seed", t.seed);
    t.epochs = j.value("epochs", t.epochs);
    t.encoder.epochs = j.value("pretrain_epochs", t.encoder.epochs);
    t.hr_refresh_interval = j.value("hr_refresh_interval", t.hr_refresh_interval);
    t.rho = j.value("rho", t.rho);
    t.gamma_rec = j.value("gamma_rec", t.gamma_rec);
    t.gamma_kl = j.value("gamma_kl", t.gamma_kl);
    t.filter.order = j.value("order", t.filter.order);
    t.filter.alpha = j.value("alpha", t.filter.alpha);
    if (j.contains("family")) t.filter.family = enum_from(kFamilies, j.at("family").get<std::string>(), "family");
    if (j.contains("matrix_source")) {
      t.filter.matrix_source = enum_from(kSources, j.at("matrix_source").get<std::string>(), "matrix_source");
    }
    t.encoder.learning_rate = j.value("learning_rate", t.encoder.learning_rate);
    t.encoder.latent_dim = j.value("latent_dim", t.encoder.latent_dim);
    t.encoder.hidden_dim = j.value("hidden_dim", t.encoder.hidden_dim);
    if (j.contains("activation")) {
      t.encoder.activation = enum_from(kActivations, j.at("activation").get<std::string>(), "activation");
    }
    if (j.contains("a_loss")) t.encoder.a_loss = enum_from(kLosses, j.at("a_loss").get<std::string>(), "a_loss");
    if (j.contains("detach_s") && !j.at("detach_s").is_null()) t.detach_s = j.at("detach_s").get<bool>();
    t.kmeans_restarts = j.value("kmeans_restarts", t.kmeans_restarts);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  json j{{"out", cfg.out_dir.string()},
         {"seed", t.seed},
         {"epochs", t.epochs},
         {"pretrain_epochs", t.encoder.epochs},
         {"hr_refresh_interval", t.hr_refresh_interval},
         {"rho", t.rho},
         {"gamma_rec", t.gamma_rec},
         {"gamma_kl", t.gamma_kl},
         {"order", t.filter.order},
         {"family", enum_name(kFamilies, t.filter.family)},
         {"alpha", t.filter.alpha},
         {"matrix_source", enum_name(kSources, t.filter.matrix_source)},
         {"learning_rate", t.encoder.learning_rate},
         {"latent_dim", t.encoder.latent_dim},
         {"hidden_dim", t.encoder.hidden_dim},
         {"activation", enum_name(kActivations, t.encoder.activation)},
         {"a_loss", enum_name(kLosses, t.encoder.a_loss)},
         {"kmeans_restarts", t.kmeans_restarts}};
  j["detach_s"] = t.detach_s ? json(*t.detach_s) : json(nullptr);
  if (cfg.manifest) j["manifest"] = cfg.manifest->string();
  if (cfg.synthetic) j["synthetic"] = to_json(*cfg.synthetic);
  if (cfg.variant) j["variant"] = to_string(*cfg.variant);
  return j;
}

MultiViewGraph load_graph(const RunConfig& cfg, Warnings* warnings) {
  if (cfg.manifest) return load_dataset(*cfg.manifest, warnings);
  if (cfg.synthetic) return generate_synthetic(*cfg.synthetic);
  throw ConfigError("config: no data source");
}

std::string metrics_line(const Metrics& m) {
  return "NMI=" + format_double(m.nmi) + " ARI=" + format_double(m.ari) + " ACC=" + format_double(m.acc) +
         " F1=" + format_double(m.f1);
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    return train_and_write(cfg, out);
  });
}

int cmd_ablate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!cfg.variant) throw ConfigError("ablate: --variant is required");
    RunConfig ablated = cfg;
    apply_variant(ablated.train, *cfg.variant);
    ablated.validate();
    return train_and_write(ablated, out);
  });
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    const MultiViewGraph g = load_graph(cfg);
    const std::vector<TrainedEncoders> trained = pretrain(g, cfg.train);
    std::vector<SpectraComparison> spectra;
    for (int v = 0; v < g.n_views(); ++v) {
      spectra.push_back(compare_spectra(g, v, trained[static_cast<std::size_t>(v)].embeddings));
    }

    prepare_out_dir(cfg.out_dir);
    json summary = json::array();
    for (int v = 0; v < g.n_views(); ++v) {
      const SpectraComparison& s = spectra[static_cast<std::size_t>(v)];
      const std::string stem = "spectrum_view" + std::to_string(v);
      save_spectrum_csv(s.adjacency, cfg.out_dir / (stem + "_adjacency_rw.csv"));
      save_spectrum_csv(s.joint, cfg.out_dir / (stem + "_joint_aggregation_rw.csv"));
      summary.push_back({{"view", v}, {"adjacency_rw", to_json(s.adjacency)}, {"joint_aggregation_rw", to_json(s.joint)}});
      out << "view=" << v << " gap_adjacency_rw=" << format_double(s.adjacency.summary.largest_gap)
          << " gap_joint_aggregation_rw=" << format_double(s.joint.summary.largest_gap) << '\n';
    }
    write_text(cfg.out_dir / "spectrum_summary.json", summary.dump(2) + "\n");
    return 0;
  });
}

int cmd_synth(const SyntheticSpec& spec, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    spec.validate();
    if (out_dir.empty()) throw ConfigError("synth: empty output directory");
    const MultiViewGraph g = generate_synthetic(spec);
    prepare_out_dir(out_dir);
    const fs::path manifest = save_dataset(g, spec.name, out_dir);
    out << manifest.string() << '\n';
    return 0;
  });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive hybrid graph filtering for multi-view graph clustering"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    int epochs = 0;
    int order = 0;
    double rho = 0.0;
    double gamma_rec = 0.0;
    double gamma_kl = 0.0;
    std::string variant;
  } flags;
  struct Options {
    CLI::Option* seed;
    CLI::Option* out;
    CLI::Option* epochs;
    CLI::Option* order;
    CLI::Option* rho;
    CLI::Option* gamma_rec;
    CLI::Option* gamma_kl;
    CLI::Option* variant;
  };
  std::map<CLI::App*, Options> options;

  const auto add_common = [&](CLI::App* sub, bool training_flags) {
    Options o{};
    sub->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
    o.seed = sub->add_option("--seed", flags.seed, "random seed");
    o.out = sub->add_option("--out", flags.out, "output directory");
    if (training_flags) {
      o.epochs = sub->add_option("--epochs", flags.epochs, "training epochs");
      o.order = sub->add_option("--order", flags.order, "filter order k");
      o.rho = sub->add_option("--rho", flags.rho, "view weighting exponent");
      o.gamma_rec = sub->add_option("--gamma-rec", flags.gamma_rec, "reconstruction loss weight");
      o.gamma_kl = sub->add_option("--gamma-kl", flags.gamma_kl, "KL loss weight");
    }
    if (sub->get_name() == "ablate") o.variant = sub->add_option("--variant", flags.variant, "ablation variant");
    options[sub] = o;
  };
  CLI::App* run = app.add_subcommand("run", "train and cluster");
  CLI::App* ablate = app.add_subcommand("ablate", "train an ablated model");
  CLI::App* spectrum_cmd = app.add_subcommand("spectrum", "compare adjacency and joint aggregation spectra");
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic dataset");
  add_common(run, true);
  add_common(ablate, true);
  add_common(spectrum_cmd, true);
  add_common(synth, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  return guarded(err, [&]() -> int {
    CLI::App* sub = app.get_subcommands().front();
    const Options& o = options.at(sub);

    json j = json::object();
    fs::path base_dir;
    if (!flags.config.empty()) {
      std::ifstream is(flags.config);
      if (!is) throw IoError("cannot read " + flags.config);
      try {
        j = json::parse(is);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      base_dir = fs::path(flags.config).parent_path();
    }

    if (sub == synth) {
      if (!j.is_object()) throw ConfigError("config: top level must be an object");
      SyntheticSpec spec = j.contains("synthetic") ? synthetic_spec_from_json(j.at("synthetic")) : SyntheticSpec{};
      if (o.seed->count()) spec.seed = flags.seed;
      fs::path out_dir = j.contains("out") ? fs::path(j.at("out").get<std::string>()) : fs::path("out");
      if (o.out->count()) out_dir = flags.out;
      return cmd_synth(spec, out_dir, out, err);
    }

    RunConfig cfg = run_config_from_json(j, base_dir);
    if (o.seed->count()) cfg.train.seed = flags.seed;
    if (o.out->count()) cfg.out_dir = flags.out;
    if (o.epochs->count()) cfg.train.epochs = flags.epochs;
    if (o.order->count()) cfg.train.filter.order = flags.order;
    if (o.rho->count()) cfg.train.rho = flags.rho;
    if (o.gamma_rec->count()) cfg.train.gamma_rec = flags.gamma_rec;
    if (o.gamma_kl->count()) cfg.train.gamma_kl = flags.gamma_kl;
    if (o.variant != nullptr && o.variant->count()) cfg.variant = parse_variant(flags.variant);

    if (sub == run) return cmd_run(cfg, out, err);
    if (sub == ablate) return cmd_ablate(cfg, out, err);
    return cmd_spectrum(cfg, out, err);
  });
}

}  // namespace ahgfc
