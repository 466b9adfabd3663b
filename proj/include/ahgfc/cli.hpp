#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ahgfc/dataset_io.hpp"
#include "ahgfc/fusion.hpp"

namespace ahgfc {

enum class Variant { no_rec, no_kl, raw_adjacency, low_pass_only, raw_adjacency_low_pass };

/// Throws ConfigError for unknown names.
Variant parse_variant(const std::string& name);
const char* to_string(Variant v);

/// Applies an ablation to a training configuration.
void apply_variant(TrainConfig& cfg, Variant v);

struct RunConfig {
  std::optional<std::filesystem::path> manifest;
  std::optional<SyntheticSpec> synthetic;
  TrainConfig train;
  std::filesystem::path out_dir = "out";
  std::optional<Variant> variant;

  void validate() const;  // throws ConfigError
};

/// Reads the flat config object. Relative manifest paths resolve against
/// `base_dir`. Unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const RunConfig& cfg);

/// Loads or generates the configured dataset.
MultiViewGraph load_graph(const RunConfig& cfg, Warnings* warnings = nullptr);

/// "NMI=<v> ARI=<v> ACC=<v> F1=<v>"
std::string metrics_line(const Metrics& m);

// Exit codes: 0 success, 1 configuration / input errors, 2 numeric divergence.
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_ablate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

/// Parses the argument vector (args[0] is the subcommand) and dispatches.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ahgfc
