#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ahgfc {

struct Metrics {
  double nmi = 0.0;
  double ari = 0.0;
  double acc = 0.0;
  double f1 = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double l_rec = 0.0;
  double l_kl = 0.0;
  double l_total = 0.0;
  std::vector<double> hr;
  std::vector<double> weights;
};

/// Training trace: pretraining reconstruction losses, one record per epoch,
/// and the final clustering metrics when ground truth is available.
struct TrainReport {
  std::vector<double> pretrain_l_rec;
  std::vector<EpochRecord> epochs;
  std::optional<Metrics> final;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const TrainReport& report);
TrainReport report_from_json(const nlohmann::json& j);

}  // namespace ahgfc
