#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ahgfc {

// Matrix / vector shape disagreement.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Value outside the admissible domain (negative weight, label out of range, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid user-supplied configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A ratio whose denominator vanishes, e.g. homophily of an edgeless graph.
class UndefinedRatioError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values during optimization. `epoch` is the last epoch whose
// values were all finite (-1 if none).
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, int epoch = -1)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

// Non-fatal repair / fallback notes collected by operations that can recover.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string msg) {
  if (sink != nullptr) sink->push_back(std::move(msg));
}

}  // namespace ahgfc
