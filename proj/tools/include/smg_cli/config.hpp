#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smg/optimizers.hpp"
#include "smg/problem.hpp"
#include "smg/schedule.hpp"
#include "smg/shuffling.hpp"

namespace smg::cli {

/// Raised for malformed or inconsistent command-line / config input (exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SyntheticSpec {
  std::size_t n = 32;
  std::size_t d = 5;
  std::uint64_t seed = 7;
  double separability = 0.8;
};

struct QuadraticSpec {
  std::size_t n = 8;
  std::size_t d = 3;
  std::uint64_t seed = 2024;
  double condition = 4.0;
};

struct ProblemSpec {
  std::string kind = "logistic";  // "logistic" or "quadratic"
  std::string data;               // LIBSVM path or dataset name; empty = synthetic
  double reg = 0.01;              // lambda of the nonconvex regularizer
  bool scale_features = false;
  SyntheticSpec synthetic;
  QuadraticSpec quadratic;
};

struct ScheduleSpec {
  std::string kind = "constant";
  double gamma = 1.0;
  double lambda = 0.0;  // diminishing offset
  double rho = 1.0;     // exponential decay over the whole horizon
  bool rr_scaling = false;
};

/// Everything needed to reproduce a run. Serialises to a canonical JSON
/// document (sorted keys); `out` and `jobs` do not affect results and are left
/// out of the hash.
struct ExperimentConfig {
  ProblemSpec problem;
  std::string algorithm = "smg";
  double beta = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  ScheduleSpec schedule;
  std::string strategy = "rr";
  std::size_t T = 50;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  std::uint64_t w0_seed = 0;
  double w0_scale = 0.01;
  bool enforce_cap = false;
  double cap_factor = 0.9;
  std::string step_scale = "epoch";
  std::string out = "out";
  std::size_t jobs = 1;

  /// Checks ranges and enum names; throws UsageError.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Strict reader: unknown keys and wrongly typed values are rejected. Missing
/// keys keep their defaults. Accepts a run sidecar (uses its "config" member).
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);

/// The hashed document: to_json without `out` and `jobs`.
nlohmann::json canonical_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

/// Resolves a dataset reference: an existing path, else a file under
/// $SMG_DATA_DIR (with the LIBSVM test split standing in for "ijcnn1").
std::string resolve_dataset(const std::string& reference);

std::unique_ptr<Problem> build_problem(const ExperimentConfig& config);

OptimizerConfig optimizer_config(const ExperimentConfig& config);
ShufflingStrategy strategy_for(const ExperimentConfig& config, std::uint64_t seed);
StepScale step_scale_of(const ExperimentConfig& config);

/// The theorem cap matching the configured method and strategy.
StepCap cap_for(const ExperimentConfig& config, const Problem& problem);

/// Builds eta_1..eta_T, applying the n^{1/3} factor and, when requested, the cap.
Schedule build_schedule(const ExperimentConfig& config, const Problem& problem);

Vector initial_point_for(const ExperimentConfig& config, std::size_t d);

}  // namespace smg::cli
