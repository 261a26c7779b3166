#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "smg/audit.hpp"
#include "smg_cli/config.hpp"

namespace smg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitRuntime = 2,
  kExitRefused = 3,
  kExitViolated = 4,
};

/// Entry point shared by the executable and the tests; `args` excludes argv[0].
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::vector<std::uint64_t> seeds_of(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Grid search

/// `lr` is the initial rate eta_1 (the multiplier of 1 + cos for cosine),
/// `decay` the per-epoch factor alpha of the exponential schedule.
struct GridPoint {
  double lr = 0.1;
  double lambda = 0.0;
  double decay = 1.0;
  double beta = 0.5;
};

struct GridOutcome {
  GridPoint point;
  std::string stage;
  double final_loss = 0.0;
  double weighted_grad_norm_sq = 0.0;
  bool failed = false;
  std::string message;
};

struct PublishedGrid {
  std::vector<double> coarse;
  std::vector<double> fine;  // applies when `anchor` wins the coarse stage
  double anchor = 0.1;
  std::vector<double> lambdas{0.0};
  std::vector<double> decays{1.0};
  std::vector<double> betas;
};

/// Two-stage grids used for the published comparisons, keyed by method and schedule.
PublishedGrid published_grid(Algorithm algorithm, ScheduleKind schedule, double default_beta);

/// Fine grid centred at `best`: the published fine grid rescaled by best / anchor.
std::vector<double> fine_grid_around(const PublishedGrid& grid, double best);

Schedule schedule_for_point(const ExperimentConfig& config, const Problem& problem, const GridPoint& point);

/// Evaluates every point over the configured seeds on up to `jobs` threads.
/// Diverging points are reported as failed rows instead of aborting the grid.
std::vector<GridOutcome> evaluate_grid(const ExperimentConfig& config, const Problem& problem,
                                       const std::vector<GridPoint>& points, const std::string& stage,
                                       std::size_t jobs);

/// Sorted by final loss; failed points last, ties keep input order.
std::vector<GridOutcome> rank_outcomes(std::vector<GridOutcome> outcomes);
std::string grid_csv(const std::vector<GridOutcome>& ranked);

// ---------------------------------------------------------------------------
// Method comparison

struct MethodSpec {
  std::string name;
  OptimizerConfig optimizer;
  double gamma = 1.0;
};

/// Per method, per epoch 0..T: mean and sample standard deviation over seeds.
struct CompareTable {
  std::vector<std::string> methods;
  std::vector<std::vector<double>> loss_mean, loss_std, grad_mean, grad_std;
};

CompareTable compare_methods(const ExperimentConfig& config, const Problem& problem,
                             const std::vector<MethodSpec>& methods);
std::string compare_csv(const CompareTable& table);

}  // namespace smg::cli
