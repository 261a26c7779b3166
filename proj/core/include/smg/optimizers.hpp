#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smg/problem.hpp"
#include "smg/schedule.hpp"
#include "smg/shuffling.hpp"

namespace smg {

enum class Algorithm { kSmg, kSsmg, kSgd, kSgdMomentum, kAdam };

std::string_view to_string(Algorithm algorithm);
/// Accepts "smg", "ssmg", "sgd", "sgdm", "adam".
Algorithm parse_algorithm(std::string_view name);

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::kSmg;
  /// Momentum weight for SMG, SSMG and SGD-M; beta1 for Adam.
  double beta = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Per-step rate used inside epoch t.
enum class StepScale {
  kEpoch,   // eta_t / n, the analysed setting
  kSample,  // eta_t, the usual deep-learning convention
};

/// One inner iteration as seen by a StepObserver.
struct StepEvent {
  std::size_t epoch;      // t, 1-based
  std::size_t inner;      // i, 0-based
  std::size_t component;  // pi^{(t)}(i + 1), 0-based
  double rate;
  const Vector& w_before;
  const Vector& grad;
  const Vector& w_after;
  const Vector* momentum;  // m_{i+1}, null for plain SGD
  const Vector* anchor;    // m_0^{(t)} for SMG, null otherwise
};

using StepObserver = std::function<void(const StepEvent&)>;

struct RunOptions {
  StepScale step_scale = StepScale::kEpoch;
  /// Seed of the output-iterate draw; defaults to the shuffling seed.
  std::optional<std::uint64_t> selection_seed;
  /// Epoch-start iterates are kept while T * d stays within this many entries.
  std::size_t snapshot_limit = 1'000'000;
  StepObserver observer;
};

struct TraceRow {
  std::size_t epoch = 0;  // t
  double eta = 0.0;       // eta_t
  double loss = 0.0;      // F(w~_{t-1})
  double grad_norm_sq = 0.0;  // ||grad F(w~_{t-1})||^2
};

struct RunRecord {
  Algorithm algorithm = Algorithm::kSmg;
  double beta = 0.0;
  ShufflingStrategy strategy;
  StepScale step_scale = StepScale::kEpoch;
  std::vector<TraceRow> rows;
  /// w~_0 .. w~_{T-1}; empty when the run exceeded the snapshot limit.
  std::vector<Vector> snapshots;
  Vector final_iterate;  // w~_T
  double final_loss = 0.0;
  double final_grad_norm_sq = 0.0;
  std::size_t selected_index = 0;  // w_hat_T = w~_{selected_index}
  Vector selected_iterate;
  std::string config_hash;
  std::uint64_t seed = 0;

  /// sum_t eta_t ||grad F(w~_{t-1})||^2 / sum_t eta_t
  double weighted_grad_norm_sq() const;
  bool has_snapshots() const { return !snapshots.empty(); }
};

/// Inner-loop update rule shared by every epoch-structured method.
class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual void begin_epoch(std::size_t /*t*/) {}
  /// Consumes g_i^{(t)} and moves w in place with the per-step rate.
  virtual void step(Vector& w, const Vector& grad, double rate) = 0;
  virtual void end_epoch() {}
  virtual const Vector* momentum() const { return nullptr; }
  virtual const Vector* anchor() const { return nullptr; }
};

/// Shuffling momentum gradient:
///   m_{i+1} = beta m_0 + (1 - beta) g_i,  v_{i+1} = v_i + g_i / n,  w_{i+1} = w_i - rate m_{i+1}
/// m_0 is frozen during the epoch and replaced by v_n (the epoch gradient mean) at its end.
class SmgStepper final : public Stepper {
 public:
  SmgStepper(std::size_t d, std::size_t n, double beta);
  void begin_epoch(std::size_t t) override;
  void step(Vector& w, const Vector& grad, double rate) override;
  void end_epoch() override;
  const Vector* momentum() const override { return &m_; }
  const Vector* anchor() const override { return &anchor_; }
  const Vector& running_average() const { return avg_; }

 private:
  double beta_;
  double inv_n_;
  Vector anchor_;
  Vector avg_;
  Vector m_;
};

/// Classical momentum m_{i+1} = beta m_i + (1 - beta) g_i carried across epochs.
class SsmgStepper final : public Stepper {
 public:
  SsmgStepper(std::size_t d, double beta);
  void step(Vector& w, const Vector& grad, double rate) override;
  const Vector* momentum() const override { return &m_; }

 private:
  double beta_;
  Vector m_;
};

class SgdStepper final : public Stepper {
 public:
  void step(Vector& w, const Vector& grad, double rate) override;
};

/// Heavy-ball form m_{i+1} = beta m_i + g_i, w_{i+1} = w_i - rate m_{i+1}.
class SgdMomentumStepper final : public Stepper {
 public:
  SgdMomentumStepper(std::size_t d, double beta);
  void step(Vector& w, const Vector& grad, double rate) override;
  const Vector* momentum() const override { return &m_; }

 private:
  double beta_;
  Vector m_;
};

/// Adam with bias correction; the step counter runs across epochs.
class AdamStepper final : public Stepper {
 public:
  AdamStepper(std::size_t d, double beta1, double beta2, double epsilon);
  void step(Vector& w, const Vector& grad, double rate) override;
  const Vector* momentum() const override { return &m_; }

 private:
  double beta1_;
  double beta2_;
  double epsilon_;
  double beta1_pow_ = 1.0;
  double beta2_pow_ = 1.0;
  Vector m_;
  Vector v_;
};

std::unique_ptr<Stepper> make_stepper(const OptimizerConfig& config, std::size_t d, std::size_t n);

/// Runs T = schedule.horizon() epochs of n inner steps each, recording F and
/// ||grad F||^2 at every epoch start and drawing w_hat_T with probability
/// proportional to eta_t. Throws RunAborted when an iterate or objective value
/// becomes non-finite.
RunRecord run_epochs(const Problem& problem, const Schedule& schedule,
                     const ShufflingStrategy& strategy, const OptimizerConfig& config,
                     const Vector& w0, const RunOptions& options = {});

RunRecord smg_run(const Problem& problem, const Schedule& schedule, const ShufflingStrategy& strategy,
                  double beta, const Vector& w0, const RunOptions& options = {});
/// `strategy` must be single-permutation (ShuffleOnce or Incremental).
RunRecord ssmg_run(const Problem& problem, const Schedule& schedule, const ShufflingStrategy& strategy,
                   double beta, const Vector& w0, const RunOptions& options = {});
RunRecord shuffling_sgd_run(const Problem& problem, const Schedule& schedule,
                            const ShufflingStrategy& strategy, const Vector& w0,
                            const RunOptions& options = {});
RunRecord sgdm_run(const Problem& problem, const Schedule& schedule, const ShufflingStrategy& strategy,
                   double beta, const Vector& w0, const RunOptions& options = {});
RunRecord adam_run(const Problem& problem, const Schedule& schedule, const ShufflingStrategy& strategy,
                   double beta1, double beta2, const Vector& w0, const RunOptions& options = {},
                   double epsilon = 1e-8);

/// Seeded N(0, scale^2 I) starting point.
Vector initial_point(std::size_t d, std::uint64_t seed, double scale = 0.01);

}  // namespace smg
