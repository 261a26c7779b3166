#include "smg/optimizers.hpp"

#include <cmath>
#include <string>

#include "smg/errors.hpp"
#include "smg/random.hpp"

namespace smg {
namespace {

void check_beta(double beta, const char* name) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw InvalidArgument(std::string(name) + " must lie in [0, 1), got " + std::to_string(beta));
  }
}

Eigen::Index dim(std::size_t d) { return static_cast<Eigen::Index>(d); }

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kSmg: return "smg";
    case Algorithm::kSsmg: return "ssmg";
    case Algorithm::kSgd: return "sgd";
    case Algorithm::kSgdMomentum: return "sgdm";
    case Algorithm::kAdam: return "adam";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "smg") return Algorithm::kSmg;
  if (name == "ssmg") return Algorithm::kSsmg;
  if (name == "sgd") return Algorithm::kSgd;
  if (name == "sgdm" || name == "sgd-m") return Algorithm::kSgdMomentum;
  if (name == "adam") return Algorithm::kAdam;
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "'");
}

double RunRecord::weighted_grad_norm_sq() const {
  double num = 0.0;
  double den = 0.0;
  for (const auto& r : rows) {
    num += r.eta * r.grad_norm_sq;
    den += r.eta;
  }
  if (!(den > 0.0)) throw InvalidArgument("weighted_grad_norm_sq: learning rates sum to zero");
  return num / den;
}

SmgStepper::SmgStepper(std::size_t d, std::size_t n, double beta)
    : beta_(beta),
      inv_n_(1.0 / static_cast<double>(n)),
      anchor_(Vector::Zero(dim(d))),
      avg_(Vector::Zero(dim(d))),
      m_(Vector::Zero(dim(d))) {
  check_beta(beta, "beta");
}

void SmgStepper::begin_epoch(std::size_t) { avg_.setZero(); }

void SmgStepper::step(Vector& w, const Vector& grad, double rate) {
  m_.noalias() = beta_ * anchor_ + (1.0 - beta_) * grad;
  avg_.noalias() += inv_n_ * grad;
  w.noalias() -= rate * m_;
}

void SmgStepper::end_epoch() { anchor_.swap(avg_); }

SsmgStepper::SsmgStepper(std::size_t d, double beta) : beta_(beta), m_(Vector::Zero(dim(d))) {
  check_beta(beta, "beta");
}

void SsmgStepper::step(Vector& w, const Vector& grad, double rate) {
  m_ = beta_ * m_ + (1.0 - beta_) * grad;
  w.noalias() -= rate * m_;
}

void SgdStepper::step(Vector& w, const Vector& grad, double rate) { w.noalias() -= rate * grad; }

SgdMomentumStepper::SgdMomentumStepper(std::size_t d, double beta)
    : beta_(beta), m_(Vector::Zero(dim(d))) {
  check_beta(beta, "beta");
}

void SgdMomentumStepper::step(Vector& w, const Vector& grad, double rate) {
  m_ = beta_ * m_ + grad;
  w.noalias() -= rate * m_;
}

AdamStepper::AdamStepper(std::size_t d, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(Vector::Zero(dim(d))), v_(Vector::Zero(dim(d))) {
  check_beta(beta1, "beta1");
  check_beta(beta2, "beta2");
  if (!(epsilon > 0.0)) throw InvalidArgument("adam epsilon must be positive");
}

void AdamStepper::step(Vector& w, const Vector& grad, double rate) {
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_.array() = beta2_ * v_.array() + (1.0 - beta2_) * grad.array().square();
  beta1_pow_ *= beta1_;
  beta2_pow_ *= beta2_;
  const double c1 = 1.0 / (1.0 - beta1_pow_);
  const double c2 = 1.0 / (1.0 - beta2_pow_);
  w.array() -= rate * (c1 * m_.array()) / ((c2 * v_.array()).sqrt() + epsilon_);
}

std::unique_ptr<Stepper> make_stepper(const OptimizerConfig& config, std::size_t d, std::size_t n) {
  switch (config.algorithm) {
    case Algorithm::kSmg: return std::make_unique<SmgStepper>(d, n, config.beta);
    case Algorithm::kSsmg: return std::make_unique<SsmgStepper>(d, config.beta);
    case Algorithm::kSgd: return std::make_unique<SgdStepper>();
    case Algorithm::kSgdMomentum: return std::make_unique<SgdMomentumStepper>(d, config.beta);
    case Algorithm::kAdam:
      return std::make_unique<AdamStepper>(d, config.beta, config.beta2, config.epsilon);
  }
  throw InvalidArgument("unknown algorithm");
}

RunRecord run_epochs(const Problem& problem, const Schedule& schedule,
                     const ShufflingStrategy& strategy, const OptimizerConfig& config,
                     const Vector& w0, const RunOptions& options) {
  const std::size_t n = problem.num_components();
  const std::size_t d = problem.dimension();
  const std::size_t T = schedule.horizon();
  if (static_cast<std::size_t>(w0.size()) != d) {
    throw DimensionMismatch("initial point has dimension " + std::to_string(w0.size()) +
                                " but the problem has dimension " + std::to_string(d),
                            static_cast<std::size_t>(w0.size()));
  }
  if (config.algorithm == Algorithm::kSsmg && !strategy.is_single_permutation()) {
    throw InvalidArgument("ssmg requires a single permutation (shuffle-once or incremental)");
  }
  auto stepper = make_stepper(config, d, n);
  const bool sgd_like = config.algorithm == Algorithm::kSgd;

  RunRecord record;
  record.algorithm = config.algorithm;
  record.beta = sgd_like ? 0.0 : config.beta;
  record.strategy = strategy;
  record.step_scale = options.step_scale;
  record.seed = strategy.seed;
  record.rows.reserve(T);

  const auto etas = schedule.etas();
  // The weights eta_t are known up front, so w_hat_T is drawn before the run and
  // captured when reached; the draw is independent of the trajectory.
  Rng selector(options.selection_seed.value_or(strategy.seed), Stream::kOutputSelection);
  record.selected_index = sample_output_index(etas, selector);

  const bool keep_snapshots = T * d <= options.snapshot_limit;
  if (keep_snapshots) record.snapshots.reserve(T);

  PermutationStream perms(strategy, n);
  Vector w = w0;
  Vector g(dim(d));
  Vector full(dim(d));
  Vector w_before;
  if (options.observer) w_before.resize(dim(d));

  for (std::size_t t = 1; t <= T; ++t) {
    problem.full_grad(w, full);
    TraceRow row{t, etas[t - 1], problem.full_value(w), full.squaredNorm()};
    if (!std::isfinite(row.loss) || !std::isfinite(row.grad_norm_sq)) {
      throw RunAborted("non-finite objective at the start of epoch " + std::to_string(t), t);
    }
    record.rows.push_back(row);
    if (keep_snapshots) record.snapshots.push_back(w);
    if (t - 1 == record.selected_index) record.selected_iterate = w;

    const double rate =
        options.step_scale == StepScale::kEpoch ? etas[t - 1] / static_cast<double>(n) : etas[t - 1];
    const auto perm = perms.next_epoch_permutation(t);
    stepper->begin_epoch(t);
    for (std::size_t i = 0; i < n; ++i) {
      problem.component_grad(w, perm[i], g);
      if (options.observer) {
        w_before = w;
        stepper->step(w, g, rate);
        options.observer(StepEvent{t, i, perm[i], rate, w_before, g, w, stepper->momentum(),
                                   stepper->anchor()});
      } else {
        stepper->step(w, g, rate);
      }
    }
    stepper->end_epoch();
    if (!w.allFinite()) throw RunAborted("non-finite iterate after epoch " + std::to_string(t), t);
  }

  record.final_iterate = w;
  problem.full_grad(w, full);
  record.final_loss = problem.full_value(w);
  record.final_grad_norm_sq = full.squaredNorm();
  if (!std::isfinite(record.final_loss) || !std::isfinite(record.final_grad_norm_sq)) {
    throw RunAborted("non-finite objective at the final iterate", T);
  }
  return record;
}

RunRecord smg_run(const Problem& problem, const Schedule& schedule, const ShufflingStrategy& strategy,
                  double beta, const Vector& w0, const RunOptions& options) {
  return run_epochs(problem, schedule, strategy, {Algorithm::kSmg, beta}, w0, options);
}

RunRecord ssmg_run(const Problem& problem, const Schedule& schedule, const ShufflingStrategy& strategy,
                   double beta, const Vector& w0, const RunOptions& options) {
  return run_epochs(problem, schedule, strategy, {Algorithm::kSsmg, beta}, w0, options);
}

RunRecord shuffling_sgd_run(const Problem& problem, const Schedule& schedule,
                            const ShufflingStrategy& strategy, const Vector& w0,
                            const RunOptions& options) {
  return run_epochs(problem, schedule, strategy, {Algorithm::kSgd, 0.0}, w0, options);
}

RunRecord sgdm_run(const Problem& problem, const Schedule& schedule, const ShufflingStrategy& strategy,
                   double beta, const Vector& w0, const RunOptions& options) {
  return run_epochs(problem, schedule, strategy, {Algorithm::kSgdMomentum, beta}, w0, options);
}

RunRecord adam_run(const Problem& problem, const Schedule& schedule, const ShufflingStrategy& strategy,
                   double beta1, double beta2, const Vector& w0, const RunOptions& options,
                   double epsilon) {
  return run_epochs(problem, schedule, strategy, {Algorithm::kAdam, beta1, beta2, epsilon}, w0, options);
}

Vector initial_point(std::size_t d, std::uint64_t seed, double scale) {
  Rng rng(seed, Stream::kInitialPoint);
  Vector w(dim(d));
  for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = scale * rng.normal();
  return w;
}

}  // namespace smg
