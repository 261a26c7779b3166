#include "smg/audit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace smg {
namespace {

constexpr double kBoundTolerance = 1e-9;

double initial_gap(const RunRecord& record, const ProblemConstants& constants) {
  if (record.rows.empty()) throw InvalidArgument("audit: empty run record");
  return record.rows.front().loss - constants.f_lower;
}

BoundConstants collect_constants(const RunRecord& record, const ProblemConstants& c, double beta,
                                 std::size_t n, const ScheduleSums& sums) {
  BoundConstants k;
  k.L = c.L;
  k.theta = c.theta;
  k.sigma_sq = c.sigma_sq;
  k.G = c.G;
  k.beta = beta;
  k.n = n;
  if (!record.rows.empty()) {
    k.f_initial = record.rows.front().loss;
    k.grad_norm_sq_initial = record.rows.front().grad_norm_sq;
    k.eta1 = record.rows.front().eta;
  }
  k.f_lower = c.f_lower;
  k.sums = sums;
  return k;
}

BoundReport refuse(Theorem theorem, BoundConstants constants, std::string why) {
  BoundReport r;
  r.theorem = theorem;
  r.constants_used = std::move(constants);
  r.premises_met = false;
  r.satisfied = false;
  r.message = "premises unmet: " + why;
  return r;
}

void finish(BoundReport& r) {
  r.premises_met = true;
  r.slack = r.rhs - r.lhs;
  r.satisfied = std::isfinite(r.rhs) && r.lhs <= r.rhs * (1.0 + kBoundTolerance);
  r.message = r.satisfied ? "bound holds" : "bound violated";
}

bool is_smg_like(const RunRecord& record) {
  return record.algorithm == Algorithm::kSmg || record.algorithm == Algorithm::kSgd;
}

std::string rows_mismatch(const RunRecord& record, const Schedule& schedule) {
  if (record.rows.size() != schedule.horizon()) {
    return "record has " + std::to_string(record.rows.size()) + " rows but the schedule has T = " +
           std::to_string(schedule.horizon());
  }
  for (std::size_t t = 1; t <= schedule.horizon(); ++t) {
    if (record.rows[t - 1].eta != schedule.eta(t)) return "record rates differ from the schedule";
  }
  return {};
}

}  // namespace

std::string_view to_string(Theorem theorem) {
  switch (theorem) {
    case Theorem::kGeneral: return "T1";
    case Theorem::kRandomReshuffling: return "T2";
    case Theorem::kSingleShuffle: return "T3";
  }
  return "?";
}

std::string BoundReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << to_string(theorem) << ": ";
  if (!premises_met) {
    os << "REFUSED (" << message << ")";
    return os.str();
  }
  os << (satisfied ? "PASS" : "FAIL") << " lhs=" << lhs << " rhs=" << rhs << " slack=" << slack;
  if (samples > 1) os << " runs=" << samples << " se=" << standard_error;
  return os.str();
}

double theorem1_rhs(const RunRecord& record, const ProblemConstants& constants, double beta,
                    const ScheduleSums& sums) {
  if (!(beta >= 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in [0, 1)");
  const double gap = initial_gap(record, constants);
  const double L = constants.L;
  return 4.0 * gap / ((1.0 - beta) * sums.sum_eta) +
         9.0 * constants.sigma_sq * L * L * (5.0 - 3.0 * beta) / (1.0 - beta) *
             (sums.sum_eta_prev_cubed / sums.sum_eta);
}

double theorem2_rhs(const RunRecord& record, const ProblemConstants& constants, double beta,
                    std::size_t n, const ScheduleSums& sums) {
  if (!(beta >= 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in [0, 1)");
  if (n == 0) throw InvalidArgument("n must be >= 1");
  const double gap = initial_gap(record, constants);
  const double L = constants.L;
  return 4.0 * gap / ((1.0 - beta) * sums.sum_eta) +
         6.0 * constants.sigma_sq * (5.0 - 3.0 * beta) * L * L /
             (static_cast<double>(n) * (1.0 - beta)) * (sums.sum_eta_prev_cubed / sums.sum_eta);
}

double theorem3_rhs(const RunRecord& record, const ProblemConstants& constants, double beta,
                    std::size_t n, const ScheduleSums& sums) {
  if (!constants.G) throw AuditRefused("bounded-gradient constant G is unavailable for this problem");
  if (!(beta >= 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in [0, 1)");
  if (n == 0) throw InvalidArgument("n must be >= 1");
  const double gap = initial_gap(record, constants);
  const double L = constants.L;
  const double G2 = (*constants.G) * (*constants.G);
  const double eta1 = record.rows.front().eta;
  const double beta_n = std::pow(beta, static_cast<double>(n));
  const double delta1 =
      2.0 * gap + (1.0 / L + eta1) * record.rows.front().grad_norm_sq + 2.0 * L * eta1 * eta1 * G2;
  return delta1 / (sums.sum_eta * (1.0 - beta_n)) + L * L * G2 * (sums.sum_xi_cubed / sums.sum_eta) +
         4.0 * beta_n * G2 / (1.0 - beta_n);
}

BoundReport audit_theorem1(const RunRecord& record, const Schedule& schedule,
                           const ProblemConstants& constants) {
  const auto sums = schedule_sums(schedule);
  auto k = collect_constants(record, constants, record.beta, 0, sums);
  const Theorem th = Theorem::kGeneral;
  if (!is_smg_like(record)) return refuse(th, k, "the bound covers SMG (and plain shuffling SGD) only");
  if (record.step_scale != StepScale::kEpoch) return refuse(th, k, "inner steps must use eta_t / n");
  if (auto why = rows_mismatch(record, schedule); !why.empty()) return refuse(th, k, why);
  if (!schedule.is_nonincreasing()) return refuse(th, k, "learning rates must be non-increasing");
  const auto cap = cap_general(record.beta, constants.theta, constants.L);
  if (!satisfies_cap(schedule, cap)) {
    return refuse(th, k, "eta_t exceeds 1/(L sqrt(K)) with K = " + std::to_string(cap.constant));
  }
  BoundReport r;
  r.theorem = th;
  r.constants_used = k;
  r.lhs = record.weighted_grad_norm_sq();
  r.rhs = theorem1_rhs(record, constants, record.beta, sums);
  finish(r);
  return r;
}

BoundReport audit_theorem2(std::span<const RunRecord> records, const Schedule& schedule,
                           const ProblemConstants& constants, std::size_t n) {
  const auto sums = schedule_sums(schedule);
  const Theorem th = Theorem::kRandomReshuffling;
  if (records.empty()) return refuse(th, BoundConstants{}, "no runs to average");
  const RunRecord& first = records.front();
  auto k = collect_constants(first, constants, first.beta, n, sums);
  for (const auto& rec : records) {
    if (!is_smg_like(rec)) return refuse(th, k, "the bound covers SMG (and plain shuffling SGD) only");
    if (rec.strategy.kind != ShufflingKind::kRandomizedReshuffling) {
      return refuse(th, k, "every run must use randomized reshuffling");
    }
    if (rec.step_scale != StepScale::kEpoch) return refuse(th, k, "inner steps must use eta_t / n");
    if (rec.beta != first.beta) return refuse(th, k, "runs use different momentum weights");
    if (rec.rows.empty() || rec.rows.front().loss != first.rows.front().loss) {
      return refuse(th, k, "runs must share the starting point w~_0");
    }
    if (auto why = rows_mismatch(rec, schedule); !why.empty()) return refuse(th, k, why);
  }
  if (!schedule.is_nonincreasing()) return refuse(th, k, "learning rates must be non-increasing");
  const auto cap = cap_rr(first.beta, constants.theta, n, constants.L);
  if (!satisfies_cap(schedule, cap)) {
    return refuse(th, k, "eta_t exceeds 1/(L sqrt(D)) with D = " + std::to_string(cap.constant));
  }

  std::vector<double> lhs;
  lhs.reserve(records.size());
  for (const auto& rec : records) lhs.push_back(rec.weighted_grad_norm_sq());
  double mean = 0.0;
  for (double v : lhs) mean += v;
  mean /= static_cast<double>(lhs.size());
  double var = 0.0;
  for (double v : lhs) var += (v - mean) * (v - mean);
  const double se =
      lhs.size() > 1 ? std::sqrt(var / static_cast<double>(lhs.size() - 1) / static_cast<double>(lhs.size()))
                     : 0.0;

  BoundReport r;
  r.theorem = th;
  r.constants_used = k;
  r.lhs = mean;
  r.rhs = theorem2_rhs(first, constants, first.beta, n, sums);
  r.samples = lhs.size();
  r.standard_error = se;
  r.premises_met = true;
  r.slack = r.rhs - r.lhs;
  r.satisfied = std::isfinite(r.rhs) && r.lhs <= r.rhs + 3.0 * se;
  r.message = r.satisfied ? "bound holds within 3 standard errors" : "bound violated";
  return r;
}

BoundReport audit_theorem3(const RunRecord& record, const Schedule& schedule,
                           const ProblemConstants& constants, std::size_t n) {
  const auto sums = schedule_sums(schedule);
  auto k = collect_constants(record, constants, record.beta, n, sums);
  const Theorem th = Theorem::kSingleShuffle;
  if (!constants.G) return refuse(th, k, "no finite gradient bound G for this problem");
  if (record.algorithm != Algorithm::kSsmg && record.algorithm != Algorithm::kSgd) {
    return refuse(th, k, "the bound covers single-shuffle momentum (ssmg) only");
  }
  if (!record.strategy.is_single_permutation()) return refuse(th, k, "a single permutation is required");
  if (record.step_scale != StepScale::kEpoch) return refuse(th, k, "inner steps must use eta_t / n");
  if (auto why = rows_mismatch(record, schedule); !why.empty()) return refuse(th, k, why);
  if (!satisfies_cap(schedule, cap_bounded_gradient(constants.L))) {
    return refuse(th, k, "eta_t exceeds 1/L");
  }
  BoundReport r;
  r.theorem = th;
  r.constants_used = k;
  r.lhs = record.weighted_grad_norm_sq();
  r.rhs = theorem3_rhs(record, constants, record.beta, n, sums);
  finish(r);
  return r;
}

double single_shuffle_beta(double nu, std::size_t horizon, std::size_t n) {
  if (!(nu >= 0.0)) throw InvalidArgument("nu must be >= 0");
  if (horizon == 0 || n == 0) throw InvalidArgument("T and n must be >= 1");
  const double beta_n = nu / std::pow(static_cast<double>(horizon), 2.0 / 3.0);
  if (!(beta_n < 1.0)) throw InvalidArgument("nu / T^{2/3} must be < 1");
  return std::pow(beta_n, 1.0 / static_cast<double>(n));
}

RateFit fit_power_law(std::span<const double> horizons, std::span<const double> metrics) {
  if (horizons.size() != metrics.size()) throw InvalidArgument("fit: horizons and metrics differ in length");
  if (horizons.size() < 2) throw InvalidArgument("fit: need at least two horizons");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] > 0.0) || !(metrics[i] > 0.0) || !std::isfinite(metrics[i])) {
      throw InvalidArgument("fit: horizons and metrics must be positive and finite");
    }
    if (i > 0 && !(horizons[i] > horizons[i - 1])) throw InvalidArgument("fit: horizons must increase");
  }
  const auto m = static_cast<double>(horizons.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    sx += std::log(horizons[i]);
    sy += std::log(metrics[i]);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const double dx = std::log(horizons[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(metrics[i]) - my);
  }
  RateFit fit;
  fit.horizons.assign(horizons.begin(), horizons.end());
  fit.metrics.assign(metrics.begin(), metrics.end());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.low_confidence = horizons.size() < 4;
  return fit;
}

RateFit fit_rate(const Problem& problem, const RateExperiment& experiment,
                 std::span<const std::size_t> horizons) {
  if (experiment.seeds.empty()) throw InvalidArgument("fit_rate: no seeds");
  std::vector<double> hs;
  std::vector<double> metrics;
  for (std::size_t T : horizons) {
    const auto schedule = Schedule::constant(experiment.gamma, T);
    std::vector<double> per_seed;
    for (auto seed : experiment.seeds) {
      const auto rec = run_epochs(problem, schedule, {experiment.shuffling, seed}, experiment.optimizer,
                                  experiment.w0, experiment.options);
      per_seed.push_back(rec.weighted_grad_norm_sq());
    }
    std::sort(per_seed.begin(), per_seed.end());
    const std::size_t k = per_seed.size();
    const double median = k % 2 == 1 ? per_seed[k / 2] : 0.5 * (per_seed[k / 2 - 1] + per_seed[k / 2]);
    hs.push_back(static_cast<double>(T));
    metrics.push_back(median);
  }
  return fit_power_law(hs, metrics);
}

bool IdentityReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed; });
}

double cosine_sum_deviation(std::size_t max_horizon) {
  double worst = 0.0;
  for (std::size_t T = 2; T <= max_horizon; ++T) {
    double s = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
      s += std::cos(static_cast<double>(t) * std::numbers::pi / static_cast<double>(T));
    }
    worst = std::max(worst, std::abs(s + 1.0));
  }
  return worst;
}

namespace {

double rel_dev(const Vector& a, const Vector& b) { return (a - b).norm() / (1.0 + b.norm()); }

struct EpochLog {
  std::vector<std::vector<Vector>> grads;      // [t-1][i]
  std::vector<std::vector<Vector>> momenta;    // [t-1][i] = m_{i+1}^{(t)}
  std::vector<std::vector<Vector>> anchors;    // [t-1][i] = m_0^{(t)} seen at step i
};

EpochLog record_epochs(const Problem& problem, const Schedule& schedule, const ShufflingStrategy& strategy,
                       const OptimizerConfig& config, const Vector& w0, RunRecord& out) {
  EpochLog log;
  const std::size_t T = schedule.horizon();
  log.grads.resize(T);
  log.momenta.resize(T);
  log.anchors.resize(T);
  RunOptions opts;
  opts.observer = [&](const StepEvent& ev) {
    log.grads[ev.epoch - 1].push_back(ev.grad);
    if (ev.momentum) log.momenta[ev.epoch - 1].push_back(*ev.momentum);
    if (ev.anchor) log.anchors[ev.epoch - 1].push_back(*ev.anchor);
  };
  out = run_epochs(problem, schedule, strategy, config, w0, opts);
  return log;
}

}  // namespace

IdentityReport identity_suite(const Problem& problem, double beta, std::size_t horizon,
                              const ShufflingStrategy& strategy, const Vector& w0, double gamma,
                              double tolerance) {
  const std::size_t n = problem.num_components();
  const auto d = static_cast<Eigen::Index>(problem.dimension());
  const auto schedule = Schedule::constant(gamma, horizon);
  IdentityReport report;

  // SMG: anchor and epoch displacement.
  {
    RunRecord rec;
    const auto log = record_epochs(problem, schedule, strategy, {Algorithm::kSmg, beta}, w0, rec);
    std::vector<Vector> tilde = rec.snapshots;
    tilde.push_back(rec.final_iterate);

    IdentityCheck anchor;
    anchor.name = "smg_anchor_is_previous_epoch_mean";
    IdentityCheck displacement;
    displacement.name = "smg_epoch_displacement";
    for (std::size_t t = 1; t <= horizon; ++t) {
      // The anchor never changes inside an epoch.
      for (const auto& a : log.anchors[t - 1]) {
        anchor.max_deviation = std::max(anchor.max_deviation, rel_dev(a, log.anchors[t - 1].front()));
      }
      if (t < 2) continue;
      Vector mean = Vector::Zero(d);
      for (const auto& g : log.grads[t - 2]) mean += g;
      mean /= static_cast<double>(n);
      anchor.max_deviation = std::max(anchor.max_deviation, rel_dev(log.anchors[t - 1].front(), mean));

      Vector predicted = Vector::Zero(d);
      for (std::size_t j = 0; j < n; ++j) {
        predicted += beta * log.grads[t - 2][j] + (1.0 - beta) * log.grads[t - 1][j];
      }
      predicted *= -schedule.eta(t) / static_cast<double>(n);
      displacement.max_deviation =
          std::max(displacement.max_deviation, rel_dev(tilde[t] - tilde[t - 1], predicted));
    }
    if (horizon < 2) {
      anchor.note = displacement.note = "needs T >= 2 for a cross-epoch comparison";
    }
    anchor.passed = anchor.max_deviation <= tolerance;
    displacement.passed = displacement.max_deviation <= tolerance;
    report.checks.push_back(anchor);
    report.checks.push_back(displacement);
  }

  // SSMG: momentum expansion and bound.
  {
    ShufflingStrategy single = strategy;
    if (!single.is_single_permutation()) single.kind = ShufflingKind::kShuffleOnce;
    RunRecord rec;
    const auto log = record_epochs(problem, schedule, single, {Algorithm::kSsmg, beta}, w0, rec);

    IdentityCheck expansion;
    expansion.name = "ssmg_momentum_expansion";
    std::vector<double> powers(n + 1);
    for (std::size_t k = 0; k <= n; ++k) powers[k] = std::pow(beta, static_cast<double>(k));
    for (std::size_t t = 2; t <= horizon; ++t) {
      const auto& prev_g = log.grads[t - 2];
      const auto& cur_g = log.grads[t - 1];
      for (std::size_t i = 0; i < n; ++i) {
        Vector predicted = powers[n] * log.momenta[t - 2][i];
        for (std::size_t k = i + 1; k < n; ++k) predicted += (1.0 - beta) * powers[n + i - k] * prev_g[k];
        for (std::size_t k = 0; k <= i; ++k) predicted += (1.0 - beta) * powers[i - k] * cur_g[k];
        expansion.max_deviation = std::max(expansion.max_deviation, rel_dev(log.momenta[t - 1][i], predicted));
      }
    }
    if (horizon < 2) expansion.note = "needs T >= 2 for a cross-epoch comparison";
    expansion.passed = expansion.max_deviation <= tolerance;
    report.checks.push_back(expansion);

    IdentityCheck bound;
    bound.name = "ssmg_momentum_bounded_by_G";
    if (const auto& G = problem.constants().G) {
      double worst = 0.0;
      for (const auto& epoch : log.momenta)
        for (const auto& m : epoch) worst = std::max(worst, m.norm() - *G);
      bound.max_deviation = std::max(0.0, worst);
      bound.passed = bound.max_deviation <= tolerance;
    } else {
      bound.applicable = false;
      bound.note = "problem has no finite G";
    }
    report.checks.push_back(bound);
  }

  IdentityCheck cosine;
  cosine.name = "cosine_sum_equals_minus_one";
  cosine.max_deviation = cosine_sum_deviation(1000);
  cosine.passed = cosine.max_deviation <= tolerance;
  report.checks.push_back(cosine);
  return report;
}

}  // namespace smg
