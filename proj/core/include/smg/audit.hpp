#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smg/errors.hpp"
#include "smg/optimizers.hpp"
#include "smg/problem.hpp"
#include "smg/schedule.hpp"

namespace smg {

/// The audit refused to evaluate a bound because a premise of the theorem is unmet.
class AuditRefused : public Error {
 public:
  using Error::Error;
};

enum class Theorem {
  kGeneral = 1,            // any permutations, SMG
  kRandomReshuffling = 2,  // randomized reshuffling, SMG, expectation bound
  kSingleShuffle = 3,      // SSMG under bounded gradients
};

std::string_view to_string(Theorem theorem);

struct BoundConstants {
  double L = 0.0;
  double theta = 0.0;
  double sigma_sq = 0.0;
  std::optional<double> G;
  double beta = 0.0;
  std::size_t n = 0;
  double f_initial = 0.0;             // F(w~_0)
  double grad_norm_sq_initial = 0.0;  // ||grad F(w~_0)||^2
  double f_lower = 0.0;               // stands in for F_*
  double eta1 = 0.0;
  ScheduleSums sums;
};

struct BoundReport {
  Theorem theorem = Theorem::kGeneral;
  double lhs = 0.0;
  double rhs = 0.0;
  BoundConstants constants_used;
  bool premises_met = false;
  bool satisfied = false;
  double slack = 0.0;  // rhs - lhs
  /// Seed-averaged audits: number of runs and standard error of the mean LHS.
  std::size_t samples = 1;
  double standard_error = 0.0;
  std::string message;

  /// One-line human readable summary.
  std::string summary() const;
};

/// 4 [F(w~_0) - F_*] / ((1 - beta) S) + 9 sigma^2 L^2 (5 - 3 beta) / (1 - beta) * P / S
/// with S = sum eta_t, P = sum eta_{t-1}^3.
double theorem1_rhs(const RunRecord& record, const ProblemConstants& constants, double beta,
                    const ScheduleSums& sums);

/// 4 [F(w~_0) - F_*] / ((1 - beta) S) + 6 sigma^2 (5 - 3 beta) L^2 / (n (1 - beta)) * P / S
double theorem2_rhs(const RunRecord& record, const ProblemConstants& constants, double beta,
                    std::size_t n, const ScheduleSums& sums);

/// Delta_1 / (S (1 - beta^n)) + L^2 G^2 X / S + 4 beta^n G^2 / (1 - beta^n), X = sum xi_t^3,
/// Delta_1 = 2 [F(w~_0) - F_*] + (1/L + eta_1) ||grad F(w~_0)||^2 + 2 L eta_1^2 G^2.
/// Throws AuditRefused when G is unbounded.
double theorem3_rhs(const RunRecord& record, const ProblemConstants& constants, double beta,
                    std::size_t n, const ScheduleSums& sums);

/// Deterministic audit of an SMG (or plain shuffling SGD, beta = 0) run against the
/// general-permutation bound. Refuses when the schedule is increasing somewhere or
/// exceeds 1 / (L sqrt(K)).
BoundReport audit_theorem1(const RunRecord& record, const Schedule& schedule,
                           const ProblemConstants& constants);

/// Expectation audit over seeded randomized-reshuffling SMG runs sharing w~_0:
/// satisfied when mean(lhs) <= rhs + 3 standard errors.
BoundReport audit_theorem2(std::span<const RunRecord> records, const Schedule& schedule,
                           const ProblemConstants& constants, std::size_t n);

/// Deterministic audit of an SSMG run; needs finite G and eta_t <= 1/L.
BoundReport audit_theorem3(const RunRecord& record, const Schedule& schedule,
                           const ProblemConstants& constants, std::size_t n);

/// beta = (nu / T^{2/3})^{1/n}, so that beta^n = nu / T^{2/3}.
double single_shuffle_beta(double nu, std::size_t horizon, std::size_t n);

struct RateFit {
  std::vector<double> horizons;
  std::vector<double> metrics;
  double slope = 0.0;
  double intercept = 0.0;
  /// Fewer than four horizons were available.
  bool low_confidence = false;
};

/// Least-squares fit of log(metric) = intercept + slope * log(T).
RateFit fit_power_law(std::span<const double> horizons, std::span<const double> metrics);

struct RateExperiment {
  OptimizerConfig optimizer;
  ShufflingKind shuffling = ShufflingKind::kRandomizedReshuffling;
  double gamma = 1.0;  // eta_t = gamma / T^{1/3}
  std::vector<std::uint64_t> seeds{0};
  Vector w0;
  RunOptions options;
};

/// Runs the experiment for every horizon (constant rate gamma / T^{1/3}), takes the
/// median of the weighted gradient-norm average over seeds and fits the log-log slope.
RateFit fit_rate(const Problem& problem, const RateExperiment& experiment,
                 std::span<const std::size_t> horizons);

struct IdentityCheck {
  std::string name;
  double max_deviation = 0.0;
  bool applicable = true;
  bool passed = true;
  std::string note;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  bool all_passed() const;
};

/// Numerically checks the algebraic facts the convergence analysis relies on:
///   - SMG anchor m_0^{(t)} equals the mean of the epoch t-1 gradients
///   - SMG epoch displacement w~_t - w~_{t-1} = -(eta_t/n) sum_j (beta g_j^{(t-1)} + (1-beta) g_j^{(t)})
///   - SSMG momentum expansion across one epoch
///   - SSMG momentum bound ||m|| <= G (only when G is finite)
///   - sum_{t=1}^T cos(t pi / T) = -1 for T = 2..1000
/// Deviations are relative: ||a - b|| / (1 + ||b||).
IdentityReport identity_suite(const Problem& problem, double beta, std::size_t horizon,
                              const ShufflingStrategy& strategy, const Vector& w0, double gamma = 0.1,
                              double tolerance = 1e-10);

/// max over T in [2, max_horizon] of |sum_{t=1}^T cos(t pi / T) + 1|
double cosine_sum_deviation(std::size_t max_horizon = 1000);

}  // namespace smg
