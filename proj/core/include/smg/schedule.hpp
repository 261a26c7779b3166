#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace smg {

enum class ScheduleKind { kConstant, kDiminishing, kExponential, kCosine, kCustom };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

/// Epoch learning rates eta_1..eta_T. Within epoch t every inner step uses eta_t / n.
///
///   constant     gamma / T^{1/3}
///   diminishing  gamma / (t + lambda)^{1/3}
///   exponential  gamma rho^{t/T} / T^{1/3}
///   cosine       gamma / T^{1/3} (1 + cos(t pi / T))      (eta_T = 0)
///
/// With `rr_scale_n` > 0 gamma is multiplied by rr_scale_n^{1/3}, the randomized
/// reshuffling scaling. A custom schedule carries an explicit list of rates.
class Schedule {
 public:
  static Schedule constant(double gamma, std::size_t horizon);
  static Schedule diminishing(double gamma, double lambda, std::size_t horizon);
  static Schedule exponential(double gamma, double rho, std::size_t horizon);
  static Schedule cosine(double gamma, std::size_t horizon);
  static Schedule custom(std::vector<double> etas);

  /// Returns a copy whose gamma carries the n^{1/3} randomized-reshuffling factor.
  Schedule with_rr_scaling(std::size_t n) const;
  /// Returns a copy with gamma multiplied by `factor` (custom rates are scaled directly).
  Schedule scaled(double factor) const;

  /// eta_t for 1 <= t <= T.
  double eta(std::size_t t) const;
  std::vector<double> etas() const;

  ScheduleKind kind() const { return kind_; }
  std::size_t horizon() const { return horizon_; }
  double gamma() const { return gamma_; }
  double lambda() const { return lambda_; }
  double rho() const { return rho_; }
  std::size_t rr_scale_n() const { return rr_scale_n_; }
  /// gamma including the randomized-reshuffling factor.
  double effective_gamma() const;

  bool is_nonincreasing() const;
  double max_eta() const;

 private:
  Schedule() = default;

  ScheduleKind kind_ = ScheduleKind::kConstant;
  std::size_t horizon_ = 1;
  double gamma_ = 0.0;
  double lambda_ = 0.0;
  double rho_ = 1.0;
  std::size_t rr_scale_n_ = 0;
  std::vector<double> custom_;
};

enum class CapKind { kGeneral, kRandomReshuffling, kBoundedGradient };

/// Theorem step-size ceiling. `constant` is K (general permutations) or D
/// (randomized reshuffling); max_eta = 1 / (L sqrt(constant)). For the bounded
/// gradient single-shuffle analysis the cap is simply 1/L (constant = 1).
struct StepCap {
  CapKind kind = CapKind::kGeneral;
  double constant = 0.0;
  double max_eta = 0.0;
};

/// K = max(5/2, 9 (5 - 3 beta)(theta + 1) / (1 - beta))
StepCap cap_general(double beta, double theta, double L);
/// D = max(5/3, 6 (5 - 3 beta)(theta + n) / (n (1 - beta)))
StepCap cap_rr(double beta, double theta, std::size_t n, double L);
/// eta_t <= 1/L
StepCap cap_bounded_gradient(double L);

/// True when every eta_t is within the cap.
bool satisfies_cap(const Schedule& schedule, const StepCap& cap);

/// Rescales gamma so that max_t eta_t equals `factor` * cap.max_eta, if it exceeds it.
Schedule enforce_cap(const Schedule& schedule, const StepCap& cap, double factor = 1.0);

struct ScheduleSums {
  double sum_eta = 0.0;             // sum_{t=1}^T eta_t
  double sum_eta_prev_cubed = 0.0;  // sum_{t=1}^T eta_{t-1}^3 with eta_0 = eta_1
  double sum_xi_cubed = 0.0;        // sum_{t=1}^T xi_t^3, xi_t = max(eta_t, eta_{t-1}), xi_1 = eta_1
};

ScheduleSums schedule_sums(const Schedule& schedule);

/// Gamma giving a grid value its conventional meaning: the per-epoch rate for
/// constant schedules, the multiplier of (1 + cos) for cosine, and eta_1 for the
/// diminishing and exponential schedules.
double gamma_for_initial_rate(ScheduleKind kind, double value, std::size_t horizon,
                              double lambda = 0.0, double rho = 1.0);

}  // namespace smg
