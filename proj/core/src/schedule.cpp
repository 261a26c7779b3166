#include "smg/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "smg/errors.hpp"

namespace smg {
namespace {

void check_horizon(std::size_t horizon) {
  if (horizon == 0) throw InvalidArgument("schedule horizon T must be >= 1");
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be positive");
}

void check_beta(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw InvalidArgument("momentum weight beta must lie in [0, 1), got " + std::to_string(beta));
  }
}

}  // namespace

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kConstant: return "constant";
    case ScheduleKind::kDiminishing: return "diminishing";
    case ScheduleKind::kExponential: return "exponential";
    case ScheduleKind::kCosine: return "cosine";
    case ScheduleKind::kCustom: return "custom";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "constant" || name == "const") return ScheduleKind::kConstant;
  if (name == "diminishing" || name == "dim") return ScheduleKind::kDiminishing;
  if (name == "exponential" || name == "exp") return ScheduleKind::kExponential;
  if (name == "cosine" || name == "cos") return ScheduleKind::kCosine;
  throw InvalidArgument("unknown schedule kind '" + std::string(name) + "'");
}

Schedule Schedule::constant(double gamma, std::size_t horizon) {
  check_gamma(gamma);
  check_horizon(horizon);
  Schedule s;
  s.kind_ = ScheduleKind::kConstant;
  s.gamma_ = gamma;
  s.horizon_ = horizon;
  return s;
}

Schedule Schedule::diminishing(double gamma, double lambda, std::size_t horizon) {
  check_gamma(gamma);
  check_horizon(horizon);
  if (!(lambda >= 0.0)) throw InvalidArgument("diminishing schedule: lambda must be >= 0");
  Schedule s;
  s.kind_ = ScheduleKind::kDiminishing;
  s.gamma_ = gamma;
  s.lambda_ = lambda;
  s.horizon_ = horizon;
  return s;
}

Schedule Schedule::exponential(double gamma, double rho, std::size_t horizon) {
  check_gamma(gamma);
  check_horizon(horizon);
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidArgument("exponential schedule: rho must lie in (0, 1]");
  Schedule s;
  s.kind_ = ScheduleKind::kExponential;
  s.gamma_ = gamma;
  s.rho_ = rho;
  s.horizon_ = horizon;
  return s;
}

Schedule Schedule::cosine(double gamma, std::size_t horizon) {
  check_gamma(gamma);
  if (horizon < 2) throw InvalidArgument("cosine schedule needs T >= 2 (eta_T = 0)");
  Schedule s;
  s.kind_ = ScheduleKind::kCosine;
  s.gamma_ = gamma;
  s.horizon_ = horizon;
  return s;
}

Schedule Schedule::custom(std::vector<double> etas) {
  if (etas.empty()) throw InvalidArgument("custom schedule: empty rate list");
  for (double e : etas) {
    if (!std::isfinite(e) || e < 0.0) throw InvalidArgument("custom schedule: rates must be finite and >= 0");
  }
  Schedule s;
  s.kind_ = ScheduleKind::kCustom;
  s.horizon_ = etas.size();
  s.gamma_ = 1.0;
  s.custom_ = std::move(etas);
  return s;
}

Schedule Schedule::with_rr_scaling(std::size_t n) const {
  if (n == 0) throw InvalidArgument("rr scaling: n must be >= 1");
  Schedule s = *this;
  s.rr_scale_n_ = n;
  return s;
}

Schedule Schedule::scaled(double factor) const {
  if (!(factor > 0.0)) throw InvalidArgument("schedule scale factor must be positive");
  Schedule s = *this;
  s.gamma_ *= factor;
  return s;
}

double Schedule::effective_gamma() const {
  return rr_scale_n_ > 0 ? gamma_ * std::cbrt(static_cast<double>(rr_scale_n_)) : gamma_;
}

double Schedule::eta(std::size_t t) const {
  if (t < 1 || t > horizon_) {
    throw InvalidArgument("eta: epoch " + std::to_string(t) + " outside 1.." + std::to_string(horizon_));
  }
  const double g = effective_gamma();
  const double T = static_cast<double>(horizon_);
  const double td = static_cast<double>(t);
  switch (kind_) {
    case ScheduleKind::kConstant: return g / std::cbrt(T);
    case ScheduleKind::kDiminishing: return g / std::cbrt(td + lambda_);
    case ScheduleKind::kExponential: return g * std::pow(rho_, td / T) / std::cbrt(T);
    case ScheduleKind::kCosine: return g / std::cbrt(T) * (1.0 + std::cos(td * std::numbers::pi / T));
    case ScheduleKind::kCustom: return g * custom_[t - 1];
  }
  return 0.0;
}

std::vector<double> Schedule::etas() const {
  std::vector<double> out(horizon_);
  for (std::size_t t = 1; t <= horizon_; ++t) out[t - 1] = eta(t);
  return out;
}

bool Schedule::is_nonincreasing() const {
  double prev = eta(1);
  for (std::size_t t = 2; t <= horizon_; ++t) {
    const double cur = eta(t);
    if (cur > prev) return false;
    prev = cur;
  }
  return true;
}

double Schedule::max_eta() const {
  const auto e = etas();
  return *std::max_element(e.begin(), e.end());
}

StepCap cap_general(double beta, double theta, double L) {
  check_beta(beta);
  if (!(theta >= 0.0)) throw InvalidArgument("theta must be >= 0");
  if (!(L > 0.0)) throw InvalidArgument("L must be positive");
  const double k = std::max(2.5, 9.0 * (5.0 - 3.0 * beta) * (theta + 1.0) / (1.0 - beta));
  return {CapKind::kGeneral, k, 1.0 / (L * std::sqrt(k))};
}

StepCap cap_rr(double beta, double theta, std::size_t n, double L) {
  check_beta(beta);
  if (!(theta >= 0.0)) throw InvalidArgument("theta must be >= 0");
  if (!(L > 0.0)) throw InvalidArgument("L must be positive");
  if (n == 0) throw InvalidArgument("n must be >= 1");
  const double nd = static_cast<double>(n);
  const double d = std::max(5.0 / 3.0, 6.0 * (5.0 - 3.0 * beta) * (theta + nd) / (nd * (1.0 - beta)));
  return {CapKind::kRandomReshuffling, d, 1.0 / (L * std::sqrt(d))};
}

StepCap cap_bounded_gradient(double L) {
  if (!(L > 0.0)) throw InvalidArgument("L must be positive");
  return {CapKind::kBoundedGradient, 1.0, 1.0 / L};
}

bool satisfies_cap(const Schedule& schedule, const StepCap& cap) {
  return schedule.max_eta() <= cap.max_eta;
}

Schedule enforce_cap(const Schedule& schedule, const StepCap& cap, double factor) {
  if (!(factor > 0.0 && factor <= 1.0)) throw InvalidArgument("enforce_cap: factor must lie in (0, 1]");
  const double peak = schedule.max_eta();
  const double target = factor * cap.max_eta;
  if (peak <= target) return schedule;
  return schedule.scaled(target / peak);
}

ScheduleSums schedule_sums(const Schedule& schedule) {
  ScheduleSums s;
  double prev = schedule.eta(1);  // eta_0 := eta_1
  for (std::size_t t = 1; t <= schedule.horizon(); ++t) {
    const double cur = schedule.eta(t);
    const double xi = t == 1 ? cur : std::max(cur, prev);
    s.sum_eta += cur;
    s.sum_eta_prev_cubed += prev * prev * prev;
    s.sum_xi_cubed += xi * xi * xi;
    prev = cur;
  }
  return s;
}

double gamma_for_initial_rate(ScheduleKind kind, double value, std::size_t horizon, double lambda,
                              double rho) {
  check_horizon(horizon);
  const double T = static_cast<double>(horizon);
  switch (kind) {
    case ScheduleKind::kConstant:
    case ScheduleKind::kCosine:
      return value * std::cbrt(T);
    case ScheduleKind::kDiminishing:
      return value * std::cbrt(1.0 + lambda);
    case ScheduleKind::kExponential:
      return value * std::cbrt(T) / std::pow(rho, 1.0 / T);
    case ScheduleKind::kCustom:
      return value;
  }
  return value;
}

}  // namespace smg
