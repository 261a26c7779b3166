#include "smg/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smg/errors.hpp"

namespace smg {
namespace {

// log(1 + exp(-z)) without overflow.
double softplus_neg(double z) {
  return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

// 1 / (1 + exp(z))
double logistic_weight(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

void add_regularizer_grad(const Vector& w, double lambda, Vector& out) {
  const auto sq = (1.0 + w.array().square()).square();
  out.array() = lambda * w.array() / sq;
}

}  // namespace

double SparseSample::squared_norm() const {
  double s = 0.0;
  for (const auto& f : features) s += f.value * f.value;
  return s;
}

double SparseSample::dot(const Vector& w) const {
  double s = 0.0;
  for (const auto& f : features) s += f.value * w[f.index - 1];
  return s;
}

void validate_sample(const SparseSample& sample, std::size_t d) {
  if (sample.label != 1 && sample.label != -1) {
    throw InvalidArgument("sample label must be -1 or +1, got " + std::to_string(sample.label));
  }
  std::uint32_t prev = 0;
  for (const auto& f : sample.features) {
    if (f.index == 0 || f.index > d) {
      throw DimensionMismatch("feature index " + std::to_string(f.index) +
                                  " outside dimension " + std::to_string(d),
                              f.index);
    }
    if (f.index <= prev) {
      throw InvalidArgument("feature indices must be strictly increasing (index " +
                            std::to_string(f.index) + ")");
    }
    prev = f.index;
  }
}

double nonconvex_regularizer(const Vector& w) {
  const auto sq = w.array().square();
  return 0.5 * (sq / (1.0 + sq)).sum();
}

double logistic_component_value(const Vector& w, const SparseSample& sample, double lambda) {
  validate_sample(sample, static_cast<std::size_t>(w.size()));
  return softplus_neg(sample.label * sample.dot(w)) + lambda * nonconvex_regularizer(w);
}

Vector logistic_component_grad(const Vector& w, const SparseSample& sample, double lambda) {
  if (lambda < 0.0) throw InvalidArgument("lambda must be nonnegative");
  validate_sample(sample, static_cast<std::size_t>(w.size()));
  Vector out(w.size());
  add_regularizer_grad(w, lambda, out);
  const double y = sample.label;
  const double coeff = -y * logistic_weight(y * sample.dot(w));
  for (const auto& f : sample.features) out[f.index - 1] += coeff * f.value;
  return out;
}

ProblemConstants logistic_constants(std::span<const SparseSample> samples, double lambda,
                                    std::size_t d) {
  if (samples.empty()) throw InvalidArgument("logistic_constants: empty dataset");
  if (lambda < 0.0) throw InvalidArgument("lambda must be nonnegative");
  double max_sq = 0.0;
  for (const auto& s : samples) max_sq = std::max(max_sq, s.squared_norm());

  ProblemConstants c;
  // Logistic curvature is at most 1/4; |r''(w)| = |1 - 3w^2| / (1 + w^2)^3 <= 1.
  c.L = 0.25 * max_sq + lambda;
  c.G = std::sqrt(max_sq) + lambda * kRegularizerGradPeak * std::sqrt(static_cast<double>(d));
  c.theta = 0.0;
  c.sigma_sq = 4.0 * (*c.G) * (*c.G);
  c.f_lower = 0.0;
  return c;
}

LogisticProblem::LogisticProblem(std::vector<SparseSample> samples, double lambda, std::size_t d)
    : samples_(std::move(samples)), lambda_(lambda), d_(d) {
  if (samples_.empty()) throw InvalidArgument("LogisticProblem: empty dataset");
  if (lambda_ < 0.0) throw InvalidArgument("LogisticProblem: lambda must be nonnegative");
  if (d_ == 0) {
    for (const auto& s : samples_) {
      if (!s.features.empty()) d_ = std::max<std::size_t>(d_, s.features.back().index);
    }
  }
  if (d_ == 0) throw InvalidArgument("LogisticProblem: dimension must be at least 1");
  for (const auto& s : samples_) validate_sample(s, d_);
  constants_ = logistic_constants(samples_, lambda_, d_);
}

double LogisticProblem::component_value(const Vector& w, std::size_t i) const {
  const auto& s = samples_[i];
  return softplus_neg(s.label * s.dot(w)) + lambda_ * nonconvex_regularizer(w);
}

void LogisticProblem::component_grad(const Vector& w, std::size_t i, Vector& out) const {
  const auto& s = samples_[i];
  add_regularizer_grad(w, lambda_, out);
  const double y = s.label;
  const double coeff = -y * logistic_weight(y * s.dot(w));
  for (const auto& f : s.features) out[f.index - 1] += coeff * f.value;
}

double LogisticProblem::full_value(const Vector& w) const {
  double loss = 0.0;
  for (const auto& s : samples_) loss += softplus_neg(s.label * s.dot(w));
  return loss / static_cast<double>(samples_.size()) + lambda_ * nonconvex_regularizer(w);
}

void LogisticProblem::full_grad(const Vector& w, Vector& out) const {
  out.setZero(static_cast<Eigen::Index>(d_));
  for (const auto& s : samples_) {
    const double y = s.label;
    const double coeff = -y * logistic_weight(y * s.dot(w));
    for (const auto& f : s.features) out[f.index - 1] += coeff * f.value;
  }
  out /= static_cast<double>(samples_.size());
  out.array() += lambda_ * w.array() / (1.0 + w.array().square()).square();
}

}  // namespace smg
