#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "smg/problem.hpp"

namespace smg {

struct SparseFeature {
  std::uint32_t index;  // 1-based column
  double value;
};

/// One labelled example. Feature indices are 1-based and strictly increasing.
struct SparseSample {
  int label = 1;  // -1 or +1
  std::vector<SparseFeature> features;

  double squared_norm() const;
  /// x^T w, where w is indexed from 0.
  double dot(const Vector& w) const;
};

/// Checks label, ordering and range of one sample; throws DimensionMismatch or
/// InvalidArgument.
void validate_sample(const SparseSample& sample, std::size_t d);

/// r(w) = (1/2) sum_j w_j^2 / (1 + w_j^2)
double nonconvex_regularizer(const Vector& w);

/// f(w; i) = log(1 + exp(-y x^T w)) + lambda r(w)
double logistic_component_value(const Vector& w, const SparseSample& sample, double lambda);

/// grad f(w; i) = -y s x + lambda r'(w),  s = 1 / (1 + exp(y x^T w)),
/// r'(w)_j = w_j / (1 + w_j^2)^2.
Vector logistic_component_grad(const Vector& w, const SparseSample& sample, double lambda);

/// Conservative constants for the regularized logistic loss:
///   L = max_i ||x_i||^2 / 4 + lambda
///   G = max_i ||x_i|| + lambda (3 sqrt(3) / 16) sqrt(d)
///   theta = 0, sigma^2 = 4 G^2, f_lower = 0.
ProblemConstants logistic_constants(std::span<const SparseSample> samples, double lambda,
                                    std::size_t d);

/// max_w |w| / (1 + w^2)^2, attained at w = 1/sqrt(3).
inline constexpr double kRegularizerGradPeak = 0.32475952641916445;  // 3*sqrt(3)/16

class LogisticProblem final : public Problem {
 public:
  /// `d` = 0 infers the dimension from the largest feature index.
  LogisticProblem(std::vector<SparseSample> samples, double lambda, std::size_t d = 0);

  std::size_t num_components() const override { return samples_.size(); }
  std::size_t dimension() const override { return d_; }

  double component_value(const Vector& w, std::size_t i) const override;
  void component_grad(const Vector& w, std::size_t i, Vector& out) const override;
  double full_value(const Vector& w) const override;
  void full_grad(const Vector& w, Vector& out) const override;
  const ProblemConstants& constants() const override { return constants_; }

  using Problem::component_grad;
  using Problem::full_grad;

  double lambda() const { return lambda_; }
  const std::vector<SparseSample>& samples() const { return samples_; }

 private:
  std::vector<SparseSample> samples_;
  double lambda_;
  std::size_t d_;
  ProblemConstants constants_;
};

}  // namespace smg
