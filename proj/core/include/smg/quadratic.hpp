#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "smg/problem.hpp"

namespace smg {

/// f(w; i) = 1/2 (w - c_i)^T A (w - c_i) with A symmetric positive definite.
///
/// Every constant is exact: grad f(w;i) - grad F(w) = A (cbar - c_i) does not depend
/// on w, so theta = 0 and sigma^2 = (1/n) sum_i ||A (cbar - c_i)||^2. The minimizer
/// is cbar and f_lower = F(cbar) = F_*. No finite gradient bound exists.
class QuadraticMeanProblem final : public Problem {
 public:
  QuadraticMeanProblem(std::vector<Vector> centers, Matrix curvature);

  std::size_t num_components() const override { return centers_.size(); }
  std::size_t dimension() const override { return static_cast<std::size_t>(a_.rows()); }

  double component_value(const Vector& w, std::size_t i) const override;
  void component_grad(const Vector& w, std::size_t i, Vector& out) const override;
  double full_value(const Vector& w) const override;
  void full_grad(const Vector& w, Vector& out) const override;
  const ProblemConstants& constants() const override { return constants_; }

  using Problem::component_grad;
  using Problem::full_grad;

  const Vector& minimizer() const { return mean_center_; }
  const Matrix& curvature() const { return a_; }
  const std::vector<Vector>& centers() const { return centers_; }

 private:
  std::vector<Vector> centers_;
  Matrix a_;
  Vector mean_center_;
  double spread_ = 0.0;  // (1/n) sum_i 1/2 (cbar - c_i)^T A (cbar - c_i)
  ProblemConstants constants_;
};

QuadraticMeanProblem quadratic_mean_problem(std::vector<Vector> centers, Matrix curvature);

/// Seeded audit fixture: centers ~ N(0, I), A = Q diag(eigs) Q^T with eigenvalues
/// spread log-uniformly in [1, condition].
QuadraticMeanProblem random_quadratic_problem(std::size_t n, std::size_t d, std::uint64_t seed,
                                              double condition = 4.0);

}  // namespace smg
