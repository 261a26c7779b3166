#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace smg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Certified constants of a finite-sum problem.
///
/// `L` is the component smoothness constant, `G` bounds every component gradient
/// norm (empty when no such bound exists), and (`theta`, `sigma_sq`) satisfy the
/// generalized variance inequality
///
///     (1/n) sum_i ||grad f(w;i) - grad F(w)||^2 <= theta ||grad F(w)||^2 + sigma_sq
///
/// at every w. `f_lower` is any lower bound on inf F.
struct ProblemConstants {
  double L = 0.0;
  std::optional<double> G;
  double theta = 0.0;
  double sigma_sq = 0.0;
  double f_lower = 0.0;

  bool has_bounded_gradient() const { return G.has_value(); }
};

/// F(w) = (1/n) sum_i f(w; i). Components are indexed 0..n-1.
///
/// Implementations are immutable after construction; every oracle is const and
/// safe to call from several threads at once.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::size_t num_components() const = 0;
  virtual std::size_t dimension() const = 0;

  virtual double component_value(const Vector& w, std::size_t i) const = 0;
  /// Writes grad f(w; i) into `out`, which must already have size d.
  virtual void component_grad(const Vector& w, std::size_t i, Vector& out) const = 0;

  virtual double full_value(const Vector& w) const;
  virtual void full_grad(const Vector& w, Vector& out) const;

  virtual const ProblemConstants& constants() const = 0;

  Vector component_grad(const Vector& w, std::size_t i) const;
  Vector full_grad(const Vector& w) const;
};

}  // namespace smg
