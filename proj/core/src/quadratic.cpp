#include "smg/quadratic.hpp"

#include <cmath>
#include <string>

#include "smg/errors.hpp"
#include "smg/random.hpp"

namespace smg {

QuadraticMeanProblem::QuadraticMeanProblem(std::vector<Vector> centers, Matrix curvature)
    : centers_(std::move(centers)), a_(std::move(curvature)) {
  if (centers_.empty()) throw InvalidArgument("quadratic_mean_problem: need at least one center");
  if (a_.rows() == 0 || a_.rows() != a_.cols()) {
    throw InvalidArgument("quadratic_mean_problem: curvature must be a nonempty square matrix");
  }
  const Eigen::Index d = a_.rows();
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    if (centers_[i].size() != d) {
      throw DimensionMismatch("center " + std::to_string(i) + " has dimension " +
                                  std::to_string(centers_[i].size()) + ", expected " +
                                  std::to_string(d),
                              i);
    }
  }
  if ((a_ - a_.transpose()).norm() > 1e-12 * (1.0 + a_.norm())) {
    throw InvalidArgument("quadratic_mean_problem: curvature is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a_, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
    throw InvalidArgument("quadratic_mean_problem: curvature is not positive definite");
  }

  const double n = static_cast<double>(centers_.size());
  mean_center_ = Vector::Zero(d);
  for (const auto& c : centers_) mean_center_ += c;
  mean_center_ /= n;

  double sigma_sq = 0.0;
  for (const auto& c : centers_) {
    const Vector diff = mean_center_ - c;
    const Vector ad = a_ * diff;
    spread_ += 0.5 * diff.dot(ad);
    sigma_sq += ad.squaredNorm();
  }
  spread_ /= n;

  constants_.L = eig.eigenvalues().maxCoeff();
  constants_.G.reset();
  constants_.theta = 0.0;
  constants_.sigma_sq = sigma_sq / n;
  constants_.f_lower = spread_;
}

double QuadraticMeanProblem::component_value(const Vector& w, std::size_t i) const {
  const Vector diff = w - centers_[i];
  return 0.5 * diff.dot(a_ * diff);
}

void QuadraticMeanProblem::component_grad(const Vector& w, std::size_t i, Vector& out) const {
  out.noalias() = a_ * (w - centers_[i]);
}

double QuadraticMeanProblem::full_value(const Vector& w) const {
  const Vector diff = w - mean_center_;
  return 0.5 * diff.dot(a_ * diff) + spread_;
}

void QuadraticMeanProblem::full_grad(const Vector& w, Vector& out) const {
  out.noalias() = a_ * (w - mean_center_);
}

QuadraticMeanProblem quadratic_mean_problem(std::vector<Vector> centers, Matrix curvature) {
  return QuadraticMeanProblem(std::move(centers), std::move(curvature));
}

QuadraticMeanProblem random_quadratic_problem(std::size_t n, std::size_t d, std::uint64_t seed,
                                              double condition) {
  if (n == 0 || d == 0) throw InvalidArgument("random_quadratic_problem: n and d must be >= 1");
  if (!(condition >= 1.0)) throw InvalidArgument("random_quadratic_problem: condition must be >= 1");
  Rng rng(seed, Stream::kDataset);
  const auto dd = static_cast<Eigen::Index>(d);

  Matrix gauss(dd, dd);
  for (Eigen::Index j = 0; j < dd; ++j)
    for (Eigen::Index i = 0; i < dd; ++i) gauss(i, j) = rng.normal();
  const Matrix q = Eigen::HouseholderQR<Matrix>(gauss).householderQ();

  Vector eigs(dd);
  for (Eigen::Index i = 0; i < dd; ++i) {
    const double frac = dd == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(dd - 1);
    eigs[i] = std::pow(condition, frac);
  }
  Matrix a = q * eigs.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose()).eval();

  std::vector<Vector> centers;
  centers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector c(dd);
    for (Eigen::Index j = 0; j < dd; ++j) c[j] = rng.normal();
    centers.push_back(std::move(c));
  }
  return QuadraticMeanProblem(std::move(centers), std::move(a));
}

}  // namespace smg
