#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "smg/dataio.hpp"
#include "smg/errors.hpp"
#include "smg/logistic.hpp"
#include "smg/quadratic.hpp"

namespace smg {
namespace {

SparseSample sample(int label, std::vector<SparseFeature> features) {
  SparseSample s;
  s.label = label;
  s.features = std::move(features);
  return s;
}

std::vector<double> dense(const SparseSample& s, std::size_t d) {
  std::vector<double> x(d, 0.0);
  for (const auto& f : s.features) x[f.index - 1] = f.value;
  return x;
}

Vector random_point(std::mt19937_64& gen, std::size_t d, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  Vector w(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = normal(gen);
  return w * (radius * unit(gen) / w.norm());
}

TEST(Logistic, GradientAtOriginIsHalfNegativeLabelTimesX) {
  const auto s = sample(1, {{1, 1.0}});
  const Vector g = logistic_component_grad(Vector::Zero(3), s, 0.01);
  EXPECT_DOUBLE_EQ(g[0], -0.5);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
  EXPECT_DOUBLE_EQ(g[2], 0.0);
}

TEST(Logistic, RegularizerDerivativeAtOneIsAQuarter) {
  // r'(w) = w / (1 + w^2)^2, so r'(1) = 1/4; confirm with a finite difference of r.
  const auto s = sample(1, {});
  const Vector w = Vector::Ones(1);
  const Vector g = logistic_component_grad(w, s, 1.0);
  // The loss term contributes -y s x = 0 here because the sample has no features.
  EXPECT_NEAR(g[0], 0.25, 1e-15);
  const auto fd = oracle::fd_gradient([](const Vector& v) { return nonconvex_regularizer(v); }, w);
  EXPECT_NEAR(fd[0], 0.25, 1e-9);
}

TEST(Logistic, GradientMatchesCentralDifferences) {
  std::mt19937_64 gen(11);
  const auto data = synth_binary_dataset(16, 5, 3, 0.8);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector w = random_point(gen, 5, 3.0);
    const auto& s = data[static_cast<std::size_t>(trial) % data.size()];
    const auto x = dense(s, 5);
    const auto fd = oracle::fd_gradient(
        [&](const Vector& v) { return oracle::logistic_loss(x, s.label, 0.01, v); }, w);
    const Vector g = logistic_component_grad(w, s, 0.01);
    double err = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      err += std::pow(g[static_cast<Eigen::Index>(j)] - fd[j], 2);
      scale += fd[j] * fd[j];
    }
    EXPECT_LE(std::sqrt(err), 1e-6 * std::max(1.0, std::sqrt(scale))) << "trial " << trial;
  }
}

TEST(Logistic, ValueMatchesDenseReference) {
  const auto data = synth_binary_dataset(8, 4, 5, 0.5);
  LogisticProblem p(data, 0.01, 4);
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector w = random_point(gen, 4, 5.0);
    double mean = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double ref = oracle::logistic_loss(dense(data[i], 4), data[i].label, 0.01, w);
      EXPECT_NEAR(p.component_value(w, i), ref, 1e-12 * (1.0 + ref));
      mean += ref;
    }
    mean /= static_cast<double>(data.size());
    EXPECT_NEAR(p.full_value(w), mean, 1e-12 * (1.0 + mean));
  }
}

TEST(Logistic, StableForLargeMargins) {
  const auto s = sample(-1, {{1, 1.0}});
  Vector w(1);
  w << 800.0;
  EXPECT_TRUE(std::isfinite(logistic_component_value(w, s, 0.0)));
  EXPECT_NEAR(logistic_component_value(w, s, 0.0), 800.0, 1e-9);
  const Vector g = logistic_component_grad(w, s, 0.0);
  EXPECT_NEAR(g[0], 1.0, 1e-12);
}

TEST(Logistic, DimensionMismatchNamesOffendingIndex) {
  const auto s = sample(1, {{1, 1.0}, {7, 2.0}});
  try {
    logistic_component_grad(Vector::Zero(3), s, 0.0);
    FAIL() << "expected DimensionMismatch";
  } catch (const DimensionMismatch& e) {
    EXPECT_EQ(e.offending_index(), 7u);
  }
}

TEST(Logistic, RejectsBadSamples) {
  EXPECT_THROW(validate_sample(sample(2, {{1, 1.0}}), 3), InvalidArgument);
  EXPECT_THROW(validate_sample(sample(1, {{2, 1.0}, {2, 1.0}}), 3), InvalidArgument);
  EXPECT_THROW(validate_sample(sample(1, {{3, 1.0}, {1, 1.0}}), 3), InvalidArgument);
  EXPECT_THROW(LogisticProblem({}, 0.01), InvalidArgument);
  EXPECT_THROW(LogisticProblem({sample(1, {{1, 1.0}})}, -1.0), InvalidArgument);
}

TEST(LogisticConstants, SingleUnitSample) {
  const std::vector<SparseSample> data{sample(1, {{1, 1.0}})};
  const auto c = logistic_constants(data, 0.0, 1);
  EXPECT_DOUBLE_EQ(c.L, 0.25);
  ASSERT_TRUE(c.G.has_value());
  EXPECT_DOUBLE_EQ(*c.G, 1.0);
  EXPECT_DOUBLE_EQ(c.sigma_sq, 4.0);
  EXPECT_DOUBLE_EQ(c.theta, 0.0);
  EXPECT_DOUBLE_EQ(c.f_lower, 0.0);

  // L: the 1-D loss log(1 + exp(-w)) has second derivative s(1 - s), maximised
  // on a grid at w = 0 with value 1/4.
  double peak = 0.0;
  for (double w = -10.0; w <= 10.0; w += 1e-3) {
    const double h = 1e-4;
    const double f = [](double z) { return std::log1p(std::exp(-z)); }(w);
    const double fp = std::log1p(std::exp(-(w + h)));
    const double fm = std::log1p(std::exp(-(w - h)));
    peak = std::max(peak, (fp - 2.0 * f + fm) / (h * h));
  }
  EXPECT_NEAR(peak, 0.25, 1e-6);
}

TEST(LogisticConstants, RegularizerTermOfG) {
  double peak = 0.0;
  for (double w = 0.0; w <= 5.0; w += 1e-6) peak = std::max(peak, w / std::pow(1.0 + w * w, 2));
  EXPECT_NEAR(kRegularizerGradPeak, peak, 1e-12);
  EXPECT_NEAR(kRegularizerGradPeak, 3.0 * std::sqrt(3.0) / 16.0, 1e-16);

  const std::vector<SparseSample> data{sample(1, {{1, 1.0}})};
  const auto c = logistic_constants(data, 0.01, 4);
  EXPECT_NEAR(*c.G, 1.0 + 0.01 * 0.32475952641916445 * 2.0, 1e-15);
  EXPECT_THROW(logistic_constants(std::vector<SparseSample>{}, 0.01, 4), InvalidArgument);
}

TEST(LogisticConstants, HoldAtRandomPoints) {
  const auto data = synth_binary_dataset(24, 5, 7, 0.7);
  LogisticProblem p(data, 0.01, 5);
  const auto& c = p.constants();
  std::mt19937_64 gen(5);
  Vector g(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector w = random_point(gen, 5, 10.0);
    const Vector full = p.full_grad(w);
    double variance = 0.0;
    for (std::size_t i = 0; i < p.num_components(); ++i) {
      p.component_grad(w, i, g);
      EXPECT_LE(g.norm(), *c.G * (1.0 + 1e-12));
      variance += (g - full).squaredNorm();
    }
    variance /= static_cast<double>(p.num_components());
    EXPECT_LE(variance, c.theta * full.squaredNorm() + c.sigma_sq);
    EXPECT_LE(c.f_lower, p.full_value(w));
  }
}

TEST(Problems, FullGradientIsMeanOfComponents) {
  const auto data = synth_binary_dataset(20, 6, 1, 0.6);
  LogisticProblem logistic(data, 0.01, 6);
  const auto quad = random_quadratic_problem(8, 3, 4);
  std::mt19937_64 gen(8);
  for (const Problem* p : {static_cast<const Problem*>(&logistic), static_cast<const Problem*>(&quad)}) {
    const std::size_t d = p->dimension();
    for (int trial = 0; trial < 100; ++trial) {
      const Vector w = random_point(gen, d, 4.0);
      Vector mean = Vector::Zero(static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < p->num_components(); ++i) mean += p->component_grad(w, i);
      mean /= static_cast<double>(p->num_components());
      const Vector full = p->full_grad(w);
      EXPECT_LE((full - mean).norm(), 1e-12 * std::max(1.0, mean.norm()));
    }
  }
}

TEST(Quadratic, EqualCentersHaveNoVariance) {
  Vector c(2);
  c << 0.3, -1.2;
  const auto p = quadratic_mean_problem({c, c, c}, Matrix::Identity(2, 2) * 2.0);
  EXPECT_DOUBLE_EQ(p.constants().sigma_sq, 0.0);
  EXPECT_DOUBLE_EQ(p.constants().f_lower, 0.0);
  EXPECT_DOUBLE_EQ(p.full_value(c), 0.0);
}

TEST(Quadratic, TwoSymmetricCenters) {
  Vector c1(2), c2(2);
  c1 << 1.0, 0.0;
  c2 << -1.0, 0.0;
  const auto p = quadratic_mean_problem({c1, c2}, Matrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(p.constants().sigma_sq, 1.0);
  EXPECT_DOUBLE_EQ(p.constants().L, 1.0);
  EXPECT_DOUBLE_EQ(p.constants().theta, 0.0);
  EXPECT_FALSE(p.constants().has_bounded_gradient());

  // F is the mean of the two components, each equal to 1/2 at the origin.
  EXPECT_DOUBLE_EQ(p.full_value(Vector::Zero(2)), 0.5);
  EXPECT_DOUBLE_EQ(p.constants().f_lower, 0.5);
  double grid_min = 1e300;
  for (double x = -2.0; x <= 2.0; x += 0.01) {
    for (double y = -2.0; y <= 2.0; y += 0.01) {
      Vector w(2);
      w << x, y;
      grid_min = std::min(grid_min, p.full_value(w));
    }
  }
  EXPECT_NEAR(grid_min, p.constants().f_lower, 1e-9);
  EXPECT_GE(grid_min, p.constants().f_lower - 1e-15);
}

TEST(Quadratic, StationaryAtMeanCenter) {
  const auto p = random_quadratic_problem(8, 3, 21, 10.0);
  EXPECT_LE(p.full_grad(p.minimizer()).norm(), 1e-14);
  EXPECT_NEAR(p.full_value(p.minimizer()), p.constants().f_lower, 1e-14);
}

TEST(Quadratic, ConstantsMatchDirectComputation) {
  const auto p = random_quadratic_problem(6, 4, 2, 5.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p.curvature());
  EXPECT_NEAR(p.constants().L, eig.eigenvalues().maxCoeff(), 1e-12);
  EXPECT_NEAR(eig.eigenvalues().minCoeff(), 1.0, 1e-10);
  EXPECT_NEAR(eig.eigenvalues().maxCoeff(), 5.0, 1e-10);
  // Variance is independent of w for quadratics and equals sigma^2 exactly.
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector w = random_point(gen, 4, 10.0);
    const Vector full = p.full_grad(w);
    double variance = 0.0;
    for (std::size_t i = 0; i < 6; ++i) variance += (p.component_grad(w, i) - full).squaredNorm();
    EXPECT_NEAR(variance / 6.0, p.constants().sigma_sq, 1e-10 * (1.0 + p.constants().sigma_sq));
  }
}

TEST(Quadratic, RejectsInvalidCurvature) {
  Vector c = Vector::Zero(2);
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  Matrix indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(quadratic_mean_problem({c}, asym), InvalidArgument);
  EXPECT_THROW(quadratic_mean_problem({c}, indefinite), InvalidArgument);
  EXPECT_THROW(quadratic_mean_problem({}, Matrix::Identity(2, 2)), InvalidArgument);
  EXPECT_THROW(quadratic_mean_problem({Vector::Zero(3)}, Matrix::Identity(2, 2)), DimensionMismatch);
}

TEST(Quadratic, SeededFixtureIsReproducible) {
  const auto a = random_quadratic_problem(5, 3, 9);
  const auto b = random_quadratic_problem(5, 3, 9);
  EXPECT_EQ(a.curvature(), b.curvature());
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.centers()[i], b.centers()[i]);
}

}  // namespace
}  // namespace smg
