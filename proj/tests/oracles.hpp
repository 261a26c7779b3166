#pragma once

// Independent reference computations used as test oracles. Everything here is
// written directly from the closed forms with plain loops and std::vector, and
// shares no code with the library beyond the Problem interface it is handed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "smg/problem.hpp"

namespace smg::oracle {

inline double step_constant_k(double beta, double theta) {
  const double formula = 9.0 * (5.0 - 3.0 * beta) * (theta + 1.0) / (1.0 - beta);
  return formula > 2.5 ? formula : 2.5;
}

inline double step_constant_d(double beta, double theta, double n) {
  const double formula = 6.0 * (5.0 - 3.0 * beta) * (theta + n) / (n * (1.0 - beta));
  return formula > 5.0 / 3.0 ? formula : 5.0 / 3.0;
}

/// Central finite-difference gradient of a scalar function.
inline std::vector<double> fd_gradient(const std::function<double(const Vector&)>& f, const Vector& w,
                                       double h = 1e-5) {
  std::vector<double> g(static_cast<std::size_t>(w.size()));
  Vector p = w;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    p[j] = w[j] + h;
    const double up = f(p);
    p[j] = w[j] - h;
    const double down = f(p);
    p[j] = w[j];
    g[static_cast<std::size_t>(j)] = (up - down) / (2.0 * h);
  }
  return g;
}

/// log(1 + exp(-y x.w)) + lambda/2 sum w_j^2/(1+w_j^2), evaluated term by term
/// from dense x.
inline double logistic_loss(const std::vector<double>& x, int y, double lambda, const Vector& w) {
  double z = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) z += x[j] * w[static_cast<Eigen::Index>(j)];
  const double margin = -static_cast<double>(y) * z;
  double loss = margin > 0 ? margin + std::log1p(std::exp(-margin)) : std::log1p(std::exp(margin));
  for (Eigen::Index j = 0; j < w.size(); ++j) loss += lambda * 0.5 * w[j] * w[j] / (1.0 + w[j] * w[j]);
  return loss;
}

/// Plain-loop epoch runner. `kind` 0 = SMG, 1 = SSMG, 2 = SGD. Returns the
/// epoch-start iterates w~_0..w~_T.
inline std::vector<std::vector<double>> reference_trajectory(
    const Problem& problem, const std::vector<std::vector<std::size_t>>& perms,
    const std::vector<double>& etas, int kind, double beta, const std::vector<double>& w0) {
  const std::size_t n = problem.num_components();
  const std::size_t d = problem.dimension();
  std::vector<double> w = w0, m0(d, 0.0), v(d, 0.0), m(d, 0.0);
  std::vector<std::vector<double>> out{w};
  Vector wv(static_cast<Eigen::Index>(d)), g(static_cast<Eigen::Index>(d));
  for (std::size_t t = 0; t < etas.size(); ++t) {
    const double rate = etas[t] / static_cast<double>(n);
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) wv[static_cast<Eigen::Index>(j)] = w[j];
      problem.component_grad(wv, perms[t][i], g);
      for (std::size_t j = 0; j < d; ++j) {
        const double gj = g[static_cast<Eigen::Index>(j)];
        double step = gj;
        if (kind == 0) {
          step = beta * m0[j] + (1.0 - beta) * gj;
          v[j] += gj / static_cast<double>(n);
        } else if (kind == 1) {
          m[j] = beta * m[j] + (1.0 - beta) * gj;
          step = m[j];
        }
        w[j] -= rate * step;
      }
    }
    if (kind == 0) m0 = v;
    out.push_back(w);
  }
  return out;
}

/// Ordinary least squares slope of y on x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace smg::oracle
