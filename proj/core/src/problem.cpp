#include "smg/problem.hpp"

namespace smg {

double Problem::full_value(const Vector& w) const {
  const std::size_t n = num_components();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += component_value(w, i);
  return sum / static_cast<double>(n);
}

void Problem::full_grad(const Vector& w, Vector& out) const {
  const std::size_t n = num_components();
  out.setZero(static_cast<Eigen::Index>(dimension()));
  Vector g(static_cast<Eigen::Index>(dimension()));
  for (std::size_t i = 0; i < n; ++i) {
    component_grad(w, i, g);
    out += g;
  }
  out /= static_cast<double>(n);
}

Vector Problem::component_grad(const Vector& w, std::size_t i) const {
  Vector out(static_cast<Eigen::Index>(dimension()));
  component_grad(w, i, out);
  return out;
}

Vector Problem::full_grad(const Vector& w) const {
  Vector out(static_cast<Eigen::Index>(dimension()));
  full_grad(w, out);
  return out;
}

}  // namespace smg
