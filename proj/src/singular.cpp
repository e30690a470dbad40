#include "epslab/singular.hpp"

#include "epslab/operators.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace epslab {

AdaptiveIntegral disk_area_of_pole(double alpha, double tol) {
  auto chord = [&](double phi) {
    return std::max(0.0, -2.0 * std::cos(phi - alpha));
  };
  AdaptiveIntegral out;
  int m = 64;
  auto value = [&](int mm) {
    double s = 0.0;
    for (int i = 0; i < mm; ++i) s += chord(2.0 * M_PI * i / mm);
    return s * 2.0 * M_PI / mm;
  };
  double prev = value(m);
  out.rel_change = std::numeric_limits<double>::infinity();
  while (m < (1 << 22)) {
    m *= 2;
    const double cur = value(m);
    out.rel_change = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
    prev = cur;
    if (out.rel_change <= tol) {
      out.converged = true;
      break;
    }
  }
  out.value = prev;
  out.points = m;
  return out;
}

AdaptiveIntegral ring_transit(double r, double alpha, double tol) {
  if (r <= 0.0 || r >= 1.0)
    throw std::invalid_argument("ring radius must lie in (0,1)");
  const double cx = std::cos(alpha), cy = std::sin(alpha);
  auto f = [&](double th) {
    const double dx = r * std::cos(th) - cx, dy = r * std::sin(th) - cy;
    return 1.0 / std::sqrt(dx * dx + dy * dy);
  };
  AdaptiveIntegral out;
  int m = 64;
  double sum = 0.0;
  for (int i = 0; i < m; ++i) sum += f(2.0 * M_PI * i / m);
  double prev = r * sum * 2.0 * M_PI / m;
  while (m < (1 << 22)) {
    double odd = 0.0;
    for (int i = 0; i < m; ++i) odd += f(2.0 * M_PI * (i + 0.5) / m);
    sum += odd;
    m *= 2;
    const double cur = r * sum * 2.0 * M_PI / m;
    out.rel_change = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
    prev = cur;
    if (out.rel_change <= tol) {
      out.converged = true;
      break;
    }
  }
  out.value = prev;
  out.points = m;
  return out;
}

double holomorphic_dev_defect(int n, double alpha, double radius,
                              int probe_stride) {
  if (probe_stride < 1 || (n - 1) % probe_stride != 0)
    throw std::invalid_argument("probe stride must divide the interval count");
  GridPtr grid = Grid::make_disk(n);
  const std::complex<double> z0(std::cos(alpha), std::sin(alpha));
  GridField u = zero_field(grid, 2);
  for (int node : grid->active_nodes()) {
    const Eigen::Vector2d x = grid->pos(node);
    const std::complex<double> z(2.0 * (x[0] - 0.5), 2.0 * (x[1] - 0.5));
    if (std::abs(z - z0) < 1e-12) continue;
    const std::complex<double> w = 1.0 / (z - z0);
    u.values(node, 0) = w.real();
    u.values(node, 1) = w.imag();
  }
  const auto dev = make_builtin(Builtin::TraceFreeSymmetricGradient, 2);
  const GridField e = apply(dev, u, FdScheme::Central);
  double sup = 0.0;
  for (int node : grid->active_nodes()) {
    if (!e.support[node]) continue;
    if (grid->ix(node) % probe_stride != 0 || grid->iy(node) % probe_stride != 0)
      continue;
    const Eigen::Vector2d x = grid->pos(node);
    if (2.0 * (x - Eigen::Vector2d(0.5, 0.5)).norm() > radius) continue;
    sup = std::max(sup, e.at(node).norm());
  }
  return sup;
}

}  // namespace epslab
