#include "epslab/relaxed.hpp"

#include <cmath>
#include <stdexcept>

namespace epslab {

double BVPiecewise1D::trace_right() const {
  double v = trace_left;
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
    v += slopes[i] * (breakpoints[i + 1] - breakpoints[i]);
  for (const auto& j : jumps) v += j.height;
  return v;
}

void BVPiecewise1D::validate() const {
  if (breakpoints.size() < 2)
    throw std::invalid_argument("need at least the two endpoints");
  if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
    throw std::invalid_argument("breakpoints must start at 0 and end at 1");
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw std::invalid_argument("breakpoints must be strictly increasing");
  if (slopes.size() + 1 != breakpoints.size())
    throw std::invalid_argument("one slope per interval is required");
  for (const auto& j : jumps)
    if (!(j.x > 0.0 && j.x < 1.0))
      throw std::invalid_argument("jumps must sit strictly inside (0,1)");
}

EnergyBreakdown relaxed_energy_1d(const Integrand& f, const BVPiecewise1D& u) {
  if (f.dim != 1)
    throw std::invalid_argument("1D energies need a scalar integrand");
  u.validate();

  EnergyBreakdown out;
  Eigen::VectorXd z(1);
  for (size_t i = 0; i + 1 < u.breakpoints.size(); ++i) {
    z[0] = u.slopes[i];
    out.absolutely_continuous += f.value(z) * (u.breakpoints[i + 1] - u.breakpoints[i]);
  }
  for (const auto& j : u.jumps) {
    z[0] = j.height;
    out.singular += recession(f, z).value;
  }
  z[0] = -(u.trace_left - u.datum_left);
  out.boundary += recession(f, z).value;
  z[0] = u.trace_right() - u.datum_right;
  out.boundary += recession(f, z).value;
  out.total = out.absolutely_continuous + out.singular + out.boundary;
  return out;
}

EnergyBreakdown relaxed_energy_grid(const Integrand& f, const GridField& u,
                                    const GridField& u0) {
  if (u.dim() != 2 || u0.dim() != 2)
    throw std::invalid_argument("grid energies act on planar vector fields");
  if (f.dim != 3)
    throw std::invalid_argument("integrand must act on symmetric 2x2 coordinates");
  if (u.grid != u0.grid)
    throw std::invalid_argument("field and datum must share a grid");
  const Grid& g = *u.grid;

  const auto eps = make_builtin(Builtin::SymmetricGradient, 2);
  const GridField eps_u = apply(eps, u, FdScheme::Central);

  EnergyBreakdown out;
  for (int node : g.active_nodes()) {
    if (!eps_u.support(node)) continue;
    out.absolutely_continuous += g.weight(node) * f.value(eps_u.at(node));
  }
  for (int node : g.boundary_nodes()) {
    const Eigen::Vector2d nu = g.outward_normal(node);
    const Eigen::Vector2d mism = u.at(node) - u0.at(node);
    const Eigen::Matrix2d pairing = sym_tensor(mism, nu);
    const Eigen::VectorXd coords = sym_coords(pairing);
    out.boundary += g.boundary_weight(node) * recession(f, coords).value;
  }
  out.total = out.absolutely_continuous + out.singular + out.boundary;
  return out;
}

}  // namespace epslab
