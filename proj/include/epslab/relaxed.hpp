#pragma once

#include <Eigen/Core>

#include <vector>

#include "epslab/grid.hpp"
#include "epslab/integrand.hpp"
#include "epslab/operators.hpp"

namespace epslab {

/**
 * Scalar BV function on (0,1): piecewise affine between breakpoints
 * plus jump discontinuities.  trace_left pins u(0+); the right trace
 * follows from slopes and jumps.  datum_left/right are the boundary
 * values of the Dirichlet datum the function competes against.
 */
struct BVPiecewise1D {
  std::vector<double> breakpoints;  // 0 = x_0 < ... < x_M = 1
  std::vector<double> slopes;       // one per interval
  struct Jump {
    double x = 0.0;      // strictly inside (0,1)
    double height = 0.0; // u(x+) - u(x-)
  };
  std::vector<Jump> jumps;
  double trace_left = 0.0;
  double datum_left = 0.0;
  double datum_right = 0.0;

  double trace_right() const;
  /// Validates ordering of breakpoints, slope count, jump locations.
  void validate() const;
};

struct EnergyBreakdown {
  double absolutely_continuous = 0.0;
  double singular = 0.0;
  double boundary = 0.0;
  double total = 0.0;
};

/**
 * Relaxed energy of a 1D BV competitor against a boundary datum:
 *   sum_i f(slope_i) |I_i|  +  sum_j f^inf(height_j)
 *   + f^inf(-(u(0+) - datum(0))) + f^inf(u(1-) - datum(1)),
 * the boundary terms weighting the mismatch with the outward normal.
 * f must be one-dimensional; recession values come from the
 * extrapolated limit.
 */
EnergyBreakdown relaxed_energy_1d(const Integrand& f, const BVPiecewise1D& u);

/**
 * Discrete relaxed energy of a grid field u against a datum u0:
 * bulk term  sum_x w(x) f(eps_h u(x))   (trapezoidal weights, central
 * differences inside, one-sided on the boundary ring) and boundary
 * penalty  sum_{boundary} w_s(x) f^inf((u - u0)(x) (.) nu(x))
 * with the outward normal nu and arc-length weights w_s.  The jump
 * part is empty for nodal fields: discrete competitors have no
 * interior singular measure, mismatches concentrate on the boundary.
 */
EnergyBreakdown relaxed_energy_grid(const Integrand& f, const GridField& u,
                                    const GridField& u0);

}  // namespace epslab
