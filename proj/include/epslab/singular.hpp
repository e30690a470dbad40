#pragma once

#include "epslab/grid.hpp"

namespace epslab {

struct AdaptiveIntegral {
  double value = 0.0;
  double rel_change = 0.0;  // of the last refinement step
  bool converged = false;
  int points = 0;
};

/**
 * Integral of |1/(z - z0)| over the unit disk, z0 = e^{i alpha}.
 * Polar coordinates centered at the pole cancel the kernel against the
 * Jacobian, leaving the chord length max(0, -2 cos(phi - alpha)); the
 * angular integral is refined by doubling until the relative change is
 * at most tol.
 */
AdaptiveIntegral disk_area_of_pole(double alpha, double tol = 1e-8);

/**
 * Transit integral of |1/(z - z0)| over the circle |z| = r < 1:
 *   I(r) = r * int_0^{2pi} dtheta / |r e^{i theta} - e^{i alpha}|,
 * by trapezoid sums on the periodic grid with point doubling (previous
 * evaluations are reused).  Grows like 2 log(1/(1-r)) as r -> 1.
 */
AdaptiveIntegral ring_transit(double r, double alpha, double tol = 1e-9);

/**
 * Sup over grid-disk nodes with |z| <= radius of the trace-free
 * symmetric-gradient coordinates of the field (Re f, Im f),
 * f(z) = 1/(z - e^{i alpha}), on an n x n disk mask mapped to the unit
 * disk.  Holomorphic fields are conformal Killing fields, so the exact
 * defect is zero and the discrete value measures the stencil error.
 *
 * probe_stride restricts the sup to nodes whose indices are multiples
 * of the stride.  Passing the refinement factor from a coarser grid
 * keeps the sample points identical across resolutions, so a series of
 * defects measures the stencil error at fixed locations; the raw sup
 * would otherwise pick up nodes that creep toward the pole as the mesh
 * refines, and its decay is dominated by that drift, not by the scheme.
 */
double holomorphic_dev_defect(int n, double alpha, double radius,
                              int probe_stride = 1);

}  // namespace epslab
