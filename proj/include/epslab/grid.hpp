#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace epslab {

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

enum class Domain { UnitSquare, DiskMask };

enum class FdKind { DeltaPlus, DeltaMinus, TauPlus, TauMinus };

enum class FdScheme { Central, Forward };

/**
 * Uniform N x N lattice on the unit square, spacing h = 1/(N-1).
 * Node k sits at ((k % N) * h, (k / N) * h).  A disk domain keeps the
 * same lattice and masks out nodes outside the disk; interior nodes
 * are active nodes whose four lattice neighbours are all active.
 * Immutable after construction; safe to share across threads.
 */
class Grid {
public:
  static std::shared_ptr<const Grid> make_square(int n);
  static std::shared_ptr<const Grid> make_disk(int n,
                                               Eigen::Vector2d center = {0.5, 0.5},
                                               double radius = 0.5);

  int n() const { return n_; }
  double h() const { return h_; }
  Domain domain() const { return domain_; }
  int num_nodes() const { return n_ * n_; }

  int index(int ix, int iy) const { return iy * n_ + ix; }
  int ix(int node) const { return node % n_; }
  int iy(int node) const { return node / n_; }
  Eigen::Vector2d pos(int node) const { return {ix(node) * h_, iy(node) * h_}; }

  bool active(int node) const { return active_[node]; }
  bool interior(int node) const { return interior_[node]; }
  bool boundary(int node) const { return active_[node] && !interior_[node]; }

  const std::vector<int>& interior_nodes() const { return interior_nodes_; }
  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  const std::vector<int>& active_nodes() const { return active_nodes_; }

  /// Trapezoidal area weight of a node (h^2 scaled by 1/2 per lattice edge).
  double weight(int node) const { return weights_[node]; }

  /// Outward unit normal at a boundary node.  Square edges use the axis
  /// normal (corners get the normalized diagonal); disk masks use the
  /// exact normal of the underlying circle.
  Eigen::Vector2d outward_normal(int node) const;

  /// Arc-length weight of a boundary node for surface sums.
  double boundary_weight(int node) const;

  Eigen::Vector2d disk_center() const { return disk_center_; }
  double disk_radius() const { return disk_radius_; }

private:
  Grid(int n, Domain d, Eigen::Vector2d c, double r);

  int n_;
  double h_;
  Domain domain_;
  Eigen::Vector2d disk_center_;
  double disk_radius_;
  std::vector<uint8_t> active_;
  std::vector<uint8_t> interior_;
  std::vector<int> active_nodes_;
  std::vector<int> interior_nodes_;
  std::vector<int> boundary_nodes_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

/**
 * Nodal field with `dim` real components per node, stored nodes x dim.
 * `support` marks the nodes where the values are meaningful; operations
 * that lose rows near the boundary (differences, mollification) shrink it.
 */
struct GridField {
  GridPtr grid;
  Eigen::MatrixXd values;
  BoolArray support;

  int dim() const { return static_cast<int>(values.cols()); }

  Eigen::VectorXd at(int node) const { return values.row(node).transpose(); }
};

// Role aliases: displacement-like fields carry dim_V components,
// operator images carry dim_W.
using VectorField = GridField;
using TensorField = GridField;

GridField zero_field(GridPtr grid, int dim);

GridField field_from_function(
    GridPtr grid,
    const std::function<Eigen::VectorXd(const Eigen::Vector2d&)>& f, int dim);

/// In-plane rigid motion x -> rotation * (-x2, x1) + translation.
struct RigidMotion {
  double rotation = 0.0;
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();

  Eigen::Vector2d eval(const Eigen::Vector2d& x) const {
    return rotation * Eigen::Vector2d(-x[1], x[0]) + translation;
  }
};

struct RigidFit {
  RigidMotion motion;
  GridField residual;  // field minus fitted motion, supported on the region
};

/**
 * Finite difference of every component in direction s (0 or 1) with a
 * step of `h_steps` lattice cells:
 *   tau_plus    : v(x + m h e_s) - v(x)
 *   tau_minus   : v(x - m h e_s) - v(x)
 *   delta_plus  : tau_plus / (m h)
 *   delta_minus : -tau_minus / (m h)   (both deltas approximate d/dx_s)
 * The output support keeps only nodes where both stencil points are
 * supported, so each call shrinks the band near the boundary.
 */
GridField finite_difference(const GridField& field, int s, int h_steps,
                            FdKind kind);

/// Nodes of a full grid, of an axis-aligned index rectangle, of a ball.
BoolArray full_region(const Grid& grid);
BoolArray rect_region(const Grid& grid, int ix0, int ix1, int iy0, int iy1);
BoolArray ball_region(const Grid& grid, const Eigen::Vector2d& center,
                      double radius);

/**
 * Quadrature L^p norm over a region: (sum_x w(x) |field(x)|^p)^(1/p)
 * with trapezoidal weights w and the Euclidean norm across components.
 * p = infinity (pass p <= 0) gives the max node norm.
 */
double lp_norm(const GridField& field, double p, const BoolArray& region);
double lp_norm(const GridField& field, double p);

/// Region quadrature mass and weighted component means.
double region_mass(const Grid& grid, const BoolArray& region);
Eigen::VectorXd region_mean(const GridField& field, const BoolArray& region);

/**
 * Dyadic mean-oscillation seminorm: the maximum over all dyadic
 * subrectangles of K (up to max_depth splits per axis) of the weighted
 * mean of |field - mean(field)| on the subrectangle.  Subrectangles
 * with fewer than four nodes are skipped.
 */
double bmo_seminorm(const GridField& field, int ix0, int ix1, int iy0, int iy1,
                    int max_depth);

/// Least-squares rigid-motion fit on a region (unweighted node sums).
/// Requires at least three region nodes; throws std::invalid_argument
/// on degenerate regions.
RigidFit rigid_project(const GridField& field, const BoolArray& region);

/**
 * Discrete mollification with a radially symmetric compactly supported
 * bump of radius rho (rho >= h).  The stencil is normalized to unit
 * mass, so constants are preserved and affine fields are reproduced on
 * the shrunken support.
 */
GridField mollify(const GridField& field, double rho);

}  // namespace epslab
