#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "epslab/grid.hpp"

namespace epslab {

/**
 * First-order constant-coefficient operator A[D] = sum_s A_s d/dx_s
 * acting on fields with dim_V components.  The coefficients A_s are
 * dim_W x dim_V matrices in orthonormal coordinates of the target
 * space, so Euclidean norms of coordinate vectors equal Frobenius
 * norms of the tensors they represent.
 */
struct FirstOrderOperator {
  int n = 0;      // number of space dimensions
  int dim_v = 0;  // components of the argument field
  int dim_w = 0;  // components of the image
  std::vector<Eigen::MatrixXd> coeffs;  // n matrices, dim_w x dim_v
  std::string name;
};

enum class Builtin { Gradient, Divergence, SymmetricGradient, TraceFreeSymmetricGradient };

/// Built-in operators for any n >= 2.  Symmetric targets use the
/// orthonormal basis {E_ii} + {(E_ij + E_ji)/sqrt2, i<j}; the trace-free
/// target drops the trace direction.
FirstOrderOperator make_builtin(Builtin which, int n);

/// Builtin from its serialization name: grad, div, eps, eps_dev.
FirstOrderOperator make_builtin(const std::string& name, int n);

/// Symbol A[xi] = sum_s xi_s A_s and its adjoint A[xi]^T.
Eigen::MatrixXd symbol(const FirstOrderOperator& op, const Eigen::VectorXd& xi);
Eigen::MatrixXd adjoint_symbol(const FirstOrderOperator& op,
                               const Eigen::VectorXd& xi);

struct EllipticityReport {
  bool elliptic = false;
  double min_singular_value = 0.0;
  Eigen::VectorXd witness_xi;  // unit vector attaining the minimum found
  int samples_used = 0;
};

/**
 * Minimizes the smallest singular value of the symbol over the unit
 * sphere: deterministic coarse sampling followed by projected descent
 * with a numerical gradient.  The operator is elliptic iff the minimum
 * is positive; by one-homogeneity the sphere minimum is the global
 * margin.
 */
EllipticityReport ellipticity_margin(const FirstOrderOperator& op,
                                     int coarse_samples = 256,
                                     int refine_iters = 60,
                                     double tol = 1e-12);

struct KKReduction {
  bool exists = false;
  double residual = 0.0;             // ||B2 - C B1||_F / ||B2||_F, stacked coeffs
  std::optional<Eigen::MatrixXd> reduction;  // C when exists
};

/**
 * Least-squares check whether op2 factors through op1 via a constant
 * matrix C with A2_s = C A1_s for every s.  When the normalized
 * residual is at most tol the factorization exists and the L^1 bound
 * ||op2 phi||_1 <= c ||op1 phi||_1 holds with c = ||C||.
 */
KKReduction kk_reduction(const FirstOrderOperator& op1,
                         const FirstOrderOperator& op2, double tol = 1e-9);

/**
 * Nodal application with the given difference scheme.  Central
 * differences wherever both lattice neighbours are active; one-sided
 * differences on the boundary ring (Forward forces one-sided
 * everywhere).  The output has dim_w components on the active set.
 */
TensorField apply(const FirstOrderOperator& op, const GridField& field,
                  FdScheme scheme = FdScheme::Central);

// Conversions between an n x n (symmetric) matrix and the orthonormal
// coordinates used by the symmetric-target builtins.
Eigen::VectorXd sym_coords(const Eigen::MatrixXd& m);
Eigen::MatrixXd sym_from_coords(const Eigen::VectorXd& c, int n);
Eigen::VectorXd tracefree_coords(const Eigen::MatrixXd& m);

/// Symmetrized tensor product a (.) b = (a b^T + b a^T) / 2.
template <typename DA, typename DB>
Eigen::MatrixXd sym_tensor(const Eigen::MatrixBase<DA>& a,
                           const Eigen::MatrixBase<DB>& b) {
  return 0.5 * (a * b.transpose() + b * a.transpose());
}

}  // namespace epslab
