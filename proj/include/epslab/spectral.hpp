#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "epslab/operators.hpp"

namespace epslab {

/**
 * Real field on the N x N flat torus [0,1)^2, nodes at (i/N, j/N),
 * stored node-major (node = iy*N + ix) with one column per component.
 */
struct TorusField {
  int n = 0;
  Eigen::MatrixXd values;  // (n*n) x dim

  int dim() const { return static_cast<int>(values.cols()); }
};

TorusField torus_zero(int n, int dim);

/// Removes the mean of every component.
void project_zero_mean(TorusField& u);

/// Uniform-grid L^p norm on the torus, Euclidean across components.
double torus_lp_norm(const TorusField& u, double p);

/**
 * Spectral image A[D]u: per Fourier mode k the coefficient is
 * 2 pi i A[k] u_hat(k).  Nyquist rows are dropped (their derivative has
 * no consistent real representative).  Exact for band-limited fields.
 */
TorusField spectral_apply(const FirstOrderOperator& op, const TorusField& u);

/// Adjoint of spectral_apply under the uniform-grid inner products.
TorusField spectral_apply_adjoint(const FirstOrderOperator& op,
                                  const TorusField& w);

/**
 * Recovery of u from g = A[D]u for an elliptic operator:
 * u_hat(k) = (2 pi i)^{-1} (A[k]^T A[k])^{-1} A[k]^T g_hat(k), zero mean.
 * Requires g to have zero component means.
 */
TorusField recover(const FirstOrderOperator& op, const TorusField& g,
                   double ellipticity_tol = 1e-9);

/// || D u ||_p / || A[D] u ||_p with spectral derivatives and grid norms.
double korn_ratio(const FirstOrderOperator& op, const TorusField& u, double p);

/// Keep only modes with max(|k1|,|k2|) <= band (and zero mean).
TorusField band_limit(const TorusField& u, int band);

/// Spectral zero-padding onto a finer torus grid (new_n >= n).
TorusField upsample(const TorusField& u, int new_n);

struct RatioTracePoint {
  int iteration = 0;
  double ratio = 0.0;
  int resolution = 0;
};

struct OrnsteinResult {
  double best_ratio = 0.0;
  double p2_bound = 0.0;       // best L^2 ratio recorded for the operator
  bool exceeded_p2_bound = false;
  bool vacuous = false;        // op factors through the gradient: nothing to find
  TorusField best_field;
  std::vector<RatioTracePoint> trace;  // monotone best-so-far per iteration
};

struct OrnsteinOptions {
  std::vector<int> resolutions = {64};  // later entries warm-start from upsampling
  int budget = 5000;                    // ascent iterations per resolution
  uint64_t seed = 2024;
  double kappa_start = 1e-1;            // smoothing of |.| in the L^1 objective
  double kappa_min = 1e-5;
};

/**
 * Projected gradient ascent of the L^1 gradient-to-image ratio over
 * zero-mean fields band-limited to N/4.  Starts from the best L^2
 * field, restarts from a deterministic pair-of-diagonal-waves seed and
 * from random fields, and keeps the best field across restarts and
 * resolutions.  The trace records the monotone best ratio.
 */
OrnsteinResult ornstein_search(const FirstOrderOperator& op,
                               const OrnsteinOptions& opts = {});

}  // namespace epslab
