#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epslab/grid.hpp"
#include "epslab/integrand.hpp"
#include "epslab/operators.hpp"

namespace epslab {

struct Stabilization {
  enum class Kind { Viscosity, PGrowth } kind = Kind::Viscosity;
  double delta = 1e-2;  // viscosity weight on |grad u|^2 / 2
  double alpha = 1e-2;  // p-growth weight on (1 + |eps u|^p)
  double p = 2.0;       // p-growth exponent
};

struct SolverOptions {
  double grad_tol = 1e-10;   // on the max-norm of the assembled gradient
  int max_iters = 4000;
  int lbfgs_memory = 10;
  double armijo_c = 1e-4;
  // Initial iterate: the datum field, optionally perturbed by a smooth
  // interior bump so descent has actual work to do.
  double perturb_amplitude = 0.0;
  int perturb_frequency = 1;
};

/**
 * Dirichlet problem: minimize over nodal fields pinned to `datum` on
 * the boundary
 *   F_stab[u] = sum_x w(x) [ f(eps_h u(x)) + stabilizer(x) ],
 * stabilizer = delta/2 |grad_h u|^2 or alpha (1 + |eps_h u|^p).
 * Differences are central at interior nodes and one-sided on the
 * boundary ring; w are trapezoidal weights.
 */
struct Problem {
  GridPtr grid;
  Integrand f;
  GridField datum;
  Stabilization stab;
  SolverOptions opts;
};

struct TrajectoryPoint {
  int iteration = 0;
  double stabilized_energy = 0.0;
  double energy = 0.0;  // without the stabilizer
};

struct SolveReport {
  GridField minimizer;
  std::vector<TrajectoryPoint> trajectory;
  double final_grad_norm = 0.0;
  double el_residual = 0.0;
  bool converged = false;
  int iterations = 0;
  double wall_seconds = 0.0;
};

/// L-BFGS descent with Armijo backtracking; falls back to the gradient
/// direction whenever the quasi-Newton direction fails the descent test.
SolveReport minimize_stabilized(const Problem& problem);

/// Same, but started from an explicit admissible field (boundary rows
/// are reset to the datum) instead of the perturbed datum.
SolveReport minimize_stabilized(const Problem& problem,
                                const GridField& initial);

/// Stabilized and bare energies of an admissible field.
double stabilized_energy(const Problem& problem, const GridField& u);
double bare_energy(const Problem& problem, const GridField& u);

/**
 * Euler-Lagrange residual: the largest energy-gradient component per
 * interior node, normalized by the discrete W^{1,infty} norm of the
 * corresponding nodal hat field.
 */
double el_residual(const Problem& problem, const GridField& u);

/// Weighted mean of eps_h over the domain; equal for all fields with
/// the same boundary values (discrete divergence theorem).
Eigen::VectorXd mean_symmetric_gradient(const Problem& problem,
                                        const GridField& u);

struct EkelandReport {
  bool certified = false;
  double worst_violation = 0.0;   // max F[v] - F[w] - sqrt(eps) d(v,w)
  std::string worst_competitor;   // description of the worst sampled w
  int competitors = 0;
};

/**
 * Samples competitors w (segments toward the datum, mollified blends,
 * random smooth bumps) and checks the variational-principle inequality
 *   F_stab[v] <= F_stab[w] + sqrt(eps_level) * d_L1(v, w).
 * An exact minimizer is certified at any eps_level >= 0.
 */
EkelandReport ekeland_certificate(const Problem& problem, const GridField& v,
                                  double eps_level, int trials = 64,
                                  uint64_t seed = 11);

struct CaccioppoliRow {
  Eigen::Vector2d center;
  double radius = 0.0;
  double numerator = 0.0;    // mean of |eps_h u|^p over B(z, r)
  double denominator = 0.0;  // mean of |(u - rigid fit)/r|^p over B(z, 2r)
  double ratio = 0.0;
  bool degenerate = false;   // denominator below 1e-14
};

struct CaccioppoliReport {
  std::vector<CaccioppoliRow> rows;
  double max_ratio = 0.0;
  bool any_degenerate = false;
};

CaccioppoliReport caccioppoli_ratio(const GridField& u, double p_growth,
                                    const std::vector<Eigen::Vector2d>& centers,
                                    const std::vector<double>& radii);

struct NikolskiiPoint {
  int h_steps = 0;
  double h = 0.0;
  double quotient = 0.0;
};

struct NikolskiiReport {
  std::vector<NikolskiiPoint> series;
  double max_over_min = 0.0;
  double loglog_slope = 0.0;  // least-squares slope of log Q vs log h
};

/**
 * Weighted Nikolskii quotient of the symmetric gradient:
 *   Q(h) = sum_s sum_x rho(x)^2 |tau+_{s,h} e(x)|^2 (1+|e(x)|)^{-mu} w(x) / h^{2 theta},
 * e = eps_h u, h = steps * grid spacing.  rho is a tensor smoothstep
 * cutoff: zero within `margin` of the boundary, one on the inner
 * rectangle [inner0, inner1]^2.
 */
NikolskiiReport nikolskii_quotient(const GridField& u, double mu, double theta,
                                   const std::vector<int>& h_steps,
                                   double margin = 0.1, double inner0 = 0.25,
                                   double inner1 = 0.75);

struct ExcessRow {
  Eigen::Vector2d center;
  double radius = 0.0;
  double excess = 0.0;        // mean of |eps_h u - mean| over the ball
  double hessian_min = 0.0;   // smallest eigenvalue of f''(mean)
  bool predicted_regular = false;
};

struct ExcessReport {
  std::vector<ExcessRow> rows;
  double regular_fraction = 0.0;
};

/// Excess decay scan: small excess plus positive-definite Hessian at
/// the mean marks a ball as predicted regular.
ExcessReport excess_scan(const GridField& u, const Integrand& f,
                         const std::vector<Eigen::Vector2d>& centers,
                         const std::vector<double>& radii,
                         double excess_threshold = 1e-3,
                         double hessian_bound = 1e-8);

struct SweepRow {
  double delta = 0.0;
  double energy = 0.0;            // bare F[u_delta]
  double stabilized_energy = 0.0;
  double l1_eps = 0.0;            // ||eps_h u||_1
  std::vector<double> lq_eps;     // one per requested q
  double bmo = 0.0;
  double sup_u = 0.0;
  double el_res = 0.0;
  bool ekeland_certified = false;
  double eps_level = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  bool energies_nonincreasing = false;
  double l1_max_over_min = 0.0;
  bool l1_within_factor = false;
  bool completed = false;
  std::string failure;  // set when a stage aborts the sweep
};

struct SweepOptions {
  std::vector<double> deltas = {1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> q_norms = {1.2, 1.5, 2.0};
  double l1_factor = 1.1;
  // BMO window (index rectangle fractions of the grid).
  double window0 = 0.25, window1 = 0.75;
  int bmo_depth = 3;
  int ekeland_trials = 48;
  uint64_t seed = 3;
};

/**
 * Vanishing-viscosity sweep: solves the problem for each delta in
 * decreasing order, warm-starting from the previous minimizer, and
 * records energy, norm, oscillation and certificate diagnostics.
 * Bare energies must be nonincreasing along the sweep; the spread of
 * ||eps_h u||_1 is compared against l1_factor.
 */
SweepReport viscosity_sweep(const Problem& base, const SweepOptions& opts = {});

}  // namespace epslab
