#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace epslab {

/**
 * Convex integrand of linear growth on R^dim together with its first
 * two derivatives.  hessian_form(B, A) evaluates <f''(B) A, A>; it may
 * return +infinity where the integrand is merely C^1.
 *
 * Metadata records declared constants when they are known exactly:
 * growth constants c1 |Z| <= f(Z) <= c2 (1 + |Z|) and, when available,
 * the mu-ellipticity triple
 *   lambda |A|^2 (1+|B|^2)^{-mu/2} <= <f''(B) A, A>
 *                                  <= Lambda |A|^2 (1+|B|^2)^{-1/2}.
 * `mu_away_from_unit_ball` marks triples valid only for |B| >= 1.
 */
struct Integrand {
  int dim = 0;
  std::string name;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      hessian_form;

  std::optional<double> c1, c2;
  std::optional<double> mu, lambda, Lambda;
  bool mu_away_from_unit_ball = false;
};

/**
 * The p-norm regularization m_p(Z) = (1 + |Z|^p)^{1/p}, p > 1.
 * m_2 is 3-elliptic with lambda = Lambda = 1; other p are (p+1)-elliptic
 * away from the unit ball.  Throws std::invalid_argument for p <= 1.
 */
Integrand make_mp(double p, int dim);

/// Parses integrand names of the external form "mp:<p>".
Integrand make_integrand(const std::string& name, int dim);

struct RecessionResult {
  double value = 0.0;
  double error = 0.0;  // estimated from the extrapolation tail
};

/**
 * Recession value f^inf(Z) = lim_{t->0} t f(Z/t) along the geometric
 * schedule t_k = 2^-k with Aitken extrapolation of the last iterates.
 * Divergent (superlinear) sequences raise std::domain_error.
 */
RecessionResult recession(const Integrand& f, const Eigen::VectorXd& z,
                          int max_halvings = 48);

struct GrowthEstimate {
  double c1_est = 0.0;  // min f(Z)/|Z| over samples with |Z| >= 1
  double c2_est = 0.0;  // max f(Z)/(1 + |Z|)
};

/**
 * Empirical growth constants over a radius sweep times a deterministic
 * direction set.  Throws std::domain_error if the coercivity ratio
 * collapses or the upper ratio keeps growing with the radius
 * (superlinear growth).
 */
GrowthEstimate growth_constants(const Integrand& f,
                                const std::vector<double>& radii,
                                int directions = 64, uint64_t seed = 0x9e3779b9);

struct MuWitness {
  Eigen::VectorXd b, a;
  double ratio = 0.0;
};

struct MuReport {
  bool pass = false;
  double mu = 0.0;
  double lambda_est = 0.0;   // min <f''(B)A,A> (1+|B|^2)^{mu/2} / |A|^2
  double Lambda_est = 0.0;   // max <f''(B)A,A> (1+|B|^2)^{1/2} / |A|^2
  MuWitness worst_lower;     // attains lambda_est
  MuWitness worst_upper;     // attains Lambda_est
  int samples = 0;
  double lower_decay = 1.0;  // last-decade min / first-decade min
  double upper_growth = 1.0; // last-decade max / first-decade max
  std::string reason;
};

struct MuCheckOptions {
  int b_samples = 4000;      // radii; each is paired with 3 directions of A
  double b_min = 0.0;
  double b_max = 1e4;
  uint64_t seed = 1;
  double rel_tol = 1e-6;     // slack against declared lambda
};

/**
 * Samples the ellipticity ratios for a trial exponent mu over radii
 * spanning [b_min, b_max] (log-spaced, plus the endpoints), pairing
 * every base point B with parallel, perpendicular and random directions
 * A.  Fails when the lower ratio drops below the declared lambda, or
 * -- in the absence of a declared constant -- when either ratio trends
 * to 0 / infinity across radius decades.
 */
MuReport mu_check(const Integrand& f, double mu,
                  const MuCheckOptions& opts = {});

struct CheckReport {
  bool ok = true;
  std::string what;          // first violation, empty when ok
  Eigen::VectorXd where;     // sample point of the first violation
  int samples = 0;
};

/**
 * Spot-checks convexity (nonnegative Hessian form, midpoint convexity)
 * and the consistency of `gradient` with central differences of
 * `value` on random samples.
 */
CheckReport convexity_and_gradient_check(const Integrand& f, int samples = 500,
                                         double radius = 10.0,
                                         uint64_t seed = 7);

}  // namespace epslab
