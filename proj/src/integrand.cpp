#include "epslab/integrand.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace epslab {

namespace {

constexpr double kTinyRadius = 1e-300;

// Radial profile phi(r) = (1 + r^p)^{1/p} and derivatives:
//   phi'(r)   = (1 + r^p)^{1/p - 1} r^{p-1}
//   phi''(r)  = (p - 1) r^{p-2} (1 + r^p)^{1/p - 2}
struct MpProfile {
  double p;

  double value(double r) const { return std::pow(1.0 + std::pow(r, p), 1.0 / p); }
  double d1(double r) const {
    if (r <= 0.0) return 0.0;
    return std::pow(1.0 + std::pow(r, p), 1.0 / p - 1.0) * std::pow(r, p - 1.0);
  }
  double d1_over_r(double r) const {
    if (r <= 0.0) {
      if (p == 2.0) return 1.0;
      return p > 2.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return std::pow(1.0 + std::pow(r, p), 1.0 / p - 1.0) * std::pow(r, p - 2.0);
  }
  double d2(double r) const {
    if (r <= 0.0) {
      if (p == 2.0) return 1.0;
      return p > 2.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return (p - 1.0) * std::pow(r, p - 2.0) *
           std::pow(1.0 + std::pow(r, p), 1.0 / p - 2.0);
  }
};

Eigen::VectorXd random_direction(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

}  // namespace

Integrand make_mp(double p, int dim) {
  if (!(p > 1.0)) throw std::invalid_argument("m_p needs p > 1");
  if (dim < 1) throw std::invalid_argument("integrand dimension must be positive");
  const MpProfile prof{p};

  Integrand f;
  f.dim = dim;
  {
    std::ostringstream name;
    name << "mp:" << p;
    f.name = name.str();
  }
  f.value = [prof](const Eigen::VectorXd& z) { return prof.value(z.norm()); };
  f.gradient = [prof](const Eigen::VectorXd& z) {
    const double r = z.norm();
    if (r <= kTinyRadius) return Eigen::VectorXd::Zero(z.size()).eval();
    return (prof.d1(r) / r * z).eval();
  };
  f.hessian_form = [prof](const Eigen::VectorXd& b, const Eigen::VectorXd& a) {
    const double r = b.norm();
    const double a2 = a.squaredNorm();
    if (r <= kTinyRadius) return prof.d2(0.0) * a2;
    const double along = b.dot(a) / r;
    // Clamp the orthogonal component: cancellation can leave it at
    // -eps for parallel directions, and the radial coefficient is many
    // orders smaller than the tangential one at large radii.
    const double ortho = std::max(0.0, a2 - along * along);
    return prof.d2(r) * along * along + prof.d1_over_r(r) * ortho;
  };
  f.c1 = 1.0;
  f.c2 = 1.0;
  f.mu = p + 1.0;
  f.mu_away_from_unit_ball = p != 2.0;
  if (p == 2.0) {
    f.lambda = 1.0;
    f.Lambda = 1.0;
    f.mu = 3.0;
  }
  return f;
}

Integrand make_integrand(const std::string& name, int dim) {
  if (name.rfind("mp:", 0) == 0) {
    const double p = std::stod(name.substr(3));
    return make_mp(p, dim);
  }
  throw std::invalid_argument("unknown integrand name: " + name);
}

RecessionResult recession(const Integrand& f, const Eigen::VectorXd& z,
                          int max_halvings) {
  if (z.size() != f.dim) throw std::invalid_argument("recession argument dimension");
  double t = 1.0;
  std::vector<double> iterates;
  iterates.reserve(max_halvings + 1);
  int growing_run = 0;
  for (int k = 0; k <= max_halvings; ++k) {
    const double a = t * f.value(z / t);
    if (!std::isfinite(a))
      throw std::domain_error("integrand overflow in the recession limit");
    if (!iterates.empty()) {
      if (a > iterates.back() * 1.5 + 1e-12) ++growing_run;
      else growing_run = 0;
      if (growing_run >= 3)
        throw std::domain_error("recession limit diverges: superlinear growth");
      if (std::abs(a - iterates.back()) <= 1e-15 * (1.0 + std::abs(a)) && k >= 3) {
        iterates.push_back(a);
        break;
      }
    }
    iterates.push_back(a);
    t *= 0.5;
  }

  RecessionResult res;
  const size_t m = iterates.size();
  res.value = iterates.back();
  res.error = m >= 2 ? std::abs(iterates[m - 1] - iterates[m - 2]) : 0.0;
  if (m >= 3) {
    // Aitken extrapolation of the geometric tail.
    const double d1 = iterates[m - 2] - iterates[m - 3];
    const double d2 = iterates[m - 1] - iterates[m - 2];
    const double dd = d2 - d1;
    if (std::abs(dd) > 1e-300) {
      const double extrapolated = iterates[m - 1] - d2 * d2 / dd;
      res.error = std::abs(extrapolated - iterates[m - 1]) +
                  std::abs(d2) * 1e-2;
      res.value = extrapolated;
    }
  }
  return res;
}

GrowthEstimate growth_constants(const Integrand& f,
                                const std::vector<double>& radii,
                                int directions, uint64_t seed) {
  if (radii.empty()) throw std::invalid_argument("growth check needs radii");
  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < f.dim; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(f.dim);
    e[i] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  for (int i = 0; i < directions; ++i) dirs.push_back(random_direction(rng, f.dim));

  GrowthEstimate est;
  est.c1_est = std::numeric_limits<double>::infinity();
  est.c2_est = 0.0;
  double first_radius_upper = -1.0, last_radius_upper = -1.0;
  double first_radius_lower = -1.0, last_radius_lower = -1.0;
  for (double r : radii) {
    if (r <= 0.0) throw std::invalid_argument("radii must be positive");
    double upper_here = 0.0;
    double lower_here = std::numeric_limits<double>::infinity();
    for (const auto& d : dirs) {
      const double v = f.value(r * d);
      if (!std::isfinite(v)) throw std::domain_error("integrand overflow");
      if (r >= 1.0) {
        est.c1_est = std::min(est.c1_est, v / r);
        lower_here = std::min(lower_here, v / r);
      }
      const double up = v / (1.0 + r);
      est.c2_est = std::max(est.c2_est, up);
      upper_here = std::max(upper_here, up);
    }
    if (first_radius_upper < 0.0) first_radius_upper = upper_here;
    last_radius_upper = upper_here;
    if (r >= 1.0) {
      if (first_radius_lower < 0.0) first_radius_lower = lower_here;
      last_radius_lower = lower_here;
    }
  }
  if (!std::isfinite(est.c1_est)) est.c1_est = 0.0;  // no radius reached 1
  if (est.c1_est <= 1e-12)
    throw std::domain_error("coercivity failure: f(Z)/|Z| collapses");
  // A lower ratio that keeps shrinking with the radius signals sublinear
  // growth even when it has not collapsed yet within the sweep.
  if (first_radius_lower > 0.0 && last_radius_lower < 0.45 * first_radius_lower)
    throw std::domain_error("coercivity failure: f(Z)/|Z| decays with the radius");
  if (last_radius_upper > 2.0 * first_radius_upper && last_radius_upper > 4.0)
    throw std::domain_error("superlinear growth: f(Z)/(1+|Z|) keeps increasing");
  return est;
}

MuReport mu_check(const Integrand& f, double mu, const MuCheckOptions& opts) {
  MuReport rep;
  rep.mu = mu;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const double lo = std::max(opts.b_min, 1e-3);
  const double hi = std::max(opts.b_max, lo * 10.0);
  const double llo = std::log(lo), lhi = std::log(hi);

  rep.lambda_est = std::numeric_limits<double>::infinity();
  rep.Lambda_est = 0.0;

  // Per-decade extremes reveal ratios that drift instead of settling.
  const int decades = std::max(1, static_cast<int>(std::ceil((lhi - llo) / std::log(10.0))));
  std::vector<double> decade_min(decades, std::numeric_limits<double>::infinity());
  std::vector<double> decade_max(decades, 0.0);

  auto consider = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& a) {
    const double a2 = a.squaredNorm();
    if (a2 < 1e-20) return;
    const double form = f.hessian_form(b, a);
    const double b2 = b.squaredNorm();
    const double low_ratio = form * std::pow(1.0 + b2, mu / 2.0) / a2;
    const double up_ratio = form * std::sqrt(1.0 + b2) / a2;
    const double r = std::sqrt(b2);
    int dec = 0;
    if (r > lo)
      dec = std::min(decades - 1,
                     static_cast<int>((std::log(r) - llo) / std::log(10.0)));
    decade_min[dec] = std::min(decade_min[dec], low_ratio);
    decade_max[dec] = std::max(decade_max[dec], up_ratio);
    if (low_ratio < rep.lambda_est) {
      rep.lambda_est = low_ratio;
      rep.worst_lower = {b, a, low_ratio};
    }
    if (up_ratio > rep.Lambda_est) {
      rep.worst_upper = {b, a, up_ratio};
      rep.Lambda_est = up_ratio;
    }
    ++rep.samples;
  };

  for (int i = 0; i < opts.b_samples; ++i) {
    double r;
    if (opts.b_min <= 0.0 && i % 97 == 0) {
      r = 0.0;  // include the origin when the range allows it
    } else {
      r = std::exp(llo + (lhi - llo) * unif(rng));
    }
    if (r < opts.b_min) r = opts.b_min;
    const Eigen::VectorXd dir = random_direction(rng, f.dim);
    const Eigen::VectorXd b = r * dir;

    consider(b, dir);  // parallel
    if (f.dim > 1) {
      Eigen::VectorXd perp = random_direction(rng, f.dim);
      perp -= perp.dot(dir) * dir;
      if (perp.norm() > 1e-8) consider(b, perp.normalized());
    }
    consider(b, random_direction(rng, f.dim));
  }

  double first_min = 0.0, last_min = 0.0, first_max = 0.0, last_max = 0.0;
  for (int d = 0; d < decades; ++d) {
    if (!std::isfinite(decade_min[d]) || decade_max[d] == 0.0) continue;
    if (first_min == 0.0) { first_min = decade_min[d]; first_max = decade_max[d]; }
    last_min = decade_min[d];
    last_max = decade_max[d];
  }
  rep.lower_decay = first_min > 0.0 ? last_min / first_min : 1.0;
  rep.upper_growth = first_max > 0.0 ? last_max / first_max : 1.0;

  const bool lower_positive = rep.lambda_est > 0.0 && std::isfinite(rep.Lambda_est);
  bool ok = lower_positive;
  std::string reason;
  if (!lower_positive) reason = "hessian ratio vanished or blew up";
  if (ok && f.lambda && !f.mu_away_from_unit_ball) {
    if (rep.lambda_est < *f.lambda * (1.0 - opts.rel_tol)) {
      ok = false;
      reason = "lower ratio falls below the declared lambda";
    }
  } else if (ok) {
    if (rep.lower_decay < 0.5) {
      ok = false;
      reason = "lower ratio decays across radius decades";
    } else if (rep.upper_growth > 2.0) {
      ok = false;
      reason = "upper ratio grows across radius decades";
    }
  }
  rep.pass = ok;
  rep.reason = reason;
  return rep;
}

CheckReport convexity_and_gradient_check(const Integrand& f, int samples,
                                         double radius, uint64_t seed) {
  CheckReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (int i = 0; i < samples; ++i) {
    const double r = radius * unif(rng) + 1e-3;
    const Eigen::VectorXd z = r * random_direction(rng, f.dim);
    ++rep.samples;

    const double form = f.hessian_form(z, random_direction(rng, f.dim));
    if (std::isfinite(form) && form < -1e-10) {
      rep.ok = false;
      rep.what = "hessian form is negative";
      rep.where = z;
      return rep;
    }

    const Eigen::VectorXd w = (radius * unif(rng) + 1e-3) * random_direction(rng, f.dim);
    const double mid = f.value(0.5 * (z + w));
    if (mid > 0.5 * f.value(z) + 0.5 * f.value(w) + 1e-10) {
      rep.ok = false;
      rep.what = "midpoint convexity fails";
      rep.where = z;
      return rep;
    }

    const Eigen::VectorXd g = f.gradient(z);
    const double step = 1e-5 * (1.0 + z.norm());
    Eigen::VectorXd fd(f.dim);
    for (int k = 0; k < f.dim; ++k) {
      Eigen::VectorXd hi = z, lo = z;
      hi[k] += step;
      lo[k] -= step;
      fd[k] = (f.value(hi) - f.value(lo)) / (2.0 * step);
    }
    if ((g - fd).norm() > 1e-5 * (1.0 + g.norm())) {
      rep.ok = false;
      rep.what = "gradient disagrees with finite differences";
      rep.where = z;
      return rep;
    }
  }
  return rep;
}

}  // namespace epslab
