#include <doctest.h>

#include "epslab/integrand.hpp"

#include <cmath>
#include <random>

using namespace epslab;

namespace {

Eigen::VectorXd random_point(std::mt19937_64& rng, int dim, double radius) {
  std::normal_distribution<double> gauss;
  Eigen::VectorXd z(dim);
  for (int i = 0; i < dim; ++i) z[i] = gauss(rng);
  const double len = z.norm();
  if (len > 0) z *= radius / len;
  return z;
}

Integrand quadratic(int dim) {
  Integrand f;
  f.dim = dim;
  f.name = "quadratic";
  f.value = [](const Eigen::VectorXd& z) { return z.squaredNorm(); };
  f.gradient = [](const Eigen::VectorXd& z) { return Eigen::VectorXd(2.0 * z); };
  f.hessian_form = [](const Eigen::VectorXd&, const Eigen::VectorXd& a) {
    return 2.0 * a.squaredNorm();
  };
  return f;
}

}  // namespace

TEST_CASE("p-norm regularization basics") {
  const Integrand f = make_mp(2.0, 3);
  CHECK(f.dim == 3);
  CHECK(f.name.rfind("mp:", 0) == 0);
  CHECK(f.value(Eigen::VectorXd::Zero(3)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.c1.value() == doctest::Approx(1.0));
  CHECK(f.c2.value() == doctest::Approx(1.0));
  CHECK(f.mu.value() == doctest::Approx(3.0));
  CHECK(f.lambda.value() == doctest::Approx(1.0));
  CHECK_FALSE(f.mu_away_from_unit_ball);

  Eigen::Vector3d z(3.0, -4.0, 12.0);  // |z| = 13
  CHECK(f.value(z) == doctest::Approx(std::sqrt(170.0)).epsilon(1e-15));
  const Eigen::VectorXd g = f.gradient(z);
  CHECK((g - z / std::sqrt(170.0)).norm() <= 1e-14);

  const Integrand f4 = make_mp(4.0, 3);
  CHECK(f4.mu.value() == doctest::Approx(5.0));
  CHECK(f4.mu_away_from_unit_ball);
  CHECK_FALSE(f4.lambda.has_value());

  CHECK_THROWS_AS(make_mp(1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_mp(0.5, 3), std::invalid_argument);
}

TEST_CASE("integrand name parsing") {
  const Integrand f = make_integrand("mp:2.5", 2);
  CHECK(f.dim == 2);
  CHECK(f.value(Eigen::VectorXd::Zero(2)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_integrand("huber:1", 2), std::invalid_argument);
  CHECK_THROWS_AS(make_integrand("mp:abc", 2), std::invalid_argument);
}

TEST_CASE("gradient and convexity spot checks pass for the builtins") {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const Integrand f = make_mp(p, 3);
    const CheckReport rep = convexity_and_gradient_check(f);
    CHECK(rep.ok);
    CHECK(rep.samples >= 500);
  }
}

TEST_CASE("the consistency check flags a wrong gradient") {
  Integrand f = make_mp(2.0, 3);
  auto base = f.gradient;
  f.gradient = [base](const Eigen::VectorXd& z) {
    return Eigen::VectorXd(2.0 * base(z));
  };
  const CheckReport rep = convexity_and_gradient_check(f);
  CHECK_FALSE(rep.ok);
  CHECK(rep.what.find("gradient") != std::string::npos);
}

TEST_CASE("hessian form of the smooth regularization matches differences") {
  const Integrand f = make_mp(2.0, 3);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd b = random_point(rng, 3, 0.3 + 0.5 * trial);
    const Eigen::VectorXd a = random_point(rng, 3, 1.0);
    const double form = f.hessian_form(b, a);
    const double t = 1e-5;
    const double fd =
        (f.gradient(b + t * a) - f.gradient(b - t * a)).dot(a) / (2.0 * t);
    CHECK(form == doctest::Approx(fd).epsilon(1e-5));
    CHECK(form > 0.0);
  }
}

TEST_CASE("recession of the p-norm family is the Euclidean norm") {
  std::mt19937_64 rng(2024);
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const Integrand f = make_mp(p, 3);
    for (int trial = 0; trial < 25; ++trial) {
      const double radius = 0.05 + 4.0 * (trial / 25.0);
      const Eigen::VectorXd z = random_point(rng, 3, radius);
      const RecessionResult r = recession(f, z);
      CHECK(r.value == doctest::Approx(z.norm()).epsilon(1e-8));
    }
    const RecessionResult zero = recession(f, Eigen::VectorXd::Zero(3));
    CHECK(std::abs(zero.value) <= 1e-12);
  }
}

TEST_CASE("recession is one-homogeneous") {
  const Integrand f = make_mp(3.0, 2);
  Eigen::Vector2d z(0.8, -0.4);
  const double base = recession(f, z).value;
  for (double t : {0.5, 2.0, 7.0}) {
    CHECK(recession(f, t * z).value == doctest::Approx(t * base).epsilon(1e-8));
  }
}

TEST_CASE("recession rejects superlinear growth") {
  const Integrand q = quadratic(2);
  CHECK_THROWS_AS(recession(q, Eigen::Vector2d(1.0, 0.0)), std::domain_error);
}

TEST_CASE("growth constants of the smooth regularization") {
  const Integrand f = make_mp(2.0, 3);
  const GrowthEstimate g = growth_constants(f, {1.0, 10.0, 100.0, 1000.0});
  CHECK(g.c1_est >= 0.99);
  CHECK(g.c1_est <= 1.5);
  CHECK(g.c2_est >= 0.7);
  CHECK(g.c2_est <= 1.01);
}

TEST_CASE("growth sweep rejects non-coercive and superlinear integrands") {
  Integrand flat;
  flat.dim = 2;
  flat.name = "flat";
  flat.value = [](const Eigen::VectorXd&) { return 1.0; };
  flat.gradient = [](const Eigen::VectorXd& z) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(z.size()));
  };
  CHECK_THROWS_AS(growth_constants(flat, {1.0, 10.0, 100.0, 1000.0}),
                  std::domain_error);

  CHECK_THROWS_AS(growth_constants(quadratic(2), {1.0, 10.0, 100.0, 1000.0}),
                  std::domain_error);
}

TEST_CASE("ellipticity exponent check certifies the quadratic regularization") {
  const Integrand f = make_mp(2.0, 3);
  MuCheckOptions opts;
  opts.b_samples = 2000;
  const MuReport rep = mu_check(f, 3.0, opts);
  CHECK(rep.pass);
  CHECK(rep.lambda_est == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.Lambda_est == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.samples >= opts.b_samples);
  CHECK(rep.reason.empty());
}

TEST_CASE("a too-small exponent fails with a parallel witness") {
  const Integrand f = make_mp(2.0, 3);
  MuCheckOptions opts;
  opts.b_samples = 2000;
  const MuReport rep = mu_check(f, 2.0, opts);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.reason.empty());
  const double bn = rep.worst_lower.b.norm();
  const double an = rep.worst_lower.a.norm();
  REQUIRE(bn > 0.0);
  REQUIRE(an > 0.0);
  const double cosine = std::abs(rep.worst_lower.b.dot(rep.worst_lower.a)) / (bn * an);
  CHECK(cosine >= 0.99);
  CHECK(bn >= 1e3);  // the violation lives at large base points
}

TEST_CASE("quartic regularization passes its exponent away from the unit ball") {
  const Integrand f = make_mp(4.0, 3);
  MuCheckOptions opts;
  opts.b_samples = 2000;
  opts.b_min = 1.0;
  const MuReport rep = mu_check(f, 5.0, opts);
  CHECK(rep.pass);
  CHECK(rep.lambda_est >= 1.0);
  // The upper ratio peaks at |B| = 1 on the radial branch:
  // phi''(1) * sqrt(1 + 1) = 3 * 2^(-5/4).
  CHECK(rep.Lambda_est <= 3.0 * std::pow(2.0, -1.25) + 1e-9);
  CHECK(rep.Lambda_est >= 1.0);
  CHECK(rep.lower_decay >= 0.5);
  CHECK(rep.upper_growth <= 2.0);
}
