#include <doctest.h>

#include "epslab/solve.hpp"

#include <cmath>
#include <random>

using namespace epslab;

namespace {

GridField affine_datum(GridPtr g, const Eigen::Matrix2d& m,
                       const Eigen::Vector2d& b) {
  return field_from_function(
      g, [&](const Eigen::Vector2d& x) { return Eigen::VectorXd(m * x + b); },
      2);
}

Problem affine_problem(int n, double delta, double perturb) {
  Problem pb;
  pb.grid = Grid::make_square(n);
  pb.f = make_mp(2.0, 3);
  Eigen::Matrix2d m;
  m << 0.3, 0.5, 0.1, -0.2;
  pb.datum = affine_datum(pb.grid, m, {0.1, -0.3});
  pb.stab.kind = Stabilization::Kind::Viscosity;
  pb.stab.delta = delta;
  pb.opts.grad_tol = 1e-12;
  pb.opts.max_iters = 3000;
  pb.opts.perturb_amplitude = perturb;
  pb.opts.perturb_frequency = 2;
  return pb;
}

}  // namespace

TEST_CASE("affine data are discrete minimizers") {
  Problem pb = affine_problem(17, 1e-1, 1e-2);
  const SolveReport rep = minimize_stabilized(pb);
  CHECK(rep.converged);
  CHECK(rep.final_grad_norm <= pb.opts.grad_tol);

  double sup = 0.0;
  for (int node : pb.grid->active_nodes())
    sup = std::max(sup, (rep.minimizer.at(node) - pb.datum.at(node)).lpNorm<Eigen::Infinity>());
  CHECK(sup <= 1e-6);

  for (size_t i = 1; i < rep.trajectory.size(); ++i)
    CHECK(rep.trajectory[i].stabilized_energy <=
          rep.trajectory[i - 1].stabilized_energy + 1e-12);

  CHECK(rep.el_residual <= 1e-8);
}

TEST_CASE("the gradient vanishes exactly at an affine iterate") {
  // Constant stress plus the telescoping quadrature identity make the
  // assembled gradient of an affine field vanish to rounding.
  Problem pb = affine_problem(33, 1e-2, 0.0);
  pb.opts.grad_tol = 1e-11;
  const SolveReport rep = minimize_stabilized(pb, pb.datum);
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK(rep.final_grad_norm <= 1e-12);
  CHECK(rep.el_residual <= 1e-13);
}

TEST_CASE("mean symmetric gradient depends only on the boundary values") {
  Problem pb = affine_problem(17, 1e-2, 0.0);
  const Eigen::VectorXd base = mean_symmetric_gradient(pb, pb.datum);

  GridField bumped = pb.datum;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  for (int node : pb.grid->interior_nodes()) {
    bumped.values(node, 0) += 0.3 * gauss(rng);
    bumped.values(node, 1) += 0.3 * gauss(rng);
  }
  const Eigen::VectorXd moved = mean_symmetric_gradient(pb, bumped);
  CHECK((base - moved).lpNorm<Eigen::Infinity>() <= 1e-13);
}

TEST_CASE("stabilized energy dominates the bare energy") {
  Problem pb = affine_problem(17, 1e-3, 0.0);
  GridField u = pb.datum;
  u.values(pb.grid->index(8, 8), 0) += 0.5;
  CHECK(stabilized_energy(pb, u) >= bare_energy(pb, u));

  Problem pg = pb;
  pg.stab.kind = Stabilization::Kind::PGrowth;
  pg.stab.alpha = 1e-2;
  pg.stab.p = 2.0;
  CHECK(stabilized_energy(pg, u) >= bare_energy(pg, u));
  CHECK(bare_energy(pg, u) == doctest::Approx(bare_energy(pb, u)));
}

TEST_CASE("p-growth stabilization also recovers affine data") {
  Problem pb = affine_problem(17, 0.0, 1e-2);
  pb.stab.kind = Stabilization::Kind::PGrowth;
  pb.stab.alpha = 1e-2;
  pb.stab.p = 2.0;
  pb.opts.grad_tol = 1e-11;
  const SolveReport rep = minimize_stabilized(pb);
  CHECK(rep.converged);
  double sup = 0.0;
  for (int node : pb.grid->active_nodes())
    sup = std::max(sup, (rep.minimizer.at(node) - pb.datum.at(node)).lpNorm<Eigen::Infinity>());
  CHECK(sup <= 1e-6);
}

TEST_CASE("solver requires an admissible configuration") {
  Problem pb = affine_problem(17, 1e-2, 0.0);
  pb.f = make_mp(2.0, 2);  // wrong image dimension
  CHECK_THROWS_AS(minimize_stabilized(pb), std::invalid_argument);

  Problem pb2 = affine_problem(17, 1e-2, 0.0);
  pb2.datum = zero_field(Grid::make_square(9), 2);  // datum on another grid
  CHECK_THROWS_AS(minimize_stabilized(pb2), std::invalid_argument);
}

TEST_CASE("variational certificate accepts a minimizer and rejects a bump") {
  Problem pb = affine_problem(17, 1e-1, 0.0);
  const SolveReport rep = minimize_stabilized(pb, pb.datum);

  const EkelandReport good = ekeland_certificate(pb, rep.minimizer, 1e-10);
  CHECK(good.certified);
  CHECK(good.competitors > 20);
  CHECK(good.worst_violation <= 1e-10);

  GridField bad = rep.minimizer;
  for (int node : pb.grid->interior_nodes()) {
    const Eigen::Vector2d x = pb.grid->pos(node);
    bad.values(node, 0) += 0.8 * std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]);
  }
  const EkelandReport reject = ekeland_certificate(pb, bad, 1e-10);
  CHECK_FALSE(reject.certified);
  CHECK(reject.worst_violation > 1e-6);
  CHECK_FALSE(reject.worst_competitor.empty());
}

TEST_CASE("rigid fields make the quotient bound degenerate") {
  auto g = Grid::make_square(33);
  GridField rigid = field_from_function(
      g,
      [](const Eigen::Vector2d& x) {
        RigidMotion rm;
        rm.rotation = 0.9;
        rm.translation = {0.2, 0.1};
        return Eigen::VectorXd(rm.eval(x));
      },
      2);
  const CaccioppoliReport rep =
      caccioppoli_ratio(rigid, 1.0, {{0.5, 0.5}}, {0.1});
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.any_degenerate);
  CHECK(rep.rows[0].degenerate);
}

TEST_CASE("quotient bound is translation invariant for affine fields") {
  auto g = Grid::make_square(33);
  Eigen::Matrix2d m;
  m << 0.7, 0.2, 0.2, -0.3;
  GridField u = affine_datum(g, m, {0.0, 0.0});
  const CaccioppoliReport rep = caccioppoli_ratio(
      u, 1.0, {{0.5, 0.5}, {0.375, 0.375}}, {0.125});
  REQUIRE(rep.rows.size() == 2);
  CHECK_FALSE(rep.any_degenerate);
  CHECK(rep.rows[0].ratio == doctest::Approx(rep.rows[1].ratio).epsilon(1e-10));
  CHECK(rep.rows[0].ratio > 0.0);
}

TEST_CASE("difference quotients of a smooth field scale quadratically") {
  auto g = Grid::make_square(65);
  GridField u = field_from_function(
      g,
      [](const Eigen::Vector2d& x) {
        Eigen::VectorXd v(2);
        v[0] = std::sin(2.0 * M_PI * x[0]) * std::sin(2.0 * M_PI * x[1]);
        v[1] = 0.5 * std::cos(2.0 * M_PI * x[0]) * std::sin(2.0 * M_PI * x[1]);
        return v;
      },
      2);
  // For a smooth field |tau_h e|^2 ~ h^2, so with theta = 1 the
  // quotient is h-independent up to discretization error.
  const NikolskiiReport rep = nikolskii_quotient(u, 3.0, 1.0, {1, 2, 4});
  REQUIRE(rep.series.size() == 3);
  CHECK(std::abs(rep.loglog_slope) <= 0.25);
  CHECK(rep.max_over_min <= 1.5);

  // theta = 0.75 leaves slope 2 - 2 theta = 0.5.
  const NikolskiiReport half = nikolskii_quotient(u, 3.0, 0.75, {1, 2, 4});
  CHECK(half.loglog_slope == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("constant fields have zero quotient") {
  auto g = Grid::make_square(33);
  GridField u = zero_field(g, 2);
  u.values.col(0).array() += 3.0;
  const NikolskiiReport rep = nikolskii_quotient(u, 3.0, 0.75, {1, 2});
  for (const auto& pt : rep.series) CHECK(pt.quotient <= 1e-14);
}

TEST_CASE("excess scan marks affine fields regular everywhere") {
  auto g = Grid::make_square(33);
  Eigen::Matrix2d m;
  m << 0.4, 0.1, 0.1, -0.5;
  GridField u = affine_datum(g, m, {0.2, 0.0});
  const ExcessReport rep = excess_scan(
      u, make_mp(2.0, 3), {{0.3, 0.3}, {0.5, 0.5}, {0.7, 0.6}}, {0.05, 0.1});
  REQUIRE(rep.rows.size() == 6);
  CHECK(rep.regular_fraction == doctest::Approx(1.0));
  for (const auto& row : rep.rows) {
    CHECK(row.excess <= 1e-12);
    CHECK(row.hessian_min > 0.0);
    CHECK(row.predicted_regular);
  }
}

TEST_CASE("excess scan flags an oscillatory field") {
  auto g = Grid::make_square(33);
  GridField u = field_from_function(
      g,
      [](const Eigen::Vector2d& x) {
        Eigen::VectorXd v(2);
        v[0] = 0.5 * std::sin(8.0 * M_PI * x[0]);
        v[1] = 0.5 * std::cos(8.0 * M_PI * x[1]);
        return v;
      },
      2);
  const ExcessReport rep =
      excess_scan(u, make_mp(2.0, 3), {{0.5, 0.5}}, {0.2});
  REQUIRE(rep.rows.size() == 1);
  CHECK_FALSE(rep.rows[0].predicted_regular);
  CHECK(rep.regular_fraction == doctest::Approx(0.0));
}

TEST_CASE("vanishing-viscosity sweep on a small shear problem") {
  Problem pb;
  pb.grid = Grid::make_square(17);
  pb.f = make_mp(2.0, 3);
  pb.datum = field_from_function(
      pb.grid,
      [](const Eigen::Vector2d& x) {
        Eigen::VectorXd v(2);
        v[0] = 0.5 * x[1] + 0.1 * std::sin(2.0 * M_PI * x[1]);
        v[1] = 0.0;
        return v;
      },
      2);
  pb.opts.grad_tol = 1e-11;
  pb.opts.max_iters = 4000;

  SweepOptions opts;
  opts.deltas = {1e-1, 1e-2};
  opts.ekeland_trials = 24;
  const SweepReport rep = viscosity_sweep(pb, opts);
  REQUIRE(rep.completed);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].delta == doctest::Approx(1e-1));
  CHECK(rep.rows[1].delta == doctest::Approx(1e-2));
  CHECK(rep.energies_nonincreasing);
  CHECK(rep.l1_max_over_min >= 1.0);
  CHECK(rep.l1_within_factor);
  for (const auto& row : rep.rows) {
    CHECK(row.ekeland_certified);
    CHECK(row.eps_level > 0.0);
    CHECK(row.el_res <= 1e-6);
    CHECK(row.lq_eps.size() == opts.q_norms.size());
    CHECK(row.sup_u > 0.0);
    CHECK(row.bmo >= 0.0);
  }
}
