#include <doctest.h>

#include "epslab/grid.hpp"

#include <cmath>
#include <random>

using namespace epslab;

namespace {

GridField linear_field(GridPtr g, double ax, double ay, double b) {
  return field_from_function(
      g,
      [&](const Eigen::Vector2d& x) {
        Eigen::VectorXd v(1);
        v[0] = ax * x[0] + ay * x[1] + b;
        return v;
      },
      1);
}

}  // namespace

TEST_CASE("square grid geometry and weights") {
  auto g = Grid::make_square(9);
  CHECK(g->n() == 9);
  CHECK(g->h() == doctest::Approx(1.0 / 8).epsilon(1e-15));
  CHECK(g->num_nodes() == 81);
  CHECK(static_cast<int>(g->active_nodes().size()) == 81);
  CHECK(static_cast<int>(g->interior_nodes().size()) == 49);
  CHECK(static_cast<int>(g->boundary_nodes().size()) == 32);

  double mass = 0.0;
  for (int node : g->active_nodes()) mass += g->weight(node);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));

  const double h2 = g->h() * g->h();
  CHECK(g->weight(g->index(0, 0)) == doctest::Approx(h2 / 4));
  CHECK(g->weight(g->index(4, 0)) == doctest::Approx(h2 / 2));
  CHECK(g->weight(g->index(4, 4)) == doctest::Approx(h2));

  double arc = 0.0;
  for (int node : g->boundary_nodes()) arc += g->boundary_weight(node);
  CHECK(arc == doctest::Approx(4.0).epsilon(1e-12));

  CHECK(g->outward_normal(g->index(0, 4)) == Eigen::Vector2d(-1, 0));
  CHECK(g->outward_normal(g->index(4, 8)) == Eigen::Vector2d(0, 1));
  const Eigen::Vector2d corner = g->outward_normal(g->index(8, 8));
  CHECK(corner[0] == doctest::Approx(M_SQRT1_2));
  CHECK(corner[1] == doctest::Approx(M_SQRT1_2));
}

TEST_CASE("disk mask activity and boundary metrics") {
  auto g = Grid::make_disk(33);
  for (int node : g->active_nodes()) {
    const double r = (g->pos(node) - Eigen::Vector2d(0.5, 0.5)).norm();
    CHECK(r <= 0.5 + 1e-10);
  }
  CHECK(g->interior_nodes().size() > 0);
  double arc = 0.0;
  for (int node : g->boundary_nodes()) {
    arc += g->boundary_weight(node);
    const Eigen::Vector2d nu = g->outward_normal(node);
    CHECK(nu.norm() == doctest::Approx(1.0));
  }
  CHECK(arc == doctest::Approx(2.0 * M_PI * 0.5).epsilon(1e-12));
}

TEST_CASE("finite differences are exact on linear fields") {
  auto g = Grid::make_square(17);
  GridField f = linear_field(g, 2.0, -3.0, 0.25);

  const GridField dx = finite_difference(f, 0, 1, FdKind::DeltaPlus);
  const GridField dy = finite_difference(f, 1, 2, FdKind::DeltaMinus);
  for (int node : g->active_nodes()) {
    if (dx.support[node]) CHECK(dx.values(node, 0) == doctest::Approx(2.0).epsilon(1e-12));
    if (dy.support[node]) CHECK(dy.values(node, 0) == doctest::Approx(-3.0).epsilon(1e-12));
  }

  // tau_minus is v(x - mh) - v(x), so a slope-1 field gives -mh.
  GridField id = linear_field(g, 1.0, 0.0, 0.0);
  const GridField tm = finite_difference(id, 0, 3, FdKind::TauMinus);
  for (int node : g->active_nodes())
    if (tm.support[node])
      CHECK(tm.values(node, 0) == doctest::Approx(-3.0 * g->h()).epsilon(1e-12));
}

TEST_CASE("quadrature norms: exact sine L2 and sup") {
  auto g = Grid::make_square(33);
  GridField f = field_from_function(
      g,
      [](const Eigen::Vector2d& x) {
        Eigen::VectorXd v(1);
        v[0] = std::sin(2.0 * M_PI * x[0]);
        return v;
      },
      1);
  // Trapezoid sums of sin^2 over whole periods are exact.
  CHECK(lp_norm(f, 2.0) == doctest::Approx(M_SQRT1_2).epsilon(1e-14));
  CHECK(lp_norm(f, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  GridField c = linear_field(g, 0.0, 0.0, -2.5);
  CHECK(lp_norm(c, 1.0) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("region masses and means") {
  auto g = Grid::make_square(17);
  CHECK(region_mass(*g, full_region(*g)) == doctest::Approx(1.0).epsilon(1e-14));
  // 9x9 interior nodes, each carrying a full trapezoid cell of h^2 = 1/256.
  const BoolArray rect = rect_region(*g, 4, 12, 4, 12);
  CHECK(region_mass(*g, rect) == doctest::Approx(81.0 / 256).epsilon(1e-12));

  GridField f = linear_field(g, 1.0, 0.0, 0.0);
  const Eigen::VectorXd m = region_mean(f, rect);
  CHECK(m[0] == doctest::Approx(0.5).epsilon(1e-12));

  const BoolArray ball = ball_region(*g, {0.5, 0.5}, 0.25);
  int count = 0;
  for (int node : g->active_nodes()) {
    if (!ball[node]) continue;
    ++count;
    CHECK((g->pos(node) - Eigen::Vector2d(0.5, 0.5)).norm() <= 0.25 + 1e-12);
  }
  CHECK(count > 0);
}

TEST_CASE("mean oscillation of the coordinate function") {
  auto g = Grid::make_square(17);
  GridField f = linear_field(g, 1.0, 0.0, 0.0);
  const double b = bmo_seminorm(f, 0, 16, 0, 16, 3);
  CHECK(b == doctest::Approx(0.25).epsilon(1e-12));

  // Invariance under constant shifts, 1-homogeneity under scaling.
  GridField shifted = f;
  shifted.values.array() += 7.5;
  CHECK(bmo_seminorm(shifted, 0, 16, 0, 16, 3) == doctest::Approx(b).epsilon(1e-12));
  GridField scaled = f;
  scaled.values *= -3.0;
  CHECK(bmo_seminorm(scaled, 0, 16, 0, 16, 3) == doctest::Approx(3.0 * b).epsilon(1e-12));
}

TEST_CASE("rigid projection recovers rigid motions") {
  auto g = Grid::make_square(17);
  const BoolArray all = full_region(*g);

  GridField rigid = field_from_function(
      g,
      [](const Eigen::Vector2d& x) {
        Eigen::VectorXd v(2);
        v[0] = -0.7 * x[1] + 0.2;
        v[1] = 0.7 * x[0] - 0.1;
        return v;
      },
      2);
  const RigidFit fit = rigid_project(rigid, all);
  CHECK(fit.motion.rotation == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fit.motion.translation[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(fit.motion.translation[1] == doctest::Approx(-0.1).epsilon(1e-12));
  for (int node : g->active_nodes())
    CHECK(fit.residual.at(node).norm() <= 1e-12);

  GridField stretch = field_from_function(
      g,
      [](const Eigen::Vector2d& x) {
        Eigen::VectorXd v(2);
        v[0] = x[0];
        v[1] = 0.0;
        return v;
      },
      2);
  const RigidFit sfit = rigid_project(stretch, all);
  CHECK(sfit.motion.rotation == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sfit.motion.translation[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sfit.motion.translation[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mollification preserves affine fields on the shrunk support") {
  auto g = Grid::make_square(33);
  GridField f = field_from_function(
      g,
      [](const Eigen::Vector2d& x) {
        Eigen::VectorXd v(2);
        v[0] = 1.5 * x[0] - 0.5 * x[1] + 0.3;
        v[1] = 0.25 * x[0];
        return v;
      },
      2);
  const GridField m = mollify(f, 3.0 * g->h());
  int supported = 0;
  for (int node : g->active_nodes()) {
    if (!m.support[node]) continue;
    ++supported;
    CHECK((m.at(node) - f.at(node)).norm() <= 1e-12);
  }
  CHECK(supported > 0);
  CHECK(supported < static_cast<int>(g->active_nodes().size()));

  CHECK_THROWS_AS(mollify(f, 0.4 * g->h()), std::invalid_argument);
}

TEST_CASE("grid constructors reject degenerate sizes") {
  CHECK_THROWS_AS(Grid::make_square(2), std::invalid_argument);
  CHECK_THROWS_AS(Grid::make_disk(4), std::invalid_argument);
}
