#include <doctest.h>

#include "epslab/integrand.hpp"
#include "epslab/operators.hpp"
#include "epslab/relaxed.hpp"

#include <cmath>

using namespace epslab;

namespace {

Integrand absolute_value() {
  Integrand f;
  f.dim = 1;
  f.name = "abs";
  f.value = [](const Eigen::VectorXd& z) { return std::abs(z[0]); };
  return f;
}

BVPiecewise1D unit_step() {
  // u = 0 on (0, 1/2), u = 1 on (1/2, 1), datum 0 on both ends.
  BVPiecewise1D u;
  u.breakpoints = {0.0, 0.5, 1.0};
  u.slopes = {0.0, 0.0};
  u.jumps = {{0.5, 1.0}};
  return u;
}

}  // namespace

TEST_CASE("trace bookkeeping and validation") {
  BVPiecewise1D u;
  u.breakpoints = {0.0, 0.3, 1.0};
  u.slopes = {2.0, -1.0};
  u.jumps = {{0.5, -0.7}};
  u.trace_left = 0.25;
  u.validate();
  CHECK(u.trace_right() == doctest::Approx(0.25 + 0.6 - 0.7 - 0.7).epsilon(1e-15));

  BVPiecewise1D bad = u;
  bad.breakpoints = {0.0, 0.3, 0.9};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = u;
  bad.slopes = {2.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = u;
  bad.jumps = {{1.0, 0.5}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = u;
  bad.breakpoints = {0.0, 0.3, 0.3, 1.0};
  bad.slopes = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("competitor jumping to match an incompatible datum") {
  // Classic 1D example: datum 0 at the left, 1 at the right, flat
  // competitor with a unit interior jump; each part contributes 1.
  const Integrand f = make_mp(2.0, 1);
  BVPiecewise1D u = unit_step();
  u.datum_left = 0.0;
  u.datum_right = 0.0;
  u.jumps.clear();

  // First without a jump: the mismatch sits on the right boundary.
  EnergyBreakdown flat = relaxed_energy_1d(f, u);
  CHECK(flat.absolutely_continuous == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flat.singular == doctest::Approx(0.0));
  CHECK(flat.boundary == doctest::Approx(0.0).epsilon(1e-12));

  u = unit_step();
  u.datum_right = 3.0;
  const EnergyBreakdown b = relaxed_energy_1d(f, u);
  CHECK(b.absolutely_continuous == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.singular == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(b.boundary == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(b.total == doctest::Approx(b.absolutely_continuous + b.singular + b.boundary));
}

TEST_CASE("relaxed energy with the absolute-value integrand is total variation") {
  const Integrand f = absolute_value();
  BVPiecewise1D u;
  u.breakpoints = {0.0, 0.3, 1.0};
  u.slopes = {2.0, -1.0};
  u.jumps = {{0.5, -0.7}};
  const EnergyBreakdown b = relaxed_energy_1d(f, u);
  CHECK(b.absolutely_continuous == doctest::Approx(0.6 + 0.7).epsilon(1e-12));
  CHECK(b.singular == doctest::Approx(0.7).epsilon(1e-10));
  // trace_right = 0.6 - 0.7 - 0.7 = -0.8 against datum 0.
  CHECK(b.boundary == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(b.total == doctest::Approx(2.8).epsilon(1e-10));
}

TEST_CASE("refining an interval without changing the function is neutral") {
  const Integrand f = make_mp(2.0, 1);
  BVPiecewise1D u;
  u.breakpoints = {0.0, 1.0};
  u.slopes = {0.75};
  u.datum_right = 0.75;
  const EnergyBreakdown base = relaxed_energy_1d(f, u);

  BVPiecewise1D fine;
  fine.breakpoints = {0.0, 0.25, 0.8, 1.0};
  fine.slopes = {0.75, 0.75, 0.75};
  fine.datum_right = 0.75;
  const EnergyBreakdown ref = relaxed_energy_1d(f, fine);
  CHECK(ref.absolutely_continuous == doctest::Approx(base.absolutely_continuous).epsilon(1e-14));
  CHECK(ref.total == doctest::Approx(base.total).epsilon(1e-12));
  CHECK(ref.boundary <= 1e-10);
}

TEST_CASE("shifting function and datum together changes nothing") {
  const Integrand f = make_mp(3.0, 1);
  BVPiecewise1D u;
  u.breakpoints = {0.0, 0.4, 1.0};
  u.slopes = {1.0, -0.5};
  u.jumps = {{0.7, 0.3}};
  u.trace_left = 0.1;
  u.datum_left = -0.2;
  u.datum_right = 0.5;
  const EnergyBreakdown base = relaxed_energy_1d(f, u);

  BVPiecewise1D shifted = u;
  shifted.trace_left += 5.0;
  shifted.datum_left += 5.0;
  shifted.datum_right += 5.0;
  const EnergyBreakdown s = relaxed_energy_1d(f, shifted);
  CHECK(s.total == doctest::Approx(base.total).epsilon(1e-12));
}

TEST_CASE("boundary mismatch term is one-homogeneous and monotone") {
  const Integrand f = make_mp(2.0, 1);
  BVPiecewise1D u;
  u.breakpoints = {0.0, 1.0};
  u.slopes = {0.0};

  double prev = -1.0;
  for (double gap : {0.5, 1.0, 2.0, 4.0}) {
    BVPiecewise1D v = u;
    v.datum_right = gap;
    const EnergyBreakdown b = relaxed_energy_1d(f, v);
    CHECK(b.boundary == doctest::Approx(gap).epsilon(1e-8));
    CHECK(b.boundary > prev);
    prev = b.boundary;
  }
}

TEST_CASE("grid energy of the datum itself is the bulk integral") {
  auto g = Grid::make_square(33);
  const Integrand f = make_mp(2.0, 3);
  const double gamma = 0.8;
  GridField u0 = field_from_function(
      g,
      [&](const Eigen::Vector2d& x) {
        Eigen::VectorXd v(2);
        v[0] = gamma * x[1];
        v[1] = 0.0;
        return v;
      },
      2);
  const EnergyBreakdown b = relaxed_energy_grid(f, u0, u0);
  // eps(u0) has the single coordinate gamma/sqrt(2).
  const double expected = std::sqrt(1.0 + gamma * gamma / 2.0);
  CHECK(b.absolutely_continuous == doctest::Approx(expected).epsilon(1e-12));
  CHECK(b.singular == 0.0);
  CHECK(b.boundary <= 1e-12);
  CHECK(b.total == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("grid boundary penalty scales linearly in the mismatch") {
  auto g = Grid::make_square(17);
  const Integrand f = make_mp(2.0, 3);
  GridField u0 = zero_field(g, 2);
  GridField u = zero_field(g, 2);
  u.values.col(0).array() += 1.0;

  const EnergyBreakdown b1 = relaxed_energy_grid(f, u, u0);
  GridField u2 = zero_field(g, 2);
  u2.values.col(0).array() += 2.0;
  const EnergyBreakdown b2 = relaxed_energy_grid(f, u2, u0);
  CHECK(b1.boundary > 0.1);
  CHECK(b2.boundary == doctest::Approx(2.0 * b1.boundary).epsilon(1e-8));

  // Constant fields have zero symmetric gradient: the bulk term is
  // f(0) = 1 times the area.
  CHECK(b1.absolutely_continuous == doctest::Approx(1.0).epsilon(1e-12));
}
