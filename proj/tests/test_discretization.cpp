#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace peq;
using peq::testing::pi;
using peq::testing::random_field;
using peq::testing::sample;

TEST_CASE("fill_ghost face rules") {
  Parameters p;
  const Grid g(p, 4, 4, 10);

  ScalarField f(g.shape, bc_neumann());
  f(0, 1, 2) = 3.7;
  fill_ghost(f);
  CHECK(f(-1, 1, 2) == 3.7);

  CHECK(robin_ghost_factor(1.0, 0.0, 0.1) == 1.0);
  const double r = robin_ghost_factor(1.0, 2.0, 0.1);
  CHECK(r == doctest::Approx(9.0 / 11.0).epsilon(1e-15));
  // The ghost closes (1/rt2) dT/dz + alpha T = 0 at the face midpoint.
  const double ti = 1.3, tg = r * ti;
  CHECK((tg - ti) / 0.1 + 2.0 * (tg + ti) / 2 == doctest::Approx(0.0).scale(1.0));

  p.rt2 = 1.0;
  p.alpha = 2.0;
  ScalarField t(g.shape, bc_temperature(p, g));
  t(2, 2, 9) = 1.3;
  t(0, 2, 3) = -0.4;
  fill_ghost(t);
  CHECK(t(2, 2, 10) == doctest::Approx(r * 1.3).epsilon(1e-15));
  CHECK(t(-1, 2, 3) == -0.4);

  ScalarField u(g.shape, bc_velocity_x());
  u(0, 1, 1) = 2.0;
  u(1, 0, 1) = 5.0;
  fill_ghost(u);
  CHECK(u(-1, 1, 1) == -2.0);
  CHECK(u(1, -1, 1) == 5.0);
}

TEST_CASE("edge and corner ghosts average the adjacent face rules") {
  const Grid g(Shape{4, 4, 4}, 1, 1, 1);
  ScalarField u(g.shape, bc_velocity_x());
  u(0, 0, 2) = 1.0;
  fill_ghost(u);
  // Each face rule reflects the neighbouring face ghost, so both give odd * even.
  CHECK(u(-1, -1, 2) == -1.0);
  ScalarField n(g.shape, bc_neumann());
  n(0, 0, 0) = 2.0;
  fill_ghost(n);
  CHECK(n(-1, -1, -1) == 2.0);
}

TEST_CASE("fill_ghost is idempotent bitwise") {
  Parameters p;
  p.alpha = 0.7;
  p.rt2 = 3.0;
  const Grid g(p, 5, 6, 7);
  std::mt19937_64 rng(1);
  for (const FieldBc& bc : {bc_velocity_x(), bc_velocity_y(), bc_temperature(p, g), bc_vertical_velocity()}) {
    ScalarField f = random_field(g, bc, rng);
    const ScalarField once = f;
    fill_ghost(f);
    CHECK((f.data() == once.data()).all());
  }
}

TEST_CASE("stencils vanish on constants and are exact on linear fields") {
  const Grid g(Shape{6, 5, 4}, 2.0, 1.0, 1.0);
  const ScalarField c = sample(g, bc_neumann(), [](double, double, double) { return 4.2; });
  const auto gc = grad_h(c, g);
  CHECK(peq::testing::max_abs_interior(gc[0]) == 0.0);
  CHECK(peq::testing::max_abs_interior(gc[1]) == 0.0);
  CHECK(peq::testing::max_abs_interior(laplace_h(c, g)) == 0.0);
  CHECK(peq::testing::max_abs_interior(d_z(c, g)) == 0.0);
  CHECK(peq::testing::max_abs_interior(d_zz(c, g)) == 0.0);

  // Linear field with ghosts continued linearly.
  const double a = 1.5, b = -0.75;
  ScalarField s(g.shape);
  for (int i = -1; i <= g.nx(); ++i)
    for (int j = -1; j <= g.ny(); ++j)
      for (int k = -1; k <= g.nz(); ++k) s(i, j, k) = a * g.x(i) + b * g.y(j);
  const auto gs = grad_h(s, g);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) {
        CHECK(gs[0](i, j, k) == doctest::Approx(a).epsilon(1e-13));
        CHECK(gs[1](i, j, k) == doctest::Approx(b).epsilon(1e-13));
      }
}

TEST_CASE("grad_h converges at second order") {
  auto error = [](int n) {
    const Grid g(Shape{n, 4, 4}, 1.5, 1.0, 1.0);
    const ScalarField s = sample(g, bc_velocity_x(), [&](double x, double, double) {
      return std::sin(2 * pi * x / g.lx);
    });
    const auto gs = grad_h(s, g);
    double e = 0.0;
    for (int i = 0; i < g.nx(); ++i)
      e = std::max(e, std::abs(gs[0](i, 1, 1) - 2 * pi / g.lx * std::cos(2 * pi * g.x(i) / g.lx)));
    return e;
  };
  const double e16 = error(16), e32 = error(32), e64 = error(64);
  CHECK(e16 / e32 == doctest::Approx(4.0).epsilon(0.2));
  CHECK(e32 / e64 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("discrete integration by parts for admissible velocity") {
  Parameters p;
  const Grid g(Shape{7, 6, 5}, 1.3, 0.8, 0.6);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const ScalarField s = random_field(g, bc_temperature(p, g), rng);
    const ScalarField u = random_field(g, bc_velocity_x(), rng);
    const ScalarField v = random_field(g, bc_velocity_y(), rng);
    const auto gs = grad_h(s, g);
    const double lhs = inner(gs[0], u, g) + inner(gs[1], v, g);
    const double rhs = inner(s, div_h(u, v, g), g);
    const double scale = std::sqrt(inner(s, s, g) * (inner(u, u, g) + inner(v, v, g))) / g.dx;
    CHECK(std::abs(lhs + rhs) <= 1e-12 * scale);
  }
}

TEST_CASE("stencil operators are linear") {
  const Grid g(Shape{5, 5, 5}, 1, 1, 1);
  std::mt19937_64 rng(4);
  const ScalarField f = random_field(g, bc_neumann(), rng);
  const ScalarField h = random_field(g, bc_neumann(), rng);
  ScalarField comb = 2.5 * f + (-0.5) * h;
  fill_ghost(comb);
  const ScalarField lf = laplace_h(f, g), lh = laplace_h(h, g), lc = laplace_h(comb, g);
  const ScalarField zf = d_zz(f, g), zh = d_zz(h, g), zc = d_zz(comb, g);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k) {
        CHECK(lc(i, j, k) == doctest::Approx(2.5 * lf(i, j, k) - 0.5 * lh(i, j, k)).epsilon(1e-12).scale(1.0));
        CHECK(zc(i, j, k) == doctest::Approx(2.5 * zf(i, j, k) - 0.5 * zh(i, j, k)).epsilon(1e-12).scale(1.0));
      }
}

TEST_CASE("vertical_cumint on constants and linear profiles") {
  const Grid g(Shape{4, 4, 8}, 1, 1, 2.0);
  const ScalarField one = sample(g, bc_neumann(), [](double, double, double) { return 1.0; });
  const ScalarField lin = sample(g, bc_neumann(), [](double, double, double z) { return z; });
  const LevelField<double> f1 = vertical_cumint(one, g), fz = vertical_cumint(lin, g);
  for (int kf = 0; kf <= g.nz(); ++kf) {
    const double z = g.z_face(kf);
    CHECK(f1(1, 2, kf) == doctest::Approx(z + g.h).epsilon(1e-14).scale(1.0));
    CHECK(fz(1, 2, kf) == doctest::Approx((z * z - g.h * g.h) / 2).epsilon(1e-14).scale(1.0));
  }
  CHECK(f1(0, 0, 0) == 0.0);
}

TEST_CASE("vertical_cumint converges to a refined quadrature") {
  auto profile = [](double z) { return std::exp(0.7 * z) * std::cos(3.1 * z) + 0.3 * z * z; };
  // Oracle: composite Simpson rule with ten times as many panels.
  auto oracle = [&](double a, double b) {
    const int m = 2000;
    const double hstep = (b - a) / m;
    double s = profile(a) + profile(b);
    for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * profile(a + i * hstep);
    return s * hstep / 3.0;
  };
  auto error = [&](int nz) {
    const Grid g(Shape{4, 4, nz}, 1, 1, 1.5);
    const ScalarField f = sample(g, bc_neumann(), [&](double, double, double z) { return profile(z); });
    const LevelField<double> F = vertical_cumint(f, g);
    double e = 0.0;
    for (int kf = 0; kf <= nz; ++kf) e = std::max(e, std::abs(F(2, 1, kf) - oracle(-g.h, g.z_face(kf))));
    return e;
  };
  const double e8 = error(8), e16 = error(16), e32 = error(32);
  CHECK(e8 / e16 == doctest::Approx(4.0).epsilon(0.2));
  CHECK(e16 / e32 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("vertical_int_from_surface") {
  const Grid g(Shape{4, 4, 8}, 1, 1, 1.0);
  const ScalarField one = sample(g, bc_neumann(), [](double, double, double) { return 1.0; });
  const ScalarField zero(g.shape);
  const ScalarField p1 = vertical_int_from_surface(one, g), p0 = vertical_int_from_surface(zero, g);
  for (int k = 0; k < g.nz(); ++k) {
    CHECK(p1(0, 3, k) == doctest::Approx(g.z(k)).epsilon(1e-14).scale(1.0));
    CHECK(p0(0, 3, k) == 0.0);
  }

  auto error = [](int nz) {
    const Grid g(Shape{4, 4, nz}, 1, 1, 1.0);
    const ScalarField t = sample(g, bc_neumann(), [&](double, double, double z) { return std::cos(pi * z / g.h); });
    const ScalarField p = vertical_int_from_surface(t, g);
    double e = 0.0;
    for (int k = 0; k < nz; ++k) e = std::max(e, std::abs(p(1, 1, k) - g.h / pi * std::sin(pi * g.z(k) / g.h)));
    return e;
  };
  // The third-order surface half-cell term dominates below 16 levels.
  const double e16 = error(16), e32 = error(32), e64 = error(64);
  CHECK(e16 / e32 == doctest::Approx(4.0).epsilon(0.2));
  CHECK(e32 / e64 == doctest::Approx(4.0).epsilon(0.2));
}
