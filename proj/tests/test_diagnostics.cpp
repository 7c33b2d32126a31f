#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "peq/diagnostics.hpp"
#include "support.hpp"

using namespace peq;
using peq::testing::pi;
using peq::testing::random_field;
using peq::testing::random_state;
using peq::testing::sample;

namespace {

double mode_eigenvalue(int k, int n, double d) {
  const double s = std::sin(k * pi / (2.0 * n));
  return 4.0 * s * s / (d * d);
}

long double sum_sq_ld(const ScalarField& f, const Grid& g) {
  long double acc = 0.0L;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) acc += (long double)f(i, j, k) * f(i, j, k);
  return acc * (long double)g.cell_volume();
}

// Extended-precision recomputation of the bracket straight from the grid values.
long double bracket_oracle(const State& s, const Grid& g) {
  auto dx = [&](const ScalarField& f, int i, int j, int k) { return ((long double)f(i + 1, j, k) - f(i - 1, j, k)) / (2.0L * g.dx); };
  auto dy = [&](const ScalarField& f, int i, int j, int k) { return ((long double)f(i, j + 1, k) - f(i, j - 1, k)) / (2.0L * g.dy); };
  auto dz = [&](const ScalarField& f, int i, int j, int k) { return ((long double)f(i, j, k + 1) - f(i, j, k - 1)) / (2.0L * g.dz); };
  // d_z at a lateral ghost column uses the lateral reflection of the neighbouring interior column.
  auto dz_at = [&](const ScalarField& f, int i, int j, int k) {
    const FieldBc& bc = f.bc();
    long double sign = 1.0L;
    int ii = i, jj = j;
    if (i < 0) { ii = 0; sign *= bc[West].factor(); }
    if (i >= g.nx()) { ii = g.nx() - 1; sign *= bc[East].factor(); }
    if (j < 0) { jj = 0; sign *= bc[South].factor(); }
    if (j >= g.ny()) { jj = g.ny() - 1; sign *= bc[North].factor(); }
    return sign * dz(f, ii, jj, k);
  };
  auto norms = [&](const ScalarField& f, long double& grad, long double& z, long double& gz) {
    grad = z = gz = 0.0L;
    for (int i = 0; i < g.nx(); ++i)
      for (int j = 0; j < g.ny(); ++j)
        for (int k = 0; k < g.nz(); ++k) {
          grad += dx(f, i, j, k) * dx(f, i, j, k) + dy(f, i, j, k) * dy(f, i, j, k);
          const long double fz = dz(f, i, j, k);
          z += fz * fz;
          const long double gx = (dz_at(f, i + 1, j, k) - dz_at(f, i - 1, j, k)) / (2.0L * g.dx);
          const long double gy = (dz_at(f, i, j + 1, k) - dz_at(f, i, j - 1, k)) / (2.0L * g.dy);
          gz += gx * gx + gy * gy;
        }
    const long double dv = g.cell_volume();
    grad *= dv;
    z *= dv;
    gz *= dv;
  };
  long double gu, zu, gzu, gv, zv, gzv, gt, zt, gzt;
  norms(s.u, gu, zu, gzu);
  norms(s.v, gv, zv, gzv);
  norms(s.t, gt, zt, gzt);
  return (gu + gv) * (gu + gv) + gt * gt + (zu + zv) * (gzu + gzv) + zt * gzt;
}

}  // namespace

TEST_CASE("l2_norm_sq") {
  const Grid g(Shape{5, 6, 4}, 2.0, 1.5, 0.5);
  CHECK(l2_norm_sq(ScalarField(g.shape), g) == 0.0);
  const ScalarField c = sample(g, bc_neumann(), [](double, double, double) { return 1.7; });
  CHECK(l2_norm_sq(c, g) == doctest::Approx(1.7 * 1.7 * g.volume()).epsilon(1e-14));
  std::mt19937_64 rng(1);
  const ScalarField r = random_field(g, bc_neumann(), rng);
  CHECK(l2_norm_sq(r, g) == doctest::Approx(double(sum_sq_ld(r, g))).epsilon(1e-13));
  ScalarField r3 = -3.0 * r;
  CHECK(l2_norm_sq(r3, g) == doctest::Approx(9.0 * l2_norm_sq(r, g)).epsilon(1e-14));
}

TEST_CASE("h_energy adds the velocity and temperature parts") {
  const Parameters p;
  const Grid g(p, 5, 5, 5);
  std::mt19937_64 rng(2);
  const State s = random_state(p, g, rng);
  CHECK(h_energy(s, g) == doctest::Approx(l2_norm_sq(s.u, g) + l2_norm_sq(s.v, g) + l2_norm_sq(s.t, g)));
}

TEST_CASE("vnorm of a constant temperature is the Robin surface term") {
  Parameters p;
  p.alpha = 1.5;
  p.rt2 = 2.0;
  p.lx = 2.0;
  const Grid g(p, 6, 5, 8);
  const double c = 0.9;
  const ScalarField t = sample(g, bc_temperature(p, g), [&](double, double, double) { return c; });
  // The ghost sits below c by the Robin factor, so the surface value is c/(1 + alpha rt2 dz/2).
  const double expected = p.alpha * c * c * p.lx * p.ly / (1 + p.alpha * p.rt2 * g.dz / 2);
  CHECK(vnorm_sq_temperature(t, p, g) == doctest::Approx(expected).epsilon(1e-13));
  // Refinement recovers alpha c^2 lx ly.
  const Grid fine(p, 6, 5, 256);
  const ScalarField tf = sample(fine, bc_temperature(p, fine), [&](double, double, double) { return c; });
  CHECK(vnorm_sq_temperature(tf, p, fine) == doctest::Approx(p.alpha * c * c * p.lx * p.ly).epsilon(0.01));
}

TEST_CASE("vnorm of a sine mode is the discrete eigenvalue times the L2 norm") {
  Parameters p;
  p.re1 = 0.5;
  p.lx = 1.5;
  const Grid g(p, 12, 6, 6);
  const ScalarField u = sample(g, bc_velocity_x(), [&](double x, double, double) { return std::sin(pi * x / p.lx); });
  const ScalarField v(g.shape, bc_velocity_y());
  const double expected = (1 / p.re1) * mode_eigenvalue(1, g.nx(), g.dx) * l2_norm_sq(u, g);
  CHECK(vnorm_sq_velocity(u, v, p, g) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(vnorm_sq_velocity(u, v, p, g) ==
        doctest::Approx((1 / p.re1) * pi * pi / (p.lx * p.lx) * l2_norm_sq(u, g)).epsilon(0.01));
}

TEST_CASE("vnorm equals the diffusion operator quadratic form") {
  Parameters p;
  p.re1 = 2.0;
  p.re2 = 0.3;
  p.rt1 = 0.7;
  p.rt2 = 5.0;
  p.alpha = 0.4;
  const Grid g(p, 6, 7, 5);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const ScalarField t = random_field(g, bc_temperature(p, g), rng);
    const DiffusionOperator at(g, t.bc(), 1 / p.rt1, 1 / p.rt2);
    CHECK(vnorm_sq_temperature(t, p, g) == doctest::Approx(inner(at.apply(t), t, g)).epsilon(1e-12));
    const ScalarField u = random_field(g, bc_velocity_x(), rng), v = random_field(g, bc_velocity_y(), rng);
    const DiffusionOperator au(g, u.bc(), 1 / p.re1, 1 / p.re2), av(g, v.bc(), 1 / p.re1, 1 / p.re2);
    CHECK(vnorm_sq_velocity(u, v, p, g) ==
          doctest::Approx(inner(au.apply(u), u, g) + inner(av.apply(v), v, g)).epsilon(1e-12));
  }
}

TEST_CASE("discrete Poincare-type bound for temperature") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> logu(-2.0, 2.0);
  for (int set = 0; set < 5; ++set) {
    Parameters p;
    p.rt1 = std::pow(10.0, logu(rng));
    p.rt2 = std::pow(10.0, logu(rng));
    p.alpha = std::pow(10.0, logu(rng));
    p.h = std::pow(10.0, 0.5 * logu(rng));
    const Grid g(p, 6, 6, 8);
    const double k2 = k2_constant(p);
    for (int s = 0; s < 20; ++s) {
      const ScalarField t = random_field(g, bc_temperature(p, g), rng);
      CHECK(l2_norm_sq(t, g) <= k2 * vnorm_sq_temperature(t, p, g) * (1 + 1e-6));
    }
  }
}

TEST_CASE("vnorm is homogeneous of degree two") {
  const Parameters p;
  const Grid g(p, 5, 5, 5);
  std::mt19937_64 rng(5);
  const ScalarField t = random_field(g, bc_temperature(p, g), rng);
  ScalarField t2 = -2.5 * t;
  fill_ghost(t2);
  CHECK(vnorm_sq_temperature(t2, p, g) == doctest::Approx(6.25 * vnorm_sq_temperature(t, p, g)).epsilon(1e-13));
}

TEST_CASE("smoothing bracket") {
  const Parameters p;
  const Grid g(p, 6, 5, 6);
  CHECK(smoothing_bracket(make_rest_state(p, g), g) == 0.0);

  // z-independent fields (temperature carried with even ghosts on every face).
  State s = make_rest_state(p, g);
  s.u = sample(g, bc_velocity_x(), [](double x, double y, double) { return std::sin(pi * x) * std::cos(pi * y); });
  s.v = sample(g, bc_velocity_y(), [](double x, double y, double) { return std::cos(2 * pi * x) * std::sin(pi * y); });
  s.t = sample(g, bc_neumann(), [](double x, double y, double) { return std::cos(pi * x) + 0.3 * std::cos(pi * y); });
  const auto gu = grad_h(s.u, g), gv = grad_h(s.v, g), gt = grad_h(s.t, g);
  const double nv = l2_norm_sq(gu[0], g) + l2_norm_sq(gu[1], g) + l2_norm_sq(gv[0], g) + l2_norm_sq(gv[1], g);
  const double nt = l2_norm_sq(gt[0], g) + l2_norm_sq(gt[1], g);
  CHECK(smoothing_bracket(s, g) == doctest::Approx(nv * nv + nt * nt).epsilon(1e-13));

  std::mt19937_64 rng(6);
  const State r = random_state(p, g, rng);
  const double b = smoothing_bracket(r, g);
  CHECK(b == doctest::Approx(double(bracket_oracle(r, g))).epsilon(1e-12));

  State r2 = r;
  r2.u *= 2.0;
  r2.v *= 2.0;
  r2.t *= 2.0;
  CHECK(smoothing_bracket(r2, g) == doctest::Approx(16.0 * b).epsilon(1e-12));
}

TEST_CASE("dual norm surrogate") {
  const Grid g(Shape{8, 6, 6}, 1.0, 1.0, 1.0);
  CHECK(dual_norm_surrogate(ScalarField(g.shape, bc_neumann()), g, 1.0, 1.0) == 0.0);
  const double vh = 0.8, vz = 1.7;
  const ScalarField m = sample(g, bc_neumann(), [](double x, double, double z) {
    return std::cos(pi * x) * std::cos(2 * pi * z);
  });
  const double mu = vh * mode_eigenvalue(1, 8, g.dx) + vz * mode_eigenvalue(2, 6, g.dz);
  CHECK(dual_norm_surrogate(m, g, vh, vz) == doctest::Approx(std::sqrt(l2_norm_sq(m, g)) / (1 + mu)).epsilon(1e-9));
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const ScalarField f = random_field(g, bc_velocity_x(), rng);
    CHECK(dual_norm_surrogate(f, g, vh, vz) <= std::sqrt(l2_norm_sq(f, g)));
  }
}

TEST_CASE("decay_bound_T") {
  CHECK(decay_bound_T(0.0, 3.0, 0.5, 2.0) == 3.0 + 4.0 * 0.5);
  CHECK(decay_bound_T(1e6, 3.0, 0.0, 2.0) < 1e-100);
  CHECK(decay_bound_T(2.0, 3.0, 0.0, 2.0) == doctest::Approx(3.0 / std::exp(1.0)));
  CHECK(decay_bound_T(1.0, 3.0, 0.5, 2.0) < decay_bound_T(0.5, 3.0, 0.5, 2.0));
  CHECK(decay_bound_T(1.0, 3.0, 0.5, 2.0) < decay_bound_T(1.0, 3.5, 0.5, 2.0));
  CHECK(decay_bound_T(1.0, 3.0, 0.5, 2.0) < decay_bound_T(1.0, 3.0, 0.6, 2.0));
  CHECK(decay_bound_T(1.0, 3.0, 0.5, 2.0) < decay_bound_T(1.0, 3.0, 0.5, 2.1));
}

TEST_CASE("check_discrete_gronwall examples") {
  const double dt = 0.1;
  const std::vector<double> flat(11, 2.0), zero(11, 0.0);
  const InequalityReport a = check_discrete_gronwall("flat", flat, zero, 1.0, 0.0, dt, 0.0);
  CHECK(a.pass);
  CHECK(a.max_violation == 0.0);

  std::vector<double> e(11);
  for (int n = 0; n <= 10; ++n) e[n] = std::exp(-n * dt);
  // Pure decay E' = -E. A forward difference against D at the end of the step stays negative.
  const InequalityReport b = check_discrete_gronwall("exp", e, e, 1.0, 0.0, dt, 0.0, DissipationAt::End);
  CHECK(b.pass);
  for (std::size_t n = 0; n < b.residuals.size(); ++n)
    CHECK(b.residuals[n] == doctest::Approx(e[n] * ((std::exp(-dt) - 1) / dt + std::exp(-dt))).epsilon(1e-12));
  // With D at the start the convex decay overshoots by O(dt) and needs slack.
  const InequalityReport c = check_discrete_gronwall("exp-start", e, e, 1.0, 0.0, dt, 0.0);
  CHECK_FALSE(c.pass);
  CHECK(check_discrete_gronwall("exp-start", e, e, 1.0, 0.0, dt, 0.06).pass);

  std::vector<double> grow = e;
  std::reverse(grow.begin(), grow.end());
  CHECK_FALSE(check_discrete_gronwall("grow", grow, zero, 1.0, 0.0, dt, 0.0).pass);
  CHECK_THROWS_AS(check_discrete_gronwall("bad", e, std::vector<double>(5, 0.0), 1.0, 0.0, dt, 0.0), LengthError);
}

TEST_CASE("slack calibration and constant fitting") {
  const double dt = 0.01, dx = 0.1, mu = 3.0;
  std::vector<double> e(21), d(21);
  for (int n = 0; n <= 20; ++n) {
    e[n] = std::pow(1 + mu * dt, -2.0 * n);
    d[n] = mu * e[n];
  }
  // Backward Euler on an eigenmode: residual mu^2 dt E against (dt + dx^2) mu E.
  CHECK(calibrate_slack(e, d, dt, dx) == doctest::Approx(mu * dt / (dt + dx * dx)).epsilon(1e-9));

  const std::vector<double> basis(20, 1.0);
  const double c = fit_constant(e, d, 1.0, basis, dt, 2.0);
  CHECK(c == 0.0);  // energy decays faster than D, so the fitted constant clamps at zero
  const std::vector<double> up(21, 1.0);
  std::vector<double> rising(21);
  for (int n = 0; n <= 20; ++n) rising[n] = 0.5 * n * dt;
  CHECK(fit_constant(rising, up, 1.0, basis, dt, 2.0) == doctest::Approx(2.0 * 1.5));
}

TEST_CASE("temperature inequality holds on a forced run") {
  Parameters p;
  p.q = QProfile::constant(0.8);
  p.alpha = 0.7;
  const Grid g(p, 8, 8, 6);
  std::mt19937_64 rng(8);
  State s = random_state(p, g, rng, 0.5);
  const double dt = 1.0 / 512;
  const Solver solver(p, g, SolverOptions{dt});
  std::vector<double> e{l2_norm_sq(s.t, g)}, d{vnorm_sq_temperature(s.t, p, g)};
  for (int n = 0; n < 200; ++n) {
    s = solver.advance(s);
    e.push_back(l2_norm_sq(s.t, g));
    d.push_back(vnorm_sq_temperature(s.t, p, g));
  }
  const double b = k2_constant(p) * q_norm_sq(p);
  const InequalityReport r = check_discrete_gronwall("T", e, d, 1.0, b, dt, 0.0, DissipationAt::End);
  CHECK(r.pass);
  for (std::size_t n = 0; n < d.size(); ++n) CHECK(d[n] >= e[n] / k2_constant(p) * (1 - 1e-8));
}
