#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "peq/trajectory.hpp"
#include "support.hpp"

using namespace peq;
using peq::testing::random_field;
using peq::testing::smooth_state;

namespace {

bool same_fields(const State& a, const State& b) {
  return a.u.interior_equal(b.u) && a.v.interior_equal(b.v) && a.t.interior_equal(b.t);
}

bool same_trajectory(const Trajectory& a, const Trajectory& b) {
  if (a.states.size() != b.states.size()) return false;
  for (std::size_t k = 0; k < a.states.size(); ++k)
    if (!a.states[k].prognostic_equal(b.states[k])) return false;
  return true;
}

ScalarField unit_direction(const Parameters& p, const Grid& g, std::mt19937_64& rng) {
  ScalarField d = random_field(g, bc_temperature(p, g), rng);
  d *= 1.0 / std::sqrt(l2_norm_sq(d, g));
  return d;
}

// Low-mode temperature direction, unit L2 norm.
ScalarField smooth_direction(const Parameters& p, const Grid& g, std::mt19937_64& rng) {
  ScalarField d = smooth_state(p, g, rng).t;
  d *= 1.0 / std::sqrt(l2_norm_sq(d, g));
  return d;
}

// Slow dissipation, so sample spacings of order 0.1 resolve the dynamics.
Parameters slow() {
  Parameters p;
  p.re1 = p.re2 = p.rt1 = p.rt2 = 50.0;
  p.alpha = 50.0;
  p.q = QProfile::constant(1.0);
  return p;
}

Parameters forced() {
  Parameters p;
  p.q = QProfile::constant(1.0);
  return p;
}

// Time-constant trajectory assembled by hand (no solver), used where the oracle needs steadiness.
Trajectory constant_trajectory(const State& s, const Parameters& p, const Grid& g, double ell, int n) {
  Trajectory chi;
  chi.ell = ell;
  chi.n_samples = n;
  chi.steps_per_sample = 1;
  chi.dt = ell / (n - 1);
  chi.params = p;
  chi.grid = g;
  chi.states.assign(n, s);
  return chi;
}

}  // namespace

TEST_CASE("sample_trajectory") {
  const Parameters p;
  const Grid g(p, 6, 6, 6);
  const Solver solver(p, g, SolverOptions{1.0 / 64});

  const State rest = make_rest_state(p, g);
  const Trajectory r = sample_trajectory(rest, 0.25, 5, solver);
  REQUIRE(r.states.size() == 5);
  for (const State& s : r.states) CHECK(same_fields(s, rest));
  CHECK(r.steps_per_sample == 4);

  std::mt19937_64 rng(1);
  const State s0 = smooth_state(p, g, rng);
  const Trajectory a = sample_trajectory(s0, 0.25, 5, solver);
  CHECK(a.states[0].prognostic_equal(s0));
  const Trajectory b = sample_trajectory(s0, 0.25, 9, solver);
  for (int k = 0; k < 5; ++k) CHECK(a.states[k].prognostic_equal(b.states[2 * k]));
  CHECK(b.states.back().time == doctest::Approx(0.25));

  CHECK_THROWS_AS(sample_trajectory(s0, 0.25, 2, solver), TrajectoryError);
  CHECK_THROWS_AS(sample_trajectory(s0, 0.3, 5, solver), TrajectoryError);
}

TEST_CASE("evaluate_e") {
  const Parameters p;
  const Grid g(p, 5, 5, 5);
  const Solver solver(p, g, SolverOptions{1.0 / 32});
  std::mt19937_64 rng(2);
  const Trajectory chi = sample_trajectory(smooth_state(p, g, rng), 0.25, 5, solver);
  CHECK(evaluate_e(chi, 0.0).state.prognostic_equal(chi.states[0]));
  CHECK(evaluate_e(chi, 1.0).state.prognostic_equal(chi.states[4]));
  const Evaluation mid = evaluate_e(chi, 0.5);
  CHECK(mid.state.prognostic_equal(chi.states[2]));
  CHECK_FALSE(mid.nearest);
  const Evaluation off = evaluate_e(chi, 0.3);
  CHECK(off.nearest);
  CHECK(off.index == 1);
  CHECK_THROWS_AS(evaluate_e(chi, -0.1), TrajectoryError);
  CHECK_THROWS_AS(evaluate_e(chi, 1.5), TrajectoryError);
}

TEST_CASE("shift_L identity, semigroup and endpoint consistency") {
  const Parameters p = forced();
  const Grid g(p, 6, 6, 5);
  const Solver solver(p, g, SolverOptions{1.0 / 64});
  std::mt19937_64 rng(3);
  const State s0 = smooth_state(p, g, rng);
  const Trajectory chi = sample_trajectory(s0, 0.125, 5, solver);

  CHECK(same_trajectory(shift_L(chi, 0.0, solver), chi));
  const Trajectory once = shift_L(chi, 0.25 + 0.125, solver);
  const Trajectory twice = shift_L(shift_L(chi, 0.25, solver), 0.125, solver);
  CHECK(same_trajectory(once, twice));
  const Trajectory odd = shift_L(shift_L(chi, 3.0 / 64, solver), 0.375 - 3.0 / 64, solver);
  CHECK(same_trajectory(once, odd));

  const State direct = solver.advance(s0, 24);
  CHECK(evaluate_e(once, 0.0).state.prognostic_equal(direct));
  CHECK(evaluate_e(once, 1.0).state.prognostic_equal(solver.advance(direct, 8)));
  CHECK_THROWS_AS(shift_L(chi, 0.01, solver), TrajectoryError);
}

TEST_CASE("dist_l2h examples") {
  const Parameters p;
  const Grid g(p, 5, 6, 4);
  const Solver solver(p, g, SolverOptions{1.0 / 32});
  std::mt19937_64 rng(4);
  const Trajectory a = sample_trajectory(smooth_state(p, g, rng), 0.5, 5, solver);
  CHECK(dist_l2h(a, a) == 0.0);

  const double delta = 0.3;
  Trajectory b = a;
  for (State& s : b.states) s.t.data() += delta;
  CHECK(dist_l2h(a, b) == doctest::Approx(delta * std::sqrt(p.lx * p.ly * p.h * a.ell)).epsilon(1e-12));

  const Trajectory c = sample_trajectory(smooth_state(p, g, rng), 0.25, 5, solver);
  CHECK_THROWS_AS(dist_l2h(a, c), TrajectoryError);
}

TEST_CASE("dist_l2h quadrature converges at second order in the sample spacing") {
  const Parameters p = slow();
  const Grid g(p, 6, 6, 6);
  const Solver solver(p, g, SolverOptions{1.0 / 256});
  std::mt19937_64 rng(5);
  const State s1 = smooth_state(p, g, rng), s2 = smooth_state(p, g, rng);
  auto dist = [&](int n) {
    return dist_l2h(sample_trajectory(s1, 0.5, n, solver), sample_trajectory(s2, 0.5, n, solver));
  };
  const double ref = dist(129), d5 = dist(5), d9 = dist(9), d17 = dist(17);
  const double e5 = std::abs(d5 * d5 - ref * ref), e9 = std::abs(d9 * d9 - ref * ref),
               e17 = std::abs(d17 * d17 - ref * ref);
  CHECK(e5 / (ref * ref) < 0.05);
  CHECK(e9 / e17 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("dist_l2h metric axioms on random triples") {
  const Parameters p = forced();
  const Grid g(p, 4, 4, 4);
  const Solver solver(p, g, SolverOptions{1.0 / 64});
  std::mt19937_64 rng(6);
  auto random_trajectory = [&] { return sample_trajectory(smooth_state(p, g, rng), 1.0 / 16, 3, solver); };
  for (int trial = 0; trial < 25; ++trial) {
    const Trajectory a = random_trajectory(), b = random_trajectory(), c = random_trajectory();
    const double ab = dist_l2h(a, b), ba = dist_l2h(b, a), bc = dist_l2h(b, c), ac = dist_l2h(a, c);
    CHECK(ab > 0.0);
    CHECK(ab == ba);
    CHECK(ac <= ab + bc + 1e-14 * (ab + bc));
    CHECK(dist_l2h(a, a) == 0.0);
  }
}

TEST_CASE("y_norm") {
  const Parameters p;
  const Grid g(p, 6, 6, 6);
  const DualSurrogate dual(p, g);
  const State rest = make_rest_state(p, g);
  const Solver solver(p, g, SolverOptions{1.0 / 64});
  CHECK(y_norm(sample_trajectory(rest, 0.25, 5, solver), dual).value == 0.0);

  std::mt19937_64 rng(7);
  const State s = smooth_state(p, g, rng);
  const YNorm steady = y_norm(constant_trajectory(s, p, g, 0.5, 5), dual);
  CHECK(steady.dual_integral == 0.0);
  const double vn = vnorm_sq_velocity(s.u, s.v, p, g) + vnorm_sq_temperature(s.t, p, g);
  CHECK(steady.value == doctest::Approx(std::sqrt(0.5 * vn)).epsilon(1e-13));

  const Parameters ps = slow();
  const Solver fine(ps, g, SolverOptions{1.0 / 512});
  const DualSurrogate sdual(ps, g);
  const State s0 = smooth_state(ps, g, rng);
  const double i5 = y_norm(sample_trajectory(s0, 0.25, 5, fine), sdual).v_integral;
  const double i9 = y_norm(sample_trajectory(s0, 0.25, 9, fine), sdual).v_integral;
  const double i17 = y_norm(sample_trajectory(s0, 0.25, 17, fine), sdual).v_integral;
  const double i129 = y_norm(sample_trajectory(s0, 0.25, 129, fine), sdual).v_integral;
  CHECK(std::abs(i5 - i129) / std::abs(i9 - i129) == doctest::Approx(4.0).epsilon(0.25));
  CHECK(std::abs(i9 - i129) / std::abs(i17 - i129) == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("lipschitz probe") {
  const Parameters p;
  const Grid g(p, 6, 6, 6);
  const Solver solver(p, g, SolverOptions{1.0 / 64});
  std::mt19937_64 rng(8);
  const State s0 = smooth_state(p, g, rng);
  const ScalarField dir = unit_direction(p, g, rng);
  const Trajectory b = sample_trajectory(s0, 0.25, 5, solver);
  const Trajectory a = sample_trajectory(perturb_temperature(s0, 1e-6, dir), 0.25, 5, solver);

  CHECK_THROWS_WITH_AS(lipschitz_probe(b, b, 0.0, solver, 1.0), "identical trajectories", ProbeError);

  const ProbeReport r0 = lipschitz_probe(a, b, 0.0, solver, 0.5);
  CHECK(r0.ratio == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r0.growth >= 1.0);
  CHECK(r0.pass);

  // Decaying regime: contraction, and the shifted distance matches direct differencing.
  const ProbeReport r5 = lipschitz_probe(a, b, 5 * 0.25, solver, 0.0);
  CHECK(r5.ratio < 1.0);
  CHECK(r5.pass);
  const Trajectory da = sample_trajectory(solver.advance(a.states[0], 80), 0.25, 5, solver);
  const Trajectory db = sample_trajectory(solver.advance(b.states[0], 80), 0.25, 5, solver);
  const double direct = dist_l2h(da, db) / dist_l2h(a, b);
  CHECK(r5.ratio == doctest::Approx(direct * direct).epsilon(1e-12));
}

TEST_CASE("smoothing probe is quadratically homogeneous") {
  const Parameters p = forced();
  const Grid g(p, 6, 6, 6);
  SolverOptions opt{1.0 / 64};
  opt.cg_tolerance = 1e-13;
  const Solver solver(p, g, opt);
  const DualSurrogate dual(p, g, 1e-13);
  std::mt19937_64 rng(9);
  const State s0 = solver.advance(smooth_state(p, g, rng), 64);
  const ScalarField dir = unit_direction(p, g, rng);
  const Trajectory b = sample_trajectory(s0, 0.25, 5, solver);

  CHECK_THROWS_AS(smoothing_probe(b, b, 0.25, solver, dual, 1.0, 1.0), ProbeError);
  const Trajectory a4 = sample_trajectory(perturb_temperature(s0, 1e-4, dir), 0.25, 5, solver);
  CHECK_THROWS_AS(smoothing_probe(a4, b, 0.125, solver, dual, 1.0, 1.0), ProbeError);

  std::vector<double> ratios;
  for (double delta : {1e-4, 1e-5, 1e-6}) {
    const Trajectory a = sample_trajectory(perturb_temperature(s0, delta, dir), 0.25, 5, solver);
    const ProbeReport r = smoothing_probe(a, b, 0.5, solver, dual, 0.0, 1e6);
    CHECK(r.surrogate);
    ratios.push_back(r.ratio);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / *lo < 1.1);
}

TEST_CASE("endpoint probe") {
  const Parameters p;
  const Grid g(p, 5, 5, 5);
  std::mt19937_64 rng(10);
  const State s = smooth_state(p, g, rng);
  const Trajectory a = constant_trajectory(s, p, g, 0.5, 5);
  CHECK_THROWS_AS(endpoint_lipschitz_probe(a, a, 1.0), ProbeError);
  Trajectory b = a;
  for (State& x : b.states) x.t.data() += 0.01;
  const ProbeReport r = endpoint_lipschitz_probe(a, b, 3.0);
  CHECK(r.ratio == doctest::Approx(1.0 / a.ell).epsilon(1e-12));
  CHECK(r.pass);
  CHECK_FALSE(endpoint_lipschitz_probe(a, b, 1.0).pass);
}

TEST_CASE("endpoint ratio is stable across nearby pairs in the absorbing regime") {
  const Parameters p = slow();
  const Grid g(p, 6, 6, 6);
  const Solver solver(p, g, SolverOptions{1.0 / 64});
  std::mt19937_64 rng(11);
  const State base = solver.advance(smooth_state(p, g, rng), 1024);
  const Trajectory b = sample_trajectory(base, 0.25, 5, solver);
  std::vector<double> ratios;
  for (int pair = 0; pair < 10; ++pair) {
    const Trajectory a = sample_trajectory(perturb_temperature(base, 1e-5, smooth_direction(p, g, rng)), 0.25, 5, solver);
    ratios.push_back(endpoint_lipschitz_probe(a, b, 0.0).ratio);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / *lo < 2.0);
}

TEST_CASE("calibrated constants pass their own pairs and held-out pairs") {
  const Parameters p = forced();
  const Grid g(p, 6, 6, 6);
  const Solver solver(p, g, SolverOptions{1.0 / 64});
  const DualSurrogate dual(p, g);
  std::mt19937_64 rng(12);
  const State base = solver.advance(smooth_state(p, g, rng), 128);
  auto pair = [&] {
    const Trajectory b = sample_trajectory(base, 0.25, 5, solver);
    return std::make_pair(sample_trajectory(perturb_temperature(base, 1e-5, unit_direction(p, g, rng)), 0.25, 5, solver), b);
  };
  std::vector<std::pair<Trajectory, Trajectory>> calib{pair(), pair(), pair()};
  const ProbeCalibration c = calibrate_probes(calib, 0.5, solver, dual);
  CHECK(c.kappa > 0.0);
  CHECK(c.theta > 0.0);
  for (int k = 0; k < 3; ++k) {
    const auto [a, b] = pair();
    CHECK(lipschitz_probe(a, b, 0.5, solver, c.c_fit).pass);
    CHECK(smoothing_probe(a, b, 0.5, solver, dual, c.c_fit, c.kappa).pass);
    CHECK(endpoint_lipschitz_probe(a, b, c.theta).pass);
  }
}
