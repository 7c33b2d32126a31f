#include "peq/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "peq/stencil.hpp"

namespace peq {

namespace {

void require_compatible(const Trajectory& a, const Trajectory& b) {
  if (a.n_samples != b.n_samples || a.ell != b.ell || !(a.grid.shape == b.grid.shape) ||
      a.states.size() != b.states.size())
    throw TrajectoryError("trajectory shape mismatch");
}

void require_solver(const Trajectory& chi, const Solver& solver) {
  if (solver.dt() != chi.dt || !(solver.grid().shape == chi.grid.shape))
    throw TrajectoryError("solver does not match the trajectory's dt or grid");
}

double trapezoid(const std::vector<double>& f, double h) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < f.size(); ++k) acc += 0.5 * (f[k] + f[k + 1]);
  return acc * h;
}

State state_difference(const State& a, const State& b) {
  State d;
  d.u = a.u - b.u;
  d.v = a.v - b.v;
  d.t = a.t - b.t;
  d.w = a.w;
  d.w.data() -= b.w.data();
  d.ps = a.ps;
  d.ps.data() -= b.ps.data();
  d.time = a.time;
  return d;
}

}  // namespace

std::size_t aligned_steps(double duration, double dt, const std::string& what) {
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw TrajectoryError(what + " must be non-negative");
  const double ratio = duration / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
    throw TrajectoryError(what + " is not a whole number of time steps");
  return std::size_t(n);
}

Trajectory sample_trajectory(const State& s0, double ell, int n_samples, const Solver& solver) {
  if (n_samples < 3) throw TrajectoryError("n_samples must be at least 3");
  if (!(ell > 0.0)) throw TrajectoryError("ell must be positive");
  Trajectory chi;
  chi.ell = ell;
  chi.n_samples = n_samples;
  chi.dt = solver.dt();
  chi.params = solver.parameters();
  chi.grid = solver.grid();
  chi.steps_per_sample = aligned_steps(ell / (n_samples - 1), solver.dt(), "ell/(n_samples-1)");
  if (chi.steps_per_sample == 0) throw TrajectoryError("sample spacing is shorter than dt");
  chi.states.reserve(n_samples);
  chi.states.push_back(s0);
  for (int k = 1; k < n_samples; ++k) chi.states.push_back(solver.advance(chi.states.back(), chi.steps_per_sample));
  return chi;
}

Trajectory sample_trajectory(const State& s0, double ell, int n_samples, const Parameters& p, double dt) {
  const Shape& s = s0.shape();
  const Solver solver(p, Grid(p, s.nx, s.ny, s.nz), SolverOptions{dt});
  return sample_trajectory(s0, ell, n_samples, solver);
}

Evaluation evaluate_e(const Trajectory& chi, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw TrajectoryError("evaluation time must lie in [0, 1]");
  const double pos = t * (chi.n_samples - 1);
  const double k = std::round(pos);
  Evaluation e;
  e.index = int(k);
  e.nearest = std::abs(pos - k) > 1e-12 * chi.n_samples;
  e.state = chi.states[e.index];
  return e;
}

Trajectory shift_L(const Trajectory& chi, double t, const Solver& solver) {
  require_solver(chi, solver);
  const std::size_t steps = aligned_steps(t, chi.dt, "shift time");
  if (steps == 0) return chi;
  // Sample k is exactly k*steps_per_sample steps in, so restarting from it is bitwise equivalent.
  const std::size_t k = std::min<std::size_t>(steps / chi.steps_per_sample, chi.states.size() - 1);
  const State start = solver.advance(chi.states[k], steps - k * chi.steps_per_sample);
  return sample_trajectory(start, chi.ell, chi.n_samples, solver);
}

Trajectory difference(const Trajectory& a, const Trajectory& b) {
  require_compatible(a, b);
  Trajectory d = a;
  for (std::size_t k = 0; k < a.states.size(); ++k) d.states[k] = state_difference(a.states[k], b.states[k]);
  return d;
}

double dist_l2h(const Trajectory& a, const Trajectory& b) {
  require_compatible(a, b);
  std::vector<double> e(a.states.size());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = h_energy(state_difference(a.states[k], b.states[k]), a.grid);
  return std::sqrt(trapezoid(e, a.spacing()));
}

YNorm y_norm(const Trajectory& chi, const DualSurrogate& dual) {
  const std::size_t n = chi.states.size();
  if (n < 3) throw TrajectoryError("trajectory needs at least 3 samples");
  const Grid& g = chi.grid;
  const double h = chi.spacing();
  std::vector<double> vn(n), dn(n);
  for (std::size_t k = 0; k < n; ++k) {
    const State& s = chi.states[k];
    vn[k] = vnorm_sq_velocity(s.u, s.v, chi.params, g) + vnorm_sq_temperature(s.t, chi.params, g);
    const std::size_t lo = k == 0 ? 0 : k - 1, hi = k + 1 == n ? k : k + 1;
    const double scale = 1.0 / (double(hi - lo) * h);
    State d = state_difference(chi.states[hi], chi.states[lo]);
    d.u *= scale;
    d.v *= scale;
    d.t *= scale;
    const double dv = dual.velocity(d.u, d.v), dt = dual.temperature(d.t);
    dn[k] = std::sqrt(dv * dv + dt * dt);
  }
  YNorm y;
  y.v_integral = trapezoid(vn, h);
  y.dual_integral = trapezoid(dn, h);
  y.value = std::sqrt(y.v_integral + y.dual_integral * y.dual_integral);
  return y;
}

double bracket_integral(const State& s0, std::size_t steps, const Solver& solver, State* end) {
  const Grid& g = solver.grid();
  State cur = s0;
  double prev = smoothing_bracket(cur, g), acc = 0.0;
  for (std::size_t n = 0; n < steps; ++n) {
    cur = solver.advance(cur);
    const double next = smoothing_bracket(cur, g);
    acc += 0.5 * (prev + next);
    prev = next;
  }
  if (end) *end = std::move(cur);
  return acc * solver.dt();
}

namespace {

double denominator(const Trajectory& a, const Trajectory& b) {
  const double d = dist_l2h(a, b);
  if (!(d > 0.0)) throw ProbeError("identical trajectories");
  return d * d;
}

// Shifts b by t while integrating the bracket over [0, t + ell] along it.
Trajectory shift_with_bracket(const Trajectory& b, double t, const Solver& solver, double& integral) {
  require_solver(b, solver);
  const std::size_t steps = aligned_steps(t, b.dt, "shift time");
  State start;
  integral = bracket_integral(b.states[0], steps, solver, &start);
  Trajectory shifted = steps == 0 ? b : sample_trajectory(start, b.ell, b.n_samples, solver);
  std::vector<double> f(shifted.states.size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = smoothing_bracket(shifted.states[k], solver.grid());
  integral += trapezoid(f, shifted.spacing());
  return shifted;
}

}  // namespace

ProbeReport lipschitz_probe(const Trajectory& a, const Trajectory& b, double t, const Solver& solver,
                            double c_fit) {
  require_compatible(a, b);
  const double den = denominator(a, b);
  ProbeReport r;
  r.probe = "lipschitz";
  r.t = t;
  const Trajectory sb = shift_with_bracket(b, t, solver, r.bracket_integral);
  const Trajectory sa = shift_L(a, t, solver);
  const double num = dist_l2h(sa, sb);
  r.ratio = num * num / den;
  r.constant = c_fit;
  r.growth = std::exp(c_fit * r.bracket_integral);
  r.bound = r.growth;
  r.pass = r.ratio <= r.bound;
  return r;
}

ProbeReport smoothing_probe(const Trajectory& a, const Trajectory& b, double t, const Solver& solver,
                            const DualSurrogate& dual, double c_fit, double kappa) {
  require_compatible(a, b);
  if (t < a.ell) throw ProbeError("smoothing probe requires t >= ell");
  const double den = denominator(a, b);
  ProbeReport r;
  r.probe = "smoothing";
  r.t = t;
  r.surrogate = true;
  const Trajectory sb = shift_with_bracket(b, t, solver, r.bracket_integral);
  const Trajectory sa = shift_L(a, t, solver);
  const double y = y_norm(difference(sa, sb), dual).value;
  r.ratio = y * y / den;
  r.constant = kappa;
  r.growth = std::exp(c_fit * r.bracket_integral);
  r.bound = kappa * r.growth;
  r.pass = r.ratio <= r.bound;
  return r;
}

ProbeReport endpoint_lipschitz_probe(const Trajectory& a, const Trajectory& b, double theta) {
  require_compatible(a, b);
  const double den = denominator(a, b);
  ProbeReport r;
  r.probe = "endpoint";
  r.ratio = h_energy(state_difference(a.states.back(), b.states.back()), a.grid) / den;
  r.constant = theta;
  r.bound = theta;
  r.pass = r.ratio <= r.bound;
  return r;
}

ProbeCalibration calibrate_probes(const std::vector<std::pair<Trajectory, Trajectory>>& pairs, double t,
                                  const Solver& solver, const DualSurrogate& dual, double headroom) {
  ProbeCalibration c;
  for (const auto& [a, b] : pairs) {
    const ProbeReport r = lipschitz_probe(a, b, t, solver, 0.0);
    if (r.ratio > 1.0 && r.bracket_integral > 0.0) c.c_fit = std::max(c.c_fit, std::log(r.ratio) / r.bracket_integral);
    c.theta = std::max(c.theta, endpoint_lipschitz_probe(a, b, 0.0).ratio);
  }
  c.c_fit *= headroom;
  for (const auto& [a, b] : pairs) {
    const ProbeReport r = smoothing_probe(a, b, t, solver, dual, c.c_fit, 0.0);
    c.kappa = std::max(c.kappa, r.ratio / r.growth);
  }
  c.kappa *= headroom;
  c.theta *= headroom;
  return c;
}

State perturb_temperature(const State& s, double delta, const ScalarField& direction) {
  State out = s;
  out.t.data() += delta * direction.data();
  fill_ghost(out.t);
  return out;
}

}  // namespace peq
