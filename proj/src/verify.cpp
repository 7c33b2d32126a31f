#include "peq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "peq/attractor.hpp"
#include "peq/poincare.hpp"
#include "peq/stencil.hpp"
#include "peq/trajectory.hpp"

namespace peq {

bool VerifySummary::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass(); });
}

std::vector<std::string> VerifySummary::failures() const {
  std::vector<std::string> out;
  for (const CheckResult& c : checks)
    if (!c.pass()) out.push_back(c.id + "/" + c.phase + "/" + std::to_string(c.run));
  return out;
}

State eigenmode_state(const Parameters& p, const Grid& g, double amplitude, int m) {
  using std::numbers::pi;
  ScalarField u(g.shape, bc_velocity_x());
  u.for_each_interior([&](int i, int, int k, double& x) {
    x = amplitude * std::sin(pi * g.x(i) / g.lx) * std::cos(m * pi * (g.z(k) + g.h) / g.h);
  });
  return make_state(p, g, std::move(u), ScalarField(g.shape), ScalarField(g.shape));
}

State verification_initial_state(const RunConfig& cfg, const Grid& g, int index) {
  const double h_norm = cfg.initial == InitialKind::Rest ? 0.0 : cfg.h_norm;
  return random_initial_state(cfg.params, g, cfg.seed, std::uint64_t(index), h_norm);
}

namespace {

std::size_t run_steps(const RunConfig& cfg) { return aligned_steps(cfg.t_final, cfg.dt, "t_final"); }

Grid grid_of(const RunConfig& cfg) { return Grid(cfg.params, cfg.shape.nx, cfg.shape.ny, cfg.shape.nz); }

void record(EnergySeries& s, const State& st, const Parameters& p, const Grid& g) {
  s.l2_t.push_back(l2_norm_sq(st.t, g));
  s.vnorm_t.push_back(vnorm_sq_temperature(st.t, p, g));
  s.l2_v.push_back(l2_norm_sq(st.u, g) + l2_norm_sq(st.v, g));
  s.vnorm_v.push_back(vnorm_sq_velocity(st.u, st.v, p, g));
}

// Failed check carrying the solver message, used when a run cannot produce a series.
CheckResult failed(const std::string& id, const std::string& phase, int run, const std::string& note) {
  CheckResult c{id, phase, run, note, {}};
  c.report.id = id;
  c.report.pass = false;
  c.report.max_violation = std::numeric_limits<double>::infinity();
  return c;
}

std::vector<double> shifted(const std::vector<double>& x) { return {x.begin() + 1, x.end()}; }

}  // namespace

EnergySeries run_energy_series(const RunConfig& cfg, const State& s0, std::size_t steps) {
  const Grid g = grid_of(cfg);
  const Solver solver(cfg.params, g, cfg.solver_options());
  EnergySeries out;
  State s = s0;
  record(out, s, cfg.params, g);
  try {
    for (std::size_t n = 0; n < steps; ++n) {
      s = solver.advance(s);
      record(out, s, cfg.params, g);
    }
  } catch (const SolverError& e) {
    out.error = e.what();
  }
  return out;
}

double calibrate_eigenmode_slack(const RunConfig& cfg) {
  RunConfig ref = cfg;
  ref.advection = AdvectionForm::SkewSymmetric;
  ref.params.q = QProfile{};
  const Grid g = grid_of(ref);
  const State s0 = eigenmode_state(ref.params, g, cfg.eigen_amplitude, cfg.eigen_m);
  const EnergySeries s = run_energy_series(ref, s0, std::min<std::size_t>(run_steps(cfg), 256));
  if (!s.error.empty()) throw SolverError("slack calibration run failed: " + s.error);
  return calibrate_slack(s.l2_v, s.vnorm_v, cfg.dt, g.dx);
}

InequalityReport check_decay_bound(const std::vector<double>& l2_t, double dt, double q_norm_sq, double k2,
                                   double c_slack, double dx) {
  InequalityReport r;
  r.id = "temperature-decay";
  if (l2_t.empty()) throw LengthError("decay bound check needs at least one sample");
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < l2_t.size(); ++n) {
    const double bound = decay_bound_T(n * dt, l2_t[0], q_norm_sq, k2);
    r.residuals.push_back(l2_t[n] - bound);
    r.slack.push_back(c_slack * (dt + dx * dx) * bound);
    const double v = r.residuals.back() - r.slack.back();
    if (v > r.max_violation) {
      r.max_violation = v;
      r.worst = n;
    }
  }
  r.pass = r.max_violation <= 0.0;
  return r;
}

InequalityReport lemma_sweep(const Parameters& p, const Grid& g, int count, std::uint64_t seed, double relative_slack) {
  InequalityReport r;
  r.id = "temperature-poincare";
  const double k2 = k2_constant(p);
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < count; ++n) {
    CounterRng rng(seed, std::uint64_t(n));
    ScalarField t(g.shape, bc_temperature(p, g));
    t.for_each_interior([&](int, int, int, double& x) { x = 2.0 * rng.uniform() - 1.0; });
    fill_ghost(t);
    const double rhs = k2 * vnorm_sq_temperature(t, p, g);
    r.residuals.push_back(l2_norm_sq(t, g) - rhs);
    r.slack.push_back(relative_slack * rhs);
    const double v = r.residuals.back() - r.slack.back();
    if (v > r.max_violation) {
      r.max_violation = v;
      r.worst = std::size_t(n);
    }
  }
  r.pass = r.max_violation <= 0.0;
  return r;
}

VerifySummary run_verify(const RunConfig& cfg) {
  VerifySummary out;
  const Parameters& p = cfg.params;
  const Grid g = grid_of(cfg);
  const std::size_t steps = run_steps(cfg);
  const double dt = cfg.dt, dx = g.dx;
  const double k2 = k2_constant(p), qn = q_norm_sq(p);
  out.c_slack = calibrate_eigenmode_slack(cfg);
  out.lambda = poincare_lambda(p, g);

  const int n_cal = cfg.calibration_runs, n_test = cfg.test_runs;
  const int n_runs = std::max(n_cal + n_test, cfg.decay_ics);
  std::vector<EnergySeries> runs;
  for (int i = 0; i < n_runs; ++i) runs.push_back(run_energy_series(cfg, verification_initial_state(cfg, g, i), steps));

  // Temperature energy inequality with its explicit constants and the decay bound, on every run.
  for (int i = 0; i < n_runs; ++i) {
    const EnergySeries& s = runs[i];
    if (s.l2_t.size() < 2) {
      out.checks.push_back(failed("temperature-energy", "explicit", i, s.error));
      continue;
    }
    const std::vector<double> b(s.l2_t.size() - 1, k2 * qn);
    CheckResult c{"temperature-energy", "explicit", i, s.error, {}};
    c.report = check_discrete_gronwall("temperature-energy", s.l2_t, s.vnorm_t, 1.0, b, dt,
                                       slack_series(out.c_slack, dt, dx, s.vnorm_t, 1.0, b), DissipationAt::End);
    out.checks.push_back(c);
    if (i < cfg.decay_ics) {
      CheckResult d{"temperature-decay", "explicit", i, s.error, {}};
      d.report = check_decay_bound(s.l2_t, dt, qn, k2, out.c_slack, dx);
      out.checks.push_back(d);
    }
  }

  // Velocity energy inequality: C fitted on the calibration runs, tested on the held-out runs.
  auto velocity_basis = [&](const EnergySeries& s) {
    std::vector<double> b = shifted(s.l2_t);
    for (double& x : b) x /= out.lambda;
    return b;
  };
  for (int i = 0; i < n_cal; ++i) {
    const EnergySeries& s = runs[i];
    if (s.l2_v.size() < 2) continue;
    out.c_velocity = std::max(out.c_velocity, fit_constant(s.l2_v, s.vnorm_v, 1.0, velocity_basis(s), dt, 1.0));
  }
  out.c_velocity *= cfg.headroom;
  for (int i = n_cal; i < n_cal + n_test; ++i) {
    const EnergySeries& s = runs[i];
    if (s.l2_v.size() < 2) {
      out.checks.push_back(failed("velocity-energy", "held-out", i, s.error));
      continue;
    }
    std::vector<double> b = velocity_basis(s);
    for (double& x : b) x *= out.c_velocity;
    CheckResult c{"velocity-energy", "held-out", i, s.error, {}};
    c.report = check_discrete_gronwall("velocity-energy", s.l2_v, s.vnorm_v, 1.0, b, dt,
                                       slack_series(out.c_slack, dt, dx, s.vnorm_v, 1.0, b), DissipationAt::End);
    out.checks.push_back(c);
  }

  // Difference energy inequality: pairs differing by a small perturbation; the coefficient is C times the
  // bracket along the second solution.
  struct PairSeries {
    std::vector<double> e, d, basis;
    std::string error;
  };
  auto run_pair = [&](int i) {
    PairSeries ps;
    const Solver solver(p, g, cfg.solver_options());
    State s2 = verification_initial_state(cfg, g, i);
    const double scale = cfg.pair_delta * std::sqrt(h_energy(s2, g));
    const State kick = random_initial_state(p, g, cfg.seed ^ 0x5eed, std::uint64_t(i), scale);
    State s1 = make_state(p, g, s2.u + kick.u, s2.v + kick.v, s2.t + kick.t);
    auto push = [&] {
      const ScalarField du = s1.u - s2.u, dv = s1.v - s2.v, dT = s1.t - s2.t;
      const double e = l2_norm_sq(du, g) + l2_norm_sq(dv, g) + l2_norm_sq(dT, g);
      ps.e.push_back(e);
      ps.d.push_back(vnorm_sq_velocity(du, dv, p, g) + vnorm_sq_temperature(dT, p, g));
      if (ps.e.size() > 1) ps.basis.push_back(smoothing_bracket(s2, g) * e);
    };
    push();
    try {
      for (std::size_t n = 0; n < steps; ++n) {
        s1 = solver.advance(s1);
        s2 = solver.advance(s2);
        push();
      }
    } catch (const SolverError& e) {
      ps.error = e.what();
    }
    return ps;
  };
  for (int i = 0; i < n_cal; ++i) {
    const PairSeries ps = run_pair(i);
    if (ps.e.size() < 2) continue;
    out.c_pair = std::max(out.c_pair, fit_constant(ps.e, ps.d, 1.0, ps.basis, dt, 1.0));
  }
  out.c_pair *= cfg.headroom;
  for (int i = n_cal; i < n_cal + n_test; ++i) {
    const PairSeries ps = run_pair(i);
    if (ps.e.size() < 2) {
      out.checks.push_back(failed("difference-energy", "held-out", i, ps.error));
      continue;
    }
    std::vector<double> b = ps.basis;
    for (double& x : b) x *= out.c_pair;
    CheckResult c{"difference-energy", "held-out", i, ps.error, {}};
    c.report = check_discrete_gronwall("difference-energy", ps.e, ps.d, 1.0, b, dt,
                                       slack_series(out.c_slack, dt, dx, ps.d, 1.0, b), DissipationAt::End);
    out.checks.push_back(c);
  }

  CheckResult lemma{"temperature-poincare", "explicit", 0, "", lemma_sweep(p, g, cfg.lemma_fields, cfg.seed)};
  out.lemma_worst_ratio = 0.0;
  for (std::size_t n = 0; n < lemma.report.residuals.size(); ++n) {
    const double rhs = lemma.report.slack[n] / 1e-6;
    if (rhs > 0.0) out.lemma_worst_ratio = std::max(out.lemma_worst_ratio, (lemma.report.residuals[n] + rhs) / rhs);
  }
  out.checks.push_back(lemma);
  return out;
}

}  // namespace peq
