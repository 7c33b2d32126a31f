#include "peq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "peq/stencil.hpp"

namespace peq {

LevelField<double> diagnose_w(const ScalarField& u, const ScalarField& v, const Grid& g) {
  LevelField<double> w = vertical_cumint(div_h(u, v, g), g);
  w.data() = -w.data();
  return w;
}

ScalarField cell_centre_w(const LevelField<double>& w, const Grid& g) {
  ScalarField out(g.shape, bc_vertical_velocity());
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) out(i, j, k) = 0.5 * (w(i, j, k) + w(i, j, k + 1));
  fill_ghost(out);
  return out;
}

ScalarField diagnose_pressure(const SurfaceField& ps, const ScalarField& t, const Grid& g) {
  ScalarField p = vertical_int_from_surface(t, g);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) p(i, j, k) += ps(i, j);
  return p;
}

ScalarField advect(const ScalarField& phi, const ScalarField& u, const ScalarField& v, const ScalarField& w,
                   const Grid& g, AdvectionForm form) {
  ScalarField out(phi.shape());
  const double rx = 0.5 / g.dx, ry = 0.5 / g.dy, rz = 0.5 / g.dz;
  const bool skew = form == AdvectionForm::SkewSymmetric;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) {
        const double adv = u(i, j, k) * (phi(i + 1, j, k) - phi(i - 1, j, k)) * rx +
                           v(i, j, k) * (phi(i, j + 1, k) - phi(i, j - 1, k)) * ry +
                           w(i, j, k) * (phi(i, j, k + 1) - phi(i, j, k - 1)) * rz;
        if (!skew) {
          out(i, j, k) = adv;
          continue;
        }
        // Flux form; ghost fluxes are products of ghost values, so the pair
        // cancels exactly against the advective form in the energy sum.
        const double div = (u(i + 1, j, k) * phi(i + 1, j, k) - u(i - 1, j, k) * phi(i - 1, j, k)) * rx +
                           (v(i, j + 1, k) * phi(i, j + 1, k) - v(i, j - 1, k) * phi(i, j - 1, k)) * ry +
                           (w(i, j, k + 1) * phi(i, j, k + 1) - w(i, j, k - 1) * phi(i, j, k - 1)) * rz;
        out(i, j, k) = 0.5 * (adv + div);
      }
  return out;
}

ScalarField heat_source_field(const Parameters& p, const Grid& g) {
  ScalarField q(g.shape);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) q(i, j, k) = q_value(p.q, p, g.x(i), g.y(j), g.z(k));
  return q;
}

TendencyBundle explicit_tendency(const State& s, const Parameters& p, const Grid& g, AdvectionForm form) {
  return explicit_tendency(s, p, g, heat_source_field(p, g), form);
}

TendencyBundle explicit_tendency(const State& s, const Parameters& p, const Grid& g, const ScalarField& q,
                                 AdvectionForm form) {
  const ScalarField wc = cell_centre_w(s.w, g);
  TendencyBundle out;
  out.u = advect(s.u, s.u, s.v, wc, g, form);
  out.v = advect(s.v, s.u, s.v, wc, g, form);
  out.t = advect(s.t, s.u, s.v, wc, g, form);
  out.u *= -1.0;
  out.v *= -1.0;
  out.t *= -1.0;

  const ScalarField baroclinic = with_ghosts(vertical_int_from_surface(s.t, g), bc_neumann());
  const auto gp = grad_h(baroclinic, g);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) {
        out.u(i, j, k) += p.f0 * s.v(i, j, k) - gp[0](i, j, k);
        out.v(i, j, k) += -p.f0 * s.u(i, j, k) - gp[1](i, j, k);
        out.t(i, j, k) += q(i, j, k);
      }
  return out;
}

ProjectionResult barotropic_projection(const ScalarField& u_star, const ScalarField& v_star, double dt,
                                       const PoissonSolver2D& ps_solver, const Grid& g) {
  SurfaceField rhs = div_2d(depth_average(u_star, g), depth_average(v_star, g), g);
  rhs.data() /= dt;
  ProjectionResult out{u_star, v_star, ps_solver.solve(rhs)};
  const auto gp = grad_2d(out.ps, g);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      const double cu = dt * gp[0](i, j), cv = dt * gp[1](i, j);
      for (int k = 0; k < g.nz(); ++k) {
        out.u(i, j, k) -= cu;
        out.v(i, j, k) -= cv;
      }
    }
  fill_ghost(out.u);
  fill_ghost(out.v);
  return out;
}

double max_depth_integrated_divergence(const ScalarField& u, const ScalarField& v, const Grid& g) {
  const LevelField<double> w = diagnose_w(u, v, g);
  double worst = 0.0;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) worst = std::max(worst, std::abs(w(i, j, g.nz())));
  return worst;
}

State make_state(const Parameters& p, const Grid& g, ScalarField u, ScalarField v, ScalarField t, double time) {
  State s;
  s.u = with_ghosts(std::move(u), bc_velocity_x());
  s.v = with_ghosts(std::move(v), bc_velocity_y());
  s.t = with_ghosts(std::move(t), bc_temperature(p, g));
  s.w = diagnose_w(s.u, s.v, g);
  s.ps = SurfaceField(g.nx(), g.ny());
  s.time = time;
  return s;
}

Solver::Solver(const Parameters& p, const Grid& g, SolverOptions opt)
    : params_(validate_parameters(p)),
      grid_(g),
      opt_(opt),
      q_(heat_source_field(p, g)),
      op_u_(g, bc_velocity_x(), 1.0 / p.re1, 1.0 / p.re2),
      op_v_(g, bc_velocity_y(), 1.0 / p.re1, 1.0 / p.re2),
      op_t_(g, bc_temperature(p, g), 1.0 / p.rt1, 1.0 / p.rt2) {
  if (!(opt.dt > 0.0)) throw SolverError("dt must be positive");
  solve_u_ = std::make_unique<ShiftedDiffusionSolver>(op_u_, opt.dt, opt.cg_tolerance);
  solve_v_ = std::make_unique<ShiftedDiffusionSolver>(op_v_, opt.dt, opt.cg_tolerance);
  solve_t_ = std::make_unique<ShiftedDiffusionSolver>(op_t_, opt.dt, opt.cg_tolerance);
  poisson_ = std::make_unique<PoissonSolver2D>(g, opt.poisson_tolerance);
}

void Solver::check_cfl(const State& s) const {
  double umax = 0.0, wmax = 0.0;
  for (int i = 0; i < grid_.nx(); ++i)
    for (int j = 0; j < grid_.ny(); ++j)
      for (int k = 0; k < grid_.nz(); ++k) {
        umax = std::max({umax, std::abs(s.u(i, j, k)), std::abs(s.v(i, j, k))});
        wmax = std::max(wmax, std::abs(s.w(i, j, k)));
      }
  const double dt = opt_.dt;
  const bool horizontal = umax > 0.0 && dt > 0.5 * std::min(grid_.dx, grid_.dy) / umax;
  const bool vertical = wmax > 0.0 && dt > 0.5 * grid_.dz / wmax;
  if (horizontal || vertical) {
    ++cfl_warnings_;
    if (warn_) {
      std::ostringstream msg;
      msg << "CFL guard exceeded at t=" << s.time << " (max|v|=" << umax << ", max|w|=" << wmax << ", dt=" << dt
          << ")";
      warn_(msg.str());
    }
  }
}

State Solver::advance(const State& s) const {
  const Grid& g = grid_;
  const double dt = opt_.dt;
  check_cfl(s);

  TendencyBundle f = explicit_tendency(s, params_, g, q_, opt_.advection);
  TendencyBundle step = f;
  if (s.history) {
    step.u.data() = 1.5 * f.u.data() - 0.5 * s.history->u.data();
    step.v.data() = 1.5 * f.v.data() - 0.5 * s.history->v.data();
    step.t.data() = 1.5 * f.t.data() - 0.5 * s.history->t.data();
  }

  ScalarField u_star = s.u, v_star = s.v, t_star = s.t;
  u_star.data() += dt * step.u.data();
  v_star.data() += dt * step.v.data();
  t_star.data() += dt * step.t.data();

  // A finite squared norm also rules out values the linear solvers cannot handle.
  const auto finite = [](const ScalarField& x) { return std::isfinite(x.data().matrix().squaredNorm()); };
  const auto blow_up = [&] {
    std::ostringstream msg;
    msg << "non-finite state after step at t=" << s.time << "; reduce dt below the CFL limit 0.5*min(dx,dy)/max|v|";
    return SolverError(msg.str());
  };
  if (!finite(u_star) || !finite(v_star) || !finite(t_star)) throw blow_up();

  State out;
  try {
    const ScalarField u_diff = solve_u_->solve(u_star);
    const ScalarField v_diff = solve_v_->solve(v_star);
    out.t = solve_t_->solve(t_star);
    ProjectionResult proj = barotropic_projection(u_diff, v_diff, dt, *poisson_, g);
    out.u = std::move(proj.u);
    out.v = std::move(proj.v);
    out.ps = std::move(proj.ps);
  } catch (const SolveError& e) {
    throw SolverError(std::string(e.what()) + " at t=" + std::to_string(s.time));
  }

  if (!finite(out.u) || !finite(out.v) || !finite(out.t)) throw blow_up();
  out.w = diagnose_w(out.u, out.v, g);
  out.time = s.time + dt;
  out.history = std::move(f);
  return out;
}

State Solver::advance(const State& s, std::size_t steps) const {
  State cur = s;
  for (std::size_t n = 0; n < steps; ++n) cur = advance(cur);
  return cur;
}

}  // namespace peq
