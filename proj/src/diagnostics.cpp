#include "peq/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "peq/stencil.hpp"

namespace peq {

double l2_norm_sq(const ScalarField& f, const Grid& g) { return inner(f, f, g); }

double h_energy(const State& s, const Grid& g) {
  return l2_norm_sq(s.u, g) + l2_norm_sq(s.v, g) + l2_norm_sq(s.t, g);
}

double vnorm_sq(const ScalarField& f, const Grid& g, double visc_h, double visc_z, double alpha_top) {
  const int n[3] = {g.nx(), g.ny(), g.nz()};
  const double coef[3] = {visc_h / (g.dx * g.dx), visc_h / (g.dy * g.dy), visc_z / (g.dz * g.dz)};
  double acc = 0.0;
  for (int d = 0; d < 3; ++d) {
    // Faces normal to axis d between cell c and c+1, c = -1..n-1.
    for (int i = (d == 0 ? -1 : 0); i < n[0]; ++i)
      for (int j = (d == 1 ? -1 : 0); j < n[1]; ++j)
        for (int k = (d == 2 ? -1 : 0); k < n[2]; ++k) {
          const int ip = i + (d == 0), jp = j + (d == 1), kp = k + (d == 2);
          const double diff = f(ip, jp, kp) - f(i, j, k);
          const bool boundary = (d == 0 && (i < 0 || ip >= n[0])) || (d == 1 && (j < 0 || jp >= n[1])) ||
                                (d == 2 && (k < 0 || kp >= n[2]));
          acc += (boundary ? 0.5 : 1.0) * coef[d] * diff * diff;
        }
  }
  acc *= g.cell_volume();
  if (alpha_top != 0.0) {
    double top = 0.0;
    for (int i = 0; i < n[0]; ++i)
      for (int j = 0; j < n[1]; ++j) {
        const double face = 0.5 * (f(i, j, n[2]) + f(i, j, n[2] - 1));
        top += face * face;
      }
    acc += alpha_top * top * g.cell_area();
  }
  return acc;
}

double vnorm_sq_velocity(const ScalarField& u, const ScalarField& v, const Parameters& p, const Grid& g) {
  return vnorm_sq(u, g, 1.0 / p.re1, 1.0 / p.re2) + vnorm_sq(v, g, 1.0 / p.re1, 1.0 / p.re2);
}

double vnorm_sq_temperature(const ScalarField& t, const Parameters& p, const Grid& g) {
  return vnorm_sq(t, g, 1.0 / p.rt1, 1.0 / p.rt2, p.alpha);
}

namespace {

// |grad f|^2 and |grad d_z f|^2 (L2), plus |d_z f|^2.
struct GradientNorms {
  double grad = 0.0;
  double dz = 0.0;
  double grad_dz = 0.0;
};

GradientNorms gradient_norms(const ScalarField& f, const Grid& g) {
  GradientNorms out;
  const auto gf = grad_h(f, g);
  out.grad = l2_norm_sq(gf[0], g) + l2_norm_sq(gf[1], g);
  const ScalarField fz = with_ghosts(d_z(f, g), f.bc());
  out.dz = l2_norm_sq(fz, g);
  const auto gfz = grad_h(fz, g);
  out.grad_dz = l2_norm_sq(gfz[0], g) + l2_norm_sq(gfz[1], g);
  return out;
}

}  // namespace

double smoothing_bracket(const State& s, const Grid& g) {
  const GradientNorms u = gradient_norms(s.u, g), v = gradient_norms(s.v, g), t = gradient_norms(s.t, g);
  const double gv = u.grad + v.grad;
  const double vz = u.dz + v.dz;
  const double gvz = u.grad_dz + v.grad_dz;
  return gv * gv + t.grad * t.grad + vz * gvz + t.dz * t.grad_dz;
}

double dual_norm_surrogate(const ScalarField& f, const Grid& g, double visc_h, double visc_z, double tolerance) {
  const DiffusionOperator op(g, f.bc(), visc_h, visc_z);
  const ShiftedDiffusionSolver solver(op, 1.0, tolerance);
  return std::sqrt(l2_norm_sq(solver.solve(f), g));
}

DualSurrogate::DualSurrogate(const Parameters& p, const Grid& g, double tolerance)
    : grid_(g),
      op_u_(g, bc_velocity_x(), 1.0 / p.re1, 1.0 / p.re2),
      op_v_(g, bc_velocity_y(), 1.0 / p.re1, 1.0 / p.re2),
      op_t_(g, bc_temperature(p, g), 1.0 / p.rt1, 1.0 / p.rt2),
      su_(std::make_unique<ShiftedDiffusionSolver>(op_u_, 1.0, tolerance)),
      sv_(std::make_unique<ShiftedDiffusionSolver>(op_v_, 1.0, tolerance)),
      st_(std::make_unique<ShiftedDiffusionSolver>(op_t_, 1.0, tolerance)) {}

double DualSurrogate::velocity(const ScalarField& du, const ScalarField& dv) const {
  return std::sqrt(l2_norm_sq(su_->solve(du), grid_) + l2_norm_sq(sv_->solve(dv), grid_));
}

double DualSurrogate::temperature(const ScalarField& dt) const {
  return std::sqrt(l2_norm_sq(st_->solve(dt), grid_));
}

DiagnosticsRecord make_record(const State& s, const State* prev, double interval, const Parameters& p,
                              const Grid& g, const DualSurrogate& dual) {
  DiagnosticsRecord r;
  r.time = s.time;
  r.l2_v_sq = l2_norm_sq(s.u, g) + l2_norm_sq(s.v, g);
  r.l2_t_sq = l2_norm_sq(s.t, g);
  r.vnorm_v_sq = vnorm_sq_velocity(s.u, s.v, p, g);
  r.vnorm_t_sq = vnorm_sq_temperature(s.t, p, g);
  r.h_energy = r.l2_v_sq + r.l2_t_sq;
  r.smoothing_bracket = smoothing_bracket(s, g);
  if (prev != nullptr && interval > 0.0) {
    const double inv = 1.0 / interval;
    r.dual_surrogate_v = dual.velocity(inv * (s.u - prev->u), inv * (s.v - prev->v));
    r.dual_surrogate_t = dual.temperature(inv * (s.t - prev->t));
  }
  return r;
}

double decay_bound_T(double t, double t0_norm_sq, double q_norm_sq, double k2) {
  return t0_norm_sq * std::exp(-t / k2) + k2 * k2 * q_norm_sq;
}

InequalityReport check_discrete_gronwall(const std::string& id, const std::vector<double>& e,
                                         const std::vector<double>& d, double a, const std::vector<double>& b,
                                         double dt, const std::vector<double>& slack, DissipationAt at) {
  if (e.size() != d.size()) throw LengthError(id + ": energy and dissipation series differ in length");
  if (e.size() < 2) throw LengthError(id + ": need at least two samples");
  const std::size_t n = e.size() - 1;
  if (b.size() != n || slack.size() != n) throw LengthError(id + ": bound or slack series has the wrong length");
  InequalityReport r;
  r.id = id;
  r.slack = slack;
  r.residuals.resize(n);
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double dn = at == DissipationAt::Start ? d[i] : d[i + 1];
    r.residuals[i] = (e[i + 1] - e[i]) / dt + a * dn - b[i];
    const double excess = r.residuals[i] - slack[i];
    if (excess > r.max_violation) {
      r.max_violation = excess;
      r.worst = i;
    }
  }
  r.pass = r.max_violation <= 0.0;
  return r;
}

InequalityReport check_discrete_gronwall(const std::string& id, const std::vector<double>& e,
                                         const std::vector<double>& d, double a, double b, double dt,
                                         double slack, DissipationAt at) {
  const std::size_t n = e.empty() ? 0 : e.size() - 1;
  return check_discrete_gronwall(id, e, d, a, std::vector<double>(n, b), dt, std::vector<double>(n, slack), at);
}

std::vector<double> slack_series(double c_slack, double dt, double dx, const std::vector<double>& d, double a,
                                 const std::vector<double>& b, DissipationAt at) {
  std::vector<double> out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double dn = at == DissipationAt::Start ? d.at(i) : d.at(i + 1);
    out[i] = c_slack * (dt + dx * dx) * (std::abs(a) * dn + std::abs(b[i]));
  }
  return out;
}

double calibrate_slack(const std::vector<double>& e, const std::vector<double>& d, double dt, double dx) {
  if (e.size() != d.size() || e.size() < 2) throw LengthError("calibration series mismatch");
  double c = 0.0;
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    if (d[i + 1] <= 0.0) continue;
    const double r = std::abs((e[i + 1] - e[i]) / dt + 2.0 * d[i + 1]);
    c = std::max(c, r / ((dt + dx * dx) * d[i + 1]));
  }
  return c;
}

double fit_constant(const std::vector<double>& e, const std::vector<double>& d, double a,
                    const std::vector<double>& basis, double dt, double headroom, DissipationAt at) {
  if (e.size() != d.size() || basis.size() + 1 != e.size()) throw LengthError("fit series mismatch");
  double c = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis[i] <= 0.0) continue;
    const double dn = at == DissipationAt::Start ? d[i] : d[i + 1];
    c = std::max(c, ((e[i + 1] - e[i]) / dt + a * dn) / basis[i]);
  }
  return c * headroom;
}

}  // namespace peq
