#include "peq/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include "peq/state.hpp"
#include "peq/stencil.hpp"

namespace peq {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) throw ParameterError(std::string(name) + " must be positive");
}

}  // namespace

Parameters validate_parameters(const Parameters& p) {
  require_positive(p.re1, "re1");
  require_positive(p.re2, "re2");
  require_positive(p.rt1, "rt1");
  require_positive(p.rt2, "rt2");
  require_positive(p.alpha, "alpha");
  require_positive(p.h, "h");
  require_positive(p.lx, "lx");
  require_positive(p.ly, "ly");
  if (!std::isfinite(p.f0)) throw ParameterError("f0 must be finite");
  switch (p.q.kind) {
    case QKind::Zero: break;
    case QKind::Constant:
      if (!std::isfinite(p.q.value)) throw ParameterError("q value must be finite");
      break;
    case QKind::Trig:
      for (const auto& m : p.q.modes) {
        if (!std::isfinite(m.amplitude)) throw ParameterError("q mode amplitude must be finite");
        if (m.p < 0 || m.q < 0 || m.r < 0) throw ParameterError("q mode indices must be non-negative");
      }
      break;
  }
  return p;
}

double k2_constant(const Parameters& p) { return std::max(2.0 * p.h / p.alpha, 2.0 * p.rt2 * p.h * p.h); }

Grid::Grid(Shape s, double lx_, double ly_, double h_) : shape(s), lx(lx_), ly(ly_), h(h_) {
  if (s.nx < 4 || s.ny < 4 || s.nz < 4) throw ParameterError("grid needs at least 4 cells per axis");
  if (!(lx > 0 && ly > 0 && h > 0)) throw ParameterError("domain extents must be positive");
  dx = lx / s.nx;
  dy = ly / s.ny;
  dz = h / s.nz;
}

double q_value(const QProfile& q, const Parameters& p, double x, double y, double z) {
  using std::numbers::pi;
  switch (q.kind) {
    case QKind::Zero: return 0.0;
    case QKind::Constant: return q.value;
    case QKind::Trig: {
      double acc = 0.0;
      for (const auto& m : q.modes)
        acc += m.amplitude * std::cos(m.p * pi * x / p.lx) * std::cos(m.q * pi * y / p.ly) *
               std::cos(m.r * pi * (z + p.h) / p.h);
      return acc;
    }
  }
  return 0.0;
}

double q_norm_sq(const Parameters& p) {
  const double volume = p.lx * p.ly * p.h;
  switch (p.q.kind) {
    case QKind::Zero: return 0.0;
    case QKind::Constant: return p.q.value * p.q.value * volume;
    case QKind::Trig: {
      // Distinct (p,q,r) cosine products are orthogonal; repeated triples add up.
      std::map<std::tuple<int, int, int>, double> amp;
      for (const auto& m : p.q.modes) amp[{m.p, m.q, m.r}] += m.amplitude;
      double acc = 0.0;
      for (const auto& [key, a] : amp) {
        const auto [mp, mq, mr] = key;
        const double w = (mp == 0 ? 1.0 : 0.5) * (mq == 0 ? 1.0 : 0.5) * (mr == 0 ? 1.0 : 0.5);
        acc += a * a * w * volume;
      }
      return acc;
    }
  }
  return 0.0;
}

State make_rest_state(const Parameters& p, const Grid& g) {
  State s;
  s.u = ScalarField(g.shape, bc_velocity_x());
  s.v = ScalarField(g.shape, bc_velocity_y());
  s.t = ScalarField(g.shape, bc_temperature(p, g));
  s.w = LevelField<double>(g.shape);
  s.ps = SurfaceField(g.nx(), g.ny());
  return s;
}

}  // namespace peq
