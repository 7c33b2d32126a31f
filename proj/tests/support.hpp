#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "peq/solver.hpp"
#include "peq/stencil.hpp"

namespace peq::testing {

inline constexpr double pi = std::numbers::pi;

inline Parameters unit_parameters() { return Parameters{}; }

/// Interior values drawn uniformly from [-1, 1]; ghosts filled from `bc`.
inline ScalarField random_field(const Grid& g, const FieldBc& bc, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f(g.shape, bc);
  f.for_each_interior([&](int, int, int, double& x) { x = u(rng); });
  fill_ghost(f);
  return f;
}

template <typename F>
ScalarField sample(const Grid& g, const FieldBc& bc, F&& fn) {
  ScalarField f(g.shape, bc);
  f.for_each_interior([&](int i, int j, int k, double& x) { x = fn(g.x(i), g.y(j), g.z(k)); });
  fill_ghost(f);
  return f;
}

inline double max_abs_interior(const ScalarField& f) {
  double m = 0.0;
  for (int i = 0; i < f.shape().nx; ++i)
    for (int j = 0; j < f.shape().ny; ++j)
      for (int k = 0; k < f.shape().nz; ++k) m = std::max(m, std::abs(f(i, j, k)));
  return m;
}

/// Random constraint-satisfying state with smooth-ish content.
inline State random_state(const Parameters& p, const Grid& g, std::mt19937_64& rng, double amplitude = 1.0) {
  ScalarField u = random_field(g, bc_velocity_x(), rng);
  ScalarField v = random_field(g, bc_velocity_y(), rng);
  ScalarField t = random_field(g, bc_temperature(p, g), rng);
  u *= amplitude;
  v *= amplitude;
  t *= amplitude;
  const PoissonSolver2D ps(g);
  ProjectionResult r = barotropic_projection(u, v, 1.0, ps, g);
  return make_state(p, g, std::move(r.u), std::move(r.v), std::move(t));
}

/// Constraint-satisfying state built from a few low modes that respect the wall parities.
inline State smooth_state(const Parameters& p, const Grid& g, std::mt19937_64& rng, double amplitude = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  double a[3][3][3][3];
  for (auto& f : a)
    for (auto& x : f)
      for (auto& y : x)
        for (auto& z : y) z = n(rng);
  auto build = [&](int field, const FieldBc& bc) {
    return sample(g, bc, [&](double x, double y, double z) {
      double s = 0.0;
      for (int q = 0; q < 3; ++q)
        for (int r = 0; r < 3; ++r)
          for (int m = 0; m < 3; ++m) {
            const double fx = field == 0 ? std::sin((q + 1) * pi * x / g.lx) : std::cos(q * pi * x / g.lx);
            const double fy = field == 1 ? std::sin((r + 1) * pi * y / g.ly) : std::cos(r * pi * y / g.ly);
            s += a[field][q][r][m] * fx * fy * std::cos(m * pi * (z + g.h) / g.h);
          }
      return amplitude * s / 9.0;
    });
  };
  ScalarField u = build(0, bc_velocity_x()), v = build(1, bc_velocity_y()), t = build(2, bc_temperature(p, g));
  const PoissonSolver2D ps(g);
  ProjectionResult r = barotropic_projection(u, v, 1.0, ps, g);
  return make_state(p, g, std::move(r.u), std::move(r.v), std::move(t));
}

}  // namespace peq::testing
