#pragma once

// Second-order finite-difference operators on the cell-centred grid.
// Operators read ghost values; callers fill ghosts first. Results carry
// interior values only (ghost layer zero, bc default).

#include <array>

#include "peq/field.hpp"

namespace peq {

/// Sets every ghost value from interior values and the field's face rules.
/// Edge and corner ghosts take the average of the adjacent face rules.
template <typename Scalar>
void fill_ghost(Field<Scalar>& f) {
  const Shape s = f.shape();
  const FieldBc& bc = f.bc();
  const int n[3] = {s.nx, s.ny, s.nz};

  auto ghost_dir = [&](int c, int d) -> int {  // -1 low ghost, +1 high ghost, 0 interior
    return c < 0 ? -1 : (c >= n[d] ? 1 : 0);
  };
  auto face_factor = [&](int d, int side) -> Scalar {
    const Face face = static_cast<Face>(2 * d + (side > 0 ? 1 : 0));
    return Scalar(bc[face].factor());
  };

  // Pass 1: face ghosts, pass 2: edges, pass 3: corners.
  for (int pass = 1; pass <= 3; ++pass) {
    for (int i = -1; i <= s.nx; ++i)
      for (int j = -1; j <= s.ny; ++j)
        for (int k = -1; k <= s.nz; ++k) {
          const int c[3] = {i, j, k};
          int count = 0;
          for (int d = 0; d < 3; ++d) count += ghost_dir(c[d], d) != 0;
          if (count != pass) continue;
          Scalar acc(0);
          for (int d = 0; d < 3; ++d) {
            const int side = ghost_dir(c[d], d);
            if (side == 0) continue;
            int in[3] = {i, j, k};
            in[d] = side < 0 ? 0 : n[d] - 1;
            acc += face_factor(d, side) * f(in[0], in[1], in[2]);
          }
          f(i, j, k) = acc / Scalar(pass);
        }
  }
}

template <typename Scalar>
Field<Scalar> with_ghosts(Field<Scalar> f) {
  fill_ghost(f);
  return f;
}

template <typename Scalar>
Field<Scalar> with_ghosts(Field<Scalar> f, const FieldBc& bc) {
  f.set_bc(bc);
  fill_ghost(f);
  return f;
}

/// Centred horizontal gradient (d/dx, d/dy).
template <typename Scalar>
std::array<Field<Scalar>, 2> grad_h(const Field<Scalar>& s, const Grid& g) {
  std::array<Field<Scalar>, 2> out{Field<Scalar>(s.shape()), Field<Scalar>(s.shape())};
  const Scalar rx = Scalar(0.5 / g.dx), ry = Scalar(0.5 / g.dy);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) {
        out[0](i, j, k) = (s(i + 1, j, k) - s(i - 1, j, k)) * rx;
        out[1](i, j, k) = (s(i, j + 1, k) - s(i, j - 1, k)) * ry;
      }
  return out;
}

/// Centred horizontal divergence of (u, v).
template <typename Scalar>
Field<Scalar> div_h(const Field<Scalar>& u, const Field<Scalar>& v, const Grid& g) {
  Field<Scalar> out(u.shape());
  const Scalar rx = Scalar(0.5 / g.dx), ry = Scalar(0.5 / g.dy);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k)
        out(i, j, k) = (u(i + 1, j, k) - u(i - 1, j, k)) * rx + (v(i, j + 1, k) - v(i, j - 1, k)) * ry;
  return out;
}

/// Compact five-point horizontal Laplacian.
template <typename Scalar>
Field<Scalar> laplace_h(const Field<Scalar>& s, const Grid& g) {
  Field<Scalar> out(s.shape());
  const Scalar rx = Scalar(1.0 / (g.dx * g.dx)), ry = Scalar(1.0 / (g.dy * g.dy));
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) {
        const Scalar c = s(i, j, k);
        out(i, j, k) = (s(i + 1, j, k) - 2 * c + s(i - 1, j, k)) * rx +
                       (s(i, j + 1, k) - 2 * c + s(i, j - 1, k)) * ry;
      }
  return out;
}

template <typename Scalar>
Field<Scalar> d_z(const Field<Scalar>& s, const Grid& g) {
  Field<Scalar> out(s.shape());
  const Scalar rz = Scalar(0.5 / g.dz);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) out(i, j, k) = (s(i, j, k + 1) - s(i, j, k - 1)) * rz;
  return out;
}

template <typename Scalar>
Field<Scalar> d_zz(const Field<Scalar>& s, const Grid& g) {
  Field<Scalar> out(s.shape());
  const Scalar rz = Scalar(1.0 / (g.dz * g.dz));
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k)
        out(i, j, k) = (s(i, j, k + 1) - 2 * s(i, j, k) + s(i, j, k - 1)) * rz;
  return out;
}

/// F at the nz+1 face levels, F = integral of f from -h to the level (cell-wise
/// midpoint rule). F at level 0 (z=-h) is exactly zero.
template <typename Scalar>
LevelField<Scalar> vertical_cumint(const Field<Scalar>& f, const Grid& g) {
  LevelField<Scalar> out(f.shape());
  const Scalar dz = Scalar(g.dz);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      Scalar acc(0);
      out(i, j, 0) = acc;
      for (int k = 0; k < g.nz(); ++k) {
        acc += f(i, j, k) * dz;
        out(i, j, k + 1) = acc;
      }
    }
  return out;
}

/// Integral of T from the surface z=0 down to each cell centre (non-positive
/// heights, so a positive T gives negative values). The top half cell uses a
/// linearly extrapolated surface value; the rest is the trapezoid rule.
template <typename Scalar>
Field<Scalar> vertical_int_from_surface(const Field<Scalar>& t, const Grid& g) {
  Field<Scalar> out(t.shape());
  const Scalar dz = Scalar(g.dz);
  const int top = g.nz() - 1;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      const Scalar t_surface = (3 * t(i, j, top) - t(i, j, top - 1)) / 2;
      Scalar acc = -Scalar(0.25) * dz * (t_surface + t(i, j, top));
      out(i, j, top) = acc;
      for (int k = top - 1; k >= 0; --k) {
        acc -= Scalar(0.5) * dz * (t(i, j, k) + t(i, j, k + 1));
        out(i, j, k) = acc;
      }
    }
  return out;
}

/// Depth average (1/h) * sum_k f_k dz of every column.
template <typename Scalar>
Field2D<Scalar> depth_average(const Field<Scalar>& f, const Grid& g) {
  Field2D<Scalar> out(g.nx(), g.ny());
  const Scalar w = Scalar(g.dz / g.h);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      Scalar acc(0);
      for (int k = 0; k < g.nz(); ++k) acc += f(i, j, k);
      out(i, j) = acc * w;
    }
  return out;
}

/// Volume-weighted inner product over interior cells.
template <typename Scalar>
Scalar inner(const Field<Scalar>& a, const Field<Scalar>& b, const Grid& g) {
  Scalar acc(0);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      for (int k = 0; k < g.nz(); ++k) acc += a(i, j, k) * b(i, j, k);
  return acc * Scalar(g.cell_volume());
}

}  // namespace peq
