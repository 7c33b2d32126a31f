#pragma once

#include <optional>

#include "peq/field.hpp"

namespace peq {

/// Explicit right-hand sides: momentum (advection, Coriolis, baroclinic
/// pressure gradient) and temperature (advection, heat source).
struct TendencyBundle {
  ScalarField u;
  ScalarField v;
  ScalarField t;
};

/// A point of the phase space H plus its diagnostic fields.
/// `history` holds the previous explicit tendency used by the two-step scheme;
/// it is empty for a state that has not been produced by the solver.
struct State {
  ScalarField u;              // v1
  ScalarField v;              // v2
  ScalarField t;              // temperature
  LevelField<double> w;       // vertical velocity on the nz+1 face levels
  SurfaceField ps;            // surface pressure, mean zero
  double time = 0.0;
  std::optional<TendencyBundle> history;

  const Shape& shape() const { return t.shape(); }

  /// Bitwise equality of the prognostic fields and time.
  bool prognostic_equal(const State& o) const {
    return time == o.time && u.interior_equal(o.u) && v.interior_equal(o.v) && t.interior_equal(o.t);
  }
};

/// Zero state with the boundary rules of every prognostic field attached.
State make_rest_state(const Parameters& p, const Grid& g);

}  // namespace peq
