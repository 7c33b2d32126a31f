#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include "peq/diffusion.hpp"
#include "peq/poisson.hpp"
#include "peq/state.hpp"

namespace peq {

/// Advection discretization. `Advective` drops the skew-symmetric splitting and
/// exists only as a test hook: the discrete advection then no longer conserves
/// the L2 energy.
enum class AdvectionForm { SkewSymmetric, Advective };

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// w = -(vertical integral of div_h v) on the face levels; zero at z=-h.
/// u and v must have ghosts filled.
LevelField<double> diagnose_w(const ScalarField& u, const ScalarField& v, const Grid& g);

/// Vertical velocity averaged to cell centres, odd ghosts at top and bottom.
ScalarField cell_centre_w(const LevelField<double>& w, const Grid& g);

/// Hydrostatic pressure p = ps + integral_0^z T.
ScalarField diagnose_pressure(const SurfaceField& ps, const ScalarField& t, const Grid& g);

/// Discrete advection (u d/dx + v d/dy + w d/dz) phi. All inputs ghost-filled.
ScalarField advect(const ScalarField& phi, const ScalarField& u, const ScalarField& v, const ScalarField& w_centre,
                   const Grid& g, AdvectionForm form = AdvectionForm::SkewSymmetric);

/// Heat source sampled at cell centres.
ScalarField heat_source_field(const Parameters& p, const Grid& g);

TendencyBundle explicit_tendency(const State& s, const Parameters& p, const Grid& g,
                                 AdvectionForm form = AdvectionForm::SkewSymmetric);
TendencyBundle explicit_tendency(const State& s, const Parameters& p, const Grid& g, const ScalarField& q,
                                 AdvectionForm form);

struct ProjectionResult {
  ScalarField u;
  ScalarField v;
  SurfaceField ps;
};

/// Removes the depth-averaged divergence with a z-uniform surface-pressure gradient:
/// solves div(grad ps) = div(depth average of v_star)/dt and returns v_star - dt grad ps.
ProjectionResult barotropic_projection(const ScalarField& u_star, const ScalarField& v_star, double dt,
                                       const PoissonSolver2D& ps_solver, const Grid& g);

/// max over columns of |sum_k dz div_h(v)_k|; u and v ghost-filled.
double max_depth_integrated_divergence(const ScalarField& u, const ScalarField& v, const Grid& g);

/// Attaches boundary rules, fills ghosts and diagnoses w for the given prognostic fields.
State make_state(const Parameters& p, const Grid& g, ScalarField u, ScalarField v, ScalarField t,
                 double time = 0.0);

struct SolverOptions {
  double dt = 1.0 / 1024.0;
  double cg_tolerance = 1e-10;
  double poisson_tolerance = 1e-10;
  AdvectionForm advection = AdvectionForm::SkewSymmetric;
};

/// IMEX time stepper: AB2 (forward Euler on the first step) for the explicit
/// tendency, backward Euler for L1/L2, then the barotropic projection.
/// Not safe for concurrent use; give each thread its own Solver.
class Solver {
 public:
  Solver(const Parameters& p, const Grid& g, SolverOptions opt = {});

  const Parameters& parameters() const { return params_; }
  const Grid& grid() const { return grid_; }
  const SolverOptions& options() const { return opt_; }
  double dt() const { return opt_.dt; }
  const ScalarField& heat_source() const { return q_; }

  /// One step of length dt. Deterministic. Throws SolverError on non-finite values.
  State advance(const State& s) const;
  State advance(const State& s, std::size_t steps) const;

  /// Number of steps that violated the advective CFL guard so far.
  std::size_t cfl_warnings() const { return cfl_warnings_; }
  void set_warning_sink(std::function<void(const std::string&)> sink) { warn_ = std::move(sink); }

  const PoissonSolver2D& poisson() const { return *poisson_; }
  const DiffusionOperator& velocity_x_operator() const { return op_u_; }
  const DiffusionOperator& velocity_y_operator() const { return op_v_; }
  const DiffusionOperator& temperature_operator() const { return op_t_; }

 private:
  void check_cfl(const State& s) const;

  Parameters params_;
  Grid grid_;
  SolverOptions opt_;
  ScalarField q_;
  DiffusionOperator op_u_;
  DiffusionOperator op_v_;
  DiffusionOperator op_t_;
  std::unique_ptr<ShiftedDiffusionSolver> solve_u_;
  std::unique_ptr<ShiftedDiffusionSolver> solve_v_;
  std::unique_ptr<ShiftedDiffusionSolver> solve_t_;
  std::unique_ptr<PoissonSolver2D> poisson_;
  mutable std::size_t cfl_warnings_ = 0;
  std::function<void(const std::string&)> warn_;
};

}  // namespace peq
