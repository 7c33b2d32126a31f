#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "peq/diagnostics.hpp"
#include "peq/solver.hpp"

namespace peq {

class TrajectoryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solution segment over [0, ell] sampled at n_samples uniform times.
/// Consecutive states are exactly steps_per_sample solver steps apart.
struct Trajectory {
  double ell = 1.0;
  int n_samples = 0;
  std::size_t steps_per_sample = 0;
  double dt = 0.0;
  Parameters params;
  Grid grid;
  std::vector<State> states;

  double spacing() const { return ell / (n_samples - 1); }
  double tau(int k) const { return k * spacing(); }
};

/// Number of solver steps in `duration`; throws unless it is a whole multiple of dt.
std::size_t aligned_steps(double duration, double dt, const std::string& what);

Trajectory sample_trajectory(const State& s0, double ell, int n_samples, const Solver& solver);
Trajectory sample_trajectory(const State& s0, double ell, int n_samples, const Parameters& p, double dt);

struct Evaluation {
  State state;
  int index = 0;
  bool nearest = false;  // t*ell fell between samples; the nearer one was returned
};

/// e_t(chi) = chi(t ell) for t in [0, 1], without interpolation.
Evaluation evaluate_e(const Trajectory& chi, double t);

/// The segment over [t, t + ell] of the solution through chi. shift_L(chi, 0) is chi.
Trajectory shift_L(const Trajectory& chi, double t, const Solver& solver);

/// Sample-wise difference a - b (prognostic fields and w; no step history).
Trajectory difference(const Trajectory& a, const Trajectory& b);

/// L2(0, ell; H) distance with trapezoid quadrature over the samples.
double dist_l2h(const Trajectory& a, const Trajectory& b);

struct YNorm {
  double value = 0.0;
  double v_integral = 0.0;    // int ||chi||^2 (V-norm squared)
  double dual_integral = 0.0; // int ||chi_t|| in the surrogate dual norm
};

/// Y-norm with finite-difference time derivatives and the elliptic dual surrogate.
YNorm y_norm(const Trajectory& chi, const DualSurrogate& dual);

/// Trapezoid integral of smoothing_bracket over `steps` solver steps from s0,
/// at step resolution. Returns the final state through `end` when given.
double bracket_integral(const State& s0, std::size_t steps, const Solver& solver, State* end = nullptr);

struct ProbeReport {
  std::string probe;
  double t = 0.0;
  double ratio = 0.0;
  double bound = 0.0;
  double constant = 0.0;      // C, kappa or theta as used in the bound
  double growth = 1.0;        // exp(C int bracket)
  double bracket_integral = 0.0;
  bool surrogate = false;     // bound involves the dual-norm surrogate
  bool pass = false;
};

class ProbeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// ||L_t a - L_t b||^2 / ||a - b||^2 against exp(C int_0^{t+ell} bracket along b).
ProbeReport lipschitz_probe(const Trajectory& a, const Trajectory& b, double t, const Solver& solver,
                            double c_fit);

/// ||L_t a - L_t b||_Y^2 / ||a - b||^2 against kappa exp(C int bracket); needs t >= ell.
ProbeReport smoothing_probe(const Trajectory& a, const Trajectory& b, double t, const Solver& solver,
                            const DualSurrogate& dual, double c_fit, double kappa);

/// ||e_1(a) - e_1(b)||_2^2 / ||a - b||^2 against theta.
ProbeReport endpoint_lipschitz_probe(const Trajectory& a, const Trajectory& b, double theta);

struct ProbeCalibration {
  double c_fit = 0.0;
  double kappa = 0.0;
  double theta = 0.0;
};

/// Smallest constants that make every calibration pair pass, times `headroom`.
ProbeCalibration calibrate_probes(const std::vector<std::pair<Trajectory, Trajectory>>& pairs, double t,
                                  const Solver& solver, const DualSurrogate& dual, double headroom = 2.0);

/// s with delta * direction added to the temperature; velocity and step history are kept.
State perturb_temperature(const State& s, double delta, const ScalarField& direction);

}  // namespace peq
