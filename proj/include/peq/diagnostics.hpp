#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "peq/diffusion.hpp"
#include "peq/state.hpp"

namespace peq {

/// Per-sample scalar functionals. Column order is the CSV order.
struct DiagnosticsRecord {
  double time = 0.0;
  double l2_v_sq = 0.0;
  double l2_t_sq = 0.0;
  double vnorm_v_sq = 0.0;
  double vnorm_t_sq = 0.0;
  double h_energy = 0.0;
  double smoothing_bracket = 0.0;
  double dual_surrogate_v = 0.0;
  double dual_surrogate_t = 0.0;
};

/// Cell-volume weighted sum of squares over interior cells.
double l2_norm_sq(const ScalarField& f, const Grid& g);
double h_energy(const State& s, const Grid& g);

/// visc_h * |grad f|^2 + visc_z * |df/dz|^2 summed over cell faces (boundary faces
/// through the ghost value at half weight) plus alpha_top * sum over the top faces of
/// f_face^2 dx dy with f_face the ghost/interior mean. Ghosts must be filled.
/// Equals <A f, f> for the DiffusionOperator with the same ghost rules.
double vnorm_sq(const ScalarField& f, const Grid& g, double visc_h, double visc_z, double alpha_top = 0.0);
double vnorm_sq_velocity(const ScalarField& u, const ScalarField& v, const Parameters& p, const Grid& g);
double vnorm_sq_temperature(const ScalarField& t, const Parameters& p, const Grid& g);

/// |grad v|^4 + |grad T|^4 + |v_z|^2 |grad v_z|^2 + |T_z|^2 |grad T_z|^2 (L2 norms, C = 1).
double smoothing_bracket(const State& s, const Grid& g);

/// ||(I + A)^{-1} g||_2 with A the diffusion operator of g's boundary rules.
/// Weaker than L2; stands in for the negative-order dual norm.
double dual_norm_surrogate(const ScalarField& f, const Grid& g, double visc_h, double visc_z,
                           double tolerance = 1e-10);

/// Pre-factored surrogate solvers for the velocity and temperature operators.
class DualSurrogate {
 public:
  DualSurrogate(const Parameters& p, const Grid& g, double tolerance = 1e-10);

  double velocity(const ScalarField& du, const ScalarField& dv) const;
  double temperature(const ScalarField& dt) const;

 private:
  Grid grid_;
  DiffusionOperator op_u_, op_v_, op_t_;
  std::unique_ptr<ShiftedDiffusionSolver> su_, sv_, st_;
};

/// Record of `s`. The dual surrogates are applied to the backward difference
/// (s - prev)/interval; they are zero when `prev` is null.
DiagnosticsRecord make_record(const State& s, const State* prev, double interval, const Parameters& p,
                              const Grid& g, const DualSurrogate& dual);

/// ||T0||^2 exp(-t/K2) + K2^2 ||Q||^2.
double decay_bound_T(double t, double t0_norm_sq, double q_norm_sq, double k2);

struct InequalityReport {
  std::string id;
  std::vector<double> residuals;  // lhs - rhs per interval, slack excluded
  std::vector<double> slack;      // allowed slack per interval
  double max_violation = 0.0;     // max over intervals of residual - slack
  std::size_t worst = 0;
  bool pass = true;
};

class LengthError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Which end of each interval the dissipation term is read from.
enum class DissipationAt { Start, End };

/// Checks (E[n+1] - E[n])/dt + a D[m] <= b[n] + slack[n] for every interval n,
/// with m = n or n+1. E and D have equal length N+1; b and slack have length N.
InequalityReport check_discrete_gronwall(const std::string& id, const std::vector<double>& e,
                                         const std::vector<double>& d, double a, const std::vector<double>& b,
                                         double dt, const std::vector<double>& slack,
                                         DissipationAt at = DissipationAt::Start);
InequalityReport check_discrete_gronwall(const std::string& id, const std::vector<double>& e,
                                         const std::vector<double>& d, double a, double b, double dt,
                                         double slack, DissipationAt at = DissipationAt::Start);

/// slack[n] = c_slack (dt + dx^2) (|a| D[m] + |b[n]|).
std::vector<double> slack_series(double c_slack, double dt, double dx, const std::vector<double>& d, double a,
                                 const std::vector<double>& b, DissipationAt at = DissipationAt::End);

/// c_slack from a run whose energy identity is dE/dt + 2 D = 0 (the decaying eigenmode):
/// max |(E[n+1]-E[n])/dt + 2 D[n+1]| / ((dt + dx^2) D[n+1]).
double calibrate_slack(const std::vector<double>& e, const std::vector<double>& d, double dt, double dx);

/// Smallest C >= 0 with (E[n+1]-E[n])/dt + a D[m] <= C basis[n] on every interval
/// where basis > 0, multiplied by `headroom`.
double fit_constant(const std::vector<double>& e, const std::vector<double>& d, double a,
                    const std::vector<double>& basis, double dt, double headroom,
                    DissipationAt at = DissipationAt::End);

}  // namespace peq
