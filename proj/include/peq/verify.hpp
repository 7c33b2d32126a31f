#pragma once

#include <string>
#include <vector>

#include "peq/config.hpp"
#include "peq/diagnostics.hpp"

namespace peq {

struct CheckResult {
  std::string id;     // e.g. "temperature-energy"
  std::string phase;  // "explicit", "calibration" or "held-out"
  int run = 0;
  std::string note;   // solver failure message, if any
  InequalityReport report;
  bool pass() const { return report.pass && note.empty(); }
};

struct VerifySummary {
  double c_slack = 0.0;
  double lambda = 0.0;
  double c_velocity = 0.0;  // fitted C in (C/lambda)||T||^2
  double c_pair = 0.0;      // fitted C in the pair bracket coefficient
  double lemma_worst_ratio = 0.0;
  std::vector<CheckResult> checks;
  bool pass() const;
  std::vector<std::string> failures() const;
};

/// Per-step series of one run.
struct EnergySeries {
  std::vector<double> l2_t, vnorm_t, l2_v, vnorm_v;
  std::string error;  // non-empty if the solver stopped early
};

EnergySeries run_energy_series(const RunConfig& cfg, const State& s0, std::size_t steps);

/// c_slack from the velocity eigenmode, always with the skew-symmetric solver.
double calibrate_eigenmode_slack(const RunConfig& cfg);

/// Velocity eigenmode u = A sin(pi x/lx) cos(m pi z/h), v = 0, T = 0.
State eigenmode_state(const Parameters& p, const Grid& g, double amplitude, int m);

/// Initial state of verification run `index` (shared by all checks that use it).
State verification_initial_state(const RunConfig& cfg, const Grid& g, int index);

/// ||T(t)||^2 against the decay bound at every step, with slack c (dt + dx^2) bound.
InequalityReport check_decay_bound(const std::vector<double>& l2_t, double dt, double q_norm_sq, double k2,
                                   double c_slack, double dx);

/// Worst ||T||^2 / (K2 ||T||_V^2) over `count` random ghost-consistent fields.
InequalityReport lemma_sweep(const Parameters& p, const Grid& g, int count, std::uint64_t seed,
                             double relative_slack = 1e-6);

/// Runs the whole suite described by the config.
VerifySummary run_verify(const RunConfig& cfg);

}  // namespace peq
