#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "peq/diagnostics.hpp"
#include "peq/solver.hpp"

namespace peq {

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based generator: the n-th draw of (seed, stream) does not depend on
/// any other stream, so members can be generated in any order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next_u64();
  double uniform();  // in (0, 1)
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Gaussian low-mode field (4 modes per axis, wall parities respected), projected
/// onto the constraint and rescaled to H-norm `h_norm`. h_norm = 0 gives the rest state.
State random_initial_state(const Parameters& p, const Grid& g, std::uint64_t seed, std::uint64_t member,
                           double h_norm);

struct EnsembleConfig {
  Parameters params;
  Shape shape{8, 8, 8};
  double dt = 1.0 / 256;
  double t_final = 10.0;
  double sample_interval = 0.0625;
  int members = 8;
  std::uint64_t seed = 0;
  double h_norm = 1.0;
  double snapshot_start = -1.0;  // negative: second half of the run
  int max_modes = 64;
  double cg_tolerance = 1e-10;
  bool parallel = true;
};

struct MemberResult {
  int index = 0;
  bool ok = true;
  std::string error;
  std::vector<DiagnosticsRecord> records;
  std::vector<std::vector<double>> snapshots;  // leading mode coefficients per snapshot
  std::size_t cfl_warnings = 0;
};

struct Ensemble {
  EnsembleConfig config;
  std::vector<MemberResult> members;
};

class EnsembleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Runs every member to t_final. A failing member is reported and the others continue.
Ensemble run_ensemble(const EnsembleConfig& cfg);

struct AbsorbingReport {
  double window = 0.0;
  double margin = 0.0;
  double rho1 = 0.0;               // max of vnorm_v_sq + vnorm_t_sq over the trailing window
  double rho2 = 0.0;               // max over the trailing window of the ell-integrated Y surrogate
  std::vector<double> entry_time;  // per member; NaN if it never stays inside for a full window
  double late_l2_t_max = 0.0;
  double k2_sq_q_norm_sq = 0.0;
  std::vector<int> failed_members;
};

AbsorbingReport absorbing_report(const Ensemble& e, double window, double ell, double margin = 0.05);

struct ModeIndex {
  int field = 0;  // 0: v1, 1: v2, 2: T
  int a = 0, b = 0, c = 0;
};

/// The m lowest-wavenumber modes compatible with each field's wall parity.
std::vector<ModeIndex> leading_modes(const Grid& g, int m);

/// Orthonormal discrete coefficients of s on the leading m modes.
std::vector<double> project_modes(const State& s, const Grid& g, int m);

/// One row per late-time snapshot, members in order.
Eigen::MatrixXd snapshot_cloud(const Ensemble& e, int m);

struct DimensionOptions {
  double eps0 = 0.0;        // coarsest scale; 0 uses the cloud extent
  int levels = 12;          // ladder eps0 * 2^-k
  int min_window = 3;
  int window_begin = -1;    // manual fit window, inclusive level indices
  int window_end = -1;
  double saturation = 0.1;  // box levels with N > saturation * points are excluded
  double max_correlation = 0.1;
  double min_pairs = 100;
};

struct DimensionReport {
  std::string estimator;
  std::string observable = "leading cosine-mode coefficients (lower-bound estimate)";
  int points = 0;
  int dims = 0;
  std::vector<double> eps;
  std::vector<double> counts;  // N_eps, or the correlation sum
  double slope = 0.0;
  int window_begin = 0;
  int window_end = 0;
  double residual = 0.0;
  bool degenerate = false;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

DimensionReport box_counting_dimension(const Eigen::MatrixXd& cloud, const DimensionOptions& opt = {});
DimensionReport correlation_dimension(const Eigen::MatrixXd& cloud, const DimensionOptions& opt = {});

}  // namespace peq
