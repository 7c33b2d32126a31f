#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "peq/attractor.hpp"
#include "peq/solver.hpp"

namespace peq {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line = 0) : std::runtime_error(msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class InitialKind { Rest, Random, Eigenmode, Checkpoint };

/// Everything a run needs. Grid sizes and numerics.t_final have no default.
struct RunConfig {
  Parameters params;
  Shape shape{0, 0, 0};

  // numerics
  double dt = 1.0 / 256;
  double t_final = 0.0;
  double sample_interval = 1.0 / 16;
  double ell = 1.0;
  int n_samples = 33;
  double cg_tolerance = 1e-10;
  double poisson_tolerance = 1e-10;
  std::uint64_t seed = 0;

  // run
  std::string out_dir = "peq-out";
  AdvectionForm advection = AdvectionForm::SkewSymmetric;
  InitialKind initial = InitialKind::Random;
  double h_norm = 1.0;
  double eigen_amplitude = 0.5;
  int eigen_m = 1;
  std::string checkpoint_path;
  double checkpoint_interval = 0.0;  // 0: final checkpoint only

  // ensemble
  int members = 8;
  double window = 0.0;  // 0: a quarter of t_final
  double margin = 0.05;
  double snapshot_start = -1.0;
  int max_modes = 64;

  // probe
  double probe_t = 1.0;
  double probe_spinup = 0.0;
  std::vector<double> probe_deltas{1e-4, 1e-5, 1e-6};
  int calibration_pairs = 3;
  int test_pairs = 3;
  double headroom = 2.0;

  // dimension
  int modes = 8;
  int levels = 12;
  double eps0 = 0.0;
  int window_begin = -1;
  int window_end = -1;

  // verify
  int calibration_runs = 3;
  int test_runs = 3;
  int decay_ics = 10;
  int lemma_fields = 1000;
  double pair_delta = 1e-2;

  std::map<std::string, int> lines;  // key -> line it was set on

  SolverOptions solver_options() const;
  EnsembleConfig ensemble_config() const;
  double ensemble_window() const { return window > 0.0 ? window : 0.25 * t_final; }
};

/// Flat `section.key = value` lines; `#` starts a comment. Errors carry line numbers.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace peq
