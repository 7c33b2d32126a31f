#include "peq/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "peq/attractor.hpp"
#include "peq/checkpoint.hpp"
#include "peq/report.hpp"
#include "peq/trajectory.hpp"
#include "peq/verify.hpp"

namespace peq {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::optional<Subcommand> parse_subcommand(const std::string& name) {
  if (name == "simulate") return Subcommand::Simulate;
  if (name == "ensemble") return Subcommand::Ensemble;
  if (name == "probe") return Subcommand::Probe;
  if (name == "dimension") return Subcommand::Dimension;
  if (name == "verify") return Subcommand::Verify;
  return std::nullopt;
}

namespace {

Grid grid_of(const RunConfig& cfg) { return Grid(cfg.params, cfg.shape.nx, cfg.shape.ny, cfg.shape.nz); }

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return f;
}

std::string indexed(const std::string& stem, int k, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d", k);
  return stem + buf + ext;
}

json failure_line(const std::string& command, const std::vector<std::string>& failures) {
  return json{{"command", command}, {"status", "fail"}, {"failures", failures}};
}

int simulate(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const Grid g = grid_of(cfg);
  Solver solver(cfg.params, g, cfg.solver_options());
  solver.set_warning_sink([&](const std::string& m) { log << "warning: " << m << '\n'; });
  const DualSurrogate dual(cfg.params, g, cfg.cg_tolerance);
  const fs::path dir(cfg.out_dir);

  const std::size_t steps = aligned_steps(cfg.t_final, cfg.dt, "numerics.t_final");
  const std::size_t per_sample = aligned_steps(cfg.sample_interval, cfg.dt, "numerics.sample_interval");
  const std::size_t per_checkpoint =
      cfg.checkpoint_interval > 0.0 ? aligned_steps(cfg.checkpoint_interval, cfg.dt, "run.checkpoint_interval") : 0;

  State s = simulate_initial_state(cfg, g);
  std::vector<DiagnosticsRecord> records{make_record(s, nullptr, cfg.sample_interval, cfg.params, g, dual)};
  std::vector<std::string> checkpoints;
  std::string error;
  State prev = s;
  try {
    for (std::size_t n = 1; n <= steps; ++n) {
      s = solver.advance(s);
      if (n % per_sample == 0) {
        records.push_back(make_record(s, &prev, cfg.sample_interval, cfg.params, g, dual));
        prev = s;
      }
      if (per_checkpoint && n % per_checkpoint == 0 && n != steps) {
        const std::string name = indexed("checkpoint-", int(n / per_checkpoint), ".peq");
        write_checkpoint(s, cfg.params, dir / name);
        checkpoints.push_back(name);
      }
    }
    write_checkpoint(s, cfg.params, dir / "final.peq");
    checkpoints.push_back("final.peq");
  } catch (const SolverError& e) {
    error = e.what();
  }
  std::ofstream csv = open_out(dir / "diagnostics.csv");
  write_diagnostics_csv(csv, records);

  json summary{{"command", "simulate"},   {"samples", records.size()},         {"t_end", records.back().time},
               {"checkpoints", checkpoints}, {"cfl_warnings", solver.cfl_warnings()}};
  if (!error.empty()) {
    summary.update(failure_line("simulate", {error}));
    out << summary.dump() << '\n';
    return kExitError;
  }
  summary["status"] = "ok";
  out << summary.dump() << '\n';
  return kExitOk;
}

std::vector<std::string> member_failures(const Ensemble& e) {
  std::vector<std::string> f;
  for (const MemberResult& m : e.members)
    if (!m.ok) f.push_back("member " + std::to_string(m.index) + ": " + m.error);
  return f;
}

Ensemble run_and_write_members(const RunConfig& cfg, std::ostream& log) {
  const Ensemble e = run_ensemble(cfg.ensemble_config());
  const fs::path dir(cfg.out_dir);
  for (const MemberResult& m : e.members) {
    std::ofstream csv = open_out(dir / indexed("member-", m.index, ".csv"));
    write_diagnostics_csv(csv, m.records);
    if (m.cfl_warnings) log << "warning: member " << m.index << " exceeded the CFL guard " << m.cfl_warnings << " times\n";
  }
  return e;
}

int ensemble(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const Ensemble e = run_and_write_members(cfg, log);
  const fs::path dir(cfg.out_dir);
  // rho2 integrates over ell-windows inside the trailing window.
  const double ell = std::min(cfg.ell, cfg.ensemble_window());
  const AbsorbingReport r = absorbing_report(e, cfg.ensemble_window(), ell, cfg.margin);
  std::ofstream nd = open_out(dir / "absorbing.ndjson");
  nd << to_json_line(r, json{{"h_norm", cfg.ensemble_config().h_norm}, {"seed", cfg.seed}, {"ell", ell}}.dump())
     << '\n';
  std::ofstream cloud = open_out(dir / "cloud.csv");
  write_cloud_csv(cloud, snapshot_cloud(e, cfg.modes));

  const std::vector<std::string> failures = member_failures(e);
  json summary{{"command", "ensemble"}, {"rho1", r.rho1}, {"rho2", r.rho2}, {"late_l2_t_max", r.late_l2_t_max},
               {"k2_sq_q_norm_sq", r.k2_sq_q_norm_sq}};
  if (!failures.empty()) {
    summary.update(failure_line("ensemble", failures));
    out << summary.dump() << '\n';
    return kExitCheckFailed;
  }
  summary["status"] = "ok";
  out << summary.dump() << '\n';
  return kExitOk;
}

int dimension(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const Ensemble e = run_and_write_members(cfg, log);
  const fs::path dir(cfg.out_dir);
  const Eigen::MatrixXd cloud = snapshot_cloud(e, cfg.modes);
  std::ofstream ccsv = open_out(dir / "cloud.csv");
  write_cloud_csv(ccsv, cloud);

  DimensionOptions opt;
  opt.eps0 = cfg.eps0;
  opt.levels = cfg.levels;
  opt.window_begin = cfg.window_begin;
  opt.window_end = cfg.window_end;
  std::ofstream nd = open_out(dir / "dimension.ndjson");
  json summary{{"command", "dimension"}, {"points", cloud.rows()}, {"modes", cfg.modes}};
  using Estimator = DimensionReport (*)(const Eigen::MatrixXd&, const DimensionOptions&);
  for (const Estimator est : {Estimator(box_counting_dimension), Estimator(correlation_dimension)}) {
    const DimensionReport r = est(cloud, opt);
    nd << to_json_line(r) << '\n';
    summary[r.estimator] = r.slope;
  }
  const std::vector<std::string> failures = member_failures(e);
  if (!failures.empty()) {
    summary.update(failure_line("dimension", failures));
    out << summary.dump() << '\n';
    return kExitCheckFailed;
  }
  summary["status"] = "ok";
  out << summary.dump() << '\n';
  return kExitOk;
}

std::string inputs_hash(const RunConfig& cfg, int pair, double delta, double t) {
  std::ostringstream key;
  key << std::setprecision(17) << cfg.seed << '|' << pair << '|' << delta << '|' << t << '|' << cfg.ell << '|'
      << cfg.n_samples << '|' << cfg.dt << '|' << cfg.shape.nx << 'x' << cfg.shape.ny << 'x' << cfg.shape.nz;
  const std::string k = key.str();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(reinterpret_cast<const unsigned char*>(k.data()), k.size())));
  return buf;
}

int probe(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const Grid g = grid_of(cfg);
  const Solver solver(cfg.params, g, cfg.solver_options());
  const DualSurrogate dual(cfg.params, g, cfg.cg_tolerance);
  const std::size_t spinup = cfg.probe_spinup > 0.0 ? aligned_steps(cfg.probe_spinup, cfg.dt, "probe.spinup") : 0;
  const double h_norm = cfg.initial == InitialKind::Rest ? 0.0 : cfg.h_norm;
  const int n_pairs = cfg.calibration_pairs + cfg.test_pairs;

  // Base point i and a unit low-mode temperature direction, both from the config seed.
  std::vector<State> bases;
  std::vector<ScalarField> directions;
  for (int i = 0; i < n_pairs; ++i) {
    bases.push_back(solver.advance(random_initial_state(cfg.params, g, cfg.seed, std::uint64_t(i), h_norm), spinup));
    ScalarField d = random_initial_state(cfg.params, g, cfg.seed ^ 0xd1ec7104ULL, std::uint64_t(i), 1.0).t;
    d *= 1.0 / std::sqrt(l2_norm_sq(d, g));
    directions.push_back(std::move(d));
  }
  const auto make_pair = [&](int i, double delta) {
    const Trajectory b = sample_trajectory(bases[i], cfg.ell, cfg.n_samples, solver);
    const Trajectory a = sample_trajectory(perturb_temperature(bases[i], delta, directions[i]), cfg.ell,
                                           cfg.n_samples, solver);
    return std::pair{a, b};
  };

  const double delta0 = cfg.probe_deltas.front();
  std::vector<std::pair<Trajectory, Trajectory>> calibration;
  for (int i = 0; i < cfg.calibration_pairs; ++i) calibration.push_back(make_pair(i, delta0));
  const ProbeCalibration cal = calibrate_probes(calibration, cfg.probe_t, solver, dual, cfg.headroom);
  log << "calibrated C=" << cal.c_fit << " kappa=" << cal.kappa << " theta=" << cal.theta << '\n';

  std::ofstream nd = open_out(fs::path(cfg.out_dir) / "probes.ndjson");
  std::vector<std::string> failures;
  const auto emit = [&](const ProbeReport& r, const std::string& phase, int pair, double delta) {
    const json extra{{"phase", phase},
                     {"pair", pair},
                     {"delta", delta},
                     {"inputs_hash", inputs_hash(cfg, pair, delta, r.t)},
                     {"dy_dt", "centred finite differences of samples"}};
    nd << to_json_line(r, extra.dump()) << '\n';
    if (phase == "held-out" && !r.pass) failures.push_back(r.probe + "/pair " + std::to_string(pair));
  };
  const bool smoothing_ok = cfg.probe_t >= cfg.ell;
  for (int i = 0; i < cfg.calibration_pairs; ++i) {
    const auto& [a, b] = calibration[i];
    emit(lipschitz_probe(a, b, cfg.probe_t, solver, cal.c_fit), "calibration", i, delta0);
    if (smoothing_ok) emit(smoothing_probe(a, b, cfg.probe_t, solver, dual, cal.c_fit, cal.kappa), "calibration", i, delta0);
    emit(endpoint_lipschitz_probe(a, b, cal.theta), "calibration", i, delta0);
  }
  for (int i = cfg.calibration_pairs; i < n_pairs; ++i) {
    const auto [a, b] = make_pair(i, delta0);
    emit(lipschitz_probe(a, b, cfg.probe_t, solver, cal.c_fit), "held-out", i, delta0);
    if (smoothing_ok) emit(smoothing_probe(a, b, cfg.probe_t, solver, dual, cal.c_fit, cal.kappa), "held-out", i, delta0);
    emit(endpoint_lipschitz_probe(a, b, cal.theta), "held-out", i, delta0);
  }

  // Amplitude sweep on the first held-out pair: ratios should not depend on delta.
  json summary{{"command", "probe"}, {"c_fit", cal.c_fit}, {"kappa", cal.kappa}, {"theta", cal.theta}};
  if (smoothing_ok) {
    const int i = cfg.calibration_pairs;
    double lo = INFINITY, hi = 0.0;
    for (double delta : cfg.probe_deltas) {
      const auto [a, b] = make_pair(i, delta);
      const ProbeReport r = smoothing_probe(a, b, cfg.probe_t, solver, dual, cal.c_fit, cal.kappa);
      emit(r, "sweep", i, delta);
      lo = std::min(lo, r.ratio);
      hi = std::max(hi, r.ratio);
    }
    summary["sweep_spread"] = hi / lo - 1.0;
  } else {
    log << "note: smoothing probe skipped since probe.t < numerics.ell\n";
  }
  if (!failures.empty()) {
    summary.update(failure_line("probe", failures));
    out << summary.dump() << '\n';
    return kExitCheckFailed;
  }
  summary["status"] = "ok";
  out << summary.dump() << '\n';
  return kExitOk;
}

int verify(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const VerifySummary v = run_verify(cfg);
  std::ofstream nd = open_out(fs::path(cfg.out_dir) / "verify.ndjson");
  for (const CheckResult& c : v.checks) {
    json extra{{"phase", c.phase}, {"run", c.run}};
    if (!c.note.empty()) extra["error"] = c.note;
    nd << to_json_line(c.report, extra.dump()) << '\n';
  }
  json summary{{"command", "verify"},         {"c_slack", v.c_slack}, {"lambda", v.lambda},
               {"c_velocity", v.c_velocity}, {"c_pair", v.c_pair},   {"lemma_worst_ratio", v.lemma_worst_ratio},
               {"checks", v.checks.size()}};
  nd << summary.dump() << '\n';
  if (!v.pass()) {
    summary.update(failure_line("verify", v.failures()));
    out << summary.dump() << '\n';
    return kExitCheckFailed;
  }
  summary["status"] = "ok";
  out << summary.dump() << '\n';
  return kExitOk;
}

}  // namespace

State simulate_initial_state(const RunConfig& cfg, const Grid& g) {
  switch (cfg.initial) {
    case InitialKind::Rest: return make_rest_state(cfg.params, g);
    case InitialKind::Random: return random_initial_state(cfg.params, g, cfg.seed, 0, cfg.h_norm);
    case InitialKind::Eigenmode: return eigenmode_state(cfg.params, g, cfg.eigen_amplitude, cfg.eigen_m);
    case InitialKind::Checkpoint: {
      Checkpoint c = read_checkpoint(cfg.checkpoint_path, cfg.params);
      if (!(c.state.u.shape() == g.shape))
        throw CheckpointError("checkpoint grid does not match grid.nx/ny/nz");
      return std::move(c.state);
    }
  }
  return make_rest_state(cfg.params, g);
}

int run_subcommand(Subcommand cmd, const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  fs::create_directories(cfg.out_dir);
  switch (cmd) {
    case Subcommand::Simulate: return simulate(cfg, out, log);
    case Subcommand::Ensemble: return ensemble(cfg, out, log);
    case Subcommand::Probe: return probe(cfg, out, log);
    case Subcommand::Dimension: return dimension(cfg, out, log);
    case Subcommand::Verify: return verify(cfg, out, log);
  }
  return kExitError;
}

}  // namespace peq
