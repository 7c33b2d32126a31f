#include "peq/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "peq/trajectory.hpp"

namespace peq {

SolverOptions RunConfig::solver_options() const {
  SolverOptions o{dt};
  o.cg_tolerance = cg_tolerance;
  o.poisson_tolerance = poisson_tolerance;
  o.advection = advection;
  return o;
}

EnsembleConfig RunConfig::ensemble_config() const {
  EnsembleConfig e;
  e.params = params;
  e.shape = shape;
  e.dt = dt;
  e.t_final = t_final;
  e.sample_interval = sample_interval;
  e.members = members;
  e.seed = seed;
  e.h_norm = initial == InitialKind::Rest ? 0.0 : h_norm;
  e.snapshot_start = snapshot_start;
  e.max_modes = max_modes;
  e.cg_tolerance = cg_tolerance;
  return e;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

struct Value {
  std::string key;
  std::string text;
  int line;

  [[noreturn]] void fail(const std::string& expected) const {
    throw ConfigError("line " + std::to_string(line) + ": " + key + " expects " + expected + ", got '" + text + "'",
                      line);
  }
  double number() const {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) fail("a number");
    return v;
  }
  long long integer() const {
    long long v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) fail("an integer");
    return v;
  }
  int count() const {
    const long long v = integer();
    if (v < 0 || v > 1 << 30) fail("a non-negative integer");
    return int(v);
  }
  std::uint64_t u64() const {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) fail("an unsigned 64-bit integer");
    return v;
  }
  std::vector<double> numbers(char sep) const {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(Value{key, trim(item), line}.number());
    if (out.empty()) fail("a list of numbers");
    return out;
  }
};

using Setter = std::function<void(RunConfig&, const Value&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"parameters.re1", [](RunConfig& c, const Value& v) { c.params.re1 = v.number(); }},
      {"parameters.re2", [](RunConfig& c, const Value& v) { c.params.re2 = v.number(); }},
      {"parameters.rt1", [](RunConfig& c, const Value& v) { c.params.rt1 = v.number(); }},
      {"parameters.rt2", [](RunConfig& c, const Value& v) { c.params.rt2 = v.number(); }},
      {"parameters.alpha", [](RunConfig& c, const Value& v) { c.params.alpha = v.number(); }},
      {"parameters.h", [](RunConfig& c, const Value& v) { c.params.h = v.number(); }},
      {"parameters.lx", [](RunConfig& c, const Value& v) { c.params.lx = v.number(); }},
      {"parameters.ly", [](RunConfig& c, const Value& v) { c.params.ly = v.number(); }},
      {"parameters.f0", [](RunConfig& c, const Value& v) { c.params.f0 = v.number(); }},
      {"parameters.q",
       [](RunConfig& c, const Value& v) {
         if (v.text == "zero") c.params.q.kind = QKind::Zero;
         else if (v.text == "constant") c.params.q.kind = QKind::Constant;
         else if (v.text == "trig") c.params.q.kind = QKind::Trig;
         else v.fail("zero, constant or trig");
       }},
      {"parameters.q_value", [](RunConfig& c, const Value& v) { c.params.q.value = v.number(); }},
      {"parameters.q_modes",
       [](RunConfig& c, const Value& v) {
         // "a p q r; a p q r; ..." amplitude followed by the x, y, z mode indices
         c.params.q.modes.clear();
         std::stringstream ss(v.text);
         std::string item;
         while (std::getline(ss, item, ';')) {
           std::istringstream is(item);
           TrigMode m;
           if (!(is >> m.amplitude >> m.p >> m.q >> m.r)) v.fail("'amplitude p q r' groups separated by ';'");
           std::string rest;
           if (is >> rest) v.fail("'amplitude p q r' groups separated by ';'");
           c.params.q.modes.push_back(m);
         }
       }},
      {"grid.nx", [](RunConfig& c, const Value& v) { c.shape.nx = v.count(); }},
      {"grid.ny", [](RunConfig& c, const Value& v) { c.shape.ny = v.count(); }},
      {"grid.nz", [](RunConfig& c, const Value& v) { c.shape.nz = v.count(); }},
      {"numerics.dt", [](RunConfig& c, const Value& v) { c.dt = v.number(); }},
      {"numerics.t_final", [](RunConfig& c, const Value& v) { c.t_final = v.number(); }},
      {"numerics.sample_interval", [](RunConfig& c, const Value& v) { c.sample_interval = v.number(); }},
      {"numerics.ell", [](RunConfig& c, const Value& v) { c.ell = v.number(); }},
      {"numerics.n_samples", [](RunConfig& c, const Value& v) { c.n_samples = v.count(); }},
      {"numerics.cg_tolerance", [](RunConfig& c, const Value& v) { c.cg_tolerance = v.number(); }},
      {"numerics.poisson_tolerance", [](RunConfig& c, const Value& v) { c.poisson_tolerance = v.number(); }},
      {"numerics.seed", [](RunConfig& c, const Value& v) { c.seed = v.u64(); }},
      {"run.out", [](RunConfig& c, const Value& v) { c.out_dir = v.text; }},
      {"run.advection",
       [](RunConfig& c, const Value& v) {
         if (v.text == "skew") c.advection = AdvectionForm::SkewSymmetric;
         else if (v.text == "broken") c.advection = AdvectionForm::Advective;
         else v.fail("skew or broken");
       }},
      {"run.initial",
       [](RunConfig& c, const Value& v) {
         if (v.text == "rest") c.initial = InitialKind::Rest;
         else if (v.text == "random") c.initial = InitialKind::Random;
         else if (v.text == "eigenmode") c.initial = InitialKind::Eigenmode;
         else if (v.text == "checkpoint") c.initial = InitialKind::Checkpoint;
         else v.fail("rest, random, eigenmode or checkpoint");
       }},
      {"run.h_norm", [](RunConfig& c, const Value& v) { c.h_norm = v.number(); }},
      {"run.eigen_amplitude", [](RunConfig& c, const Value& v) { c.eigen_amplitude = v.number(); }},
      {"run.eigen_m", [](RunConfig& c, const Value& v) { c.eigen_m = v.count(); }},
      {"run.checkpoint", [](RunConfig& c, const Value& v) { c.checkpoint_path = v.text; }},
      {"run.checkpoint_interval", [](RunConfig& c, const Value& v) { c.checkpoint_interval = v.number(); }},
      {"ensemble.members", [](RunConfig& c, const Value& v) { c.members = v.count(); }},
      {"ensemble.window", [](RunConfig& c, const Value& v) { c.window = v.number(); }},
      {"ensemble.margin", [](RunConfig& c, const Value& v) { c.margin = v.number(); }},
      {"ensemble.snapshot_start", [](RunConfig& c, const Value& v) { c.snapshot_start = v.number(); }},
      {"ensemble.max_modes", [](RunConfig& c, const Value& v) { c.max_modes = v.count(); }},
      {"probe.t", [](RunConfig& c, const Value& v) { c.probe_t = v.number(); }},
      {"probe.spinup", [](RunConfig& c, const Value& v) { c.probe_spinup = v.number(); }},
      {"probe.deltas", [](RunConfig& c, const Value& v) { c.probe_deltas = v.numbers(','); }},
      {"probe.calibration_pairs", [](RunConfig& c, const Value& v) { c.calibration_pairs = v.count(); }},
      {"probe.test_pairs", [](RunConfig& c, const Value& v) { c.test_pairs = v.count(); }},
      {"probe.headroom", [](RunConfig& c, const Value& v) { c.headroom = v.number(); }},
      {"dimension.modes", [](RunConfig& c, const Value& v) { c.modes = v.count(); }},
      {"dimension.levels", [](RunConfig& c, const Value& v) { c.levels = v.count(); }},
      {"dimension.eps0", [](RunConfig& c, const Value& v) { c.eps0 = v.number(); }},
      {"dimension.window",
       [](RunConfig& c, const Value& v) {
         const std::vector<double> w = v.numbers(',');
         if (w.size() != 2) v.fail("two level indices 'begin, end'");
         c.window_begin = int(w[0]);
         c.window_end = int(w[1]);
       }},
      {"verify.calibration_runs", [](RunConfig& c, const Value& v) { c.calibration_runs = v.count(); }},
      {"verify.test_runs", [](RunConfig& c, const Value& v) { c.test_runs = v.count(); }},
      {"verify.decay_ics", [](RunConfig& c, const Value& v) { c.decay_ics = v.count(); }},
      {"verify.lemma_fields", [](RunConfig& c, const Value& v) { c.lemma_fields = v.count(); }},
      {"verify.pair_delta", [](RunConfig& c, const Value& v) { c.pair_delta = v.number(); }},
  };
  return table;
}

void validate(const RunConfig& c) {
  auto line_of = [&](const std::string& key) {
    const auto it = c.lines.find(key);
    return it == c.lines.end() ? 0 : it->second;
  };
  auto fail = [&](const std::string& key, const std::string& rule) {
    const int line = line_of(key);
    throw ConfigError((line ? "line " + std::to_string(line) + ": " : std::string()) + key + " " + rule, line);
  };
  for (const char* key : {"grid.nx", "grid.ny", "grid.nz", "numerics.t_final"})
    if (!c.lines.count(key)) throw ConfigError(std::string("missing required key ") + key);
  try {
    validate_parameters(c.params);
  } catch (const ParameterError& e) {
    // Messages start with the parameter name, e.g. "re1 must be positive".
    const std::string msg = e.what();
    const std::string name = msg.substr(0, msg.find(' '));
    const std::string key = name == "q" ? "parameters.q_modes" : "parameters." + name;
    fail(key, msg.substr(msg.find(' ') + 1));
  }
  if (c.params.q.kind == QKind::Trig && c.params.q.modes.empty()) fail("parameters.q_modes", "must list at least one mode");
  if (c.shape.nx < 4) fail("grid.nx", "must be at least 4");
  if (c.shape.ny < 4) fail("grid.ny", "must be at least 4");
  if (c.shape.nz < 4) fail("grid.nz", "must be at least 4");
  if (!(c.dt > 0.0)) fail("numerics.dt", "must be positive");
  if (!(c.t_final > 0.0)) fail("numerics.t_final", "must be positive");
  if (!(c.sample_interval > 0.0)) fail("numerics.sample_interval", "must be positive");
  if (!(c.ell > 0.0)) fail("numerics.ell", "must be positive");
  if (c.n_samples < 3) fail("numerics.n_samples", "must be at least 3");
  if (!(c.cg_tolerance > 0.0)) fail("numerics.cg_tolerance", "must be positive");
  if (!(c.poisson_tolerance > 0.0)) fail("numerics.poisson_tolerance", "must be positive");
  auto aligned = [&](const std::string& key, double value, double step, const std::string& what) {
    try {
      if (aligned_steps(value, step, key) == 0) fail(key, "must be at least one " + what);
    } catch (const TrajectoryError&) {
      fail(key, "must be a whole multiple of " + what);
    }
  };
  aligned("numerics.sample_interval", c.sample_interval, c.dt, "numerics.dt");
  aligned("numerics.t_final", c.t_final, c.sample_interval, "numerics.sample_interval");
  aligned("numerics.ell", c.ell / (c.n_samples - 1), c.dt, "numerics.dt per sample");
  if (!(c.h_norm >= 0.0)) fail("run.h_norm", "must be non-negative");
  if (c.eigen_m < 1) fail("run.eigen_m", "must be at least 1");
  if (c.initial == InitialKind::Checkpoint && c.checkpoint_path.empty())
    fail("run.checkpoint", "is required when run.initial = checkpoint");
  if (c.checkpoint_interval < 0.0) fail("run.checkpoint_interval", "must be non-negative");
  if (c.checkpoint_interval > 0.0) aligned("run.checkpoint_interval", c.checkpoint_interval, c.dt, "numerics.dt");
  if (c.members < 1) fail("ensemble.members", "must be at least 1");
  if (c.window < 0.0 || c.window > c.t_final) fail("ensemble.window", "must lie in [0, t_final]");
  if (c.margin < 0.0) fail("ensemble.margin", "must be non-negative");
  if (c.max_modes < 1) fail("ensemble.max_modes", "must be at least 1");
  if (c.probe_t < 0.0) fail("probe.t", "must be non-negative");
  if (c.probe_spinup < 0.0) fail("probe.spinup", "must be non-negative");
  for (double d : c.probe_deltas)
    if (!(d > 0.0)) fail("probe.deltas", "must all be positive");
  if (!(c.headroom >= 1.0)) fail("probe.headroom", "must be at least 1");
  if (c.modes < 1 || c.modes > c.max_modes) fail("dimension.modes", "must lie in [1, ensemble.max_modes]");
  if (c.levels < 6) fail("dimension.levels", "must be at least 6");
  if (c.eps0 < 0.0) fail("dimension.eps0", "must be non-negative");
  if (c.calibration_runs < 1) fail("verify.calibration_runs", "must be at least 1");
  if (c.test_runs < 1) fail("verify.test_runs", "must be at least 1");
  if (!(c.pair_delta > 0.0)) fail("verify.pair_delta", "must be positive");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected 'section.key = value'", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(line) + ": unknown key " + key, line);
    if (const auto prev = c.lines.find(key); prev != c.lines.end())
      throw ConfigError("line " + std::to_string(line) + ": duplicate key " + key + " (first set on line " +
                            std::to_string(prev->second) + ")",
                        line);
    if (value.empty()) throw ConfigError("line " + std::to_string(line) + ": " + key + " has no value", line);
    it->second(c, Value{key, value, line});
    c.lines[key] = line;
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace peq
