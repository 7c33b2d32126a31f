#include "peq/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <tuple>

#include "peq/stencil.hpp"
#include "peq/trajectory.hpp"

namespace peq {

using std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1))) {}

std::uint64_t CounterRng::next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

double CounterRng::uniform() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

double CounterRng::normal() {
  // Box-Muller, one output per pair of draws so the value depends only on the counter.
  const double u1 = uniform(), u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
}

namespace {

// 1-D discrete basis at cell centres: cosine of index a, or sine of index a (a >= 1).
std::vector<double> basis_1d(int n, double d, double extent, int a, bool sine) {
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * d;
    b[i] = sine ? std::sin(a * pi * x / extent) : std::cos(a * pi * x / extent);
  }
  return b;
}

}  // namespace

State random_initial_state(const Parameters& p, const Grid& g, std::uint64_t seed, std::uint64_t member,
                           double h_norm) {
  if (!(h_norm >= 0.0)) throw EnsembleError("h_norm must be non-negative");
  State rest = make_rest_state(p, g);
  if (h_norm == 0.0) return rest;
  CounterRng rng(seed, member);
  constexpr int kModes = 4;
  ScalarField fields[3] = {rest.u, rest.v, rest.t};
  for (int f = 0; f < 3; ++f) {
    for (int a = 0; a < kModes; ++a)
      for (int b = 0; b < kModes; ++b)
        for (int c = 0; c < kModes; ++c) {
          const double coef = rng.normal();
          const auto bx = basis_1d(g.nx(), g.dx, g.lx, f == 0 ? a + 1 : a, f == 0);
          const auto by = basis_1d(g.ny(), g.dy, g.ly, f == 1 ? b + 1 : b, f == 1);
          const auto bz = basis_1d(g.nz(), g.dz, g.h, c, false);
          fields[f].for_each_interior([&](int i, int j, int k, double& x) { x += coef * bx[i] * by[j] * bz[k]; });
        }
    fill_ghost(fields[f]);
  }
  const PoissonSolver2D ps(g);
  ProjectionResult r = barotropic_projection(fields[0], fields[1], 1.0, ps, g);
  State s = make_state(p, g, std::move(r.u), std::move(r.v), std::move(fields[2]));
  const double scale = h_norm / std::sqrt(h_energy(s, g));
  s.u *= scale;
  s.v *= scale;
  s.t *= scale;
  s.w.data() *= scale;
  return s;
}

namespace {

MemberResult run_member(const EnsembleConfig& cfg, int index) {
  MemberResult m;
  m.index = index;
  try {
    const Parameters& p = cfg.params;
    const Grid g(p, cfg.shape.nx, cfg.shape.ny, cfg.shape.nz);
    SolverOptions opt{cfg.dt};
    opt.cg_tolerance = cfg.cg_tolerance;
    const Solver solver(p, g, opt);
    const DualSurrogate dual(p, g, cfg.cg_tolerance);
    const std::size_t per_sample = aligned_steps(cfg.sample_interval, cfg.dt, "sample_interval");
    const std::size_t samples = aligned_steps(cfg.t_final, cfg.sample_interval, "t_final");
    if (per_sample == 0) throw EnsembleError("sample_interval is shorter than dt");
    const double snap_from = cfg.snapshot_start < 0.0 ? 0.5 * cfg.t_final : cfg.snapshot_start;
    const int m_modes = std::min<int>(cfg.max_modes, 3 * cfg.shape.cells());

    State cur = random_initial_state(p, g, cfg.seed, std::uint64_t(index), cfg.h_norm);
    m.records.push_back(make_record(cur, nullptr, cfg.sample_interval, p, g, dual));
    for (std::size_t n = 1; n <= samples; ++n) {
      State next = solver.advance(cur, per_sample);
      m.records.push_back(make_record(next, &cur, cfg.sample_interval, p, g, dual));
      if (next.time >= snap_from - 1e-12) m.snapshots.push_back(project_modes(next, g, m_modes));
      cur = std::move(next);
    }
    m.cfl_warnings = solver.cfl_warnings();
  } catch (const std::exception& e) {
    m.ok = false;
    m.error = e.what();
  }
  return m;
}

}  // namespace

Ensemble run_ensemble(const EnsembleConfig& cfg) {
  if (cfg.members < 1) throw EnsembleError("ensemble needs at least one member");
  validate_parameters(cfg.params);
  Ensemble e;
  e.config = cfg;
  if (cfg.parallel) {
    std::vector<std::future<MemberResult>> tasks;
    for (int i = 0; i < cfg.members; ++i) tasks.push_back(std::async(std::launch::async, run_member, cfg, i));
    for (auto& t : tasks) e.members.push_back(t.get());
  } else {
    for (int i = 0; i < cfg.members; ++i) e.members.push_back(run_member(cfg, i));
  }
  return e;
}

AbsorbingReport absorbing_report(const Ensemble& e, double window, double ell, double margin) {
  const EnsembleConfig& cfg = e.config;
  if (!(window > 0.0) || window > cfg.t_final + 1e-12) throw EnsembleError("window exceeds run length");
  const std::size_t wn = aligned_steps(window, cfg.sample_interval, "window");
  const std::size_t ln = aligned_steps(ell, cfg.sample_interval, "ell");
  if (ln == 0 || ln > wn) throw EnsembleError("ell must be positive and no longer than the window");
  AbsorbingReport r;
  r.window = window;
  r.margin = margin;
  r.k2_sq_q_norm_sq = std::pow(k2_constant(cfg.params), 2) * q_norm_sq(cfg.params);
  const double h = cfg.sample_interval;

  auto vsum = [](const DiagnosticsRecord& d) { return d.vnorm_v_sq + d.vnorm_t_sq; };
  for (const MemberResult& m : e.members) {
    if (!m.ok) {
      r.failed_members.push_back(m.index);
      continue;
    }
    const std::size_t n = m.records.size();
    for (std::size_t k = n - 1 - wn; k < n; ++k) {
      r.rho1 = std::max(r.rho1, vsum(m.records[k]));
      r.late_l2_t_max = std::max(r.late_l2_t_max, m.records[k].l2_t_sq);
    }
    // The time-derivative surrogate of record k is a backward difference, so it is
    // only used for k >= 1; windows start no earlier than the trailing window.
    for (std::size_t s = n - 1 - wn; s + ln < n; ++s) {
      double vint = 0.0, dint = 0.0;
      for (std::size_t k = s; k < s + ln; ++k) {
        vint += 0.5 * h * (vsum(m.records[k]) + vsum(m.records[k + 1]));
        auto dn = [&](const DiagnosticsRecord& d) { return std::hypot(d.dual_surrogate_v, d.dual_surrogate_t); };
        dint += 0.5 * h * (dn(m.records[std::max<std::size_t>(k, 1)]) + dn(m.records[k + 1]));
      }
      r.rho2 = std::max(r.rho2, vint + dint * dint);
    }
  }
  const double level = r.rho1 * (1.0 + margin);
  for (const MemberResult& m : e.members) {
    double entry = std::numeric_limits<double>::quiet_NaN();
    if (m.ok) {
      const std::size_t n = m.records.size();
      // Latest excursion above the level; the member stays inside from the next sample on.
      std::size_t first = 0;
      for (std::size_t k = 0; k < n; ++k)
        if (vsum(m.records[k]) > level) first = k + 1;
      if (first + wn < n) entry = m.records[first].time;
    }
    r.entry_time.push_back(entry);
  }
  return r;
}

std::vector<ModeIndex> leading_modes(const Grid& g, int m) {
  const int total = 3 * g.nx() * g.ny() * g.nz();
  if (m < 1 || m > total) throw DimensionError("mode count exceeds the representable modes");
  std::vector<std::tuple<double, int, int, int, int>> all;
  all.reserve(total);
  for (int f = 0; f < 3; ++f)
    for (int a = 0; a < g.nx(); ++a)
      for (int b = 0; b < g.ny(); ++b)
        for (int c = 0; c < g.nz(); ++c) {
          const int ia = f == 0 ? a + 1 : a, ib = f == 1 ? b + 1 : b;
          const double k2 = std::pow(ia / g.lx, 2) + std::pow(ib / g.ly, 2) + std::pow(c / g.h, 2);
          all.emplace_back(k2, f, ia, ib, c);
        }
  std::partial_sort(all.begin(), all.begin() + m, all.end());
  std::vector<ModeIndex> out(m);
  for (int i = 0; i < m; ++i) out[i] = {std::get<1>(all[i]), std::get<2>(all[i]), std::get<3>(all[i]), std::get<4>(all[i])};
  return out;
}

std::vector<double> project_modes(const State& s, const Grid& g, int m) {
  const std::vector<ModeIndex> modes = leading_modes(g, m);
  std::vector<double> out(m);
  const ScalarField* fields[3] = {&s.u, &s.v, &s.t};
  for (int n = 0; n < m; ++n) {
    const ModeIndex& md = modes[n];
    const auto bx = basis_1d(g.nx(), g.dx, g.lx, md.a, md.field == 0);
    const auto by = basis_1d(g.ny(), g.dy, g.ly, md.b, md.field == 1);
    const auto bz = basis_1d(g.nz(), g.dz, g.h, md.c, false);
    const ScalarField& f = *fields[md.field];
    double dot = 0.0, norm = 0.0;
    for (int i = 0; i < g.nx(); ++i)
      for (int j = 0; j < g.ny(); ++j)
        for (int k = 0; k < g.nz(); ++k) {
          const double phi = bx[i] * by[j] * bz[k];
          dot += f(i, j, k) * phi;
          norm += phi * phi;
        }
    out[n] = dot * std::sqrt(g.cell_volume() / norm);
  }
  return out;
}

Eigen::MatrixXd snapshot_cloud(const Ensemble& e, int m) {
  if (m < 1 || m > e.config.max_modes) throw DimensionError("mode count exceeds the stored snapshot modes");
  std::size_t rows = 0;
  for (const MemberResult& mr : e.members)
    if (mr.ok) rows += mr.snapshots.size();
  Eigen::MatrixXd cloud(rows, m);
  std::size_t r = 0;
  for (const MemberResult& mr : e.members) {
    if (!mr.ok) continue;
    for (const auto& snap : mr.snapshots) {
      if (int(snap.size()) < m) throw DimensionError("mode count exceeds the representable modes");
      for (int c = 0; c < m; ++c) cloud(r, c) = snap[c];
      ++r;
    }
  }
  return cloud;
}

namespace {

struct Fit {
  double slope = 0.0, residual = 0.0;
};

Fit fit_line(const std::vector<double>& x, const std::vector<double>& y, int b, int e) {
  const int n = e - b + 1;
  double mx = 0.0, my = 0.0;
  for (int i = b; i <= e; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (int i = b; i <= e; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  Fit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  double ss = 0.0;
  for (int i = b; i <= e; ++i) {
    const double r = y[i] - (my + f.slope * (x[i] - mx));
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

void check_cloud(const Eigen::MatrixXd& cloud, const DimensionOptions& opt) {
  if (cloud.rows() < 100) throw DimensionError("dimension estimate needs at least 100 points");
  if (opt.levels < 6) throw DimensionError("the scale ladder needs at least 6 levels");
  if (!cloud.allFinite()) throw DimensionError("cloud contains non-finite coordinates");
}

double cloud_extent(const Eigen::MatrixXd& cloud) {
  return (cloud.colwise().maxCoeff() - cloud.colwise().minCoeff()).maxCoeff();
}

// Chooses the fit window among levels flagged valid and fills slope, window and residual.
// Box counts scale as eps^-d and correlation sums as eps^d; `sign` picks the abscissa.
void select_window(DimensionReport& r, const std::vector<bool>& valid, const DimensionOptions& opt, double sign) {
  const int L = int(r.eps.size());
  std::vector<double> x(L), y(L);
  for (int k = 0; k < L; ++k) {
    x[k] = sign * std::log(r.eps[k]);
    y[k] = r.counts[k] > 0.0 ? std::log(r.counts[k]) : 0.0;
  }
  if (opt.window_begin >= 0 && opt.window_end >= 0) {
    if (opt.window_end - opt.window_begin + 1 < 2 || opt.window_end >= L)
      throw DimensionError("manual fit window is out of range");
    const Fit f = fit_line(x, y, opt.window_begin, opt.window_end);
    r.window_begin = opt.window_begin;
    r.window_end = opt.window_end;
    r.slope = std::max(0.0, f.slope);
    r.residual = f.residual;
    return;
  }
  struct Cand {
    int b, e;
    Fit f;
  };
  std::vector<Cand> cands;
  double best = std::numeric_limits<double>::infinity();
  for (int b = 0; b < L; ++b)
    for (int e = b + opt.min_window - 1; e < L; ++e) {
      bool ok = true;
      for (int k = b; k <= e; ++k) ok = ok && valid[k];
      if (!ok) break;
      const Fit f = fit_line(x, y, b, e);
      cands.push_back({b, e, f});
      best = std::min(best, f.residual);
    }
  if (cands.empty()) throw DimensionError("no scaling window with enough unsaturated levels");
  // Longest window whose fit is close to the best one; ties go to the smaller residual.
  const double tol = std::max(2.0 * best, 0.02);
  const Cand* pick = nullptr;
  for (const Cand& c : cands) {
    if (c.f.residual > tol) continue;
    if (!pick || c.e - c.b > pick->e - pick->b ||
        (c.e - c.b == pick->e - pick->b && c.f.residual < pick->f.residual))
      pick = &c;
  }
  r.window_begin = pick->b;
  r.window_end = pick->e;
  r.slope = std::max(0.0, pick->f.slope);
  r.residual = pick->f.residual;
}

std::vector<double> ladder(double eps0, int levels) {
  std::vector<double> eps(levels);
  for (int k = 0; k < levels; ++k) eps[k] = std::ldexp(eps0, -k);
  return eps;
}

}  // namespace

DimensionReport box_counting_dimension(const Eigen::MatrixXd& cloud, const DimensionOptions& opt) {
  check_cloud(cloud, opt);
  DimensionReport r;
  r.estimator = "box-counting";
  r.points = int(cloud.rows());
  r.dims = int(cloud.cols());
  const double extent = cloud_extent(cloud);
  const double eps0 = opt.eps0 > 0.0 ? opt.eps0 : extent;
  if (!(eps0 > 0.0)) {
    r.degenerate = true;
    r.eps = ladder(1.0, opt.levels);
    r.counts.assign(opt.levels, 1.0);
    return r;
  }
  r.eps = ladder(eps0, opt.levels);
  const Eigen::RowVectorXd lo = cloud.colwise().minCoeff();
  for (double eps : r.eps) {
    std::vector<std::vector<std::int64_t>> keys(cloud.rows(), std::vector<std::int64_t>(cloud.cols()));
    for (Eigen::Index i = 0; i < cloud.rows(); ++i)
      for (Eigen::Index c = 0; c < cloud.cols(); ++c)
        keys[i][c] = std::int64_t(std::floor((cloud(i, c) - lo[c]) / eps));
    std::sort(keys.begin(), keys.end());
    r.counts.push_back(double(std::unique(keys.begin(), keys.end()) - keys.begin()));
  }
  if (r.counts.back() == 1.0) {
    r.degenerate = true;  // one box at every scale of the ladder
    return r;
  }
  std::vector<bool> valid(opt.levels);
  for (int k = 0; k < opt.levels; ++k) valid[k] = r.counts[k] <= opt.saturation * r.points;
  select_window(r, valid, opt, -1.0);
  return r;
}

DimensionReport correlation_dimension(const Eigen::MatrixXd& cloud, const DimensionOptions& opt) {
  check_cloud(cloud, opt);
  DimensionReport r;
  r.estimator = "correlation";
  r.points = int(cloud.rows());
  r.dims = int(cloud.cols());
  const double extent = cloud_extent(cloud);
  const double eps0 = opt.eps0 > 0.0 ? opt.eps0 : extent;
  r.eps = ladder(eps0 > 0.0 ? eps0 : 1.0, opt.levels);
  if (!(eps0 > 0.0)) {
    r.degenerate = true;
    r.counts.assign(opt.levels, 1.0);
    return r;
  }
  std::vector<double> eps2(opt.levels);
  for (int k = 0; k < opt.levels; ++k) eps2[k] = r.eps[k] * r.eps[k];
  // below[k] counts pairs with distance < eps_k; histogram by finest level reached.
  std::vector<std::uint64_t> finest(opt.levels + 1, 0);
  const Eigen::MatrixXd pts = cloud.transpose();
  const Eigen::Index n = pts.cols();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (pts.col(i) - pts.col(j)).squaredNorm();
      int k = 0;
      while (k < opt.levels && d2 < eps2[k]) ++k;
      ++finest[k];
    }
  const double pairs = 0.5 * double(n) * double(n - 1);
  std::uint64_t acc = 0;
  std::vector<double> count(opt.levels);
  for (int k = opt.levels - 1; k >= 0; --k) {
    acc += finest[k + 1];
    count[k] = double(acc);
  }
  std::vector<bool> valid(opt.levels);
  for (int k = 0; k < opt.levels; ++k) {
    r.counts.push_back(count[k] / pairs);
    valid[k] = count[k] >= opt.min_pairs && r.counts[k] <= opt.max_correlation;
  }
  if (count.back() == pairs) {
    r.degenerate = true;  // every pair closer than the finest scale
    return r;
  }
  select_window(r, valid, opt, 1.0);
  return r;
}

}  // namespace peq
