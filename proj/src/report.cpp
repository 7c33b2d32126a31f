#include "peq/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace peq {

namespace {

using nlohmann::json;

constexpr const char* kColumns =
    "time,l2_v_sq,l2_t_sq,vnorm_v_sq,vnorm_t_sq,h_energy,smoothing_bracket,dual_surrogate_v,dual_surrogate_t";

// JSON has no NaN or infinity; they are written as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string finish(json j, const std::string& extra) {
  const json e = json::parse(extra);
  for (auto it = e.begin(); it != e.end(); ++it) j[it.key()] = it.value();
  return j.dump();
}

}  // namespace

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records) {
  out << "# schema: " << kDiagnosticsSchema << "\n" << kColumns << "\n";
  out << std::setprecision(17);
  for (const DiagnosticsRecord& d : records)
    out << d.time << ',' << d.l2_v_sq << ',' << d.l2_t_sq << ',' << d.vnorm_v_sq << ',' << d.vnorm_t_sq << ','
        << d.h_energy << ',' << d.smoothing_bracket << ',' << d.dual_surrogate_v << ',' << d.dual_surrogate_t
        << "\n";
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != std::string("# schema: ") + kDiagnosticsSchema)
    throw std::runtime_error("diagnostics CSV: missing or unknown schema line");
  if (!std::getline(in, line) || line != kColumns) throw std::runtime_error("diagnostics CSV: unexpected header");
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    DiagnosticsRecord d;
    double* cols[] = {&d.time,       &d.l2_v_sq,           &d.l2_t_sq,          &d.vnorm_v_sq,      &d.vnorm_t_sq,
                      &d.h_energy,   &d.smoothing_bracket, &d.dual_surrogate_v, &d.dual_surrogate_t};
    for (double* c : cols) {
      std::string cell;
      if (!std::getline(ss, cell, ',')) throw std::runtime_error("diagnostics CSV: short row");
      *c = std::stod(cell);
    }
    out.push_back(d);
  }
  return out;
}

void write_cloud_csv(std::ostream& out, const Eigen::MatrixXd& cloud) {
  out << std::setprecision(17);
  for (Eigen::Index c = 0; c < cloud.cols(); ++c) out << (c ? "," : "") << "c" << c;
  out << "\n";
  for (Eigen::Index r = 0; r < cloud.rows(); ++r) {
    for (Eigen::Index c = 0; c < cloud.cols(); ++c) out << (c ? "," : "") << cloud(r, c);
    out << "\n";
  }
}

std::string to_json_line(const InequalityReport& r, const std::string& extra) {
  json j;
  j["kind"] = "inequality";
  j["id"] = r.id;
  j["intervals"] = r.residuals.size();
  j["max_violation"] = number(r.max_violation);
  j["worst_interval"] = r.worst;
  j["worst_residual"] = r.residuals.empty() ? json(nullptr) : number(r.residuals[r.worst]);
  j["worst_slack"] = r.slack.empty() ? json(nullptr) : number(r.slack[r.worst]);
  json first = nullptr;
  for (std::size_t n = 0; n < r.residuals.size() && n < r.slack.size(); ++n)
    if (r.residuals[n] > r.slack[n]) {
      first = n;
      break;
    }
  j["first_violation"] = first;
  j["pass"] = r.pass;
  return finish(j, extra);
}

std::string to_json_line(const ProbeReport& r, const std::string& extra) {
  json j;
  j["kind"] = "probe";
  j["probe"] = r.probe;
  j["t"] = r.t;
  j["ratio"] = number(r.ratio);
  j["bound"] = number(r.bound);
  j["constant"] = number(r.constant);
  j["growth"] = number(r.growth);
  j["bracket_integral"] = number(r.bracket_integral);
  j["dual_norm"] = r.surrogate ? "surrogate ||(I+A)^-1 .||_2" : "none";
  j["pass"] = r.pass;
  return finish(j, extra);
}

std::string to_json_line(const DimensionReport& r, const std::string& extra) {
  json j;
  j["kind"] = "dimension";
  j["estimator"] = r.estimator;
  j["observable"] = r.observable;
  j["points"] = r.points;
  j["dims"] = r.dims;
  j["eps"] = r.eps;
  j["counts"] = r.counts;
  j["slope"] = r.slope;
  j["window"] = {r.window_begin, r.window_end};
  j["residual"] = r.residual;
  j["degenerate"] = r.degenerate;
  return finish(j, extra);
}

std::string to_json_line(const AbsorbingReport& r, const std::string& extra) {
  json j;
  j["kind"] = "absorbing";
  j["window"] = r.window;
  j["margin"] = r.margin;
  j["rho1"] = r.rho1;
  j["rho2"] = r.rho2;
  j["rho2_dual_norm"] = "surrogate ||(I+A)^-1 .||_2";
  json entry = json::array();
  for (double t : r.entry_time) entry.push_back(number(t));
  j["entry_time"] = entry;
  j["late_l2_t_max"] = r.late_l2_t_max;
  j["k2_sq_q_norm_sq"] = r.k2_sq_q_norm_sq;
  j["failed_members"] = r.failed_members;
  return finish(j, extra);
}

}  // namespace peq
