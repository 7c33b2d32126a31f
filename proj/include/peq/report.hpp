#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "peq/attractor.hpp"
#include "peq/diagnostics.hpp"
#include "peq/trajectory.hpp"

namespace peq {

inline constexpr const char* kDiagnosticsSchema = "peq-diagnostics/1";

/// Schema comment, column header, then one row per record at full precision.
void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& in);

void write_cloud_csv(std::ostream& out, const Eigen::MatrixXd& cloud);

// Single-line JSON objects for NDJSON streams. `extra` is merged in as a JSON object text.
std::string to_json_line(const InequalityReport& r, const std::string& extra = "{}");
std::string to_json_line(const ProbeReport& r, const std::string& extra = "{}");
std::string to_json_line(const DimensionReport& r, const std::string& extra = "{}");
std::string to_json_line(const AbsorbingReport& r, const std::string& extra = "{}");

}  // namespace peq
