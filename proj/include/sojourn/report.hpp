#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sojourn/common.hpp"

namespace sojourn {

inline constexpr const char* kVersion = "1.0.0";

// One named comparison. `mode` is "abs" (|value - reference| <= tolerance),
// "rel" (relative to |reference|) or "max" (value <= tolerance).
struct CheckRecord {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  std::string mode = "abs";
  bool pass = false;
  double runtime = 0.0;

  bool operator==(const CheckRecord& o) const;
};

CheckRecord make_check(const std::string& name, double value, double reference, double tolerance,
                       const std::string& mode);

struct RunReport {
  std::string experiment;
  std::string version = kVersion;
  int workers = 1;
  std::vector<CheckRecord> checks;
  // named scalar results (delays, fitted coefficients, ...)
  std::map<std::string, double> results;
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;

  bool passed() const;
  void add(CheckRecord c) { checks.push_back(std::move(c)); }
};

// Sorted keys, two-space indent, doubles as %.17g, non-finite doubles as strings.
std::string canonical_json(const nlohmann::json& j);

// Runtime and worker count are left out so that the file depends only on the
// numbers; they go to the sidecar written by emit_report.
std::string report_to_json(const RunReport& r);
RunReport report_from_json(const std::string& text);
std::string report_to_csv(const RunReport& r);
std::string report_sidecar_json(const RunReport& r);

// Writes <dir>/<experiment>.<format> and <dir>/<experiment>.run.json; returns the main path.
std::string emit_report(const RunReport& r, const std::string& dir, const std::string& format);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace sojourn
