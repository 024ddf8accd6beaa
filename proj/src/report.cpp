#include "sojourn/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace sojourn {

using nlohmann::json;

bool CheckRecord::operator==(const CheckRecord& o) const {
  auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
  return name == o.name && same(value, o.value) && same(reference, o.reference) && same(tolerance, o.tolerance) &&
         mode == o.mode && pass == o.pass;
}

CheckRecord make_check(const std::string& name, double value, double reference, double tolerance,
                       const std::string& mode) {
  CheckRecord c{name, value, reference, tolerance, mode, false, 0.0};
  if (!std::isfinite(value)) return c;
  if (mode == "abs") c.pass = std::abs(value - reference) <= tolerance;
  else if (mode == "rel") c.pass = std::abs(value - reference) <= tolerance * std::abs(reference);
  else if (mode == "max") c.pass = value <= tolerance;
  else if (mode == "min") c.pass = value >= tolerance;
  else throw Error(ErrorKind::InvalidArgument, "unknown check mode '" + mode + "'");
  return c;
}

bool RunReport::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write(std::ostringstream& os, const json& j, int depth) {
  std::string pad(2 * (depth + 1), ' '), close(2 * depth, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << json(it.key()).dump() << ": ";
        write(os, it.value(), depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write(os, j[i], depth + 1);
      }
      os << "\n" << close << "]";
      return;
    }
    case json::value_t::number_float: os << format_double(j.get<double>()); return;
    default: os << j.dump(); return;
  }
}

double read_double(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorKind::Io, "report value is not a number");
}

json as_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

std::string canonical_json(const json& j) {
  std::ostringstream os;
  write(os, j, 0);
  os << "\n";
  return os.str();
}

std::string report_to_json(const RunReport& r) {
  json j;
  j["experiment"] = r.experiment;
  j["version"] = r.version;
  j["passed"] = r.passed();
  j["checks"] = json::array();
  for (const auto& c : r.checks)
    j["checks"].push_back({{"name", c.name},
                           {"value", as_number(c.value)},
                           {"reference", as_number(c.reference)},
                           {"tolerance", as_number(c.tolerance)},
                           {"mode", c.mode},
                           {"pass", c.pass}});
  j["results"] = json::object();
  for (const auto& [k, v] : r.results) j["results"][k] = as_number(v);
  j["artifacts"] = r.artifacts;
  j["warnings"] = r.warnings;
  return canonical_json(j);
}

RunReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Io, std::string("malformed report: ") + e.what());
  }
  RunReport r;
  r.experiment = j.at("experiment").get<std::string>();
  r.version = j.at("version").get<std::string>();
  for (const auto& c : j.at("checks")) {
    CheckRecord k;
    k.name = c.at("name").get<std::string>();
    k.value = read_double(c.at("value"));
    k.reference = read_double(c.at("reference"));
    k.tolerance = read_double(c.at("tolerance"));
    k.mode = c.at("mode").get<std::string>();
    k.pass = c.at("pass").get<bool>();
    r.checks.push_back(k);
  }
  for (auto it = j.at("results").begin(); it != j.at("results").end(); ++it) r.results[it.key()] = read_double(it.value());
  r.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

std::string report_to_csv(const RunReport& r) {
  std::ostringstream os;
  os << "name,value,reference,tolerance,mode,pass\n";
  auto num = [](double v) {
    if (!std::isfinite(v)) return std::string(std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& c : r.checks)
    os << c.name << "," << num(c.value) << "," << num(c.reference) << "," << num(c.tolerance) << "," << c.mode << ","
       << (c.pass ? "true" : "false") << "\n";
  return os.str();
}

std::string report_sidecar_json(const RunReport& r) {
  json j;
  j["experiment"] = r.experiment;
  j["version"] = r.version;
  j["workers"] = r.workers;
  j["runtime"] = json::object();
  double total = 0.0;
  for (const auto& c : r.checks) {
    j["runtime"][c.name] = c.runtime;
    total += c.runtime;
  }
  j["runtime_total"] = total;
  return canonical_json(j);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string emit_report(const RunReport& r, const std::string& dir, const std::string& format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + dir + ": " + ec.message());
  std::string base = (std::filesystem::path(dir) / r.experiment).string();
  std::string main;
  if (format == "json") {
    main = base + ".json";
    write_text_file(main, report_to_json(r));
  } else if (format == "csv") {
    main = base + ".csv";
    write_text_file(main, report_to_csv(r));
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown report format '" + format + "'");
  }
  write_text_file(base + ".run.json", report_sidecar_json(r));
  return main;
}

}  // namespace sojourn
