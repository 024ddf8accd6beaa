#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "doctest.h"
#include "sojourn/experiments.hpp"

using namespace sojourn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / "sojourn-cli-test" / name;
  fs::create_directories(p);
  return p;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  return "";
}

int cli(const std::string& args) {
  std::string cmd = std::string(SOJOURN_CLI) + " " + args + " > /dev/null 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string write_config(const ExperimentConfig& c, const std::string& name) {
  auto path = (scratch("configs") / (name + ".json")).string();
  write_text_file(path, config_to_json(c));
  return path;
}

ExperimentConfig suite() {
  ExperimentConfig c = default_config("invariant-suite");
  c.output_dir = scratch("suite").string();
  return c;
}

}  // namespace

TEST_CASE("every default config round-trips and validates") {
  CHECK(experiment_names().size() == 6u);
  for (const auto& name : experiment_names()) {
    ExperimentConfig c = default_config(name);
    CHECK(c.experiment == name);
    CHECK_NOTHROW(validate_config(c));
    ExperimentConfig back = parse_config(config_to_json(c));
    CHECK(back == c);
    CHECK(config_to_json(back) == config_to_json(c));
  }
  CHECK_THROWS_AS(default_config("no-such-experiment"), Error);
}

TEST_CASE("validation errors name the field") {
  ExperimentConfig c = default_config("invariant-suite");
  c.grid.n = 63;
  std::string msg = config_error(config_to_json(c));
  CHECK(msg.find("grid.n") != std::string::npos);

  c = default_config("invariant-suite");
  c.experiment = "bogus";
  CHECK(config_error(config_to_json(c)).find("experiment") != std::string::npos);

  c = default_config("sojourn-curve");
  c.quadrature.R_list = {4.0, 3.0};
  CHECK(config_error(config_to_json(c)).find("quadrature.R_list") != std::string::npos);

  c = default_config("invariant-suite");
  c.quadrature.wrap_threshold = 1.5;
  CHECK(config_error(config_to_json(c)).find("quadrature.wrap_threshold") != std::string::npos);

  CHECK(config_error("{not json").find("malformed JSON") != std::string::npos);
}

TEST_CASE("invariant suite passes and its report is deterministic") {
  ExperimentConfig c = suite();
  RunReport r = run_experiment(c);
  CHECK(r.passed());
  CHECK(r.experiment == "invariant-suite");
  CHECK(r.checks.size() >= 10u);
  for (const auto& k : r.checks) CHECK_MESSAGE(k.pass, k.name);

  std::string a = emit_report(r, (scratch("emit") / "a").string(), "json");
  std::string b = emit_report(r, (scratch("emit") / "b").string(), "json");
  CHECK(read_text_file(a) == read_text_file(b));
  CHECK(fs::exists(fs::path(a).parent_path() / "invariant-suite.run.json"));

  RunReport back = report_from_json(read_text_file(a));
  CHECK(back.experiment == r.experiment);
  CHECK(back.checks == r.checks);
  CHECK(back.results == r.results);
  CHECK(report_to_json(back) == report_to_json(r));

  std::string csv = report_to_csv(r);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == r.checks.size() + 1);

  // the report body does not depend on the worker count
  c.workers = 3;
  CHECK(report_to_json(run_experiment(c)) == report_to_json(r));
}

TEST_CASE("canonical JSON: sorted keys and 17 significant digits") {
  nlohmann::json j = {{"b", 0.1}, {"a", 1.0 / 3.0}};
  std::string s = canonical_json(j);
  CHECK(s.find("\"a\"") < s.find("\"b\""));
  CHECK(s.find("0.33333333333333331") != std::string::npos);
  CHECK(s.find("0.10000000000000001") != std::string::npos);
}

TEST_CASE("command-line exit codes") {
  ExperimentConfig ok = suite();
  const std::string out = scratch("cli").string();
  CHECK(cli("invariant-suite --config " + write_config(ok, "ok") + " --out " + out + " --format csv") == 0);
  CHECK(fs::exists(fs::path(out) / "invariant-suite.csv"));
  CHECK(fs::exists(fs::path(out) / "invariant-suite.run.json"));

  // a two-ring sphere rule cannot integrate the packet's shell
  ExperimentConfig coarse = ok;
  coarse.quadrature.sphere_theta = 2;
  coarse.quadrature.sphere_phi = 4;
  CHECK(cli("invariant-suite --config " + write_config(coarse, "coarse") + " --out " + out) == 1);

  ExperimentConfig odd = ok;
  odd.grid.n = 63;
  CHECK(cli("invariant-suite --config " + write_config(odd, "odd") + " --out " + out) == 2);
  CHECK(cli("sojourn-curve --config " + write_config(ok, "ok") + " --out " + out) == 2);
  CHECK(cli("invariant-suite --config /nonexistent/config.json") == 2);
  CHECK(cli("not-an-experiment --config " + write_config(ok, "ok")) == 2);
  CHECK(cli("invariant-suite --config " + write_config(ok, "ok") + " --workers 0") == 2);

  ExperimentConfig origin = ok;
  origin.packets[0].center = {0.5, 0.0, 0.0};
  CHECK(cli("invariant-suite --config " + write_config(origin, "origin") + " --out " + out) == 3);

  CHECK(cli("born-scaling --print-default") == 0);
}
