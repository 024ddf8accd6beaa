#include "sojourn/experiment_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sojourn/report.hpp"

namespace sojourn {

using nlohmann::json;

PacketSpec PacketConfig::spec() const {
  PacketSpec s;
  s.center = center;
  s.width = width;
  s.sign = sign;
  s.seed = Spinor(seed[0], seed[1], seed[2], seed[3]);
  return s;
}

namespace {

bool same_channel(const PhaseChannel& a, const PhaseChannel& b) {
  return a.sign == b.sign && a.family == b.family && a.e_res == b.e_res && a.gamma == b.gamma &&
         a.amplitude == b.amplitude && a.center == b.center && a.width == b.width && a.multiplicity == b.multiplicity;
}

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw Error(ErrorKind::Config, field + ": " + msg);
}

// Field-path aware accessor over one JSON object.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) const {
    used_.insert(key);
    return j_.at(key);
  }

  double num(const std::string& key, double def) const {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }
  int integer(const std::string& key, int def) const {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<int>();
  }
  bool boolean(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }
  std::string str(const std::string& key, const std::string& def) const {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    const json& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(at(it.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> used_;
};

cplx parse_complex(const json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  fail(field, "expected a number or [re, im]");
}

PacketConfig parse_packet(const json& j, const std::string& path) {
  Reader r(j, path);
  PacketConfig p;
  if (r.has("center")) {
    auto c = r.numbers("center");
    if (c.size() != 3) fail(r.at("center"), "expected 3 components");
    p.center = {c[0], c[1], c[2]};
  }
  p.width = r.num("width", p.width);
  p.sign = r.integer("sign", p.sign);
  if (r.has("seed")) {
    const json& s = r.raw("seed");
    if (!s.is_array() || s.size() != 4) fail(r.at("seed"), "expected 4 spinor components");
    for (int c = 0; c < 4; ++c) p.seed[c] = parse_complex(s[c], r.at("seed") + "[" + std::to_string(c) + "]");
  }
  r.reject_unknown();
  return p;
}

PhaseChannel parse_channel(const json& j, const std::string& path) {
  Reader r(j, path);
  PhaseChannel c;
  c.sign = r.integer("sign", c.sign);
  std::string fam = r.str("family", phase_family_name(c.family));
  try {
    c.family = phase_family_from_name(fam);
  } catch (const Error&) {
    fail(r.at("family"), "unknown family '" + fam + "' (breit-wigner, bump, constant)");
  }
  c.e_res = r.num("e_res", c.e_res);
  c.gamma = r.num("gamma", c.gamma);
  c.amplitude = r.num("amplitude", c.amplitude);
  c.center = r.num("center", c.center);
  c.width = r.num("width", c.width);
  c.multiplicity = r.integer("multiplicity", c.multiplicity);
  r.reject_unknown();
  return c;
}

PotentialModel parse_potential(const json& j, const std::string& path) {
  Reader r(j, path);
  PotentialModel v;
  std::string kind = r.str("kind", "gaussian");
  if (kind == "gaussian") v.kind = PotentialModel::Kind::Gaussian;
  else if (kind == "yukawa") v.kind = PotentialModel::Kind::Yukawa;
  else fail(r.at("kind"), "expected gaussian or yukawa");
  v.amplitude = r.num("amplitude", v.amplitude);
  v.range = r.num("range", v.range);
  v.times_beta = r.boolean("times_beta", v.times_beta);
  r.reject_unknown();
  return v;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  auto same_packet = [](const PacketConfig& a, const PacketConfig& b) {
    return a.center == b.center && a.width == b.width && a.sign == b.sign && a.seed == b.seed;
  };
  auto same_pot = [](const PotentialModel& a, const PotentialModel& b) {
    return a.kind == b.kind && a.amplitude == b.amplitude && a.range == b.range && a.times_beta == b.times_beta;
  };
  const auto& q = quadrature;
  const auto& r = o.quadrature;
  return experiment == o.experiment && grid.n == o.grid.n && grid.p_max == o.grid.p_max && mass == o.mass &&
         std::equal(packets.begin(), packets.end(), o.packets.begin(), o.packets.end(), same_packet) &&
         std::equal(model.channels.begin(), model.channels.end(), o.model.channels.begin(), o.model.channels.end(),
                    same_channel) &&
         same_pot(model.potential, o.model.potential) && model.amplitudes == o.model.amplitudes && q.dt == r.dt &&
         q.t_max == r.t_max && q.t_min == r.t_min && q.eps_tail == r.eps_tail && q.wrap_threshold == r.wrap_threshold && q.ball == r.ball &&
         q.R_list == r.R_list && q.fit_r_min == r.fit_r_min && q.fit_powers == r.fit_powers && q.energy_panels == r.energy_panels && q.energy_points == r.energy_points &&
         q.energy_k_sigma == r.energy_k_sigma && q.sphere_theta == r.sphere_theta && q.sphere_phi == r.sphere_phi &&
         q.dE_step == r.dE_step && q.e_min == r.e_min && q.e_max == r.e_max && q.e_count == r.e_count &&
         output_dir == o.output_dir && workers == o.workers && seed == o.seed && trials == o.trials;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"sojourn-curve", "asymptotics-check", "delay-three-routes",
                                              "ssf-trace",     "born-scaling",      "invariant-suite"};
  return names;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("<root>: malformed JSON: ") + e.what());
  }
  Reader r(j, "");
  ExperimentConfig c;
  c.experiment = r.str("experiment", "");
  if (r.has("grid")) {
    Reader g(r.raw("grid"), "grid");
    c.grid.n = g.integer("n", c.grid.n);
    c.grid.p_max = g.num("p_max", c.grid.p_max);
    g.reject_unknown();
  }
  c.mass = r.num("mass", c.mass);
  if (r.has("packets")) {
    const json& ps = r.raw("packets");
    if (!ps.is_array()) fail("packets", "expected an array");
    for (std::size_t i = 0; i < ps.size(); ++i) c.packets.push_back(parse_packet(ps[i], "packets[" + std::to_string(i) + "]"));
  }
  if (r.has("model")) {
    Reader m(r.raw("model"), "model");
    if (m.has("channels")) {
      const json& cs = m.raw("channels");
      if (!cs.is_array()) fail("model.channels", "expected an array");
      for (std::size_t i = 0; i < cs.size(); ++i)
        c.model.channels.push_back(parse_channel(cs[i], "model.channels[" + std::to_string(i) + "]"));
    }
    if (m.has("potential")) c.model.potential = parse_potential(m.raw("potential"), "model.potential");
    c.model.amplitudes = m.numbers("amplitudes");
    m.reject_unknown();
  }
  if (r.has("quadrature")) {
    Reader q(r.raw("quadrature"), "quadrature");
    auto& d = c.quadrature;
    d.dt = q.num("dt", d.dt);
    d.t_max = q.num("t_max", d.t_max);
    d.t_min = q.num("t_min", d.t_min);
    d.eps_tail = q.num("eps_tail", d.eps_tail);
    d.wrap_threshold = q.num("wrap_threshold", d.wrap_threshold);
    d.ball = q.str("ball", d.ball);
    d.R_list = q.numbers("R_list");
    d.fit_r_min = q.num("fit_r_min", d.fit_r_min);
    if (q.has("fit_powers")) d.fit_powers = q.numbers("fit_powers");
    d.energy_panels = q.integer("energy_panels", d.energy_panels);
    d.energy_points = q.integer("energy_points", d.energy_points);
    d.energy_k_sigma = q.num("energy_k_sigma", d.energy_k_sigma);
    d.sphere_theta = q.integer("sphere_theta", d.sphere_theta);
    d.sphere_phi = q.integer("sphere_phi", d.sphere_phi);
    d.dE_step = q.num("dE_step", d.dE_step);
    d.e_min = q.num("e_min", d.e_min);
    d.e_max = q.num("e_max", d.e_max);
    d.e_count = q.integer("e_count", d.e_count);
    q.reject_unknown();
  }
  c.output_dir = r.str("output_dir", c.output_dir);
  c.workers = r.integer("workers", c.workers);
  if (r.has("seed")) {
    const json& s = r.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long>() >= 0)) fail("seed", "expected a non-negative integer");
    c.seed = s.get<unsigned long>();
  }
  c.trials = r.integer("trials", c.trials);
  r.reject_unknown();
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& c) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    fail("experiment", "unknown experiment '" + c.experiment + "'");
  if (c.grid.n < 8 || c.grid.n % 2 != 0) fail("grid.n", "must be even and at least 8 (got " + std::to_string(c.grid.n) + ")");
  if (c.grid.n > 512) fail("grid.n", "must not exceed 512");
  if (!(c.grid.p_max > 0.0)) fail("grid.p_max", "must be positive");
  if (!(c.mass >= 0.0)) fail("mass", "must be non-negative");
  for (std::size_t i = 0; i < c.packets.size(); ++i) {
    const auto& p = c.packets[i];
    std::string at = "packets[" + std::to_string(i) + "]";
    if (!(p.width > 0.0)) fail(at + ".width", "must be positive");
    if (p.sign != 1 && p.sign != -1) fail(at + ".sign", "must be +1 or -1");
    if (std::all_of(p.seed.begin(), p.seed.end(), [](cplx z) { return z == cplx(0.0, 0.0); }))
      fail(at + ".seed", "must not be zero");
  }
  for (std::size_t i = 0; i < c.model.channels.size(); ++i) {
    const auto& ch = c.model.channels[i];
    std::string at = "model.channels[" + std::to_string(i) + "]";
    if (ch.sign != 1 && ch.sign != -1) fail(at + ".sign", "must be +1 or -1");
    if (ch.multiplicity < 1) fail(at + ".multiplicity", "must be at least 1");
    if (ch.family == PhaseFamily::BreitWigner && !(ch.gamma > 0.0)) fail(at + ".gamma", "must be positive");
    if (ch.family == PhaseFamily::Bump && !(ch.width > 0.0)) fail(at + ".width", "must be positive");
  }
  if (!(c.model.potential.range > 0.0)) fail("model.potential.range", "must be positive");
  for (double a : c.model.amplitudes)
    if (!(a > 0.0)) fail("model.amplitudes", "entries must be positive");
  const auto& q = c.quadrature;
  if (!(q.dt >= 0.0)) fail("quadrature.dt", "must be non-negative (0 selects the default)");
  if (!(q.t_max > 0.0)) fail("quadrature.t_max", "must be positive");
  if (!(q.t_min >= 0.0)) fail("quadrature.t_min", "must be non-negative");
  if (!(q.eps_tail > 0.0)) fail("quadrature.eps_tail", "must be positive");
  if (!(q.wrap_threshold > 0.0 && q.wrap_threshold < 1.0)) fail("quadrature.wrap_threshold", "must lie in (0, 1)");
  if (q.ball != "spectral" && q.ball != "lattice") fail("quadrature.ball", "expected spectral or lattice");
  for (std::size_t i = 0; i < q.R_list.size(); ++i) {
    if (!(q.R_list[i] > 0.0)) fail("quadrature.R_list", "radii must be positive");
    if (i > 0 && !(q.R_list[i] > q.R_list[i - 1])) fail("quadrature.R_list", "radii must be strictly increasing");
  }
  for (double k : q.fit_powers)
    if (!(k >= 1.0 && k <= 9.0 && k == std::floor(k))) fail("quadrature.fit_powers", "entries must be integers in [1, 9]");
  if (q.energy_panels < 1) fail("quadrature.energy_panels", "must be at least 1");
  if (q.energy_points < 1 || q.energy_points > 64) fail("quadrature.energy_points", "must be in [1, 64]");
  if (!(q.energy_k_sigma > 0.0)) fail("quadrature.energy_k_sigma", "must be positive");
  if (q.sphere_theta < 2) fail("quadrature.sphere_theta", "must be at least 2");
  if (q.sphere_phi < 3) fail("quadrature.sphere_phi", "must be at least 3");
  if (!(q.dE_step > 0.0)) fail("quadrature.dE_step", "must be positive");
  if (!(q.e_max > q.e_min)) fail("quadrature.e_max", "must exceed e_min");
  if (q.e_count < 2) fail("quadrature.e_count", "must be at least 2");
  if (c.workers < 1 || c.workers > 256) fail("workers", "must be in [1, 256]");
  if (c.trials < 1 || c.trials > 10000) fail("trials", "must be in [1, 10000]");
  if (c.output_dir.empty()) fail("output_dir", "must not be empty");
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["grid"] = {{"n", c.grid.n}, {"p_max", c.grid.p_max}};
  j["mass"] = c.mass;
  j["packets"] = json::array();
  for (const auto& p : c.packets) {
    json seed = json::array();
    for (cplx z : p.seed) seed.push_back(complex_json(z));
    j["packets"].push_back({{"center", {p.center[0], p.center[1], p.center[2]}},
                            {"width", p.width},
                            {"sign", p.sign},
                            {"seed", seed}});
  }
  json chans = json::array();
  for (const auto& ch : c.model.channels)
    chans.push_back({{"sign", ch.sign},
                     {"family", phase_family_name(ch.family)},
                     {"e_res", ch.e_res},
                     {"gamma", ch.gamma},
                     {"amplitude", ch.amplitude},
                     {"center", ch.center},
                     {"width", ch.width},
                     {"multiplicity", ch.multiplicity}});
  const auto& v = c.model.potential;
  j["model"] = {{"channels", chans},
                {"potential",
                 {{"kind", v.kind == PotentialModel::Kind::Gaussian ? "gaussian" : "yukawa"},
                  {"amplitude", v.amplitude},
                  {"range", v.range},
                  {"times_beta", v.times_beta}}},
                {"amplitudes", c.model.amplitudes}};
  const auto& q = c.quadrature;
  j["quadrature"] = {{"dt", q.dt},
                     {"t_max", q.t_max},
                     {"t_min", q.t_min},
                     {"eps_tail", q.eps_tail},
                     {"wrap_threshold", q.wrap_threshold},
                     {"ball", q.ball},
                     {"R_list", q.R_list},
                     {"fit_r_min", q.fit_r_min},
                     {"fit_powers", q.fit_powers},
                     {"energy_panels", q.energy_panels},
                     {"energy_points", q.energy_points},
                     {"energy_k_sigma", q.energy_k_sigma},
                     {"sphere_theta", q.sphere_theta},
                     {"sphere_phi", q.sphere_phi},
                     {"dE_step", q.dE_step},
                     {"e_min", q.e_min},
                     {"e_max", q.e_max},
                     {"e_count", q.e_count}};
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  return canonical_json(j);
}

}  // namespace sojourn
