#pragma once

#include <array>
#include <string>
#include <vector>

#include "sojourn/scattering_ssf.hpp"

namespace sojourn {

struct GridConfig {
  int n = 64;
  double p_max = 6.0;
};

struct PacketConfig {
  Vec3 center{3.0, 0.0, 0.0};
  double width = 0.5;
  int sign = 1;
  std::array<cplx, 4> seed{cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)};

  PacketSpec spec() const;
};

struct ModelConfig {
  std::vector<PhaseChannel> channels;
  PotentialModel potential;
  // born-scaling sweep
  std::vector<double> amplitudes;
};

struct QuadratureConfig {
  double dt = 0.0;  // 0 picks 0.1 / E_max
  double t_max = 100.0;
  double t_min = 0.0;
  double eps_tail = 1e-8;
  // boundary-band mass that starts the wrap clock of the sojourn engine
  double wrap_threshold = 1e-10;
  std::string ball = "spectral";
  std::vector<double> R_list;
  // sojourn-curve fit: samples with R >= fit_r_min, inverse powers of R in the model
  double fit_r_min = 0.0;
  std::vector<double> fit_powers{1.0, 3.0, 5.0};
  int energy_panels = 6;
  int energy_points = 8;
  double energy_k_sigma = 6.0;
  int sphere_theta = 16;
  int sphere_phi = 32;
  double dE_step = 1e-4;
  // energy path for ssf-trace
  double e_min = 1.5;
  double e_max = 4.0;
  int e_count = 50;
};

struct ExperimentConfig {
  std::string experiment;
  GridConfig grid;
  double mass = 1.0;
  std::vector<PacketConfig> packets;
  ModelConfig model;
  QuadratureConfig quadrature;
  std::string output_dir = "out";
  int workers = 1;
  // random draws (packet pairs, matrix families) come from this seed
  unsigned long seed = 1;
  int trials = 20;

  bool operator==(const ExperimentConfig& o) const;
};

const std::vector<std::string>& experiment_names();

// Parse and validate. Errors are ErrorKind::Config and name the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& c);
void validate_config(const ExperimentConfig& c);

}  // namespace sojourn
