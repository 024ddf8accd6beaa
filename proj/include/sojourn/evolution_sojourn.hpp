#pragma once

#include <string>
#include <vector>

#include "sojourn/momentum_field.hpp"

namespace sojourn {

// Sharp indicator of the ball |x| <= R.
struct BallCutoff {
  double R = 1.0;
  explicit BallCutoff(double r) : R(r) {
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "ball radius must be positive");
  }
};

struct TimeQuadrature {
  double dt = 0.01;
  double t_max = 100.0;
  double eps_tail = 1e-8;
  // no tail stop before this time
  double t_min = 0.0;
};

// dt = 0.1 / E_max with E_max = sqrt(p_max^2 + m^2); t_max rounded up to a multiple of 4 dt.
TimeQuadrature default_time_quadrature(const MomentumGrid& grid, Mass m, double t_max, double eps_tail = 1e-8);

// How the ball overlap is integrated over space. Lattice sums the grid points
// inside the ball. Spectral integrates the band-limited interpolant of the
// density exactly over the ball using the ball's Fourier transform.
enum class BallQuadrature { Lattice, Spectral };
const char* ball_quadrature_name(BallQuadrature q);

SpinorField free_evolve(const SpinorField& f, double t);

cplx ball_overlap(const SpinorField& f_t, const SpinorField& g_t, const BallCutoff& cutoff,
                  BallQuadrature mode = BallQuadrature::Lattice);

struct SojournSample {
  double R = 0.0;
  cplx I{0.0, 0.0};
  double err = 0.0;
  double simpson_err = 0.0;
  double tail_err = 0.0;
};

struct SojournCurve {
  std::vector<SojournSample> samples;
  int n = 0;
  double p_max = 0.0;
  double mass = 0.0;
  double dt = 0.0;
  double t_stop = 0.0;
  int direction = 1;
  std::string ball_quadrature;
  std::string packet;
};

struct SojournOptions {
  BallQuadrature ball = BallQuadrature::Spectral;
  // +1 integrates t in [0, T], -1 integrates the reversed evolution.
  int direction = 1;
  std::string packet_label;
  // Boundary-band mass (relative to the field norm) that starts the wrap clock.
  double wrap_threshold = 1e-10;
};

SojournCurve sojourn_curve(const SpinorField& f, const SpinorField& g, const std::vector<double>& R_list,
                           const TimeQuadrature& tq, const SojournOptions& opt = {});

struct SojournValue {
  cplx value{0.0, 0.0};
  double err = 0.0;
};

SojournValue compute_I(const SpinorField& f, const SpinorField& g, double R, const TimeQuadrature& tq,
                       const SojournOptions& opt = {});

struct TwoSided {
  double total = 0.0;
  double forward = 0.0;
  double backward = 0.0;
  double err = 0.0;
};

TwoSided two_sided_sojourn(const SpinorField& f, double R, const TimeQuadrature& tq,
                           const SojournOptions& opt = {});

// Position-space first moment sum x |psi(x)|^2 dx^3 / ||psi||^2.
Vec3 position_centroid(const SpinorField& f);

// Fourier transform of the ball indicator, 4 pi (sin kR - kR cos kR) / k^3.
double ball_transform(double k, double R);

void write_curve_csv(const std::string& path, const SojournCurve& curve);

}  // namespace sojourn
