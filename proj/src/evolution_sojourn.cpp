#include "sojourn/evolution_sojourn.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <optional>

#include "sojourn/parallel.hpp"

namespace sojourn {

const char* ball_quadrature_name(BallQuadrature q) {
  return q == BallQuadrature::Lattice ? "lattice" : "spectral";
}

TimeQuadrature default_time_quadrature(const MomentumGrid& grid, Mass m, double t_max, double eps_tail) {
  TimeQuadrature tq;
  double e_max = std::sqrt(grid.p_max * grid.p_max + m.value() * m.value());
  tq.dt = 0.1 / e_max;
  tq.t_max = std::ceil(t_max / (4.0 * tq.dt)) * 4.0 * tq.dt;
  tq.eps_tail = eps_tail;
  return tq;
}

double ball_transform(double k, double R) {
  double x = k * R;
  if (x < 1e-2) {
    double x2 = x * x;
    return 4.0 * kPi * R * R * R * (1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0);
  }
  return 4.0 * kPi * (std::sin(x) - x * std::cos(x)) / (k * k * k);
}

SpinorField free_evolve(const SpinorField& f, double t) {
  const auto& grid = f.grid();
  const double m = f.mass().value();
  SpinorField r(grid, f.mass(), f.sector());
  parallel::for_range(grid.size(), [&](std::size_t idx) {
    Vec3 p = grid.momentum(idx);
    double e = dispersion(p, m);
    Spinor v = f.at(idx);
    if (e == 0.0) {
      r.set(idx, v);
      return;
    }
    // e^{-i h0 t} = cos(Et) - i sin(Et) h0 / E
    r.set(idx, std::cos(e * t) * v - cplx(0.0, std::sin(e * t) / e) * apply_h0(p, m, v));
  });
  return r;
}

namespace {

bool in_band(const MomentumGrid& grid, std::size_t idx) {
  auto [i, j, k] = grid.unravel(idx);
  int n = grid.n;
  auto edge = [n](int a) { return a < 3 || a >= n - 3; };
  return edge(i) || edge(j) || edge(k);
}

double band_mass(const PositionField& psi) {
  const auto& grid = psi.grid;
  double s = parallel::reduce_sum<double>(grid.size(), [&](std::size_t idx) {
    if (!in_band(grid, idx)) return 0.0;
    double a = 0.0;
    for (int c = 0; c < 4; ++c) a += std::norm(psi.comp[c][idx]);
    return a;
  });
  return s * std::pow(grid.dx(), 3);
}

// (-1)^{m1+m2+m3} for DFT output index q, with |k_q| for the signed frequency.
struct DualGrid {
  std::vector<double> kabs;
  std::vector<signed char> sign;
};

DualGrid dual_grid(const MomentumGrid& grid) {
  const int n = grid.n;
  const double dk = 2.0 * kPi / grid.box();
  DualGrid d;
  d.kabs.resize(grid.size());
  d.sign.resize(grid.size());
  parallel::for_range(grid.size(), [&](std::size_t idx) {
    auto q = grid.unravel(idx);
    double k2 = 0.0;
    int msum = 0;
    for (int a = 0; a < 3; ++a) {
      int m = q[a] < n / 2 ? q[a] : q[a] - n;
      k2 += (m * dk) * (m * dk);
      msum += m;
    }
    d.kabs[idx] = std::sqrt(k2);
    d.sign[idx] = (msum % 2 == 0) ? 1 : -1;
  });
  return d;
}

// Exact ball integrals of the trigonometric interpolant of `density` (values
// on the position grid) for each radius.
std::vector<cplx> spectral_ball_integrals(const MomentumGrid& grid, ComplexBuffer density,
                                          const std::vector<double>& radii, const DualGrid& dual) {
  fft3_inplace(grid.n, -1, density.data());
  const double inv = 1.0 / static_cast<double>(grid.size());
  std::vector<cplx> out;
  for (double R : radii) {
    cplx s = parallel::reduce_sum<cplx>(grid.size(), [&](std::size_t q) {
      return density[q] * (dual.sign[q] * ball_transform(dual.kabs[q], R));
    });
    out.push_back(s * inv);
  }
  return out;
}

struct Evolving {
  bool pos = false, neg = false;
  // sector parts with the input checkerboard of the momentum-to-position map
  // already applied
  std::array<ComplexBuffer, 4> a_pos, a_neg;
  PositionField x;
  double mass = 0.0;
};

void checkerboard_signs(const MomentumGrid& grid, ComplexBuffer& v) {
  parallel::for_range(grid.size(), [&](std::size_t idx) {
    auto [i, j, k] = grid.unravel(idx);
    if ((i + j + k) % 2 != 0) v[idx] = -v[idx];
  });
}

Evolving prepare(const SpinorField& f) {
  Evolving e;
  e.x.grid = f.grid();
  e.mass = f.norm2();
  if (f.sector() == Sector::Positive) {
    e.pos = true;
    for (int c = 0; c < 4; ++c) e.a_pos[c] = f.component(c);
  } else if (f.sector() == Sector::Negative) {
    e.neg = true;
    for (int c = 0; c < 4; ++c) e.a_neg[c] = f.component(c);
  } else {
    e.pos = e.neg = true;
    SpinorField p = project_energy(f, 1), q = project_energy(f, -1);
    for (int c = 0; c < 4; ++c) {
      e.a_pos[c] = p.component(c);
      e.a_neg[c] = q.component(c);
    }
  }
  for (int c = 0; c < 4; ++c) {
    if (e.pos) checkerboard_signs(f.grid(), e.a_pos[c]);
    if (e.neg) checkerboard_signs(f.grid(), e.a_neg[c]);
  }
  for (auto& c : e.x.comp) c.assign(f.grid().size(), cplx(0.0, 0.0));
  return e;
}

// Position samples up to a unimodular factor per point that is the same for
// every field and component, so densities only need the squared scale.
void realize(Evolving& e, const ComplexBuffer& theta) {
  const auto& grid = e.x.grid;
  parallel::for_blocks(4, [&](std::size_t c) {
    auto& out = e.x.comp[c];
    const std::size_t n = out.size();
    if (e.pos && e.neg) {
      for (std::size_t i = 0; i < n; ++i) out[i] = theta[i] * e.a_pos[c][i] + std::conj(theta[i]) * e.a_neg[c][i];
    } else if (e.pos) {
      for (std::size_t i = 0; i < n; ++i) out[i] = theta[i] * e.a_pos[c][i];
    } else {
      for (std::size_t i = 0; i < n; ++i) out[i] = std::conj(theta[i]) * e.a_neg[c][i];
    }
    fft3_inplace(grid.n, +1, out.data());
  });
}

inline cplx density_at(const PositionField& a, const PositionField& b, std::size_t i) {
  return std::conj(a.comp[0][i]) * b.comp[0][i] + std::conj(a.comp[1][i]) * b.comp[1][i] +
         std::conj(a.comp[2][i]) * b.comp[2][i] + std::conj(a.comp[3][i]) * b.comp[3][i];
}

struct StepTally {
  std::vector<cplx> bins;
  double band_f = 0.0, band_g = 0.0;
};

// Simpson weights for sample k when the rule ends at `last`; `coarse` uses
// only even samples with step 2 dt.
double simpson_weight(long k, bool last, bool coarse) {
  if (coarse) {
    if (k % 2 != 0) return 0.0;
    if (k == 0 || last) return 1.0;
    return (k % 4 == 2) ? 4.0 : 2.0;
  }
  if (k == 0 || last) return 1.0;
  return (k % 2 == 1) ? 4.0 : 2.0;
}

}  // namespace

cplx ball_overlap(const SpinorField& f_t, const SpinorField& g_t, const BallCutoff& cutoff, BallQuadrature mode) {
  check_same_grid(f_t, g_t);
  const auto& grid = f_t.grid();
  PositionField a = to_position(f_t);
  PositionField b = to_position(g_t);
  double mf = f_t.norm2(), mg = g_t.norm2();
  if (band_mass(a) > 1e-10 * mf || band_mass(b) > 1e-10 * mg)
    throw Error(ErrorKind::WrapAround, "field mass within 3 dx of the box boundary exceeds 1e-10");
  const double dv = std::pow(grid.dx(), 3);
  if (mode == BallQuadrature::Lattice) {
    const double R2 = cutoff.R * cutoff.R;
    cplx s = parallel::reduce_sum<cplx>(grid.size(), [&](std::size_t idx) {
      Vec3 x = grid.position(idx);
      return dot3(x, x) <= R2 ? density_at(a, b, idx) : cplx(0.0, 0.0);
    });
    return s * dv;
  }
  ComplexBuffer d(grid.size());
  parallel::for_range(grid.size(), [&](std::size_t i) { d[i] = density_at(a, b, i); });
  return spectral_ball_integrals(grid, std::move(d), {cutoff.R}, dual_grid(grid))[0];
}

SojournCurve sojourn_curve(const SpinorField& f, const SpinorField& g, const std::vector<double>& R_list,
                           const TimeQuadrature& tq, const SojournOptions& opt) {
  check_same_grid(f, g);
  const auto& grid = f.grid();
  SojournCurve curve;
  curve.n = grid.n;
  curve.p_max = grid.p_max;
  curve.mass = f.mass().value();
  curve.dt = tq.dt;
  curve.direction = opt.direction;
  curve.ball_quadrature = ball_quadrature_name(opt.ball);
  curve.packet = opt.packet_label;
  if (R_list.empty()) return curve;
  for (std::size_t j = 0; j < R_list.size(); ++j) {
    if (!(R_list[j] > 0.0)) throw Error(ErrorKind::InvalidArgument, "radii must be positive");
    if (j > 0 && !(R_list[j] > R_list[j - 1])) throw Error(ErrorKind::InvalidArgument, "radii must be strictly increasing");
  }
  if (!(tq.dt > 0.0) || !(tq.t_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "time quadrature needs dt, t_max > 0");
  if (opt.direction != 1 && opt.direction != -1) throw Error(ErrorKind::InvalidArgument, "direction must be +1 or -1");
  if (!(opt.wrap_threshold > 0.0 && opt.wrap_threshold < 1.0))
    throw Error(ErrorKind::InvalidArgument, "wrap_threshold must lie in (0, 1)");

  const double R_max = R_list.back();
  // Once mass reaches the boundary band, its periodic image needs at least
  // this long (group speeds are below 1) to reach the largest ball.
  const double image_delay = 0.5 * grid.box() - R_max - 3.0 * grid.dx();
  if (image_delay <= 0.0) throw Error(ErrorKind::WrapAround, "largest ball does not fit inside the position box");

  const bool same = (&f == &g);
  const std::size_t N = grid.size();
  const std::size_t nR = R_list.size();
  // squared modulus of the output constant dropped by realize()
  const double dens_scale = std::pow(2.0 * kPi, -3.0) * std::pow(grid.dp(), 6);
  const double dv = std::pow(grid.dx(), 3) * dens_scale;
  const double m = f.mass().value();

  std::vector<short> bin(N);
  std::vector<unsigned char> band(N);
  parallel::for_range(N, [&](std::size_t idx) {
    Vec3 x = grid.position(idx);
    double r = norm3(x);
    auto it = std::lower_bound(R_list.begin(), R_list.end(), r);
    bin[idx] = it == R_list.end() ? -1 : static_cast<short>(it - R_list.begin());
    band[idx] = in_band(grid, idx) ? 1 : 0;
  });

  ComplexBuffer step_phase(N), theta(N);
  std::vector<double> energy(N);
  parallel::for_range(N, [&](std::size_t idx) {
    energy[idx] = dispersion(grid.momentum(idx), m);
    double a = -opt.direction * energy[idx] * tq.dt;
    step_phase[idx] = cplx(std::cos(a), std::sin(a));
    theta[idx] = 1.0;
  });

  Evolving ef = prepare(f);
  std::optional<Evolving> eg_store;
  if (!same) eg_store = prepare(g);
  Evolving& eg = same ? ef : *eg_store;

  const bool spectral = opt.ball == BallQuadrature::Spectral;
  ComplexBuffer tau_fine, tau_coarse;
  if (spectral) {
    tau_fine.assign(N, cplx(0.0, 0.0));
    tau_coarse.assign(N, cplx(0.0, 0.0));
  }
  std::vector<cplx> lat_fine(nR, 0.0), lat_coarse(nR, 0.0);
  std::vector<std::deque<double>> history(nR);

  const std::size_t nb = parallel::block_count(N);
  std::vector<StepTally> tally(nb);
  const double quiet_level = tq.eps_tail * tq.dt;
  int quiet = 0;
  std::optional<double> t_wrap;
  std::vector<cplx> y(nR);
  long k = 0;
  double t = 0.0;
  for (;; ++k) {
    t = k * tq.dt;
    if (k > 0) {
      if (k % 64 == 0) {
        parallel::for_range(N, [&](std::size_t i) {
          double a = -opt.direction * energy[i] * t;
          theta[i] = cplx(std::cos(a), std::sin(a));
        });
      } else {
        parallel::for_range(N, [&](std::size_t i) { theta[i] *= step_phase[i]; });
      }
    }
    realize(ef, theta);
    if (!same) realize(eg, theta);

    // provisional Simpson weights; the final sample is corrected below
    const double pf = simpson_weight(k, false, false), pc = simpson_weight(k, false, true);
    parallel::for_blocks(nb, [&](std::size_t b) {
      StepTally& st = tally[b];
      st.bins.assign(nR, cplx(0.0, 0.0));
      st.band_f = st.band_g = 0.0;
      std::size_t lo = b * parallel::kBlock, hi = std::min(N, lo + parallel::kBlock);
      for (std::size_t i = lo; i < hi; ++i) {
        cplx d = density_at(ef.x, eg.x, i);
        if (bin[i] >= 0) st.bins[bin[i]] += d;
        if (spectral) {
          tau_fine[i] += pf * d;
          if (pc != 0.0) tau_coarse[i] += pc * d;
        }
        if (band[i]) {
          for (int c = 0; c < 4; ++c) {
            st.band_f += std::norm(ef.x.comp[c][i]);
            if (!same) st.band_g += std::norm(eg.x.comp[c][i]);
          }
        }
      }
    });
    std::size_t len = nb;
    while (len > 1) {
      std::size_t half = (len + 1) / 2;
      for (std::size_t i = 0; i + half < len; ++i) {
        for (std::size_t j = 0; j < nR; ++j) tally[i].bins[j] += tally[i + half].bins[j];
        tally[i].band_f += tally[i + half].band_f;
        tally[i].band_g += tally[i + half].band_g;
      }
      len = half;
    }
    cplx acc = 0.0;
    double ymax = 0.0;
    for (std::size_t j = 0; j < nR; ++j) {
      acc += tally[0].bins[j];
      y[j] = acc * dv;
      ymax = std::max(ymax, std::abs(y[j]));
      history[j].push_back(std::abs(y[j]));
      if (history[j].size() > 11) history[j].pop_front();
    }

    double bf = tally[0].band_f * dv, bg = (same ? tally[0].band_f : tally[0].band_g) * dv;
    if (!t_wrap && (bf > opt.wrap_threshold * ef.mass || bg > opt.wrap_threshold * eg.mass)) t_wrap = t;
    if (t_wrap && t > *t_wrap + image_delay)
      throw Error(ErrorKind::WrapAround, "periodic images would reach the ball before the tail criterion was met (t = " +
                                             std::to_string(t) + ")");

    quiet = ymax < quiet_level ? quiet + 1 : 0;
    bool last = k > 0 && k % 4 == 0 && quiet >= 10 && t >= tq.t_min;
    if (!last && t >= tq.t_max)
      throw Error(ErrorKind::HorizonExceeded, "tail criterion unmet at t_max = " + std::to_string(tq.t_max));

    double wf = simpson_weight(k, last, false), wc = simpson_weight(k, last, true);
    for (std::size_t j = 0; j < nR; ++j) {
      lat_fine[j] += wf * y[j];
      lat_coarse[j] += wc * y[j];
    }
    if (spectral && last) {
      parallel::for_range(N, [&](std::size_t i) {
        cplx d = density_at(ef.x, eg.x, i);
        tau_fine[i] += (wf - pf) * d;
        tau_coarse[i] += (wc - pc) * d;
      });
    }
    if (last) break;
  }
  curve.t_stop = t;

  std::vector<cplx> fine(nR), coarse(nR);
  if (spectral) {
    DualGrid dual = dual_grid(grid);
    fine = spectral_ball_integrals(grid, std::move(tau_fine), R_list, dual);
    coarse = spectral_ball_integrals(grid, std::move(tau_coarse), R_list, dual);
    for (std::size_t j = 0; j < nR; ++j) {
      fine[j] *= dens_scale;
      coarse[j] *= dens_scale;
    }
  } else {
    fine = lat_fine;
    coarse = lat_coarse;
  }
  for (std::size_t j = 0; j < nR; ++j) {
    SojournSample s;
    s.R = R_list[j];
    cplx If = fine[j] * (tq.dt / 3.0);
    cplx Ic = coarse[j] * (2.0 * tq.dt / 3.0);
    s.I = If;
    s.simpson_err = std::abs(If - Ic) / 15.0;
    const auto& h = history[j];
    double decay = t;
    if (h.size() == 11 && h.back() > 0.0 && h.front() > h.back())
      decay = std::min(t, 10.0 * tq.dt / std::log(h.front() / h.back()));
    s.tail_err = h.back() * decay;
    s.err = s.simpson_err + s.tail_err;
    curve.samples.push_back(s);
  }
  return curve;
}

SojournValue compute_I(const SpinorField& f, const SpinorField& g, double R, const TimeQuadrature& tq,
                       const SojournOptions& opt) {
  SojournCurve c = sojourn_curve(f, g, {R}, tq, opt);
  return {c.samples[0].I, c.samples[0].err};
}

TwoSided two_sided_sojourn(const SpinorField& f, double R, const TimeQuadrature& tq, const SojournOptions& opt) {
  SojournOptions fwd = opt, bwd = opt;
  fwd.direction = 1;
  bwd.direction = -1;
  SojournValue a = compute_I(f, f, R, tq, fwd);
  SojournValue b = compute_I(f, f, R, tq, bwd);
  TwoSided r;
  r.forward = a.value.real();
  r.backward = b.value.real();
  r.total = r.forward + r.backward;
  r.err = a.err + b.err;
  return r;
}

Vec3 position_centroid(const SpinorField& f) {
  PositionField psi = to_position(f);
  const auto& grid = f.grid();
  struct Acc {
    double w = 0, x = 0, y = 0, z = 0;
    Acc& operator+=(const Acc& o) {
      w += o.w;
      x += o.x;
      y += o.y;
      z += o.z;
      return *this;
    }
    Acc operator+(const Acc& o) const {
      Acc r = *this;
      r += o;
      return r;
    }
  };
  Acc s = parallel::reduce_sum<Acc>(grid.size(), [&](std::size_t idx) {
    double rho = 0.0;
    for (int c = 0; c < 4; ++c) rho += std::norm(psi.comp[c][idx]);
    Vec3 x = grid.position(idx);
    return Acc{rho, rho * x[0], rho * x[1], rho * x[2]};
  });
  return {s.x / s.w, s.y / s.w, s.z / s.w};
}

void write_curve_csv(const std::string& path, const SojournCurve& curve) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw Error(ErrorKind::Io, "cannot open " + path);
  std::fprintf(fp, "R,re_I,im_I,err\n");
  for (const auto& s : curve.samples)
    std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g\n", s.R, s.I.real(), s.I.imag(), s.err);
  if (std::fclose(fp) != 0) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace sojourn
