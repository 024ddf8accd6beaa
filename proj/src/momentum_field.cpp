#include "sojourn/momentum_field.hpp"

#include <algorithm>

#include "sojourn/parallel.hpp"

namespace sojourn {

MomentumGrid make_grid(int n, double p_max) {
  if (n < 8 || n % 2 != 0)
    throw Error(ErrorKind::InvalidSize, "grid size n must be even and >= 8, got " + std::to_string(n));
  if (!(p_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "p_max must be positive");
  return MomentumGrid{n, p_max};
}

const char* sector_name(Sector s) {
  switch (s) {
    case Sector::Positive: return "positive";
    case Sector::Negative: return "negative";
    case Sector::Mixed: return "mixed";
  }
  return "mixed";
}

Sector sector_from_sign(int sign) {
  if (sign == 1) return Sector::Positive;
  if (sign == -1) return Sector::Negative;
  throw Error(ErrorKind::InvalidArgument, "sign must be +1 or -1");
}

SpinorField::SpinorField(const MomentumGrid& grid, Mass mass, Sector tag)
    : grid_(grid), mass_(mass), tag_(tag) {
  for (auto& c : comp_) c.assign(grid.size(), cplx(0.0, 0.0));
}

double SpinorField::norm2() const {
  double dv = std::pow(grid_.dp(), 3);
  double s = parallel::reduce_sum<double>(grid_.size(), [&](std::size_t i) {
    return std::norm(comp_[0][i]) + std::norm(comp_[1][i]) + std::norm(comp_[2][i]) +
           std::norm(comp_[3][i]);
  });
  return s * dv;
}

void check_same_grid(const SpinorField& f, const SpinorField& g) {
  if (!(f.grid() == g.grid()) || !(f.mass() == g.mass()))
    throw Error(ErrorKind::GridMismatch, "fields live on different grids or masses");
}

namespace {

Sector combine_tags(Sector a, Sector b) { return a == b ? a : Sector::Mixed; }

template <class Op>
SpinorField combine(const SpinorField& a, const SpinorField& b, Op op) {
  check_same_grid(a, b);
  SpinorField r(a.grid(), a.mass(), combine_tags(a.sector(), b.sector()));
  for (int c = 0; c < 4; ++c) {
    const auto& x = a.component(c);
    const auto& y = b.component(c);
    auto& z = r.component(c);
    parallel::for_range(x.size(), [&](std::size_t i) { z[i] = op(x[i], y[i]); });
  }
  return r;
}

}  // namespace

SpinorField operator+(const SpinorField& a, const SpinorField& b) {
  return combine(a, b, [](cplx x, cplx y) { return x + y; });
}

SpinorField operator-(const SpinorField& a, const SpinorField& b) {
  return combine(a, b, [](cplx x, cplx y) { return x - y; });
}

SpinorField operator*(cplx s, const SpinorField& a) {
  SpinorField r(a.grid(), a.mass(), a.sector());
  for (int c = 0; c < 4; ++c) {
    const auto& x = a.component(c);
    auto& z = r.component(c);
    parallel::for_range(x.size(), [&](std::size_t i) { z[i] = s * x[i]; });
  }
  return r;
}

SpinorField gaussian_packet(const MomentumGrid& grid, Mass mass, const PacketSpec& spec) {
  if (!(spec.width > 0.0)) throw Error(ErrorKind::InvalidArgument, "packet width must be positive");
  if (spec.sign != 1 && spec.sign != -1) throw Error(ErrorKind::InvalidArgument, "packet sign must be +1 or -1");
  double p0 = norm3(spec.center);
  if (p0 < 4.0 * spec.width + 3.0 * grid.dp())
    throw Error(ErrorKind::InvalidArgument,
                "packet center too close to p=0: need |p0| >= 4 sigma + 3 dp");
  if (spec.seed.norm() == 0.0) throw Error(ErrorKind::ZeroField, "spinor seed is zero");

  const double m = mass.value();
  const double inv2s2 = 1.0 / (2.0 * spec.width * spec.width);
  SpinorField f(grid, mass, sector_from_sign(spec.sign));
  parallel::for_range(grid.size(), [&](std::size_t idx) {
    Vec3 p = grid.momentum(idx);
    Vec3 d{p[0] - spec.center[0], p[1] - spec.center[1], p[2] - spec.center[2]};
    double env = std::exp(-dot3(d, d) * inv2s2);
    if (env < 1e-300) return;
    if (dispersion(p, m) == 0.0) {
      // massless projector is undefined at p=0; the envelope is negligible there
      // by the center-distance invariant, so the sample is dropped.
      return;
    }
    f.set(idx, env * apply_projector(p, m, spec.sign, spec.seed));
  });

  double n2 = f.norm2();
  double envelope_mass = std::pow(kPi * spec.width * spec.width, 1.5) * spec.seed.squaredNorm();
  if (!(n2 > 1e-30 * envelope_mass))
    throw Error(ErrorKind::ZeroField, "seed spinor is orthogonal to the requested energy sector");
  if (spec.normalize) {
    double s = 1.0 / std::sqrt(n2);
    for (int c = 0; c < 4; ++c)
      for (auto& v : f.component(c)) v *= s;
  }
  return f;
}

SpinorField project_energy(const SpinorField& f, int sign) {
  const double m = f.mass().value();
  const auto& grid = f.grid();
  SpinorField r(grid, f.mass(), sector_from_sign(sign));
  parallel::for_range(grid.size(), [&](std::size_t idx) {
    Vec3 p = grid.momentum(idx);
    Spinor v = f.at(idx);
    if (dispersion(p, m) == 0.0) {
      if (v.norm() != 0.0) throw Error(ErrorKind::DegenerateInput, "field nonzero at p=0 with m=0");
      return;
    }
    r.set(idx, apply_projector(p, m, sign, v));
  });
  return r;
}

cplx inner_product(const SpinorField& f, const SpinorField& g) {
  check_same_grid(f, g);
  const auto& a = f;
  const auto& b = g;
  cplx s = parallel::reduce_sum<cplx>(f.grid().size(), [&](std::size_t i) {
    return std::conj(a.component(0)[i]) * b.component(0)[i] +
           std::conj(a.component(1)[i]) * b.component(1)[i] +
           std::conj(a.component(2)[i]) * b.component(2)[i] +
           std::conj(a.component(3)[i]) * b.component(3)[i];
  });
  return s * std::pow(f.grid().dp(), 3);
}

namespace {

// data[i,j,k] *= scale * (-1)^(i+j+k)
void checkerboard(const MomentumGrid& grid, cplx* data, cplx scale) {
  const int n = grid.n;
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx s = ((i + j) % 2 == 0) ? scale : -scale;
      for (int k = 0; k < n; ++k, ++idx) {
        data[idx] *= s;
        s = -s;
      }
    }
}

double half_n_sign(int n) { return (n / 2) % 2 == 0 ? 1.0 : -1.0; }

}  // namespace

void momentum_to_position_inplace(const MomentumGrid& grid, cplx* data) {
  // psi(x_k) = (2pi)^{-3/2} dp^3 sum_j e^{i p_j x_k} f(p_j); the offsets of
  // both grids turn e^{i p_j x_k} into (-1)^{n/2} (-1)^{j+k} e^{2 pi i jk/n}.
  checkerboard(grid, data, 1.0);
  fft3_inplace(grid.n, +1, data);
  double c = std::pow(2.0 * kPi, -1.5) * std::pow(grid.dp(), 3) * half_n_sign(grid.n);
  checkerboard(grid, data, c);
}

void position_to_momentum_inplace(const MomentumGrid& grid, cplx* data) {
  checkerboard(grid, data, 1.0);
  fft3_inplace(grid.n, -1, data);
  double c = std::pow(2.0 * kPi, -1.5) * std::pow(grid.dx(), 3) * half_n_sign(grid.n);
  checkerboard(grid, data, c);
}

PositionField to_position(const SpinorField& f) {
  PositionField psi{f.grid(), {}};
  for (int c = 0; c < 4; ++c) psi.comp[c] = f.component(c);
  parallel::for_blocks(4, [&](std::size_t c) { momentum_to_position_inplace(f.grid(), psi.comp[c].data()); });
  return psi;
}

SpinorField from_position(const PositionField& psi, Mass mass, Sector tag) {
  SpinorField f(psi.grid, mass, tag);
  for (int c = 0; c < 4; ++c) f.component(c) = psi.comp[c];
  parallel::for_blocks(4, [&](std::size_t c) { position_to_momentum_inplace(psi.grid, f.component(c).data()); });
  return f;
}

double boundary_level(const SpinorField& f) {
  const auto& grid = f.grid();
  const int n = grid.n;
  double peak = 0.0, edge = 0.0;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    auto [i, j, k] = grid.unravel(idx);
    double a = f.at(idx).norm();
    peak = std::max(peak, a);
    bool face = i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1;
    if (face) edge = std::max(edge, a);
  }
  return peak > 0.0 ? edge / peak : 0.0;
}

Gradient spectral_gradient(const SpinorField& f) {
  const auto& grid = f.grid();
  Gradient out;
  out.boundary_level = boundary_level(f);
  if (out.boundary_level > 1e-12)
    emit_warning("boundary-leakage", "field does not decay below 1e-12 at the momentum-box faces (level " +
                                         std::to_string(out.boundary_level) + ")");
  PositionField psi = to_position(f);
  const int n = grid.n;
  for (int a = 0; a < 3; ++a) {
    PositionField xpsi{grid, {}};
    for (int c = 0; c < 4; ++c) {
      xpsi.comp[c] = psi.comp[c];
      auto& buf = xpsi.comp[c];
      // d/dp  <->  multiplication by -i x
      parallel::for_range(grid.size(), [&](std::size_t idx) {
        int ia = a == 0 ? static_cast<int>(idx / (static_cast<std::size_t>(n) * n))
                        : a == 1 ? static_cast<int>((idx / n) % n) : static_cast<int>(idx % n);
        buf[idx] *= cplx(0.0, -grid.x(ia));
      });
    }
    out.d[a] = from_position(xpsi, f.mass(), Sector::Mixed);
  }
  return out;
}

void check_origin_support(const SpinorField& f, const char* who) {
  const auto& grid = f.grid();
  const double r2 = std::pow(2.0 * grid.dp(), 2);
  double peak = 0.0, inner = 0.0;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    double a = f.at(idx).norm();
    peak = std::max(peak, a);
    Vec3 p = grid.momentum(idx);
    if (dot3(p, p) < r2) inner = std::max(inner, a);
  }
  if (peak > 0.0 && inner > 1e-6 * peak)
    throw Error(ErrorKind::OriginSupport,
                std::string(who) + ": field not negligible within 2 dp of p=0 (relative level " +
                    std::to_string(inner / peak) + ")");
}

SpinorField apply_A0(const SpinorField& f) {
  check_origin_support(f, "apply_A0");
  const auto& grid = f.grid();
  Gradient g = spectral_gradient(f);
  const double r2min = std::pow(2.0 * grid.dp(), 2);
  SpinorField r(grid, f.mass(), Sector::Mixed);
  parallel::for_range(grid.size(), [&](std::size_t idx) {
    Vec3 p = grid.momentum(idx);
    double p2 = dot3(p, p);
    if (p2 < r2min) return;
    Spinor pg = p[0] * g.d[0].at(idx) + p[1] * g.d[1].at(idx) + p[2] * g.d[2].at(idx);
    r.set(idx, cplx(0.0, 0.5) * (2.0 * pg + f.at(idx)) / p2);
  });
  return r;
}

SpinorField apply_scalar(const SpinorField& f, const std::function<cplx(const Vec3&)>& s) {
  const auto& grid = f.grid();
  SpinorField r(grid, f.mass(), f.sector());
  parallel::for_range(grid.size(), [&](std::size_t idx) {
    cplx v = s(grid.momentum(idx));
    for (int c = 0; c < 4; ++c) r.component(c)[idx] = v * f.component(c)[idx];
  });
  return r;
}

SpinorField apply_h0_field(const SpinorField& f) {
  const auto& grid = f.grid();
  const double m = f.mass().value();
  SpinorField r(grid, f.mass(), f.sector());
  parallel::for_range(grid.size(), [&](std::size_t idx) {
    r.set(idx, apply_h0(grid.momentum(idx), m, f.at(idx)));
  });
  return r;
}

SpinorField rotate_quarter(const SpinorField& f, int axis) {
  if (axis < 0 || axis > 2) throw Error(ErrorKind::InvalidArgument, "axis must be 0, 1 or 2");
  const auto& grid = f.grid();
  const int n = grid.n;
  auto neg = [n](int j) { return (n - j) % n; };
  SpinorField r(grid, f.mass(), f.sector());
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    auto [i, j, k] = grid.unravel(idx);
    // new(p) = old(R^{-1} p), R a +90 degree turn about `axis`
    std::array<int, 3> src{i, j, k};
    if (axis == 2) src = {j, neg(i), k};
    if (axis == 0) src = {i, k, neg(j)};
    if (axis == 1) src = {neg(k), j, i};
    r.set(idx, f.at(grid.index(src[0], src[1], src[2])));
  }
  return r;
}

}  // namespace sojourn
