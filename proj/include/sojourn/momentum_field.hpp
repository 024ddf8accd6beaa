#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>

#include "sojourn/dirac_algebra.hpp"
#include "sojourn/fft.hpp"

namespace sojourn {

struct MomentumGrid {
  int n = 0;
  double p_max = 0.0;

  double dp() const { return 2.0 * p_max / n; }
  double dx() const { return kPi / p_max; }
  double box() const { return n * dx(); }
  double p(int j) const { return -p_max + j * dp(); }
  double x(int k) const { return -0.5 * box() + k * dx(); }
  std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n + j) * n + k;
  }
  std::array<int, 3> unravel(std::size_t idx) const {
    int k = static_cast<int>(idx % n);
    int j = static_cast<int>((idx / n) % n);
    int i = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
    return {i, j, k};
  }
  Vec3 momentum(std::size_t idx) const {
    auto [i, j, k] = unravel(idx);
    return {p(i), p(j), p(k)};
  }
  Vec3 position(std::size_t idx) const {
    auto [i, j, k] = unravel(idx);
    return {x(i), x(j), x(k)};
  }
  bool operator==(const MomentumGrid& o) const { return n == o.n && p_max == o.p_max; }
};

MomentumGrid make_grid(int n, double p_max);

enum class Sector { Positive, Negative, Mixed };
const char* sector_name(Sector s);
Sector sector_from_sign(int sign);

// f(p) in C^4 on the grid, stored one aligned buffer per spinor component.
class SpinorField {
 public:
  SpinorField() = default;
  SpinorField(const MomentumGrid& grid, Mass mass, Sector tag = Sector::Mixed);

  const MomentumGrid& grid() const { return grid_; }
  Mass mass() const { return mass_; }
  Sector sector() const { return tag_; }
  void set_sector(Sector s) { tag_ = s; }

  const ComplexBuffer& component(int c) const { return comp_[c]; }
  ComplexBuffer& component(int c) { return comp_[c]; }

  Spinor at(std::size_t idx) const {
    return Spinor(comp_[0][idx], comp_[1][idx], comp_[2][idx], comp_[3][idx]);
  }
  void set(std::size_t idx, const Spinor& v) {
    for (int c = 0; c < 4; ++c) comp_[c][idx] = v[c];
  }

  double norm2() const;

 private:
  MomentumGrid grid_;
  Mass mass_;
  Sector tag_ = Sector::Mixed;
  std::array<ComplexBuffer, 4> comp_;
};

SpinorField operator+(const SpinorField& a, const SpinorField& b);
SpinorField operator-(const SpinorField& a, const SpinorField& b);
SpinorField operator*(cplx s, const SpinorField& a);

struct PacketSpec {
  Vec3 center{0.0, 0.0, 0.0};
  double width = 0.5;
  Spinor seed = Spinor(1.0, 0.0, 0.0, 0.0);
  int sign = 1;
  bool normalize = true;
};

SpinorField gaussian_packet(const MomentumGrid& grid, Mass mass, const PacketSpec& spec);
SpinorField project_energy(const SpinorField& f, int sign);
cplx inner_product(const SpinorField& f, const SpinorField& g);

struct Gradient {
  std::array<SpinorField, 3> d;
  // max |f| on the outermost grid shell relative to max |f|
  double boundary_level = 0.0;
};

// d f / d p_k through the dual grid. Emits a boundary-leakage warning when the
// field has not decayed below 1e-12 at the momentum-box faces.
Gradient spectral_gradient(const SpinorField& f);

// (i/2)(2 p.grad / |p|^2 + 1/|p|^2) f.
SpinorField apply_A0(const SpinorField& f);

// Pointwise scalar multiplier s(p) applied to every component.
SpinorField apply_scalar(const SpinorField& f, const std::function<cplx(const Vec3&)>& s);
// h0(p) f(p).
SpinorField apply_h0_field(const SpinorField& f);

double boundary_level(const SpinorField& f);
// Throws origin-support when |f(p)| > 1e-6 max|f| somewhere with |p| < 2 dp.
void check_origin_support(const SpinorField& f, const char* who);
void check_same_grid(const SpinorField& f, const SpinorField& g);

// Position-space samples psi(x_k) on the dual grid.
struct PositionField {
  MomentumGrid grid;
  std::array<ComplexBuffer, 4> comp;
};

PositionField to_position(const SpinorField& f);
SpinorField from_position(const PositionField& psi, Mass mass, Sector tag);

// Component-wise transform helpers for callers that manage their own buffers.
// Momentum samples -> position samples, in place.
void momentum_to_position_inplace(const MomentumGrid& grid, cplx* data);
void position_to_momentum_inplace(const MomentumGrid& grid, cplx* data);

// Rotation of the grid data by a quarter turn about `axis` (0,1,2), using the
// periodic identification p_{-j} = p_{n-j}. Spinor components are untouched.
SpinorField rotate_quarter(const SpinorField& f, int axis);

// Binary snapshot: magic, n, p_max, m, sector, then n^3 x 4 complex doubles in
// row-major grid order with the spinor index fastest.
void write_field_binary(const std::string& path, const SpinorField& f);
SpinorField read_field_binary(const std::string& path);
// 1D slice along `axis` through the grid point `through`; columns p, then
// re/im of each component.
void write_field_csv_slice(const std::string& path, const SpinorField& f, int axis,
                           const std::array<int, 3>& through);

}  // namespace sojourn
