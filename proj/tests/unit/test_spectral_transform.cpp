#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include "doctest.h"
#include "sojourn/spectral_transform.hpp"

using namespace sojourn;

namespace {

PacketSpec packet(Vec3 c, double w, int sign = 1) {
  PacketSpec p;
  p.center = c;
  p.width = w;
  p.sign = sign;
  p.seed = Spinor(cplx(1.0, 0.0), cplx(0.3, 0.4), cplx(0.0, 0.8), cplx(-0.5, 0.2));
  return p;
}

std::optional<ErrorKind> kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("sphere rule integrates low-degree polynomials") {
  auto sq = make_sphere_quadrature(6, 12);
  CHECK(sq->size() == 72u);
  CHECK(sq->exact_degree() == 11);
  double w = 0.0, x2 = 0.0, z4 = 0.0, xyz = 0.0, x2y2 = 0.0;
  for (std::size_t k = 0; k < sq->size(); ++k) {
    const Vec3& n = sq->nodes[k];
    CHECK(sq->weights[k] > 0.0);
    CHECK(norm3(n) == doctest::Approx(1.0).epsilon(1e-14));
    w += sq->weights[k];
    x2 += sq->weights[k] * n[0] * n[0];
    z4 += sq->weights[k] * std::pow(n[2], 4);
    xyz += sq->weights[k] * n[0] * n[1] * n[2];
    x2y2 += sq->weights[k] * n[0] * n[0] * n[1] * n[1];
  }
  CHECK(w == doctest::Approx(4.0 * kPi).epsilon(1e-14));
  CHECK(x2 == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-14));
  CHECK(z4 == doctest::Approx(4.0 * kPi / 5.0).epsilon(1e-14));
  CHECK(std::abs(xyz) <= 1e-14);
  CHECK(x2y2 == doctest::Approx(4.0 * kPi / 15.0).epsilon(1e-14));
  CHECK_THROWS_AS(make_sphere_quadrature(0, 4), Error);
}

TEST_CASE("energy rule: positive weights, exact on polynomials, gap rejected") {
  Mass m(1.0);
  EnergyQuadrature eq = make_energy_quadrature({{-4.0, -1.5}, {1.2, 3.0}}, 3, 5, m);
  CHECK(eq.size() == 30u);
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < eq.size(); ++i) {
    CHECK(std::abs(eq.energies[i]) > 1.0);
    CHECK(eq.weights[i] > 0.0);
    (eq.energies[i] < 0 ? lo : hi) += eq.weights[i] * std::pow(eq.energies[i], 3);
  }
  CHECK(lo == doctest::Approx((std::pow(1.5, 4) - std::pow(4.0, 4)) / 4.0).epsilon(1e-13));
  CHECK(hi == doctest::Approx((std::pow(3.0, 4) - std::pow(1.2, 4)) / 4.0).epsilon(1e-13));
  CHECK(kind_of([&] { make_energy_quadrature({{0.5, 2.0}}, 2, 4, m); }) == ErrorKind::EnergyGap);
  CHECK(kind_of([&] { make_energy_quadrature({{2.0, 2.0}}, 2, 4, m); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("shell factors match direct evaluation") {
  const double E = std::sqrt(2.0);
  CHECK(shell_speed_factor(E, 1.0) == doctest::Approx(std::pow(E * E * (E * E - 1.0), 0.25)).epsilon(1e-15));
  CHECK(shell_speed_factor(E, 1.0) == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-15));
  CHECK(shell_radius(E, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(shell_radius(-2.5, 0.7) == doctest::Approx(std::sqrt(2.5 * 2.5 - 0.49)).epsilon(1e-15));
  CHECK(shell_speed_factor(-2.5, 0.0) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("restriction: opposite sector vanishes, fiber invariant, errors") {
  MomentumGrid g = make_grid(32, 6.0);
  Mass m(1.0);
  auto sq = make_sphere_quadrature(8, 16);
  SpinorField f = gaussian_packet(g, m, packet({2.25, 1.875, -1.5}, 0.5));
  const double e0 = std::hypot(3.29, 1.0);
  EnergyShellVector neg = gamma0_restrict(f, -e0, sq);
  CHECK(neg.values.cwiseAbs().maxCoeff() <= 1e-13);
  EnergyShellVector pos = gamma0_restrict(f, e0, sq);
  CHECK(pos.norm2() > 1e-3);
  const double nu = shell_radius(e0, 1.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < sq->size(); ++k) {
    Vec3 q{nu * sq->nodes[k][0], nu * sq->nodes[k][1], nu * sq->nodes[k][2]};
    worst = std::max(worst, (apply_projector(q, 1.0, 1, pos.node(k)) - pos.node(k)).norm());
  }
  CHECK(worst <= 1e-10 * std::sqrt(pos.norm2()));
  CHECK(kind_of([&] { gamma0_restrict(f, 0.5, sq); }) == ErrorKind::EnergyGap);
  CHECK(kind_of([&] { gamma0_restrict(f, 7.0, sq); }) == ErrorKind::OutOfBand);
}

TEST_CASE("restriction of a packet matches its closed form at shell nodes") {
  // off-grid samples come from the trigonometric interpolant, which reproduces
  // a packet resolved in both spaces to round-off
  MomentumGrid g = make_grid(64, 6.4);
  Mass m(1.0);
  PacketSpec spec = packet({2.0, 2.0, 1.6}, 0.5);
  SpinorField f = gaussian_packet(g, m, spec);
  auto sq = make_sphere_quadrature(6, 12);
  const double E = std::hypot(3.2, 1.0);
  EnergyShellVector h = gamma0_restrict(f, E, sq);
  // normalisation of the grid packet from its samples
  double n2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Vec3 p = g.momentum(i);
    Vec3 d{p[0] - 2.0, p[1] - 2.0, p[2] - 1.6};
    Spinor v = std::exp(-dot3(d, d) / (2.0 * 0.25)) * apply_projector(p, 1.0, 1, spec.seed);
    n2 += v.squaredNorm();
  }
  const double scale = 1.0 / std::sqrt(n2 * std::pow(g.dp(), 3));
  const double nu = shell_radius(E, 1.0), ups = shell_speed_factor(E, 1.0);
  double worst = 0.0, peak = 0.0;
  for (std::size_t k = 0; k < sq->size(); ++k) {
    Vec3 q{nu * sq->nodes[k][0], nu * sq->nodes[k][1], nu * sq->nodes[k][2]};
    Vec3 d{q[0] - 2.0, q[1] - 2.0, q[2] - 1.6};
    Spinor expect = ups * scale * std::exp(-dot3(d, d) / (2.0 * 0.25)) * apply_projector(q, 1.0, 1, spec.seed);
    worst = std::max(worst, (h.node(k) - expect).norm());
    peak = std::max(peak, expect.norm());
  }
  CHECK(peak > 0.0);
  CHECK(worst <= 1e-9 * peak);
}

TEST_CASE("adjoint: inner-product identity, zero vector, sector") {
  MomentumGrid g = make_grid(32, 6.0);
  Mass m(1.0);
  auto sq = make_sphere_quadrature(8, 16);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  const double E = 3.2;
  EnergyShellVector h;
  h.energy = E;
  h.sq = sq;
  h.values.resize(4 * static_cast<Eigen::Index>(sq->size()));
  const double nu = shell_radius(E, 1.0);
  for (std::size_t k = 0; k < sq->size(); ++k) {
    Vec3 q{nu * sq->nodes[k][0], nu * sq->nodes[k][1], nu * sq->nodes[k][2]};
    Spinor v(cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng)));
    h.values.segment<4>(4 * static_cast<Eigen::Index>(k)) = apply_projector(q, 1.0, 1, v);
  }
  for (Vec3 c : {Vec3{2.25, 1.875, -1.5}, Vec3{-1.5, 2.25, 2.25}}) {
    SpinorField f = gaussian_packet(g, m, packet(c, 0.5));
    cplx lhs = shell_inner(gamma0_restrict(f, E, sq), h);
    cplx rhs = inner_product(f, gamma0_adjoint(h, g, m));
    CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max(std::abs(lhs), 1e-12));
  }
  SpinorField a = gamma0_adjoint(h, g, m);
  CHECK(a.sector() == Sector::Positive);
  double leak = 0.0, peak = 0.0;
  SpinorField neg = project_energy(a, -1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    leak = std::max(leak, neg.at(i).norm());
    peak = std::max(peak, a.at(i).norm());
  }
  CHECK(leak <= 1e-13 * peak);
  EnergyShellVector z = h;
  z.values.setZero();
  SpinorField az = gamma0_adjoint(z, g, m);
  CHECK(az.norm2() == 0.0);
}

TEST_CASE("Parseval and diagonalization on a resolved packet") {
  MomentumGrid g = make_grid(64, 6.4);
  Mass m(1.0);
  PacketSpec spec = packet({2.0, -2.0, 1.2}, 0.5);
  SpinorField f = gaussian_packet(g, m, spec);
  auto sq = make_sphere_quadrature(32, 64);
  EnergyQuadrature eq = make_energy_quadrature({energy_window_for_packet(spec, m)}, 6, 8, m);
  ParsevalResult r = parseval_check(f, eq, sq);
  CHECK(r.window_mass_fraction >= 0.9999);
  CHECK(r.defect <= 1e-6 * r.norm2);
  CHECK(diagonalization_residual(f, eq, sq) <= 1e-8 * std::sqrt(f.norm2()));
  SpinorField z(g, m);
  CHECK(parseval_defect(z, eq, sq) == 0.0);
}
