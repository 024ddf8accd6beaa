#include <cmath>
#include <functional>

#include "doctest.h"
#include "sojourn/dirac_algebra.hpp"
#include "sojourn/evolution_sojourn.hpp"

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

double max_diff(const SpinorField& a, const SpinorField& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.grid().size(); ++i) w = std::max(w, (a.at(i) - b.at(i)).norm());
  return w;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

// box half-width 15.7, room for the tail before periodic images arrive
struct Small {
  MomentumGrid g = make_grid(64, 6.4);
  Mass m{1.0};
  SpinorField f = gaussian_packet(g, m, packet({2.1, 2.1, 0.0}, 0.5));
};

}  // namespace

TEST_CASE("free evolution: identity, unitarity, group law") {
  MomentumGrid g = make_grid(32, 6.0);
  Mass m(1.0);
  SpinorField f = gaussian_packet(g, m, packet({2.25, -1.875, 1.5}, 0.5)) +
                  gaussian_packet(g, m, packet({-1.875, 2.25, 1.5}, 0.5, -1));
  CHECK(max_diff(free_evolve(f, 0.0), f) <= 1e-15);
  for (double t : {0.7, -3.1, 40.0}) CHECK(free_evolve(f, t).norm2() == doctest::Approx(f.norm2()).epsilon(1e-13));
  CHECK(max_diff(free_evolve(free_evolve(f, 1.3), 2.4), free_evolve(f, 3.7)) <= 1e-12);
  CHECK(max_diff(free_evolve(free_evolve(f, 5.0), -5.0), f) <= 1e-12);
}

TEST_CASE("centroid of a positive-energy packet moves at the group velocity") {
  MomentumGrid g = make_grid(64, 6.4);
  Mass m(1.0);
  Vec3 p0{2.0, 1.5, -1.0};
  SpinorField f = gaussian_packet(g, m, packet(p0, 0.5));
  const double e0 = std::sqrt(dot3(p0, p0) + 1.0);
  Vec3 c0 = position_centroid(f);
  const double t = 5.0;
  Vec3 c1 = position_centroid(free_evolve(f, t));
  Vec3 v{(c1[0] - c0[0]) / t, (c1[1] - c0[1]) / t, (c1[2] - c0[2]) / t};
  Vec3 expect{p0[0] / e0, p0[1] / e0, p0[2] / e0};
  Vec3 d{v[0] - expect[0], v[1] - expect[1], v[2] - expect[2]};
  CHECK(norm3(d) <= 0.02 * norm3(expect));
}

TEST_CASE("ball overlap: full mass in a large ball, monotone in R, small-ball scaling") {
  // sigma = 1: the position density falls like exp(-x^2), so R = 8 holds all of it
  MomentumGrid g = make_grid(64, 12.4);
  Mass m(1.0);
  SpinorField f = gaussian_packet(g, m, packet({5.425, 0.0, 0.0}, 1.0));
  for (auto mode : {BallQuadrature::Lattice, BallQuadrature::Spectral}) {
    cplx full = ball_overlap(f, f, BallCutoff(8.0), mode);
    CHECK(std::abs(full - 1.0) <= 1e-4);
    double prev = 0.0;
    for (double R : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
      cplx v = ball_overlap(f, f, BallCutoff(R), mode);
      CHECK(std::abs(v.imag()) <= 1e-14);
      CHECK(v.real() >= prev);
      prev = v.real();
    }
  }
  // the spectral ball integral vanishes like R^3 as the ball shrinks
  double a = ball_overlap(f, f, BallCutoff(0.02), BallQuadrature::Spectral).real();
  double b = ball_overlap(f, f, BallCutoff(0.01), BallQuadrature::Spectral).real();
  CHECK(a > 0.0);
  CHECK(a / b == doctest::Approx(8.0).epsilon(1e-3));
  CHECK_THROWS_AS(BallCutoff(0.0), Error);
}

TEST_CASE("ball transform limits") {
  CHECK(ball_transform(0.0, 2.0) == doctest::Approx(4.0 * kPi * 8.0 / 3.0).epsilon(1e-15));
  CHECK(ball_transform(1e-6, 2.0) == doctest::Approx(4.0 * kPi * 8.0 / 3.0).epsilon(1e-10));
  const double k = 1.7, R = 1.3;
  CHECK(ball_transform(k, R) ==
        doctest::Approx(4.0 * kPi * (std::sin(k * R) - k * R * std::cos(k * R)) / std::pow(k, 3)).epsilon(1e-14));
}

TEST_CASE("default time quadrature") {
  MomentumGrid g = make_grid(32, 6.0);
  TimeQuadrature tq = default_time_quadrature(g, Mass(1.0), 10.0, 1e-6);
  CHECK(tq.dt == doctest::Approx(0.1 / std::sqrt(37.0)).epsilon(1e-15));
  const double k = tq.t_max / (4.0 * tq.dt);
  CHECK(std::abs(k - std::round(k)) <= 1e-9);
  CHECK(tq.t_max >= 10.0);
  CHECK(tq.eps_tail == 1e-6);
}

TEST_CASE("self sojourn integral is real, positive and stable under a longer horizon") {
  Small s;
  TimeQuadrature tq = default_time_quadrature(s.g, s.m, 12.0, 1e-6);
  tq.dt = 0.05;
  tq.t_max = 12.0;
  SojournValue a = compute_I(s.f, s.f, 3.0, tq);
  CHECK(a.value.real() > 0.0);
  CHECK(std::abs(a.value.imag()) <= 1e-12);
  CHECK(a.err > 0.0);
  tq.t_max = 24.0;
  SojournValue b = compute_I(s.f, s.f, 3.0, tq);
  CHECK(std::abs(a.value - b.value) <= 2.0 * std::max(a.err, b.err));
}

TEST_CASE("sojourn curve: empty ladder, nondecreasing self curve, horizon error") {
  Small s;
  TimeQuadrature tq;
  tq.dt = 0.05;
  tq.t_max = 12.0;
  tq.eps_tail = 1e-6;
  CHECK(sojourn_curve(s.f, s.f, {}, tq).samples.empty());
  SojournCurve c = sojourn_curve(s.f, s.f, {2.0, 2.5, 3.0, 3.5}, tq);
  REQUIRE(c.samples.size() == 4u);
  for (std::size_t j = 1; j < c.samples.size(); ++j) CHECK(c.samples[j].I.real() >= c.samples[j - 1].I.real());
  CHECK(c.n == 64);
  CHECK(c.ball_quadrature == std::string(ball_quadrature_name(BallQuadrature::Spectral)));
  tq.t_max = 0.4;
  CHECK(kind_of([&] { compute_I(s.f, s.f, 3.0, tq); }) == ErrorKind::HorizonExceeded);
}

TEST_CASE("two-sided sojourn is the sum of its halves") {
  Small s;
  TimeQuadrature tq;
  tq.dt = 0.05;
  tq.t_max = 12.0;
  tq.eps_tail = 1e-6;
  TwoSided ts = two_sided_sojourn(s.f, 3.0, tq);
  SojournOptions back;
  back.direction = -1;
  SojournValue fw = compute_I(s.f, s.f, 3.0, tq), bw = compute_I(s.f, s.f, 3.0, tq, back);
  CHECK(ts.forward == doctest::Approx(fw.value.real()).epsilon(1e-14));
  CHECK(ts.backward == doctest::Approx(bw.value.real()).epsilon(1e-14));
  CHECK(ts.total == doctest::Approx(ts.forward + ts.backward).epsilon(1e-14));
  CHECK(ts.err >= std::max(fw.err, bw.err));
}

// Time reversal (T f)^(p) = U conj(f^(-p)), U = -i alpha1 alpha3, maps the
// backward half of f onto the forward half of T f.
TEST_CASE("backward sojourn equals forward sojourn of the time-reversed packet") {
  Small s;
  const auto& D = standard_matrices();
  Matrix4 U = cplx(0.0, -1.0) * D.alpha1 * D.alpha3;
  CHECK((U * U.adjoint() - Matrix4::Identity()).cwiseAbs().maxCoeff() <= 1e-15);
  for (int k = 0; k < 3; ++k)
    CHECK((U * D.alpha(k).conjugate() * U.adjoint() + D.alpha(k)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((U * D.beta * U.adjoint() - D.beta).cwiseAbs().maxCoeff() <= 1e-15);

  const int n = s.g.n;
  auto neg = [n](int j) { return (n - j) % n; };
  SpinorField tf(s.g, s.m, Sector::Positive);
  for (std::size_t idx = 0; idx < s.g.size(); ++idx) {
    auto [i, j, k] = s.g.unravel(idx);
    Spinor v = s.f.at(s.g.index(neg(i), neg(j), neg(k)));
    tf.set(idx, U * v.conjugate());
  }
  TimeQuadrature tq;
  tq.dt = 0.05;
  tq.t_max = 12.0;
  tq.eps_tail = 1e-6;
  SojournOptions back;
  back.direction = -1;
  SojournValue bw = compute_I(s.f, s.f, 3.0, tq, back), fw = compute_I(tf, tf, 3.0, tq);
  CHECK(std::abs(bw.value - fw.value) <= 2.0 * std::max(bw.err, fw.err));
}
