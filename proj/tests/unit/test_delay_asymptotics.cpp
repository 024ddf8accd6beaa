#include <cmath>

#include "doctest.h"
#include "sojourn/delay_asymptotics.hpp"

using namespace sojourn;

namespace {

PacketSpec packet(Vec3 c, double w, int sign = 1, Spinor seed = Spinor(cplx(1.0, 0.0), cplx(0.3, 0.4),
                                                                    cplx(0.0, 0.8), cplx(-0.5, 0.2))) {
  PacketSpec p;
  p.center = c;
  p.width = w;
  p.sign = sign;
  p.seed = seed;
  return p;
}

// n = 64, p_max = 6.4 resolves the packets below in both spaces
struct Setup {
  MomentumGrid g = make_grid(64, 6.4);
  Mass m{1.0};
  SpinorField f = gaussian_packet(g, m, packet({2.4, 1.8, -1.2}, 0.5));
  SpinorField h = gaussian_packet(g, m, packet({2.6, 1.9, -1.0}, 0.55, 1, Spinor(cplx(0.2, 0.1), cplx(1.0, 0.0),
                                                                                  cplx(-0.4, 0.3), cplx(0.0, 0.6))));
  SpinorField n = gaussian_packet(g, m, packet({-1.8, 2.4, 1.2}, 0.5, -1));
};

PhaseChannel bw(double e_res, double gamma) {
  PhaseChannel c;
  c.sign = 1;
  c.family = PhaseFamily::BreitWigner;
  c.e_res = e_res;
  c.gamma = gamma;
  return c;
}

}  // namespace

TEST_CASE("leading coefficient: massless speed, reciprocal group speed, sectors") {
  MomentumGrid g = make_grid(64, 6.4);
  SpinorField z = gaussian_packet(g, Mass(0.0), packet({2.4, 1.8, -1.2}, 0.5));
  CHECK(leading_coefficient(z, z).real() == doctest::Approx(1.0).epsilon(1e-13));

  // narrow packet: brute-force grid sum and the group-speed value
  Mass m(1.0);
  Vec3 p0{3.0, 2.0, 1.5};
  SpinorField f = gaussian_packet(g, m, packet(p0, 0.25));
  double direct = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Vec3 p = g.momentum(i);
    double r = norm3(p);
    if (r == 0.0) continue;
    direct += std::sqrt(r * r + 1.0) / r * f.at(i).squaredNorm();
  }
  direct *= std::pow(g.dp(), 3);
  cplx c1 = leading_coefficient(f, f);
  CHECK(c1.real() == doctest::Approx(direct).epsilon(1e-12));
  CHECK(std::abs(c1.imag()) <= 1e-15);
  const double a = norm3(p0);
  CHECK(c1.real() == doctest::Approx(std::sqrt(a * a + 1.0) / a).epsilon(0.01));

  Setup s;
  CHECK(std::abs(leading_coefficient(s.f, s.n)) == 0.0);
}

TEST_CASE("constant term: real for f = g, sesquilinear, zero across sectors") {
  Setup s;
  cplx ff = constant_term(s.f, s.f);
  CHECK(std::abs(ff.imag()) <= 1e-8 * s.f.norm2());
  cplx fh = constant_term(s.f, s.h), hf = constant_term(s.h, s.f);
  CHECK(std::abs(fh - std::conj(hf)) <= 1e-8 * std::abs(fh));
  CHECK(std::abs(constant_term(s.f, s.n)) <= 1e-14);
  CHECK(std::abs(constant_term_A0(s.f, s.n)) <= 1e-14);
}

TEST_CASE("constant term through A0 agrees with the direct form") {
  Setup s;
  SpinorField mix = s.f + s.n;
  for (auto [a, b] : {std::pair{&s.f, &s.f}, std::pair{&s.f, &s.h}, std::pair{&s.h, &s.f}, std::pair{&mix, &mix}}) {
    cplx d = constant_term(*a, *b), q = constant_term_A0(*a, *b);
    CHECK(std::abs(d - q) <= 1e-6 * std::abs(d));
  }
  SpinorField zero(s.g, s.m);
  CHECK(std::abs(constant_term_A0(s.f, zero)) == 0.0);
  cplx one = constant_term_A0(s.f, s.h), two = constant_term_A0(s.f, 2.0 * s.h);
  CHECK(std::abs(two - 2.0 * one) <= 1e-14 * std::abs(one));
}

TEST_CASE("asymptotic I: intercept and linearity") {
  Setup s;
  AsymptoticExpansion e = asymptotic_expansion(s.f, s.h);
  CHECK(std::abs(asymptotic_I(s.f, s.h, 0.0) - e.C0) <= 1e-15 * std::abs(e.C0));
  CHECK(std::abs(e.C1 - (e.c1_pos + e.c1_neg)) <= 1e-15);
  CHECK(std::abs(e.C0 - (e.c0_pos + e.c0_neg)) <= 1e-15);
  cplx one = asymptotic_I(s.f, s.h, 7.5), two = asymptotic_I(2.0 * s.f, s.h, 7.5);
  CHECK(std::abs(two - 2.0 * one) <= 1e-13 * std::abs(one));
  CHECK(std::abs(one - (e.C1 * 7.5 + e.C0)) <= 1e-13 * std::abs(one));
}

TEST_CASE("commutator delay: identity, constant phase, Breit-Wigner") {
  Setup s;
  MultiplierSMatrix id(PhaseShiftModel{}, s.m);
  CHECK(commutator_delay(s.f, id) == 0.0);
  PhaseChannel c;
  c.family = PhaseFamily::Constant;
  c.amplitude = 0.7;
  MultiplierSMatrix k(PhaseShiftModel{{c}}, s.m);
  CHECK(std::abs(commutator_delay(s.f, k)) <= 1e-15);

  // delta' = (Gamma/2) / ((E - E_res)^2 + Gamma^2 / 4), summed against |f+|^2
  const double e_res = std::hypot(2.7, 1.0), gamma = 0.5;
  MultiplierSMatrix b(PhaseShiftModel{{bw(e_res, gamma)}}, s.m);
  double direct = 0.0;
  for (std::size_t i = 0; i < s.g.size(); ++i) {
    double E = std::sqrt(dot3(s.g.momentum(i), s.g.momentum(i)) + 1.0);
    double dd = 0.5 * gamma / ((E - e_res) * (E - e_res) + 0.25 * gamma * gamma);
    direct += 2.0 * dd * s.f.at(i).squaredNorm();
  }
  direct *= std::pow(s.g.dp(), 3);
  CommutatorDelay cd = commutator_delay_detail(s.f, b);
  CHECK(cd.value == doctest::Approx(direct).epsilon(1e-6));
  CHECK(std::abs(cd.imag_residue) <= 1e-9);
  CHECK(cd.value > 0.0);
}

TEST_CASE("C1 is invariant under a unitary sector multiplier") {
  Setup s;
  PhaseChannel neg = bw(-3.0, 0.4);
  neg.sign = -1;
  MultiplierSMatrix b(PhaseShiftModel{{bw(2.9, 0.3), neg}}, s.m);
  SpinorField mix = s.f + s.n;
  SpinorField sm = b.apply(mix);
  CHECK(leading_coefficient(sm, sm).real() == doctest::Approx(leading_coefficient(mix, mix).real()).epsilon(1e-14));
  CHECK(b.unitarity_defect(s.g) <= 1e-15);
}

TEST_CASE("least squares and curve fit recover exact models") {
  std::vector<double> x, y;
  for (int i = 0; i < 12; ++i) {
    x.push_back(4.0 + i);
    y.push_back(1.25 * x.back() - 0.5 + 3.0 / x.back() - 7.0 / std::pow(x.back(), 3));
  }
  LinearFit lf = least_squares(x, y, {[](double) { return 1.0; }, [](double r) { return r; },
                                      [](double r) { return 1.0 / r; }, [](double r) { return std::pow(r, -3); }});
  REQUIRE(lf.coef.size() == 4u);
  CHECK(lf.coef[0] == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(lf.coef[1] == doctest::Approx(1.25).epsilon(1e-10));
  CHECK(lf.coef[2] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(lf.coef[3] == doctest::Approx(-7.0).epsilon(1e-6));
  CHECK(lf.rms_residual <= 1e-12);

  SojournCurve c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    SojournSample smp;
    smp.R = x[i];
    smp.I = y[i];
    c.samples.push_back(smp);
  }
  CurveFit cf = fit_sojourn_curve(c, 6.0, {1, 3});
  CHECK(cf.points == 10u);
  CHECK(cf.slope == doctest::Approx(1.25).epsilon(1e-10));
  CHECK(cf.intercept == doctest::Approx(-0.5).epsilon(1e-9));
  REQUIRE(cf.tail.size() == 2u);
  CHECK(cf.tail[0] == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("sojourn delay of the identity multiplier vanishes") {
  Setup s;
  MultiplierSMatrix id(PhaseShiftModel{}, s.m);
  TimeQuadrature tq;
  tq.dt = 0.05;
  tq.t_max = 12.0;
  tq.eps_tail = 1e-6;
  SojournDelay d = sojourn_delay(s.f, id, {2.0, 2.5, 3.0, 3.5}, tq);
  CHECK(std::abs(d.value) <= std::max(d.err, 1e-14));
  for (double v : d.D) CHECK(v == 0.0);
  CHECK(d.c1 == doctest::Approx(leading_coefficient(s.f, s.f).real()).epsilon(1e-15));
}
