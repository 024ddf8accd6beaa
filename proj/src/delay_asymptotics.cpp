#include "sojourn/delay_asymptotics.hpp"

#include <optional>

#include "sojourn/parallel.hpp"

namespace sojourn {

namespace {

struct Sectors {
  std::optional<SpinorField> pos, neg;
};

Sectors split(const SpinorField& f) {
  Sectors s;
  if (f.sector() != Sector::Negative) s.pos = f.sector() == Sector::Positive ? f : project_energy(f, 1);
  if (f.sector() != Sector::Positive) s.neg = f.sector() == Sector::Negative ? f : project_energy(f, -1);
  return s;
}

void check_pair(const SpinorField& f, const SpinorField& g, const char* who) {
  check_same_grid(f, g);
  check_origin_support(f, who);
  check_origin_support(g, who);
}

// sum_p w(p) <a(p), b(p)> dp^3 over |p| >= 2 dp
cplx weighted_inner(const SpinorField& a, const SpinorField& b, double (*w)(double pabs, double m)) {
  const auto& grid = a.grid();
  const double m = a.mass().value();
  const double rmin2 = std::pow(2.0 * grid.dp(), 2);
  cplx s = parallel::reduce_sum<cplx>(grid.size(), [&](std::size_t i) {
    Vec3 p = grid.momentum(i);
    double p2 = dot3(p, p);
    if (p2 < rmin2) return cplx(0.0, 0.0);
    cplx d = std::conj(a.component(0)[i]) * b.component(0)[i] + std::conj(a.component(1)[i]) * b.component(1)[i] +
             std::conj(a.component(2)[i]) * b.component(2)[i] + std::conj(a.component(3)[i]) * b.component(3)[i];
    return w(std::sqrt(p2), m) * d;
  });
  return s * std::pow(grid.dp(), 3);
}

double inverse_speed(double pabs, double m) { return std::hypot(pabs, m) / pabs; }

// K g with both gradients taken spectrally
SpinorField apply_K(const SpinorField& g) {
  const auto& grid = g.grid();
  const double m = g.mass().value();
  SpinorField Eg = apply_scalar(g, [m](const Vec3& p) { return cplx(std::sqrt(dot3(p, p) + m * m), 0.0); });
  Gradient dg = spectral_gradient(g);
  Gradient dEg = spectral_gradient(Eg);
  const double rmin2 = std::pow(2.0 * grid.dp(), 2);
  SpinorField r(grid, g.mass(), Sector::Mixed);
  parallel::for_range(grid.size(), [&](std::size_t i) {
    Vec3 p = grid.momentum(i);
    double p2 = dot3(p, p);
    if (p2 < rmin2) return;
    double E = std::sqrt(p2 + m * m);
    Spinor pg = p[0] * dg.d[0].at(i) + p[1] * dg.d[1].at(i) + p[2] * dg.d[2].at(i);
    Spinor pEg = p[0] * dEg.d[0].at(i) + p[1] * dEg.d[1].at(i) + p[2] * dEg.d[2].at(i);
    r.set(i, (E / (2.0 * p2)) * (g.at(i) + pg) + pEg / (2.0 * p2));
  });
  return r;
}

SpinorField apply_A0_form(const SpinorField& g) {
  const auto& grid = g.grid();
  const double m = g.mass().value();
  SpinorField a = apply_A0(g);
  const double rmin2 = std::pow(2.0 * grid.dp(), 2);
  parallel::for_range(grid.size(), [&](std::size_t i) {
    Vec3 p = grid.momentum(i);
    double p2 = dot3(p, p);
    if (p2 < rmin2) return;
    double E = std::sqrt(p2 + m * m);
    a.set(i, E * a.at(i) + cplx(0.0, 0.5 / E) * g.at(i));
  });
  return a;
}

}  // namespace

cplx leading_coefficient(const SpinorField& f, const SpinorField& g) {
  return asymptotic_expansion(f, g).C1;
}

AsymptoticExpansion asymptotic_expansion(const SpinorField& f, const SpinorField& g) {
  check_pair(f, g, "asymptotic_expansion");
  Sectors a = split(f), b = split(g);
  AsymptoticExpansion r;
  if (a.pos && b.pos) {
    r.c1_pos = weighted_inner(*a.pos, *b.pos, inverse_speed);
    r.c0_pos = cplx(0.0, -1.0) * inner_product(*a.pos, apply_K(*b.pos));
  }
  if (a.neg && b.neg) {
    r.c1_neg = weighted_inner(*a.neg, *b.neg, inverse_speed);
    r.c0_neg = cplx(0.0, 1.0) * inner_product(*a.neg, apply_K(*b.neg));
  }
  r.C1 = r.c1_pos + r.c1_neg;
  r.C0 = r.c0_pos + r.c0_neg;
  return r;
}

cplx constant_term(const SpinorField& f, const SpinorField& g) { return asymptotic_expansion(f, g).C0; }

cplx constant_term_A0(const SpinorField& f, const SpinorField& g) {
  check_pair(f, g, "constant_term_A0");
  Sectors a = split(f), b = split(g);
  cplx r = 0.0;
  if (a.pos && b.pos) r -= inner_product(*a.pos, apply_A0_form(*b.pos));
  if (a.neg && b.neg) r += inner_product(*a.neg, apply_A0_form(*b.neg));
  return r;
}

cplx asymptotic_I(const SpinorField& f, const SpinorField& g, double R) {
  AsymptoticExpansion e = asymptotic_expansion(f, g);
  return e.C1 * R + e.C0;
}

CommutatorDelay commutator_delay_detail(const SpinorField& f, const MultiplierSMatrix& s) {
  const auto& grid = f.grid();
  check_origin_support(f, "commutator_delay");
  double defect = s.unitarity_defect(grid);
  if (defect > 1e-12) throw Error(ErrorKind::NonUnitary, "multiplier is not unimodular (defect " + std::to_string(defect) + ")");
  const double m = f.mass().value();
  Sectors parts = split(f);
  const double rmin2 = std::pow(2.0 * grid.dp(), 2);
  cplx total = 0.0;
  for (int sign : {1, -1}) {
    const auto& part = sign > 0 ? parts.pos : parts.neg;
    if (!part) continue;
    const SpinorField& h = *part;
    total += parallel::reduce_sum<cplx>(grid.size(), [&](std::size_t i) {
      Vec3 p = grid.momentum(i);
      double p2 = dot3(p, p);
      if (p2 < rmin2) return cplx(0.0, 0.0);
      double a = std::sqrt(p2), E = std::sqrt(p2 + m * m);
      double w = h.at(i).squaredNorm();
      if (w == 0.0) return cplx(0.0, 0.0);
      cplx t = -static_cast<double>(sign) * E * std::conj(s.s(sign, a)) * cplx(0.0, 1.0) * (s.ds(sign, a) / a);
      return t * w;
    });
  }
  total *= std::pow(grid.dp(), 3);
  return {total.real(), total.imag()};
}

double commutator_delay(const SpinorField& f, const MultiplierSMatrix& s) {
  CommutatorDelay d = commutator_delay_detail(f, s);
  if (std::abs(d.imag_residue) > 1e-9 * std::max(1.0, std::abs(d.value)))
    emit_warning("imaginary-residue", "commutator delay has imaginary part " + std::to_string(d.imag_residue));
  return d.value;
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<std::function<double(double)>>& basis) {
  const long n = static_cast<long>(x.size()), k = static_cast<long>(basis.size());
  if (n != static_cast<long>(y.size()) || n < k || k == 0)
    throw Error(ErrorKind::InvalidArgument, "least squares needs at least as many points as basis functions");
  Eigen::MatrixXd A(n, k);
  Eigen::VectorXd b(n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < k; ++j) A(i, j) = basis[j](x[i]);
    b[i] = y[i];
  }
  // columns are equilibrated first; R and R^-5 differ by many decades
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (long j = 0; j < k; ++j)
    if (scale[j] == 0.0) scale[j] = 1.0;
  Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
  Eigen::VectorXd c = As.colPivHouseholderQr().solve(b).cwiseQuotient(scale);
  Eigen::VectorXd r = A * c - b;
  LinearFit fit;
  fit.coef.assign(c.data(), c.data() + k);
  fit.rms_residual = std::sqrt(r.squaredNorm() / n);
  fit.max_residual = r.cwiseAbs().maxCoeff();
  return fit;
}

CurveFit fit_sojourn_curve(const SojournCurve& curve, double R_min, const std::vector<int>& inverse_powers) {
  std::vector<double> x, y;
  for (const auto& s : curve.samples)
    if (s.R >= R_min) {
      x.push_back(s.R);
      y.push_back(s.I.real());
    }
  std::vector<std::function<double(double)>> basis{[](double r) { return r; }, [](double) { return 1.0; }};
  for (int k : inverse_powers) basis.push_back([k](double r) { return std::pow(r, -k); });
  LinearFit lf = least_squares(x, y, basis);
  CurveFit f;
  f.slope = lf.coef[0];
  f.intercept = lf.coef[1];
  f.powers = inverse_powers;
  f.tail.assign(lf.coef.begin() + 2, lf.coef.end());
  f.rms_residual = lf.rms_residual;
  f.points = x.size();
  return f;
}

SojournDelay sojourn_delay(const SpinorField& f, const MultiplierSMatrix& s, const std::vector<double>& R_list,
                           const TimeQuadrature& tq, const SojournOptions& opt) {
  if (R_list.size() < 4) throw Error(ErrorKind::InvalidArgument, "sojourn_delay needs at least 4 radii");
  check_origin_support(f, "sojourn_delay");
  SpinorField Sf = s.apply(f);
  check_origin_support(Sf, "sojourn_delay");
  SojournCurve cs = sojourn_curve(Sf, Sf, R_list, tq, opt);
  SojournCurve cf = sojourn_curve(f, f, R_list, tq, opt);

  SojournDelay out;
  out.R = R_list;
  for (std::size_t j = 0; j < R_list.size(); ++j) {
    out.D.push_back(cs.samples[j].I.real() - cf.samples[j].I.real());
    out.D_err.push_back(cs.samples[j].err + cf.samples[j].err);
  }
  out.fit_from = R_list.size() / 2;
  std::vector<double> xr(R_list.begin() + out.fit_from, R_list.end());
  std::vector<double> yd(out.D.begin() + out.fit_from, out.D.end());
  LinearFit tail = least_squares(xr, yd, {[](double) { return 1.0; }, [](double r) { return 1.0 / r; }});
  LinearFit line = least_squares(xr, yd, {[](double) { return 1.0; }, [](double r) { return r; }});
  out.value = tail.coef[0];
  out.tail_coefficient = tail.coef[1];
  out.fit_residual = tail.max_residual;
  out.slope = line.coef[1];
  double derr = 0.0;
  for (std::size_t j = out.fit_from; j < out.D_err.size(); ++j) derr = std::max(derr, out.D_err[j]);
  out.err = out.fit_residual + derr;
  out.c1 = leading_coefficient(f, f).real();
  if (out.fit_residual > 0.1 * std::abs(out.value))
    emit_warning("ill-conditioned-fit", "delay extrapolation residual exceeds 10% of the fitted value");
  return out;
}

}  // namespace sojourn
