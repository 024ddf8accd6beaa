#include "sojourn/spectral_transform.hpp"

#include <gsl/gsl_integration.h>

#include <cstdio>

#include "sojourn/parallel.hpp"

namespace sojourn {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXcd;

struct GaussLegendre {
  std::vector<double> x, w;  // on [-1, 1]
};

GaussLegendre gauss_legendre(int n) {
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(static_cast<size_t>(n));
  if (!t) throw Error(ErrorKind::InvalidArgument, "cannot build Gauss-Legendre rule");
  GaussLegendre gl;
  gl.x.resize(n);
  gl.w.resize(n);
  for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(-1.0, 1.0, static_cast<size_t>(i), &gl.x[i], &gl.w[i], t);
  gsl_integration_glfixed_table_free(t);
  return gl;
}

// e^{sign i q x_k} for the dual-grid positions.
Eigen::VectorXcd phase_column(const MomentumGrid& grid, double q, double sign) {
  Eigen::VectorXcd v(grid.n);
  for (int k = 0; k < grid.n; ++k) {
    double a = sign * q * grid.x(k);
    v[k] = cplx(std::cos(a), std::sin(a));
  }
  return v;
}

}  // namespace

std::shared_ptr<const SphereQuadrature> make_sphere_quadrature(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw Error(ErrorKind::InvalidArgument, "sphere rule needs n_theta, n_phi >= 1");
  auto sq = std::make_shared<SphereQuadrature>();
  sq->n_theta = n_theta;
  sq->n_phi = n_phi;
  GaussLegendre gl = gauss_legendre(n_theta);
  sq->cos_theta = gl.x;
  sq->phi.resize(n_phi);
  for (int j = 0; j < n_phi; ++j) sq->phi[j] = 2.0 * kPi * j / n_phi;
  for (int t = 0; t < n_theta; ++t) {
    double ct = gl.x[t];
    double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int j = 0; j < n_phi; ++j) {
      sq->nodes.push_back({st * std::cos(sq->phi[j]), st * std::sin(sq->phi[j]), ct});
      sq->weights.push_back(gl.w[t] * 2.0 * kPi / n_phi);
    }
  }
  return sq;
}

EnergyQuadrature make_energy_quadrature(const std::vector<EnergyWindow>& windows, int panels, int points, Mass m) {
  if (panels < 1 || points < 1) throw Error(ErrorKind::InvalidArgument, "energy rule needs panels, points >= 1");
  EnergyQuadrature eq;
  GaussLegendre gl = gauss_legendre(points);
  for (const auto& w : windows) {
    if (!(w.hi > w.lo)) throw Error(ErrorKind::InvalidArgument, "energy window must have hi > lo");
    bool pos = w.lo >= m.value();
    bool neg = w.hi <= -m.value();
    if (!pos && !neg) throw Error(ErrorKind::EnergyGap, "energy window overlaps the gap [-m, m]");
    eq.windows.push_back(w);
    double h = (w.hi - w.lo) / panels;
    for (int p = 0; p < panels; ++p) {
      double a = w.lo + p * h;
      for (int i = 0; i < points; ++i) {
        eq.energies.push_back(a + 0.5 * h * (gl.x[i] + 1.0));
        eq.weights.push_back(0.5 * h * gl.w[i]);
      }
    }
  }
  return eq;
}

EnergyWindow energy_window_for_packet(const PacketSpec& spec, Mass m, double k_sigma) {
  double p0 = norm3(spec.center);
  double r_lo = std::max(0.0, p0 - k_sigma * spec.width);
  double r_hi = p0 + k_sigma * spec.width;
  double mm = m.value();
  double e_lo = std::sqrt(r_lo * r_lo + mm * mm);
  double e_hi = std::sqrt(r_hi * r_hi + mm * mm);
  if (spec.sign > 0) return {e_lo, e_hi};
  return {-e_hi, -e_lo};
}

double shell_speed_factor(double E, double m) { return std::pow(E * E * (E * E - m * m), 0.25); }
double shell_radius(double E, double m) { return std::sqrt(E * E - m * m); }

double EnergyShellVector::norm2() const {
  double s = 0.0;
  for (std::size_t k = 0; k < sq->size(); ++k) s += sq->weights[k] * values.segment<4>(4 * k).squaredNorm();
  return s;
}

cplx shell_inner(const EnergyShellVector& a, const EnergyShellVector& b) {
  if (a.sq != b.sq || a.values.size() != b.values.size())
    throw Error(ErrorKind::GridMismatch, "shell vectors use different sphere rules");
  cplx s = 0.0;
  for (std::size_t k = 0; k < a.sq->size(); ++k)
    s += a.sq->weights[k] * a.values.segment<4>(4 * k).dot(b.values.segment<4>(4 * k));
  return s;
}

ShellSampler::ShellSampler(const SpinorField& f) : field_(f) {}

const PositionField& ShellSampler::sector_position(int sign) const {
  auto& slot = pos_[sign > 0 ? 0 : 1];
  if (!slot) {
    Sector want = sector_from_sign(sign);
    if (field_.sector() == want)
      slot = to_position(field_);
    else
      slot = to_position(project_energy(field_, sign));
  }
  return *slot;
}

namespace {

void check_shell(double E, double m, const MomentumGrid& grid) {
  if (!(std::abs(E) > m)) throw Error(ErrorKind::EnergyGap, "shell energy must satisfy |E| > m");
  if (shell_radius(E, m) > grid.p_max)
    throw Error(ErrorKind::OutOfBand, "shell radius nu(E) exceeds p_max");
}

struct RingPhases {
  ColMat e1, e2;  // n x n_phi: e^{-i q1 x}, e^{-i q2 x}
};

RingPhases ring_phases(const MomentumGrid& grid, const SphereQuadrature& sq, int t, double nu) {
  RingPhases r;
  r.e1.resize(grid.n, sq.n_phi);
  r.e2.resize(grid.n, sq.n_phi);
  for (int j = 0; j < sq.n_phi; ++j) {
    const Vec3& w = sq.nodes[static_cast<std::size_t>(t) * sq.n_phi + j];
    r.e1.col(j) = phase_column(grid, nu * w[0], -1.0);
    r.e2.col(j) = phase_column(grid, nu * w[1], -1.0);
  }
  return r;
}

ColMat axis3_phases(const MomentumGrid& grid, const SphereQuadrature& sq, double nu) {
  ColMat e3(grid.n, sq.n_theta);
  for (int t = 0; t < sq.n_theta; ++t) e3.col(t) = phase_column(grid, nu * sq.cos_theta[t], -1.0);
  return e3;
}

}  // namespace

EnergyShellVector ShellSampler::restrict(double E, const std::shared_ptr<const SphereQuadrature>& sq) const {
  const auto& grid = field_.grid();
  const double m = field_.mass().value();
  check_shell(E, m, grid);
  const int sign = E > 0 ? 1 : -1;
  const double nu = shell_radius(E, m);
  const double ups = shell_speed_factor(E, m);
  const int n = grid.n;
  const std::size_t n2 = static_cast<std::size_t>(n) * n;
  const PositionField& psi = sector_position(sign);

  ColMat e3 = axis3_phases(grid, *sq, nu);
  std::vector<RingPhases> rings(sq->n_theta);
  for (int t = 0; t < sq->n_theta; ++t) rings[t] = ring_phases(grid, *sq, t, nu);

  const std::size_t nodes = sq->size();
  std::array<Eigen::VectorXcd, 4> raw;
  parallel::for_blocks(4, [&](std::size_t c) {
    Eigen::Map<const RowMat> F(psi.comp[c].data(), n2, n);
    ColMat G = F * e3;  // n^2 x n_theta
    raw[c].resize(nodes);
    for (int t = 0; t < sq->n_theta; ++t) {
      Eigen::Map<const RowMat> Gt(G.col(t).data(), n, n);
      ColMat H = Gt * rings[t].e2;  // n x n_phi
      for (int j = 0; j < sq->n_phi; ++j)
        raw[c][static_cast<std::size_t>(t) * sq->n_phi + j] = rings[t].e1.col(j).transpose() * H.col(j);
    }
  });

  const double scale = std::pow(2.0 * kPi, -1.5) * std::pow(grid.dx(), 3) * ups;
  EnergyShellVector h;
  h.energy = E;
  h.sq = sq;
  h.values.resize(4 * nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    Spinor v(raw[0][k], raw[1][k], raw[2][k], raw[3][k]);
    const Vec3& w = sq->nodes[k];
    Vec3 q{nu * w[0], nu * w[1], nu * w[2]};
    h.values.segment<4>(4 * k) = scale * apply_projector(q, m, sign, v);
  }
  return h;
}

EnergyShellVector gamma0_restrict(const SpinorField& f, double E, const std::shared_ptr<const SphereQuadrature>& sq) {
  return ShellSampler(f).restrict(E, sq);
}

SpinorField gamma0_adjoint(const EnergyShellVector& h, const MomentumGrid& grid, Mass mass) {
  const double m = mass.value();
  const double E = h.energy;
  check_shell(E, m, grid);
  const auto& sq = *h.sq;
  const int sign = E > 0 ? 1 : -1;
  const double nu = shell_radius(E, m);
  const double ups = shell_speed_factor(E, m);
  const int n = grid.n;
  const std::size_t n2 = static_cast<std::size_t>(n) * n;
  const std::size_t nodes = sq.size();

  std::array<Eigen::VectorXcd, 4> coef;
  for (auto& c : coef) c.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const Vec3& w = sq.nodes[k];
    Vec3 q{nu * w[0], nu * w[1], nu * w[2]};
    Spinor v = sq.weights[k] * ups * apply_projector(q, m, sign, h.node(k));
    for (int c = 0; c < 4; ++c) coef[c][k] = v[c];
  }

  ColMat e3 = axis3_phases(grid, sq, nu);
  std::vector<RingPhases> rings(sq.n_theta);
  for (int t = 0; t < sq.n_theta; ++t) rings[t] = ring_phases(grid, sq, t, nu);

  PositionField u{grid, {}};
  parallel::for_blocks(4, [&](std::size_t c) {
    ColMat G(n2, sq.n_theta);
    for (int t = 0; t < sq.n_theta; ++t) {
      ColMat H = rings[t].e1.conjugate();
      for (int j = 0; j < sq.n_phi; ++j) H.col(j) *= coef[c][static_cast<std::size_t>(t) * sq.n_phi + j];
      RowMat Gt = H * rings[t].e2.adjoint();  // n x n
      G.col(t) = Eigen::Map<const Eigen::VectorXcd>(Gt.data(), static_cast<Eigen::Index>(n2));
    }
    u.comp[c].assign(grid.size(), cplx(0.0, 0.0));
    Eigen::Map<RowMat> U(u.comp[c].data(), n2, n);
    U.noalias() = G * e3.adjoint();
    U *= std::pow(2.0 * kPi, -1.5);
  });
  SpinorField raw = from_position(u, mass, Sector::Mixed);
  return project_energy(raw, sign);
}

double window_mass_fraction(const SpinorField& f, const EnergyQuadrature& eq) {
  const auto& grid = f.grid();
  const double m = f.mass().value();
  auto inside = [&](double E) {
    for (const auto& w : eq.windows)
      if (E >= w.lo && E <= w.hi) return true;
    return false;
  };
  double total = f.norm2();
  if (total == 0.0) return 1.0;
  double in = parallel::reduce_sum<double>(grid.size(), [&](std::size_t idx) {
    Vec3 p = grid.momentum(idx);
    double e = dispersion(p, m);
    if (e == 0.0) return 0.0;
    Spinor v = f.at(idx);
    double s = 0.0;
    if (inside(e)) s += apply_projector(p, m, 1, v).squaredNorm();
    if (inside(-e)) s += apply_projector(p, m, -1, v).squaredNorm();
    return s;
  });
  return in * std::pow(grid.dp(), 3) / total;
}

ParsevalResult parseval_check(const SpinorField& f, const EnergyQuadrature& eq,
                              const std::shared_ptr<const SphereQuadrature>& sq) {
  ParsevalResult r;
  r.norm2 = f.norm2();
  if (r.norm2 == 0.0) return r;
  r.window_mass_fraction = window_mass_fraction(f, eq);
  if (r.window_mass_fraction < 0.9999)
    emit_warning("window-coverage", "energy windows hold only " + std::to_string(r.window_mass_fraction) +
                                        " of the field's mass");
  ShellSampler sampler(f);
  std::vector<double> parts(eq.size());
  for (std::size_t i = 0; i < eq.size(); ++i) parts[i] = eq.weights[i] * sampler.restrict(eq.energies[i], sq).norm2();
  r.shell_norm2 = parallel::pairwise_merge(parts);
  r.defect = std::abs(r.norm2 - r.shell_norm2);
  return r;
}

double parseval_defect(const SpinorField& f, const EnergyQuadrature& eq,
                       const std::shared_ptr<const SphereQuadrature>& sq) {
  return parseval_check(f, eq, sq).defect;
}

double diagonalization_residual(const SpinorField& f, const EnergyQuadrature& eq,
                                const std::shared_ptr<const SphereQuadrature>& sq) {
  ShellSampler sf(f);
  ShellSampler shf(apply_h0_field(f));
  double worst = 0.0;
  for (double E : eq.energies) {
    EnergyShellVector a = shf.restrict(E, sq);
    EnergyShellVector b = sf.restrict(E, sq);
    a.values -= E * b.values;
    worst = std::max(worst, std::sqrt(a.norm2()));
  }
  return worst;
}

void write_shell_csv(const std::string& path, const std::vector<EnergyShellVector>& shells) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw Error(ErrorKind::Io, "cannot open " + path);
  std::fprintf(fp, "E,theta,phi,re0,im0,re1,im1,re2,im2,re3,im3\n");
  for (const auto& h : shells) {
    const auto& sq = *h.sq;
    for (std::size_t k = 0; k < sq.size(); ++k) {
      int t = static_cast<int>(k / sq.n_phi);
      int j = static_cast<int>(k % sq.n_phi);
      std::fprintf(fp, "%.17g,%.17g,%.17g", h.energy, std::acos(sq.cos_theta[t]), sq.phi[j]);
      Spinor v = h.node(k);
      for (int c = 0; c < 4; ++c) std::fprintf(fp, ",%.17g,%.17g", v[c].real(), v[c].imag());
      std::fprintf(fp, "\n");
    }
  }
  if (std::fclose(fp) != 0) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace sojourn
