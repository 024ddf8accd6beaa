#include "sojourn/scattering_ssf.hpp"

#include <cstdio>

#include "sojourn/parallel.hpp"

namespace sojourn {

const char* phase_family_name(PhaseFamily f) {
  switch (f) {
    case PhaseFamily::BreitWigner: return "breit-wigner";
    case PhaseFamily::Bump: return "bump";
    case PhaseFamily::Constant: return "constant";
  }
  return "constant";
}

PhaseFamily phase_family_from_name(const std::string& name) {
  if (name == "breit-wigner") return PhaseFamily::BreitWigner;
  if (name == "bump") return PhaseFamily::Bump;
  if (name == "constant") return PhaseFamily::Constant;
  throw Error(ErrorKind::InvalidArgument, "unknown phase family '" + name + "'");
}

double PhaseChannel::delta(double E) const {
  switch (family) {
    case PhaseFamily::BreitWigner: return 0.5 * kPi + std::atan((E - e_res) / (0.5 * gamma));
    case PhaseFamily::Bump: {
      double u = (E - center) / width;
      return amplitude * std::exp(-0.5 * u * u);
    }
    case PhaseFamily::Constant: return amplitude;
  }
  return 0.0;
}

double PhaseChannel::ddelta(double E) const {
  switch (family) {
    case PhaseFamily::BreitWigner: {
      double d = E - e_res, g2 = 0.5 * gamma;
      return g2 / (d * d + g2 * g2);
    }
    case PhaseFamily::Bump: {
      double u = (E - center) / width;
      return -amplitude * u / width * std::exp(-0.5 * u * u);
    }
    case PhaseFamily::Constant: return 0.0;
  }
  return 0.0;
}

void PhaseShiftModel::validate() const {
  for (const auto& c : channels) {
    if (c.sign != 1 && c.sign != -1) throw Error(ErrorKind::InvalidArgument, "channel sign must be +1 or -1");
    if (c.multiplicity < 1) throw Error(ErrorKind::InvalidArgument, "channel multiplicity must be >= 1");
    if (c.family == PhaseFamily::BreitWigner && !(c.gamma > 0.0))
      throw Error(ErrorKind::InvalidArgument, "Breit-Wigner width must be positive");
    if (c.family == PhaseFamily::Bump && !(c.width > 0.0))
      throw Error(ErrorKind::InvalidArgument, "bump width must be positive");
  }
}

int PhaseShiftModel::dimension(double E) const {
  int sign = E > 0 ? 1 : -1, d = 0;
  for (const auto& c : channels)
    if (c.sign == sign) d += c.multiplicity;
  return d;
}

double PhaseShiftModel::total_phase(double E) const {
  int sign = E > 0 ? 1 : -1;
  double s = 0.0;
  for (const auto& c : channels)
    if (c.sign == sign) s += c.multiplicity * c.delta(E);
  return s;
}

double PhaseShiftModel::total_dphase(double E) const {
  int sign = E > 0 ? 1 : -1;
  double s = 0.0;
  for (const auto& c : channels)
    if (c.sign == sign) s += c.multiplicity * c.ddelta(E);
  return s;
}

MultiplierSMatrix::MultiplierSMatrix(PhaseShiftModel model, Mass m) : model_(std::move(model)), m_(m) {
  model_.validate();
  for (std::size_t i = 0; i < model_.channels.size(); ++i) {
    int& slot = model_.channels[i].sign > 0 ? pos_ : neg_;
    if (slot >= 0) throw Error(ErrorKind::InvalidArgument, "a multiplier takes at most one channel per energy sign");
    slot = static_cast<int>(i);
  }
}

const PhaseChannel* MultiplierSMatrix::channel(int sign) const {
  int i = sign > 0 ? pos_ : neg_;
  return i >= 0 ? &model_.channels[i] : nullptr;
}

double MultiplierSMatrix::delta(int sign, double pabs) const {
  const PhaseChannel* c = channel(sign);
  if (!c) return 0.0;
  return c->delta(sign * std::hypot(pabs, m_.value()));
}

double MultiplierSMatrix::ddelta_dE(int sign, double pabs) const {
  const PhaseChannel* c = channel(sign);
  if (!c) return 0.0;
  return c->ddelta(sign * std::hypot(pabs, m_.value()));
}

cplx MultiplierSMatrix::s(int sign, double pabs) const { return std::polar(1.0, 2.0 * delta(sign, pabs)); }

cplx MultiplierSMatrix::ds(int sign, double pabs) const {
  double E = std::hypot(pabs, m_.value());
  if (E == 0.0) return 0.0;
  // dE_signed/d|p| = sign |p| / E
  return cplx(0.0, 2.0) * ddelta_dE(sign, pabs) * (sign * pabs / E) * s(sign, pabs);
}

SpinorField MultiplierSMatrix::apply(const SpinorField& f) const {
  const auto& grid = f.grid();
  const double m = f.mass().value();
  if (f.sector() != Sector::Mixed) {
    int sign = f.sector() == Sector::Positive ? 1 : -1;
    return apply_scalar(f, [&](const Vec3& p) { return s(sign, norm3(p)); });
  }
  SpinorField r(grid, f.mass(), Sector::Mixed);
  parallel::for_range(grid.size(), [&](std::size_t idx) {
    Vec3 p = grid.momentum(idx);
    double a = norm3(p);
    Spinor v = f.at(idx);
    if (dispersion(p, m) == 0.0) return;
    r.set(idx, s(1, a) * apply_projector(p, m, 1, v) + s(-1, a) * apply_projector(p, m, -1, v));
  });
  return r;
}

double MultiplierSMatrix::unitarity_defect(const MomentumGrid& grid) const {
  double worst = 0.0;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    double a = norm3(grid.momentum(idx));
    worst = std::max({worst, std::abs(std::abs(s(1, a)) - 1.0), std::abs(std::abs(s(-1, a)) - 1.0)});
  }
  return worst;
}

MultiplierSMatrix multiplier_from_phases(const PhaseShiftModel& model, Mass m) { return MultiplierSMatrix(model, m); }

double ShellOperator::leakage() const {
  const long d = matrix.rows();
  Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
  double nm = matrix.norm();
  if (nm == 0.0) return 0.0;
  return ((I - projector) * matrix * projector).norm() / nm;
}

double ShellOperator::fiber_defect() const {
  double nm = matrix.norm();
  if (nm == 0.0) return 0.0;
  return (projector * matrix * projector - matrix).norm() / nm;
}

double ShellOperator::hermiticity_defect() const {
  double nm = matrix.norm();
  if (nm == 0.0) return 0.0;
  return (matrix - matrix.adjoint()).norm() / nm;
}

double ShellOperator::unitarity_defect() const { return (matrix.adjoint() * matrix - projector).norm(); }

Matrix4 PotentialModel::vhat(const Vec3& k) const {
  double k2 = dot3(k, k);
  double v = 0.0;
  if (kind == Kind::Gaussian) {
    double a = range;
    v = amplitude * a * a * a * std::exp(-0.5 * a * a * k2);
  } else {
    double mu = 1.0 / range;
    v = amplitude * std::sqrt(2.0 / kPi) / (k2 + mu * mu);
  }
  if (times_beta) return v * standard_matrices().beta;
  return v * Matrix4::Identity();
}

Eigen::MatrixXcd fiber_projector(double E, const SphereQuadrature& sq, Mass m) {
  if (!(std::abs(E) > m.value())) throw Error(ErrorKind::EnergyGap, "shell energy must satisfy |E| > m");
  const double nu = shell_radius(E, m.value());
  const int sign = E > 0 ? 1 : -1;
  const long N = static_cast<long>(sq.size());
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(4 * N, 4 * N);
  for (long k = 0; k < N; ++k) {
    const Vec3& w = sq.nodes[k];
    P.block<4, 4>(4 * k, 4 * k) = energy_projector({nu * w[0], nu * w[1], nu * w[2]}, m, sign).matrix();
  }
  return P;
}

ShellOperator born_kernel_weighted(const PotentialModel& V, double E, const std::shared_ptr<const SphereQuadrature>& sq,
                                   Mass m) {
  if (!(std::abs(E) > m.value())) throw Error(ErrorKind::EnergyGap, "shell energy must satisfy |E| > m");
  const double nu = shell_radius(E, m.value());
  const double ups2 = std::pow(shell_speed_factor(E, m.value()), 2);
  const int sign = E > 0 ? 1 : -1;
  const long N = static_cast<long>(sq->size());
  std::vector<Matrix4> P(N);
  for (long k = 0; k < N; ++k) {
    const Vec3& w = sq->nodes[k];
    P[k] = energy_projector({nu * w[0], nu * w[1], nu * w[2]}, m, sign).matrix();
  }
  const double pref = std::pow(2.0 * kPi, -1.5) * ups2;
  ShellOperator K;
  K.energy = E;
  K.sq = sq;
  K.matrix = Eigen::MatrixXcd::Zero(4 * N, 4 * N);
  parallel::for_blocks(static_cast<std::size_t>(N), [&](std::size_t kk) {
    long k = static_cast<long>(kk);
    const Vec3& a = sq->nodes[k];
    for (long l = 0; l < N; ++l) {
      const Vec3& b = sq->nodes[l];
      Vec3 q{nu * (a[0] - b[0]), nu * (a[1] - b[1]), nu * (a[2] - b[2])};
      double ww = std::sqrt(sq->weights[k] * sq->weights[l]);
      K.matrix.block<4, 4>(4 * k, 4 * l) = (pref * ww) * (P[k] * V.vhat(q) * P[l]);
    }
  });
  K.projector = fiber_projector(E, *sq, m);
  return K;
}

ShellOperator born_shell_kernel(const PotentialModel& V, double E, const std::shared_ptr<const SphereQuadrature>& sq,
                                Mass m) {
  ShellOperator K = born_kernel_weighted(V, E, sq, m);
  ShellOperator S = K;
  S.matrix = K.projector - cplx(0.0, 2.0 * kPi) * K.matrix;
  return S;
}

Eigen::MatrixXcd unitary_exp(const Eigen::MatrixXcd& A) {
  Eigen::MatrixXcd H = 0.5 * (A + A.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NonUnitary, "eigendecomposition failed");
  Eigen::VectorXcd phase(H.rows());
  for (long i = 0; i < H.rows(); ++i) phase[i] = std::polar(1.0, es.eigenvalues()[i]);
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

ShellOperator unitary_exponential_smatrix(const PotentialModel& V, double E,
                                          const std::shared_ptr<const SphereQuadrature>& sq, Mass m) {
  ShellOperator K = born_kernel_weighted(V, E, sq, m);
  ShellOperator S = K;
  Eigen::MatrixXcd U = unitary_exp(-2.0 * kPi * K.matrix);
  S.matrix = K.projector * U * K.projector;
  return S;
}

Eigen::MatrixXcd UnitaryFamily::projector(double E) const {
  long d = extended(E).rows();
  return Eigen::MatrixXcd::Identity(d, d);
}

PhaseShiftFamily::PhaseShiftFamily(PhaseShiftModel model) : model_(std::move(model)) { model_.validate(); }

Eigen::MatrixXcd PhaseShiftFamily::extended(double E) const {
  int sign = E > 0 ? 1 : -1;
  std::vector<cplx> diag;
  for (const auto& c : model_.channels)
    if (c.sign == sign)
      for (int r = 0; r < c.multiplicity; ++r) diag.push_back(std::polar(1.0, 2.0 * c.delta(E)));
  Eigen::VectorXcd d = Eigen::Map<Eigen::VectorXcd>(diag.data(), static_cast<long>(diag.size()));
  return d.asDiagonal();
}

std::optional<Eigen::MatrixXcd> PhaseShiftFamily::derivative(double E) const {
  int sign = E > 0 ? 1 : -1;
  std::vector<cplx> diag;
  for (const auto& c : model_.channels)
    if (c.sign == sign)
      for (int r = 0; r < c.multiplicity; ++r)
        diag.push_back(cplx(0.0, 2.0 * c.ddelta(E)) * std::polar(1.0, 2.0 * c.delta(E)));
  Eigen::VectorXcd d = Eigen::Map<Eigen::VectorXcd>(diag.data(), static_cast<long>(diag.size()));
  return Eigen::MatrixXcd(d.asDiagonal());
}

std::optional<double> PhaseShiftFamily::xi_prime(double E) const { return -model_.total_dphase(E) / kPi; }

BornExponentialFamily::BornExponentialFamily(PotentialModel V, std::shared_ptr<const SphereQuadrature> sq, Mass m)
    : V_(V), sq_(std::move(sq)), m_(m) {}

Eigen::MatrixXcd BornExponentialFamily::extended(double E) const {
  ShellOperator K = born_kernel_weighted(V_, E, sq_, m_);
  return unitary_exp(-2.0 * kPi * K.matrix);
}

Eigen::MatrixXcd BornExponentialFamily::projector(double E) const { return fiber_projector(E, *sq_, m_); }

MultiplierShellFamily::MultiplierShellFamily(MultiplierSMatrix s, std::shared_ptr<const SphereQuadrature> sq)
    : s_(std::move(s)), sq_(std::move(sq)) {}

Eigen::MatrixXcd MultiplierShellFamily::projector(double E) const { return fiber_projector(E, *sq_, s_.mass()); }

Eigen::MatrixXcd MultiplierShellFamily::extended(double E) const {
  Eigen::MatrixXcd P = projector(E);
  int sign = E > 0 ? 1 : -1;
  double pabs = shell_radius(E, s_.mass().value());
  Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(P.rows(), P.cols());
  return I + (s_.s(sign, pabs) - 1.0) * P;
}

std::optional<Eigen::MatrixXcd> MultiplierShellFamily::derivative(double E) const {
  // U = I + (s - 1) P  =>  U' = s' P + (s - 1) P'; the P' part drops out of
  // P U* U' P, so only s' P is kept.
  int sign = E > 0 ? 1 : -1;
  double pabs = shell_radius(E, s_.mass().value());
  cplx ds_dE = cplx(0.0, 2.0) * s_.ddelta_dE(sign, pabs) * s_.s(sign, pabs);
  return Eigen::MatrixXcd(ds_dE * projector(E));
}

namespace {

Eigen::MatrixXcd central_difference(const UnitaryFamily& family, double E, double h) {
  return (family.extended(E + h) - family.extended(E - h)) / (2.0 * h);
}

void check_unitary(const Eigen::MatrixXcd& U, double E) {
  long d = U.rows();
  double defect = (U.adjoint() * U - Eigen::MatrixXcd::Identity(d, d)).norm();
  if (defect > 1e-8)
    throw Error(ErrorKind::NonUnitary, "family is not unitary at E = " + std::to_string(E) +
                                           " (defect " + std::to_string(defect) + ")");
}

}  // namespace

ShellOperator eisenbud_wigner_matrix(const UnitaryFamily& family, double E, double dE_step) {
  Eigen::MatrixXcd U = family.extended(E);
  check_unitary(U, E);
  auto dU = family.derivative(E);
  Eigen::MatrixXcd D = dU ? *dU : central_difference(family, E, dE_step);
  Eigen::MatrixXcd P = family.projector(E);
  ShellOperator T;
  T.energy = E;
  T.sq = family.sphere();
  T.projector = P;
  T.matrix = P * (cplx(0.0, -1.0) * U.adjoint() * D) * P;
  return T;
}

EwDelay ew_delay_integral(const SpinorField& f, const UnitaryFamily& family, const EnergyQuadrature& eq,
                          const std::shared_ptr<const SphereQuadrature>& sq, double dE_step) {
  if (window_mass_fraction(f, eq) < 0.9999)
    emit_warning("window-coverage", "energy windows miss more than 1e-4 of the field's mass");
  ShellSampler sampler(f);
  std::vector<cplx> parts(eq.size());
  for (std::size_t i = 0; i < eq.size(); ++i) {
    EnergyShellVector h = sampler.restrict(eq.energies[i], sq);
    ShellOperator T = eisenbud_wigner_matrix(family, eq.energies[i], dE_step);
    if (T.matrix.rows() != h.values.size())
      throw Error(ErrorKind::GridMismatch, "family and sphere rule have different shell dimensions");
    Eigen::VectorXcd hw = h.values;
    for (std::size_t k = 0; k < sq->size(); ++k) hw.segment<4>(4 * k) *= std::sqrt(sq->weights[k]);
    parts[i] = eq.weights[i] * hw.dot(T.matrix * hw);
  }
  cplx total = parallel::pairwise_merge(parts);
  return {total.real(), total.imag()};
}

EwDelay ew_delay_integral(const SpinorField& f, const MultiplierSMatrix& s, const EnergyQuadrature& eq,
                          const std::shared_ptr<const SphereQuadrature>& sq) {
  if (window_mass_fraction(f, eq) < 0.9999)
    emit_warning("window-coverage", "energy windows miss more than 1e-4 of the field's mass");
  ShellSampler sampler(f);
  const double m = f.mass().value();
  std::vector<double> parts(eq.size());
  for (std::size_t i = 0; i < eq.size(); ++i) {
    double E = eq.energies[i];
    int sign = E > 0 ? 1 : -1;
    double t = 2.0 * s.ddelta_dE(sign, shell_radius(E, m));
    parts[i] = eq.weights[i] * t * sampler.restrict(E, sq).norm2();
  }
  return {parallel::pairwise_merge(parts), 0.0};
}

cplx family_determinant(const UnitaryFamily& family, double E) {
  Eigen::MatrixXcd U = family.extended(E);
  if (U.rows() == 0) return 1.0;
  return U.partialPivLu().determinant();
}

std::vector<SsfSample> ssf_from_determinant(const UnitaryFamily& family, const std::vector<double>& E_path,
                                            bool require_anchor) {
  std::vector<SsfSample> out;
  if (E_path.empty()) return out;
  for (std::size_t i = 1; i < E_path.size(); ++i)
    if (!(E_path[i] > E_path[i - 1])) throw Error(ErrorKind::InvalidArgument, "energy path must be increasing");
  cplx prev = family_determinant(family, E_path[0]);
  double arg0 = std::arg(prev);
  if (require_anchor && std::abs(arg0) >= 0.5 * kPi)
    throw Error(ErrorKind::NotIdentityAnchored,
                "family is not close to the identity at the anchor energy " + std::to_string(E_path[0]));
  double xi = -arg0 / (2.0 * kPi);
  out.push_back({E_path[0], xi, 0});
  for (std::size_t i = 1; i < E_path.size(); ++i) {
    cplx d = family_determinant(family, E_path[i]);
    double step = std::arg(d / prev);
    if (std::abs(step) > 0.5 * kPi)
      throw Error(ErrorKind::BranchJump, "arg Det S changes by more than pi/2 between E = " +
                                             std::to_string(E_path[i - 1]) + " and " + std::to_string(E_path[i]));
    xi -= step / (2.0 * kPi);
    double principal = -std::arg(d) / (2.0 * kPi);
    out.push_back({E_path[i], xi, std::lround(xi - principal)});
    prev = d;
  }
  return out;
}

namespace {

cplx trace_T(const UnitaryFamily& family, double E, double h, bool allow_analytic) {
  Eigen::MatrixXcd U = family.extended(E);
  check_unitary(U, E);
  std::optional<Eigen::MatrixXcd> dU;
  if (allow_analytic) dU = family.derivative(E);
  Eigen::MatrixXcd D = dU ? *dU : central_difference(family, E, h);
  Eigen::MatrixXcd P = family.projector(E);
  return (P * (cplx(0.0, -1.0) * U.adjoint() * D) * P).trace();
}

double xi_prime_fd(const UnitaryFamily& family, double E, double h) {
  cplx a = family_determinant(family, E - h), b = family_determinant(family, E + h);
  return -std::arg(b / a) / (2.0 * kPi * 2.0 * h);
}

}  // namespace

double trace_delay_check(const UnitaryFamily& family, double E, double dE_step) {
  auto xp = family.xi_prime(E);
  if (!xp) return trace_delay_check_fd(family, E, dE_step);
  return std::abs(trace_T(family, E, dE_step, true) + 2.0 * kPi * *xp);
}

double trace_delay_check_fd(const UnitaryFamily& family, double E, double dE_step) {
  return std::abs(trace_T(family, E, dE_step, false) + 2.0 * kPi * xi_prime_fd(family, E, dE_step));
}

double jacobi_residual(const UnitaryFamily& family, double E, double h) {
  cplx lhs = (family_determinant(family, E + h) - family_determinant(family, E - h)) / (2.0 * h);
  Eigen::MatrixXcd U = family.extended(E);
  cplx det = U.rows() == 0 ? cplx(1.0) : U.partialPivLu().determinant();
  cplx rhs = det * (U.adjoint() * central_difference(family, E, h)).trace();
  return std::abs(lhs - rhs);
}

void write_ssf_csv(const std::string& path, const std::vector<SsfSample>& xi, const std::vector<double>& trace_T,
                   const std::vector<double>& residual) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw Error(ErrorKind::Io, "cannot open " + path);
  std::fprintf(fp, "E,xi,branch,trace_T,residual\n");
  for (std::size_t i = 0; i < xi.size(); ++i)
    std::fprintf(fp, "%.17g,%.17g,%ld,%.17g,%.17g\n", xi[i].E, xi[i].xi, xi[i].branch,
                 i < trace_T.size() ? trace_T[i] : 0.0, i < residual.size() ? residual[i] : 0.0);
  if (std::fclose(fp) != 0) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace sojourn
