#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sojourn/spectral_transform.hpp"

namespace sojourn {

enum class PhaseFamily { BreitWigner, Bump, Constant };
const char* phase_family_name(PhaseFamily f);
PhaseFamily phase_family_from_name(const std::string& name);

// One scattering channel. Breit-Wigner uses e_res and gamma, the bump uses
// amplitude, center and width, the constant uses amplitude.
struct PhaseChannel {
  int sign = 1;
  PhaseFamily family = PhaseFamily::Constant;
  double e_res = 0.0;
  double gamma = 0.0;
  double amplitude = 0.0;
  double center = 0.0;
  double width = 1.0;
  int multiplicity = 1;

  // Breit-Wigner is taken on its continuous branch pi/2 + atan((E - E_res)/(Gamma/2)),
  // which rises from 0 to pi; it differs from atan((Gamma/2)/(E_res - E)) by pi above E_res.
  double delta(double E) const;
  double ddelta(double E) const;
};

struct PhaseShiftModel {
  std::vector<PhaseChannel> channels;

  void validate() const;
  // Dimension of the channel space at energy E (channels of matching sign).
  int dimension(double E) const;
  // Sum of multiplicity * delta over channels of matching sign.
  double total_phase(double E) const;
  double total_dphase(double E) const;
};

class MultiplierSMatrix {
 public:
  MultiplierSMatrix(PhaseShiftModel model, Mass m);
  const PhaseShiftModel& model() const { return model_; }
  Mass mass() const { return m_; }

  double delta(int sign, double pabs) const;
  double ddelta_dE(int sign, double pabs) const;
  cplx s(int sign, double pabs) const;
  // d s / d|p|
  cplx ds(int sign, double pabs) const;

  SpinorField apply(const SpinorField& f) const;
  // max over the grid of | |s| - 1 |
  double unitarity_defect(const MomentumGrid& grid) const;

 private:
  const PhaseChannel* channel(int sign) const;
  PhaseShiftModel model_;
  Mass m_;
  int pos_ = -1;
  int neg_ = -1;
};

MultiplierSMatrix multiplier_from_phases(const PhaseShiftModel& model, Mass m);

// Matrix acting on shell coordinates (4 * node + component), restricted to the
// fiber: P M P = M where P is the node-wise projector. For channel-basis
// families the projector is the identity.
struct ShellOperator {
  double energy = 0.0;
  std::shared_ptr<const SphereQuadrature> sq;
  Eigen::MatrixXcd matrix;
  Eigen::MatrixXcd projector;

  // ||(I - P) M P|| / ||M|| and ||P M P - M|| / ||M||, Frobenius norms
  double leakage() const;
  double fiber_defect() const;
  double hermiticity_defect() const;  // ||M - M*|| / ||M||
  double unitarity_defect() const;    // ||M* M - P||
};

// Analytic Fourier transform (2 pi)^{-3/2} int e^{-ik.x} V(x) dx of a model potential.
struct PotentialModel {
  enum class Kind { Gaussian, Yukawa } kind = Kind::Gaussian;
  double amplitude = 1.0;
  double range = 1.0;  // Gaussian width a, or Yukawa decay length 1/mu
  bool times_beta = false;

  Matrix4 vhat(const Vec3& k) const;
};

// Node-wise block projector P_{omega_k}(E).
Eigen::MatrixXcd fiber_projector(double E, const SphereQuadrature& sq, Mass m);

// K with the sqrt(w) weights applied on both sides.
ShellOperator born_kernel_weighted(const PotentialModel& V, double E,
                                   const std::shared_ptr<const SphereQuadrature>& sq, Mass m);
ShellOperator born_shell_kernel(const PotentialModel& V, double E, const std::shared_ptr<const SphereQuadrature>& sq,
                                Mass m);
ShellOperator unitary_exponential_smatrix(const PotentialModel& V, double E,
                                          const std::shared_ptr<const SphereQuadrature>& sq, Mass m);

// E -> unitary matrix on a fixed coordinate space. `extended` is the full-space
// unitary U = S + (I - P) whose restriction to the fiber is S(E).
class UnitaryFamily {
 public:
  virtual ~UnitaryFamily() = default;
  virtual Eigen::MatrixXcd extended(double E) const = 0;
  virtual Eigen::MatrixXcd projector(double E) const;
  virtual std::optional<Eigen::MatrixXcd> derivative(double /*E*/) const { return std::nullopt; }
  // -(1/pi) sum of phase derivatives, when known in closed form
  virtual std::optional<double> xi_prime(double /*E*/) const { return std::nullopt; }
  virtual std::shared_ptr<const SphereQuadrature> sphere() const { return nullptr; }
};

// Diagonal channel-basis family diag(e^{2 i delta_k(E)}) with multiplicities.
class PhaseShiftFamily : public UnitaryFamily {
 public:
  explicit PhaseShiftFamily(PhaseShiftModel model);
  Eigen::MatrixXcd extended(double E) const override;
  std::optional<Eigen::MatrixXcd> derivative(double E) const override;
  std::optional<double> xi_prime(double E) const override;
  const PhaseShiftModel& model() const { return model_; }

 private:
  PhaseShiftModel model_;
};

// Arbitrary E -> unitary matrix, differentiated numerically.
class MatrixFunctionFamily : public UnitaryFamily {
 public:
  explicit MatrixFunctionFamily(std::function<Eigen::MatrixXcd(double)> fn) : fn_(std::move(fn)) {}
  Eigen::MatrixXcd extended(double E) const override { return fn_(E); }

 private:
  std::function<Eigen::MatrixXcd(double)> fn_;
};

// exp(-2 pi i K(E)) on the shell, K the weighted Born kernel.
class BornExponentialFamily : public UnitaryFamily {
 public:
  BornExponentialFamily(PotentialModel V, std::shared_ptr<const SphereQuadrature> sq, Mass m);
  Eigen::MatrixXcd extended(double E) const override;
  Eigen::MatrixXcd projector(double E) const override;
  std::shared_ptr<const SphereQuadrature> sphere() const override { return sq_; }

 private:
  PotentialModel V_;
  std::shared_ptr<const SphereQuadrature> sq_;
  Mass m_;
};

// Multiplier seen on the energy shell: s(E) times the identity of the fiber.
class MultiplierShellFamily : public UnitaryFamily {
 public:
  MultiplierShellFamily(MultiplierSMatrix s, std::shared_ptr<const SphereQuadrature> sq);
  Eigen::MatrixXcd extended(double E) const override;
  Eigen::MatrixXcd projector(double E) const override;
  std::optional<Eigen::MatrixXcd> derivative(double E) const override;
  std::shared_ptr<const SphereQuadrature> sphere() const override { return sq_; }
  const MultiplierSMatrix& multiplier() const { return s_; }

 private:
  MultiplierSMatrix s_;
  std::shared_ptr<const SphereQuadrature> sq_;
};

// Hermitian exp(i A) for Hermitian A, through the eigendecomposition.
Eigen::MatrixXcd unitary_exp(const Eigen::MatrixXcd& hermitian_generator);

// T(E) = P (-i U* dU/dE) P. Analytic derivative when the family has one,
// otherwise a central difference with step dE_step.
ShellOperator eisenbud_wigner_matrix(const UnitaryFamily& family, double E, double dE_step);

struct EwDelay {
  double value = 0.0;
  double imag_residue = 0.0;
};

EwDelay ew_delay_integral(const SpinorField& f, const UnitaryFamily& family, const EnergyQuadrature& eq,
                          const std::shared_ptr<const SphereQuadrature>& sq, double dE_step = 1e-4);
// Multiplier route: T(E) is 2 delta'(E) on the fiber, so only shell norms are needed.
EwDelay ew_delay_integral(const SpinorField& f, const MultiplierSMatrix& s, const EnergyQuadrature& eq,
                          const std::shared_ptr<const SphereQuadrature>& sq);

struct SsfSample {
  double E = 0.0;
  double xi = 0.0;
  long branch = 0;
};

cplx family_determinant(const UnitaryFamily& family, double E);

// Branch-tracked xi(E) = -arg Det S(E) / (2 pi). The first energy is the
// anchor; unless `require_anchor` is false it must have |arg Det| < pi/2.
std::vector<SsfSample> ssf_from_determinant(const UnitaryFamily& family, const std::vector<double>& E_path,
                                            bool require_anchor = true);

// |Tr T(E) + 2 pi xi'(E)|; closed-form xi' when the family provides it.
double trace_delay_check(const UnitaryFamily& family, double E, double dE_step);
// Same with every derivative taken by central differences.
double trace_delay_check_fd(const UnitaryFamily& family, double E, double dE_step);

double jacobi_residual(const UnitaryFamily& family, double E, double dE_step);

void write_ssf_csv(const std::string& path, const std::vector<SsfSample>& xi, const std::vector<double>& trace_T,
                   const std::vector<double>& residual);

}  // namespace sojourn
