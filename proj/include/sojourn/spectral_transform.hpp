#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sojourn/momentum_field.hpp"

namespace sojourn {

// Gauss-Legendre in cos(theta) times uniform phi. Node k = t * n_phi + j.
struct SphereQuadrature {
  int n_theta = 0;
  int n_phi = 0;
  std::vector<double> cos_theta;  // per ring
  std::vector<double> phi;        // per column
  std::vector<Vec3> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  // Spherical harmonics of degree <= this are integrated exactly.
  int exact_degree() const { return std::min(2 * n_theta - 1, n_phi - 1); }
};

std::shared_ptr<const SphereQuadrature> make_sphere_quadrature(int n_theta, int n_phi);

struct EnergyWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct EnergyQuadrature {
  std::vector<double> energies;
  std::vector<double> weights;
  std::vector<EnergyWindow> windows;
  std::size_t size() const { return energies.size(); }
};

// Composite Gauss-Legendre rule: `panels` equal panels per window,
// `points` nodes per panel. Every window must lie in |E| > m.
EnergyQuadrature make_energy_quadrature(const std::vector<EnergyWindow>& windows, int panels, int points,
                                        Mass m);

// Energy range covered by |p| in [|p0| - k sigma, |p0| + k sigma], for the packet's sign.
EnergyWindow energy_window_for_packet(const PacketSpec& spec, Mass m, double k_sigma = 6.0);

double shell_speed_factor(double E, double m);  // upsilon(E) = (E^2 (E^2 - m^2))^{1/4}
double shell_radius(double E, double m);        // nu(E) = sqrt(E^2 - m^2)

struct EnergyShellVector {
  double energy = 0.0;
  std::shared_ptr<const SphereQuadrature> sq;
  Eigen::VectorXcd values;  // 4 * node + component

  Spinor node(std::size_t k) const { return values.segment<4>(4 * k); }
  double norm2() const;
};

// Sum_k w_k <a(w_k), b(w_k)>.
cplx shell_inner(const EnergyShellVector& a, const EnergyShellVector& b);

// Evaluates the trace operator for one field at many energies. The momentum
// samples off the grid come from the field's trigonometric interpolant, i.e.
// (2 pi)^{-3/2} sum_x e^{-i q.x} psi(x) dx^3 on the dual position grid, done
// separably so each energy costs O(n^3 n_theta + n^2 n_theta n_phi).
class ShellSampler {
 public:
  explicit ShellSampler(const SpinorField& f);
  EnergyShellVector restrict(double E, const std::shared_ptr<const SphereQuadrature>& sq) const;
  const SpinorField& field() const { return field_; }

 private:
  const PositionField& sector_position(int sign) const;
  SpinorField field_;
  mutable std::optional<PositionField> pos_[2];
};

EnergyShellVector gamma0_restrict(const SpinorField& f, double E, const std::shared_ptr<const SphereQuadrature>& sq);
SpinorField gamma0_adjoint(const EnergyShellVector& h, const MomentumGrid& grid, Mass m);

struct ParsevalResult {
  double defect = 0.0;
  double norm2 = 0.0;
  double shell_norm2 = 0.0;
  double window_mass_fraction = 1.0;
};

ParsevalResult parseval_check(const SpinorField& f, const EnergyQuadrature& eq,
                              const std::shared_ptr<const SphereQuadrature>& sq);
double parseval_defect(const SpinorField& f, const EnergyQuadrature& eq,
                       const std::shared_ptr<const SphereQuadrature>& sq);

// max_i ||Gamma0(E_i) H0 f - E_i Gamma0(E_i) f||_shell
double diagonalization_residual(const SpinorField& f, const EnergyQuadrature& eq,
                                const std::shared_ptr<const SphereQuadrature>& sq);

// Fraction of ||f||^2 carried by grid points whose energy lies in a window.
double window_mass_fraction(const SpinorField& f, const EnergyQuadrature& eq);

// Rows: E, theta, phi, then re/im of the four components.
void write_shell_csv(const std::string& path, const std::vector<EnergyShellVector>& shells);

}  // namespace sojourn
