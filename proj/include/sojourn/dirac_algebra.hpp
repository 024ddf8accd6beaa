#pragma once

#include <Eigen/Dense>

#include "sojourn/common.hpp"

namespace sojourn {

using Matrix4 = Eigen::Matrix4cd;
using Spinor = Eigen::Vector4cd;

// Dense 4x4 matrix that is Hermitian by construction.
class HermitianMatrix4 {
 public:
  HermitianMatrix4() : m_(Matrix4::Zero()) {}
  // Caller guarantees Hermiticity.
  explicit HermitianMatrix4(const Matrix4& m) : m_(m) {}
  const Matrix4& matrix() const { return m_; }
  cplx operator()(int j, int k) const { return m_(j, k); }
  Spinor operator*(const Spinor& v) const { return m_ * v; }

 private:
  Matrix4 m_;
};

struct DiracMatrixSet {
  Matrix4 alpha1, alpha2, alpha3, beta;
  // alpha(0..2) are the alphas, alpha(3) is beta.
  const Matrix4& alpha(int j) const;
};

const DiracMatrixSet& standard_matrices();

HermitianMatrix4 symbol_h0(const Vec3& xi, Mass m);

// P_sign(xi) = (I + sign * h0(xi) / sqrt(xi^2 + m^2)) / 2.
HermitianMatrix4 energy_projector(const Vec3& xi, Mass m, int sign);

inline double dispersion(const Vec3& xi, double m) { return std::sqrt(dot3(xi, xi) + m * m); }

// P_sign(xi) v without forming the matrix. Used on hot grid loops.
Spinor apply_projector(const Vec3& xi, double m, int sign, const Spinor& v);
// h0(xi) v.
Spinor apply_h0(const Vec3& xi, double m, const Spinor& v);

}  // namespace sojourn
