#include "sojourn/dirac_algebra.hpp"

namespace sojourn {

namespace {

DiracMatrixSet build_standard() {
  const cplx I(0.0, 1.0);
  Eigen::Matrix2cd s1, s2, s3;
  s1 << 0, 1, 1, 0;
  s2 << 0, -I, I, 0;
  s3 << 1, 0, 0, -1;
  auto offdiag = [](const Eigen::Matrix2cd& s) {
    Matrix4 a = Matrix4::Zero();
    a.block<2, 2>(0, 2) = s;
    a.block<2, 2>(2, 0) = s;
    return a;
  };
  DiracMatrixSet d;
  d.alpha1 = offdiag(s1);
  d.alpha2 = offdiag(s2);
  d.alpha3 = offdiag(s3);
  d.beta = Matrix4::Zero();
  d.beta.diagonal() << 1, 1, -1, -1;
  return d;
}

}  // namespace

const Matrix4& DiracMatrixSet::alpha(int j) const {
  switch (j) {
    case 0: return alpha1;
    case 1: return alpha2;
    case 2: return alpha3;
    case 3: return beta;
  }
  throw Error(ErrorKind::InvalidArgument, "alpha index out of range");
}

const DiracMatrixSet& standard_matrices() {
  static const DiracMatrixSet d = build_standard();
  return d;
}

HermitianMatrix4 symbol_h0(const Vec3& xi, Mass m) {
  const auto& d = standard_matrices();
  Matrix4 h = xi[0] * d.alpha1 + xi[1] * d.alpha2 + xi[2] * d.alpha3 + m.value() * d.beta;
  return HermitianMatrix4(h);
}

HermitianMatrix4 energy_projector(const Vec3& xi, Mass m, int sign) {
  if (sign != 1 && sign != -1) throw Error(ErrorKind::InvalidArgument, "sign must be +1 or -1");
  double e = dispersion(xi, m.value());
  if (e == 0.0) throw Error(ErrorKind::DegenerateInput, "projector undefined at m=0, xi=0");
  Matrix4 p = 0.5 * (Matrix4::Identity() + (sign / e) * symbol_h0(xi, m).matrix());
  return HermitianMatrix4(p);
}

Spinor apply_h0(const Vec3& xi, double m, const Spinor& v) {
  // alpha.xi acts as sigma.xi between upper (u) and lower (l) halves.
  const cplx I(0.0, 1.0);
  auto sigma = [&](cplx a, cplx b, cplx& ra, cplx& rb) {
    ra = xi[2] * a + (xi[0] - I * xi[1]) * b;
    rb = (xi[0] + I * xi[1]) * a - xi[2] * b;
  };
  Spinor r;
  cplx u0, u1, l0, l1;
  sigma(v[2], v[3], u0, u1);
  sigma(v[0], v[1], l0, l1);
  r[0] = u0 + m * v[0];
  r[1] = u1 + m * v[1];
  r[2] = l0 - m * v[2];
  r[3] = l1 - m * v[3];
  return r;
}

Spinor apply_projector(const Vec3& xi, double m, int sign, const Spinor& v) {
  double e = dispersion(xi, m);
  if (e == 0.0) throw Error(ErrorKind::DegenerateInput, "projector undefined at m=0, xi=0");
  return 0.5 * (v + (sign / e) * apply_h0(xi, m, v));
}

}  // namespace sojourn
