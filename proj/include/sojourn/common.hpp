#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace sojourn {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  InvalidSize,
  DegenerateInput,
  ZeroField,
  GridMismatch,
  OriginSupport,
  OutOfBand,
  EnergyGap,
  WrapAround,
  HorizonExceeded,
  NonUnitary,
  BranchJump,
  NotIdentityAnchored,
  InvalidArgument,
  Config,
  Io,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Nonnegative rest mass in natural units.
class Mass {
 public:
  Mass() = default;
  explicit Mass(double m) : m_(m) {
    if (!(m >= 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be nonnegative");
  }
  double value() const { return m_; }
  bool operator==(const Mass& o) const { return m_ == o.m_; }

 private:
  double m_ = 0.0;
};

// Non-fatal diagnostics (boundary leakage, window coverage, fit quality).
// Collected process-wide; experiments drain them into their reports.
struct Warning {
  std::string code;
  std::string message;
};
void emit_warning(const std::string& code, const std::string& message);
std::vector<Warning> drain_warnings();

inline double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
inline double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace sojourn
