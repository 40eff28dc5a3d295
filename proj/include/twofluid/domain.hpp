#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace twofluid {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

// error kinds; the CLI maps UsageError-like failures to exit 2, the rest to 1
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResolutionError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct PreconditionError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct SingularError : NumericalError {
  using NumericalError::NumericalError;
};

/// Geometry and transport parameters. ell and dT are computed on demand.
struct DomainConfig {
  double L1 = 2.0;
  double L2 = 2.0;
  double nu = 9e-4;
  double T_plus = 0.2;
  double T_minus = 0.1;

  double ell() const { return L2 / L1; }
  double dT() const { return T_plus - T_minus; }

  /// copy with T_plus moved so that dT() == d
  DomainConfig with_dT(double d) const {
    DomainConfig c = *this;
    c.T_plus = c.T_minus + d;
    return c;
  }

  void validate() const {
    if (!(L1 > 0.0) || !std::isfinite(L1))
      throw DomainError("L1 must be positive, got " + std::to_string(L1));
    if (!(L2 > 0.0) || !std::isfinite(L2))
      throw DomainError("L2 must be positive, got " + std::to_string(L2));
    if (!(nu >= 0.0) || !std::isfinite(nu))
      throw DomainError("nu must be non-negative, got " + std::to_string(nu));
    if (!std::isfinite(T_plus) || !std::isfinite(T_minus))
      throw DomainError("temperatures must be finite");
  }
};

/// Global stability threshold 4 L1 / pi^2.
inline double dT_star(const DomainConfig& cfg) { return 4.0 * cfg.L1 / (pi * pi); }

struct ModeIndex {
  int k1 = 1;
  int k2 = 0;
  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

}  // namespace twofluid
