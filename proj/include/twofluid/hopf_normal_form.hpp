#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "domain.hpp"
#include "linear_stability.hpp"
#include "mat2.hpp"
#include "spectral_core.hpp"

namespace twofluid {

enum class Threshold { left = 1, right = 2 };

inline const char* to_string(Threshold t) { return t == Threshold::left ? "left" : "right"; }

/// Critical point of the k2 region. Constants use the reduced period L2/k2.
struct BifurcationPoint {
  Threshold which = Threshold::right;
  int k2 = 1;
  double dT_c = 0.0;
  double omega = 0.0;  // comoving frequency
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  double L1 = 0.0, L2 = 0.0;  // L2 here is the reduced period
  double nu = 0.0;
  bool point_region = false;

  /// c3^2 - c1 (2 c2 - c1), relative to c3^2 + c1^2
  double c_relation_residual() const {
    return std::abs(c3 * c3 - c1 * (2.0 * c2 - c1)) / std::max(c3 * c3 + c1 * c1, 1e-300);
  }
};

inline BifurcationPoint bifurcation_point(const DomainConfig& cfg, Threshold which, int k2 = 1) {
  cfg.validate();
  const auto r = instability_interval(cfg, k2);
  if (r.status == RegionStatus::absent)
    throw PreconditionError("no instability region for k2 = " + std::to_string(k2));
  BifurcationPoint bp;
  bp.which = which;
  bp.k2 = k2;
  bp.dT_c = which == Threshold::left ? r.dT1 : r.dT2;
  bp.L1 = cfg.L1;
  bp.L2 = cfg.L2 / k2;
  bp.nu = cfg.nu;
  bp.point_region = r.status == RegionStatus::point;
  const double L1 = bp.L1, L2 = bp.L2;
  bp.c1 = pi * bp.dT_c / L2;
  bp.c2 = 2.0 / (pi * (L2 / L1 + 4.0 * L1 / L2));
  bp.c3 = cfg.nu * pi * pi * (1.0 / (L1 * L1) + 4.0 / (L2 * L2));
  bp.c4 = cfg.nu > 0 ? bp.c3 / cfg.nu : pi * pi * (1.0 / (L1 * L1) + 4.0 / (L2 * L2));
  bp.omega = bp.c1;
  return bp;
}

struct CriticalVectors {
  Vec2 xi;    // kernel of M - i omega
  Vec2 eta;   // kernel of M^* + i omega, scaled so xi . conj(eta) = 2/(L1 L2)
  cplx delta;
};

inline CriticalVectors eigenvectors(const BifurcationPoint& bp) {
  const cplx I(0.0, 1.0);
  const double c1 = bp.c1, c2 = bp.c2, c3 = bp.c3;
  const cplx den = (I * c1 - c3) * (I * c1 - 2.0 * I * c2 - c3);
  if (std::abs(den) < 1e-300) throw SingularError("degenerate adjoint normalization");
  CriticalVectors v;
  v.delta = (2.0 / (bp.L1 * bp.L2)) / den;
  v.xi = {I * c2, I * c1 - I * c2 - c3};
  const Vec2 eta_bar = {v.delta * (-I * c2), v.delta * (I * c1 - I * c2 - c3)};
  v.eta = {std::conj(eta_bar[0]), std::conj(eta_bar[1])};
  return v;
}

/// matrix of the linearization at the critical mode, on the reduced domain
inline Mat2 critical_matrix(const BifurcationPoint& bp) {
  DomainConfig c;
  c.L1 = bp.L1;
  c.L2 = bp.L2;
  c.nu = bp.nu;
  c.T_minus = 0.0;
  c.T_plus = bp.dT_c;
  return linear_mode_matrix(c, 1, 1);
}

namespace detail {
inline cplx a_denominator(const BifurcationPoint& bp) {
  const cplx I(0.0, 1.0);
  return (bp.c1 + bp.c3 * I) * (I * bp.c1 - 2.0 * I * bp.c2 - bp.c3);
}
}  // namespace detail

/// linear unfolding coefficient, equal to d lambda_plus / d dT at the threshold
inline cplx coeff_a(const BifurcationPoint& bp) {
  return 2.0 * pi * bp.c2 * bp.c2 / (bp.L2 * detail::a_denominator(bp));
}

/// the same coefficient through the adjoint normalizer
inline cplx coeff_a_dual(const BifurcationPoint& bp) {
  return pi * bp.c2 * bp.c2 * bp.L1 * eigenvectors(bp).delta * cplx(0.0, 1.0);
}

/// Literal reading with (c1 - c3 i) in the first factor; kept for reports only.
inline cplx coeff_a_printed(const BifurcationPoint& bp) {
  const cplx I(0.0, 1.0);
  return 2.0 * pi * bp.c2 * bp.c2 / (bp.L2 * (bp.c1 - bp.c3 * I) * (I * bp.c1 - 2.0 * I * bp.c2 - bp.c3));
}

/// cubic coefficient of the reduced equation; real and negative
inline cplx coeff_b(const BifurcationPoint& bp) {
  if (!(bp.nu > 0.0)) throw SingularError("cubic coefficient is singular at nu = 0");
  const double l = bp.L2 / bp.L1, s = l * l + 4.0;
  return -bp.L2 * bp.L2 * (bp.c1 * bp.c1 + bp.c3 * bp.c3) / (pi * pi * bp.nu * s * s);
}

/// Literal closed form -(L1^3/(4 pi^2 nu)) (c1^2+c3^2)/(L2^2/L1 + 4 L1); differs by 4 l^2/(l^2+4).
inline cplx coeff_b_printed(const BifurcationPoint& bp) {
  if (!(bp.nu > 0.0)) throw SingularError("cubic coefficient is singular at nu = 0");
  const double L1 = bp.L1, L2 = bp.L2;
  return -(L1 * L1 * L1 / (4.0 * pi * pi * bp.nu)) * (bp.c1 * bp.c1 + bp.c3 * bp.c3) / (L2 * L2 / L1 + 4.0 * L1);
}

// ---------------------------------------------------------------------------
// numeric oracle: assemble the coefficients from the Galerkin bilinear form

struct HopfNumeric {
  cplx a;                   // <R11 zeta, zeta*> / <zeta, zeta*>
  cplx b;                   // <2 R20(zeta, psi110) + 2 R20(conj zeta, psi200), zeta*> / <zeta, zeta*>
  double r20_zz_norm = 0;   // max |R20(zeta, zeta)|
  double psi200_norm = 0;   // max |psi200|
  double psi110_norm = 0;
  double off_support = 0;   // max |R20(zeta, psi110)| outside modes (1,+-k2), (3,+-k2)
  SpectralState r110;       // 2 R20(zeta, conj zeta)
  SpectralState psi110;
};

namespace detail {
inline cplx inner2(const SpectralState& u, const SpectralState& v, double area) {
  cplx s = 0.0;
  for (int l = 0; l < 2; ++l) {
    const auto& a = u.component(l).raw();
    const auto& b = v.component(l).raw();
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  }
  return 0.5 * area * s;
}

// solve (shift I - M_k) x_k = rhs_k mode by mode
inline SpectralState solve_modes(const SpectralState& rhs, const DomainConfig& cfg, cplx shift) {
  SpectralState out(rhs.N1(), rhs.N2(), rhs.complexified());
  for (int k1 = 1; k1 <= rhs.N1(); ++k1)
    for (int k2 = -rhs.N2(); k2 <= rhs.N2(); ++k2) {
      const Vec2 r = rhs.mode(k1, k2);
      if (vnorm(r) == 0.0) continue;
      const Mat2 A = Mat2::identity() * shift - linear_mode_matrix(cfg, k1, k2);
      out.set_mode(k1, k2, A.solve(r, 1e-12));
    }
  return out;
}
}  // namespace detail

/// Assembles a and b on the full domain with truncation N (>= 4).
inline HopfNumeric hopf_numeric(const BifurcationPoint& bp, const DomainConfig& cfg, int N = 4) {
  if (N < 4) throw PreconditionError("hopf_numeric needs truncation N >= 4");
  if (!(cfg.nu > 0.0)) throw SingularError("cubic coefficient is singular at nu = 0");
  const DomainConfig c = cfg.with_dT(bp.dT_c);
  const int k2 = bp.k2;
  const int N1 = N, N2 = std::max(N, 2 * k2);
  const auto vec = eigenvectors(bp);
  const double area = c.L1 * c.L2;

  SpectralState zeta(N1, N2, true), zstar(N1, N2, true);
  zeta.set_mode(1, k2, vec.xi);
  zstar.set_mode(1, k2, vec.eta);
  const SpectralState zbar = zeta.conjugate();
  const cplx norm = detail::inner2(zeta, zstar, area);

  Advection adv(c, N1, N2);
  HopfNumeric out;

  const auto r200 = adv.bilinear(zeta, zeta);
  out.r20_zz_norm = r200.max_abs();
  const auto psi200 = detail::solve_modes(r200, c, cplx(0.0, 2.0 * bp.omega));
  out.psi200_norm = psi200.max_abs();

  out.r110 = 2.0 * adv.bilinear(zeta, zbar);
  out.psi110 = detail::solve_modes(out.r110, c, 0.0);  // -L psi = r  <=>  (0 - M) psi = r
  out.psi110_norm = out.psi110.max_abs();

  const auto t1 = adv.bilinear(zeta, out.psi110);
  for (int l = 0; l < 2; ++l)
    for (int a1 = 1; a1 <= N1; ++a1)
      for (int a2 = -N2; a2 <= N2; ++a2) {
        const bool on = (a1 == 1 || a1 == 3) && std::abs(a2) == k2;
        if (!on) out.off_support = std::max(out.off_support, std::abs(t1.at(a1, a2, l)));
      }
  const auto cubic = 2.0 * t1 + 2.0 * adv.bilinear(zbar, psi200);
  out.b = detail::inner2(cubic, zstar, area) / norm;

  // parameter derivative of the linear part: (d/dx2 u1, 0)
  SpectralState r11(N1, N2, true);
  r11.at(1, k2, 0) = cplx(0.0, 2.0 * pi * k2 / c.L2) * vec.xi[0];
  out.a = detail::inner2(r11, zstar, area) / norm;
  return out;
}

inline cplx coeff_b_numeric(const BifurcationPoint& bp, const DomainConfig& cfg, int N = 4) {
  return hopf_numeric(bp, cfg, N).b;
}

// ---------------------------------------------------------------------------
// degenerate point region (nu = nu_crit(1))

struct DegenerateCoefficients {
  double a0, a1, a2, a3;
  BifurcationPoint bp;
};

inline DegenerateCoefficients degenerate_coeffs(const DomainConfig& cfg) {
  const auto r = instability_interval(cfg, 1);
  if (r.status != RegionStatus::point)
    throw PreconditionError("degenerate coefficients need nu = nu_crit(1) (point region)");
  DegenerateCoefficients d;
  d.bp = bifurcation_point(cfg, Threshold::right, 1);
  const auto& bp = d.bp;
  const double P2 = std::norm(detail::a_denominator(bp));
  d.a0 = coeff_a(bp).imag();
  // Re a / (c2 - c1) without the removable 0/0
  d.a1 = (pi / bp.L2) * 4.0 * pi * bp.c2 * bp.c2 * bp.c3 / (bp.L2 * P2);
  d.a2 = 1.0 / std::sqrt(pi * bp.L1 * bp.L2);
  d.a3 = pi / (bp.L2 * bp.L2);
  return d;
}

/// real part of the reduced unfolding at (mu1, mu2)
inline double reduced_real_part(const DegenerateCoefficients& d, double mu1, double mu2) {
  return d.a1 * mu1 * (d.a2 * mu2 - d.a3 * mu1);
}

/// mu1 a + mu2^2 pi^2 (1/L1^2 + 4/L2^2)
inline cplx unfolding_A(const DegenerateCoefficients& d, double mu1, double mu2) {
  const auto& bp = d.bp;
  return mu1 * coeff_a(bp) + mu2 * mu2 * pi * pi * (1.0 / (bp.L1 * bp.L1) + 4.0 / (bp.L2 * bp.L2));
}

/// Re lambda_plus at (dT_c + mu1, nu_crit - mu2^2); the gap to reduced_real_part is the remainder
inline double exact_real_part(const DomainConfig& cfg, const DegenerateCoefficients& d, double mu1, double mu2) {
  DomainConfig c = cfg.with_dT(d.bp.dT_c + mu1);
  c.nu = nu_crit(cfg, 1.0) - mu2 * mu2;
  return closed_form_eigenvalues(c, 1, 1).plus.real();
}

// ---------------------------------------------------------------------------
// predicted cycle

struct CyclePrediction {
  double radius = 0.0;
  double frequency_comoving = 0.0;
  double frequency_lab = std::numeric_limits<double>::quiet_NaN();
  double speed = 0.0;  // phase speed in the comoving frame
  double period_lab() const { return 2.0 * pi / frequency_lab; }
};

/// First-order prediction at dT = dT_c + mu1. mu1 Re(a) must be >= 0.
inline CyclePrediction predicted_cycle(const BifurcationPoint& bp, const DomainConfig& cfg, double mu1) {
  const cplx a = coeff_a(bp), b = coeff_b(bp);
  if (mu1 * a.real() < 0.0) throw PreconditionError("predicted_cycle: mu1 is on the subcritical side");
  CyclePrediction p;
  p.radius = mu1 == 0.0 ? 0.0 : std::sqrt(-mu1 * a.real() / b.real());
  p.frequency_comoving = bp.omega + mu1 * a.imag() + b.imag() * p.radius * p.radius;
  if (!bp.point_region) p.frequency_lab = p.frequency_comoving + 2.0 * pi * bp.k2 * cfg.T_minus / cfg.L2;
  p.speed = -bp.omega * bp.L2 / (2.0 * pi);
  return p;
}

}  // namespace twofluid
