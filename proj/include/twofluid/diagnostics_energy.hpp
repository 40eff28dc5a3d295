#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "domain.hpp"
#include "spectral_core.hpp"
#include "spectral_state.hpp"

namespace twofluid {

struct EnergyRecord {
  double t = 0.0;
  double l2_sq = 0.0;              // ||u||^2
  double grad_v_sq = 0.0;          // int |grad V|^2
  double dissipation_accum = 0.0;  // running time integral of the viscous term
  double energy = 0.0;
};

inline double domain_area(const DomainConfig& cfg) { return cfg.L1 * cfg.L2; }

/// ||u1||^2 + ||u2||^2 by Parseval
inline double l2_norm_sq(const SpectralState& s, const DomainConfig& cfg) {
  return 0.5 * domain_area(cfg) * s.coeff_norm_sq();
}

inline double sum_norm_sq(const SpectralState& s, const DomainConfig& cfg) {
  double acc = 0.0;
  for (int k1 = 1; k1 <= s.N1(); ++k1)
    for (int k2 = -s.N2(); k2 <= s.N2(); ++k2) acc += std::norm(s.at(k1, k2, 0) + s.at(k1, k2, 1));
  return 0.5 * domain_area(cfg) * acc;
}

inline double grad_v_sq(const SpectralState& s, const DomainConfig& cfg) {
  double acc = 0.0;
  for (int k1 = 1; k1 <= s.N1(); ++k1)
    for (int k2 = -s.N2(); k2 <= s.N2(); ++k2)
      acc += std::norm(s.at(k1, k2, 0) + s.at(k1, k2, 1)) / laplace_eigenvalue(cfg, k1, k2);
  return 0.5 * domain_area(cfg) * acc;
}

inline double grad_u_sq(const SpectralState& s, const DomainConfig& cfg) {
  double acc = 0.0;
  for (int k1 = 1; k1 <= s.N1(); ++k1)
    for (int k2 = -s.N2(); k2 <= s.N2(); ++k2)
      acc += (std::norm(s.at(k1, k2, 0)) + std::norm(s.at(k1, k2, 1))) * laplace_eigenvalue(cfg, k1, k2);
  return 0.5 * domain_area(cfg) * acc;
}

/// integrand of the dissipation time integral
inline double dissipation_rate(const SpectralState& s, const DomainConfig& cfg) {
  const double dT = cfg.dT();
  if (dT == 0.0) throw PreconditionError("energy functional undefined at dT = 0");
  return 2.0 * cfg.nu * (-2.0 / (cfg.L1 * dT) * sum_norm_sq(s, cfg) + grad_u_sq(s, cfg));
}

/// For dT > 0 the combination is sign-indefinite and is not a Lyapunov certificate.
inline EnergyRecord energy(const SpectralState& s, const DomainConfig& cfg, double accumulated_dissipation,
                           double t = 0.0) {
  const double dT = cfg.dT();
  if (dT == 0.0) throw PreconditionError("energy functional undefined at dT = 0");
  EnergyRecord r;
  r.t = t;
  r.l2_sq = l2_norm_sq(s, cfg);
  r.grad_v_sq = grad_v_sq(s, cfg);
  r.dissipation_accum = accumulated_dissipation;
  r.energy = r.l2_sq - 2.0 / (cfg.L1 * dT) * r.grad_v_sq + accumulated_dissipation;
  return r;
}

struct PoincareRatios {
  double r1;  // ||grad V||^2 / ||u||^2, bounded by 2 L1^2 / pi^2
  double r2;  // ||u||^2 / ||grad u||^2, bounded by L1^2 / pi^2
};

inline PoincareRatios poincare_ratios(const SpectralState& s, const DomainConfig& cfg) {
  const double u = l2_norm_sq(s, cfg);
  if (u == 0.0) throw PreconditionError("Poincare ratios undefined for the zero state");
  return {grad_v_sq(s, cfg) / u, u / grad_u_sq(s, cfg)};
}

/// (int E2 u1, int E2 u2) with E2 = A2(u1 + u2), complex for complexified input
inline std::pair<cplx, cplx> cross_integrals(const SpectralState& s, const DomainConfig& cfg) {
  cplx i1 = 0.0, i2 = 0.0;
  for (int k1 = 1; k1 <= s.N1(); ++k1)
    for (int k2 = -s.N2(); k2 <= s.N2(); ++k2) {
      const cplx e2 = poisson_a2_factor(cfg, k1, k2) * (s.at(k1, k2, 0) + s.at(k1, k2, 1));
      i1 += e2 * std::conj(s.at(k1, k2, 0));
      i2 += e2 * std::conj(s.at(k1, k2, 1));
    }
  const double w = 0.5 * domain_area(cfg);
  return {w * i1, w * i2};
}

/// |int E2 u1 + int E2 u2|
inline double cross_identity_residual(const SpectralState& s, const DomainConfig& cfg) {
  auto [a, b] = cross_integrals(s, cfg);
  return std::abs(a + b);
}

struct DecayCheck {
  double gamma_fit = 0.0;
  double gamma_theory = 0.0;
  double worst_ratio = 0.0;  // max over records of ||u(t)||^2 / (||u(0)||^2 e^{-gamma t})
  double worst_time = 0.0;
  bool pass = false;
};

/// Pointwise check of ||u(t)||^2 <= 1.05 ||u(0)||^2 exp(-2 nu pi^2 t / L1^2).
inline DecayCheck decay_check(const std::vector<EnergyRecord>& records, const DomainConfig& cfg,
                              double slack = 0.05) {
  const double dT = cfg.dT();
  if (dT >= 0.0 && dT <= dT_star(cfg))
    throw PreconditionError("decay check needs dT < 0 or dT > 4 L1 / pi^2");
  if (records.size() < 2) throw PreconditionError("decay check needs at least two records");
  DecayCheck d;
  d.gamma_theory = 2.0 * cfg.nu * pi * pi / (cfg.L1 * cfg.L1);
  const double u0 = records.front().l2_sq, t0 = records.front().t;
  double st = 0, sy = 0, stt = 0, sty = 0;
  int n = 0;
  for (const auto& r : records) {
    const double t = r.t - t0;
    const double ratio = r.l2_sq / (u0 * std::exp(-d.gamma_theory * t));
    if (ratio > d.worst_ratio) {
      d.worst_ratio = ratio;
      d.worst_time = r.t;
    }
    if (r.l2_sq > 0) {
      const double y = std::log(r.l2_sq);
      st += t;
      sy += y;
      stt += t * t;
      sty += t * y;
      ++n;
    }
  }
  const double den = n * stt - st * st;
  d.gamma_fit = den > 0 ? -(n * sty - st * sy) / den : std::numeric_limits<double>::quiet_NaN();
  d.pass = d.worst_ratio <= 1.0 + slack;
  return d;
}

}  // namespace twofluid
