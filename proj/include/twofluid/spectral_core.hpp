#pragma once

#include <cmath>
#include <vector>

#include "domain.hpp"
#include "mat2.hpp"
#include "spectral_state.hpp"
#include "transforms.hpp"

namespace twofluid {

// ---------------------------------------------------------------------------
// per-mode algebra

/// ell k1^2 + 4 k2^2 / ell, the common denominator of the Poisson inverses
inline double mode_denominator(const DomainConfig& cfg, double k1, double k2) {
  const double l = cfg.ell();
  return l * k1 * k1 + 4.0 * k2 * k2 / l;
}

/// Eigenvalue of -Laplacian on g_k: pi^2 (k1^2/L1^2 + 4 k2^2/L2^2).
inline double laplace_eigenvalue(const DomainConfig& cfg, double k1, double k2) {
  return pi * pi * (k1 * k1 / (cfg.L1 * cfg.L1) + 4.0 * k2 * k2 / (cfg.L2 * cfg.L2));
}

struct LinearCoefficients {
  cplx C1;    // 2 pi i k2 / L2 (x2 derivative)
  cplx C2;    // (2i/pi) k2 / den (E2 / L1 coupling)
  double C3;  // viscous damping
};

inline LinearCoefficients linear_coefficients(const DomainConfig& cfg, double k1, double k2) {
  const cplx I(0.0, 1.0);
  return {2.0 * pi * I * k2 / cfg.L2, (2.0 * I / pi) * k2 / mode_denominator(cfg, k1, k2),
          cfg.nu * laplace_eigenvalue(cfg, k1, k2)};
}

/// Matrix of the linearization acting on the coefficient pair of g_k.
inline Mat2 linear_mode_matrix(const DomainConfig& cfg, double k1, double k2) {
  const auto c = linear_coefficients(cfg, k1, k2);
  return {c.C1 * cfg.dT() - c.C2 - c.C3, -c.C2, c.C2, c.C2 - c.C3};
}

// ---------------------------------------------------------------------------
// Poisson inverse

/// A f = grad (Laplacian)^{-1} f in per-mode form:
/// A1 f has cosine structure in x1, A2 f sine structure. A_perp f = (A2 f, -A1 f).
struct PoissonVelocity {
  ModeArray A1_cos;
  ModeArray A2_sin;
};

inline double poisson_a1_factor(const DomainConfig& cfg, int k1, int k2) {
  return -(cfg.L2 / pi) * k1 / mode_denominator(cfg, k1, k2);
}
inline cplx poisson_a2_factor(const DomainConfig& cfg, int k1, int k2) {
  return cplx(0.0, -2.0 * cfg.L1 / pi) * static_cast<double>(k2) / mode_denominator(cfg, k1, k2);
}

inline PoissonVelocity poisson_velocity(const ModeArray& f, const DomainConfig& cfg) {
  PoissonVelocity out{ModeArray(f.N1(), f.N2()), ModeArray(f.N1(), f.N2())};
  for (int k1 = 1; k1 <= f.N1(); ++k1)
    for (int k2 = -f.N2(); k2 <= f.N2(); ++k2) {
      out.A1_cos(k1, k2) = poisson_a1_factor(cfg, k1, k2) * f(k1, k2);
      out.A2_sin(k1, k2) = poisson_a2_factor(cfg, k1, k2) * f(k1, k2);
    }
  return out;
}

/// Potential V with -Laplacian V = f, V = 0 on the walls.
inline ModeArray potential(const ModeArray& f, const DomainConfig& cfg) {
  ModeArray v(f.N1(), f.N2());
  for (int k1 = 1; k1 <= f.N1(); ++k1)
    for (int k2 = -f.N2(); k2 <= f.N2(); ++k2) v(k1, k2) = f(k1, k2) / laplace_eigenvalue(cfg, k1, k2);
  return v;
}

inline ModeArray density_sum(const SpectralState& u) {
  ModeArray f = u.component(0);
  const auto& b = u.component(1).raw();
  for (size_t i = 0; i < f.size(); ++i) f.raw()[i] += b[i];
  return f;
}

// ---------------------------------------------------------------------------
// grid transforms

namespace detail {
inline void check_resolution(int N1, int N2, int n1, int n2) {
  if (n1 < 2 * N1 || n2 < 2 * N2 + 1)
    throw ResolutionError("grid (" + std::to_string(n1) + "," + std::to_string(n2) + ") too coarse for truncation (" +
                          std::to_string(N1) + "," + std::to_string(N2) + ")");
}
inline void real_part_into(const std::vector<cplx>& g, ScalarGrid& out) {
  for (size_t i = 0; i < g.size(); ++i) out.v[i] = g[i].real();
}
inline std::vector<cplx> complex_copy(const ScalarGrid& g) {
  std::vector<cplx> out(g.v.size());
  for (size_t i = 0; i < g.v.size(); ++i) out[i] = g.v[i];
  return out;
}
inline constexpr auto unit = [](int, int) { return cplx(1.0); };
}  // namespace detail

/// Samples of (u1, u2) on the (n1+1) x n2 grid. Complexified input yields its real part.
inline GridField synthesize(const SpectralState& s, int n1, int n2) {
  detail::check_resolution(s.N1(), s.N2(), n1, n2);
  auto& eng = engine_for(n1, n2, s.N1());
  GridField out(n1, n2);
  std::vector<cplx> g;
  eng.synth_sine(s.component(0), detail::unit, g);
  detail::real_part_into(g, out.first);
  eng.synth_sine(s.component(1), detail::unit, g);
  detail::real_part_into(g, out.second);
  return out;
}

/// Sine/Fourier projection; modes beyond (N1, N2) are dropped.
/// Throws ResolutionError when the grid cannot represent the requested modes.
inline SpectralState analyze(const GridField& field, int N1, int N2) {
  const int n1 = field.n1(), n2 = field.n2();
  if (N1 > n1 - 1 || 2 * N2 + 1 > n2) throw ResolutionError("requested truncation exceeds the grid");
  auto& eng = engine_for(n1, n2, N1);
  SpectralState out(N1, N2);
  eng.analyze_sine(detail::complex_copy(field.first), out.component(0));
  eng.analyze_sine(detail::complex_copy(field.second), out.component(1));
  out.enforce_reality();
  return out;
}

/// E = A(u1+u2) on the grid: E1 cos-type, E2 sine-type.
inline VectorGridField electric_field_grid(const SpectralState& s, const DomainConfig& cfg, int n1, int n2) {
  detail::check_resolution(s.N1(), s.N2(), n1, n2);
  auto& eng = engine_for(n1, n2, s.N1());
  const ModeArray f = density_sum(s);
  VectorGridField out(n1, n2);
  std::vector<cplx> g;
  eng.synth_cos(f, [&](int k1, int k2) { return cplx(poisson_a1_factor(cfg, k1, k2)); }, g);
  detail::real_part_into(g, out.first);
  eng.synth_sine(f, [&](int k1, int k2) { return poisson_a2_factor(cfg, k1, k2); }, g);
  detail::real_part_into(g, out.second);
  return out;
}

/// (d1 u_l, d2 u_l) on the grid for component l.
inline VectorGridField gradient_grid(const SpectralState& s, int l, const DomainConfig& cfg, int n1, int n2) {
  detail::check_resolution(s.N1(), s.N2(), n1, n2);
  auto& eng = engine_for(n1, n2, s.N1());
  VectorGridField out(n1, n2);
  std::vector<cplx> g;
  eng.synth_cos(s.component(l), [&](int k1, int) { return cplx(k1 * pi / cfg.L1); }, g);
  detail::real_part_into(g, out.first);
  eng.synth_sine(s.component(l), [&](int, int k2) { return cplx(0.0, 2.0 * pi * k2 / cfg.L2); }, g);
  detail::real_part_into(g, out.second);
  return out;
}

// ---------------------------------------------------------------------------
// advection nonlinearity

/// Dealiased products of the advection term. Holds grid scratch; one per thread.
class Advection {
 public:
  Advection(const DomainConfig& cfg, int N1, int N2) : cfg_(cfg), N1_(N1), N2_(N2) {
    auto [m1, n2] = dealiased_grid(N1, N2);
    eng_ = &engine_for(m1, n2, N1);
  }

  /// out_l += weight * P[(A_perp f) . grad w_l], l = 0, 1
  void accumulate(const ModeArray& f, const SpectralState& w, cplx weight, SpectralState& out) {
    eng_->synth_sine(f, [&](int k1, int k2) { return poisson_a2_factor(cfg_, k1, k2); }, e1_);
    eng_->synth_cos(f, [&](int k1, int k2) { return cplx(-poisson_a1_factor(cfg_, k1, k2)); }, e2_);
    for (int l = 0; l < 2; ++l) {
      eng_->synth_cos(w.component(l), [&](int k1, int) { return cplx(k1 * pi / cfg_.L1); }, d1_);
      eng_->synth_sine(w.component(l), [&](int, int k2) { return cplx(0.0, 2.0 * pi * k2 / cfg_.L2); }, d2_);
      prod_.resize(d1_.size());
      for (size_t i = 0; i < prod_.size(); ++i) prod_[i] = e1_[i] * d1_[i] + e2_[i] * d2_[i];
      tmp_ = ModeArray(N1_, N2_);
      eng_->analyze_sine(prod_, tmp_);
      auto& o = out.component(l).raw();
      const auto& t = tmp_.raw();
      for (size_t i = 0; i < o.size(); ++i) o[i] += weight * t[i];
    }
  }

  /// Same as accumulate for real f and w, packing two real fields per transform.
  void accumulate_real(const ModeArray& f, const SpectralState& w, double weight, SpectralState& out) {
    eng_->synth_pair(
        f, [&](int k1, int k2) { return poisson_a2_factor(cfg_, k1, k2); }, true, f,
        [&](int k1, int k2) { return cplx(-poisson_a1_factor(cfg_, k1, k2)); }, false, e1_);
    prod_.resize(e1_.size());
    for (int l = 0; l < 2; ++l) {
      eng_->synth_pair(
          w.component(l), [&](int k1, int) { return cplx(k1 * pi / cfg_.L1); }, false, w.component(l),
          [&](int, int k2) { return cplx(0.0, 2.0 * pi * k2 / cfg_.L2); }, true, d1_);
      for (size_t i = 0; i < prod_.size(); ++i) {
        const double v = e1_[i].real() * d1_[i].real() + e1_[i].imag() * d1_[i].imag();
        if (l == 0)
          prod_[i] = v;
        else
          prod_[i] += cplx(0.0, v);
      }
    }
    if (tmp_.N1() != N1_ || tmp_.N2() != N2_) tmp_ = ModeArray(N1_, N2_);
    if (tmp2_.N1() != N1_ || tmp2_.N2() != N2_) tmp2_ = ModeArray(N1_, N2_);
    eng_->analyze_sine_pair(prod_, tmp_, tmp2_);
    for (int l = 0; l < 2; ++l) {
      auto& o = out.component(l).raw();
      const auto& t = (l == 0 ? tmp_ : tmp2_).raw();
      for (size_t i = 0; i < o.size(); ++i) o[i] += weight * t[i];
    }
  }

  /// R(u) = -(A_perp(u1+u2)) . grad u_l
  SpectralState nonlinear(const SpectralState& u) {
    SpectralState out(N1_, N2_, u.complexified());
    if (!u.complexified()) {
      accumulate_real(density_sum(u), u, -1.0, out);
      out.enforce_reality();
      return out;
    }
    accumulate(density_sum(u), u, -1.0, out);
    out.enforce_reality();
    return out;
  }

  /// symmetric bilinear form with bilinear(u,u) = nonlinear(u)
  SpectralState bilinear(const SpectralState& v, const SpectralState& w) {
    SpectralState out(N1_, N2_, v.complexified() || w.complexified());
    if (!out.complexified()) {
      accumulate_real(density_sum(v), w, -0.5, out);
      accumulate_real(density_sum(w), v, -0.5, out);
    } else {
      accumulate(density_sum(v), w, -0.5, out);
      accumulate(density_sum(w), v, -0.5, out);
    }
    out.enforce_reality();
    return out;
  }

 private:
  DomainConfig cfg_;
  int N1_, N2_;
  SineFourierEngine* eng_;
  std::vector<cplx> e1_, e2_, d1_, d2_, prod_;
  ModeArray tmp_, tmp2_;
};

inline SpectralState nonlinear_term(const SpectralState& u, const DomainConfig& cfg) {
  Advection adv(cfg, u.N1(), u.N2());
  return adv.nonlinear(u);
}

inline SpectralState bilinear_term(const SpectralState& v, const SpectralState& w, const DomainConfig& cfg) {
  if (v.N1() != w.N1() || v.N2() != w.N2()) throw PreconditionError("bilinear_term: truncation mismatch");
  Advection adv(cfg, v.N1(), v.N2());
  return adv.bilinear(v, w);
}

/// Linear part, mode by mode.
inline SpectralState apply_linear(const SpectralState& s, const DomainConfig& cfg) {
  SpectralState out(s.N1(), s.N2(), s.complexified());
  for (int k1 = 1; k1 <= s.N1(); ++k1)
    for (int k2 = -s.N2(); k2 <= s.N2(); ++k2) out.set_mode(k1, k2, linear_mode_matrix(cfg, k1, k2) * s.mode(k1, k2));
  return out;
}

}  // namespace twofluid
