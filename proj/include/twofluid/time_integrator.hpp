#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "diagnostics_energy.hpp"
#include "domain.hpp"
#include "linear_stability.hpp"
#include "mat2.hpp"
#include "spectral_core.hpp"
#include "spectral_state.hpp"

namespace twofluid {

enum class Scheme { cnab2, cn_euler };

inline const char* to_string(Scheme s) { return s == Scheme::cnab2 ? "cnab2" : "cn_euler"; }

enum class IcKind { eigenmode, random, zero };

inline const char* to_string(IcKind k) {
  switch (k) {
    case IcKind::eigenmode: return "eigenmode";
    case IcKind::random: return "random";
    default: return "zero";
  }
}

struct IcSpec {
  IcKind kind = IcKind::eigenmode;
  double amplitude = 1e-3;  // eigenmode: factor on Re(zeta) with |xi| = 1; random: RMS value
  int k2 = 1;               // seeded wavenumber for eigenmode
  std::uint64_t seed = 12345;
  int max_wavenumber = 4;   // random: modes with k1, |k2| <= this
};

struct IntegratorConfig {
  double dt = 0.0;  // 0 picks the default 1e-3 L2 / max(|T+|, |T-|, 1)
  double t_end = 100.0;
  Scheme scheme = Scheme::cnab2;
  IcSpec ic;
  int record_every = 10;
  int N1 = 32, N2 = 32;
  std::vector<double> snapshot_times;
  bool linear_only = false;       // drop the advection term
  bool throw_on_blowup = true;
  double blowup_threshold = 1e6;
};

inline double default_dt(const DomainConfig& cfg) {
  return 1e-3 * cfg.L2 / std::max({std::abs(cfg.T_plus), std::abs(cfg.T_minus), 1.0});
}

struct TraceRecord {
  double t = 0.0;
  double sup_u1 = 0.0;
  double midpoint = 0.0;      // u1(L1/2, L2/2) in the comoving frame
  double midpoint_lab = 0.0;  // u1 at the fixed lab point (L1/2, L2/2)
  EnergyRecord energy;        // energy.energy is NaN when dT = 0
};

struct Snapshot {
  double t;
  SpectralState state;
};

struct Trajectory {
  std::vector<TraceRecord> records;
  std::vector<Snapshot> snapshots;
  SpectralState final_state;
  long steps = 0;
  bool blew_up = false;
  std::string message;

  std::vector<EnergyRecord> energy_records() const {
    std::vector<EnergyRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.energy);
    return out;
  }
};

struct BlowUpError : NumericalError {
  using NumericalError::NumericalError;
};

// ---------------------------------------------------------------------------

/// unit eigenvector of the lambda_plus branch at mode (k1, k2)
inline Vec2 unstable_eigenvector(const DomainConfig& cfg, int k1, int k2) {
  const Mat2 M = linear_mode_matrix(cfg, k1, k2);
  const cplx lam = eigenvalues(M).first;
  Vec2 a{M.b, lam - M.a}, b{lam - M.d, M.c};
  Vec2 v = vnorm(a) >= vnorm(b) ? a : b;
  const double n = vnorm(v);
  if (n == 0.0) return {1.0, 0.0};
  return (1.0 / n) * v;
}

inline SpectralState make_initial_state(const DomainConfig& cfg, const IntegratorConfig& icfg) {
  SpectralState s(icfg.N1, icfg.N2);
  const auto& ic = icfg.ic;
  switch (ic.kind) {
    case IcKind::zero: break;
    case IcKind::eigenmode: {
      if (ic.k2 < 0 || ic.k2 > icfg.N2) throw PreconditionError("seeded wavenumber outside the truncation");
      const Vec2 xi = unstable_eigenvector(cfg, 1, ic.k2);
      s.set_mode(1, ic.k2, (0.5 * ic.amplitude) * xi);
      s.set_mode(1, -ic.k2, (0.5 * ic.amplitude) * Vec2{std::conj(xi[0]), std::conj(xi[1])});
      if (ic.k2 == 0) s.set_mode(1, 0, ic.amplitude * Vec2{xi[0].real(), xi[1].real()});
      break;
    }
    case IcKind::random: {
      std::mt19937_64 rng(ic.seed);
      std::normal_distribution<double> g(0.0, 1.0);
      const int K1 = std::min(ic.max_wavenumber, icfg.N1), K2 = std::min(ic.max_wavenumber, icfg.N2);
      for (int l = 0; l < 2; ++l)
        for (int k1 = 1; k1 <= K1; ++k1)
          for (int k2 = -K2; k2 <= K2; ++k2) {
            const double w = 1.0 / (1.0 + k1 * k1 + k2 * k2);
            const double re = g(rng), im = g(rng);
            s.at(k1, k2, l) = w * cplx(re, im);
          }
      s.enforce_reality();
      const double rms = std::sqrt(l2_norm_sq(s, cfg) / domain_area(cfg));
      if (rms > 0) s *= ic.amplitude / rms;
      break;
    }
  }
  return s;
}

/// u1 at (L1/2, y) by direct summation
inline double probe_u1(const SpectralState& s, const DomainConfig& cfg, double y) {
  cplx acc = 0.0;
  for (int k1 = 1; k1 <= s.N1(); k1 += 2) {
    const double sn = (k1 % 4 == 1) ? 1.0 : -1.0;  // sin(k1 pi / 2)
    for (int k2 = -s.N2(); k2 <= s.N2(); ++k2)
      acc += sn * s.at(k1, k2, 0) * std::polar(1.0, 2.0 * pi * k2 * y / cfg.L2);
  }
  return acc.real();
}

inline double sup_norm_u1(const SpectralState& s) {
  auto [m1, n2] = dealiased_grid(s.N1(), s.N2());
  auto& eng = engine_for(m1, n2, s.N1());
  std::vector<cplx> g;
  eng.synth_sine(s.component(0), detail::unit, g);
  double m = 0.0;
  for (const auto& v : g) m = std::max(m, std::abs(v.real()));
  return m;
}

// ---------------------------------------------------------------------------

/// CN for the linear part, AB2 (or Euler) for the advection term, with cached per-mode operators.
class Stepper {
 public:
  Stepper(const DomainConfig& cfg, int N1, int N2, double dt, Scheme scheme, bool linear_only = false)
      : cfg_(cfg), N1_(N1), N2_(N2), dt_(dt), scheme_(scheme), linear_only_(linear_only), adv_(cfg, N1, N2) {
    const size_t n = static_cast<size_t>(N1) * (2 * N2 + 1);
    P_.resize(n);
    Q_.resize(n);
    size_t i = 0;
    for (int k1 = 1; k1 <= N1; ++k1)
      for (int k2 = -N2; k2 <= N2; ++k2, ++i) {
        const Mat2 M = linear_mode_matrix(cfg, k1, k2);
        const Mat2 Aminus = Mat2::identity() - M * (0.5 * dt);
        if (std::abs(Aminus.det()) < 1e-14) throw SingularError("singular implicit operator");
        const Mat2 inv = Aminus.inverse(0.0);
        P_[i] = inv * (Mat2::identity() + M * (0.5 * dt));
        Q_[i] = inv * dt;
      }
  }

  double dt() const { return dt_; }

  /// nonlinear term at the last accepted state (absent before the first step)
  const std::optional<SpectralState>& previous_nonlinear() const { return prev_; }
  void reset() { prev_.reset(); }

  void step(SpectralState& u) {
    SpectralState r = linear_only_ ? SpectralState(N1_, N2_) : adv_.nonlinear(u);
    SpectralState forcing = r;
    if (scheme_ == Scheme::cnab2 && prev_) {
      forcing *= 1.5;
      SpectralState old = *prev_;
      old *= 0.5;
      forcing -= old;
    }
    size_t i = 0;
    for (int k1 = 1; k1 <= N1_; ++k1)
      for (int k2 = -N2_; k2 <= N2_; ++k2, ++i) u.set_mode(k1, k2, P_[i] * u.mode(k1, k2) + Q_[i] * forcing.mode(k1, k2));
    u.enforce_reality();
    prev_ = std::move(r);
  }

 private:
  DomainConfig cfg_;
  int N1_, N2_;
  double dt_;
  Scheme scheme_;
  bool linear_only_;
  Advection adv_;
  std::vector<Mat2> P_, Q_;
  std::optional<SpectralState> prev_;
};

/// One step of the scheme. `prev_nonlinear` empty means first step (explicit Euler on R).
inline std::pair<SpectralState, SpectralState> step(const SpectralState& state, const DomainConfig& cfg,
                                                    const IntegratorConfig& icfg,
                                                    const std::optional<SpectralState>& prev_nonlinear) {
  const double dt = icfg.dt > 0 ? icfg.dt : default_dt(cfg);
  const SpectralState r = icfg.linear_only ? SpectralState(state.N1(), state.N2()) : nonlinear_term(state, cfg);
  SpectralState forcing = r;
  if (icfg.scheme == Scheme::cnab2 && prev_nonlinear) forcing = 1.5 * r - 0.5 * *prev_nonlinear;
  SpectralState out(state.N1(), state.N2(), state.complexified());
  for (int k1 = 1; k1 <= state.N1(); ++k1)
    for (int k2 = -state.N2(); k2 <= state.N2(); ++k2) {
      const Mat2 M = linear_mode_matrix(cfg, k1, k2);
      const Mat2 A = Mat2::identity() - M * (0.5 * dt);
      if (std::abs(A.det()) < 1e-14) throw SingularError("singular implicit operator");
      const Vec2 rhs = (Mat2::identity() + M * (0.5 * dt)) * state.mode(k1, k2) + dt * forcing.mode(k1, k2);
      out.set_mode(k1, k2, A.solve(rhs, 0.0));
    }
  out.enforce_reality();
  return {out, r};
}

using RecordHook = std::function<void(double t, const SpectralState&)>;

inline void validate(const DomainConfig& cfg, const IntegratorConfig& icfg) {
  cfg.validate();
  if (!(cfg.nu > 0.0)) throw PreconditionError("simulation requires nu > 0");
  const double dt = icfg.dt > 0 ? icfg.dt : default_dt(cfg);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("dt must be positive");
  if (!(icfg.t_end >= dt)) throw PreconditionError("t_end must be at least dt");
  if (icfg.N1 < 1 || icfg.N2 < 1) throw PreconditionError("truncation orders must be positive");
  if (icfg.record_every < 1) throw PreconditionError("record_every must be positive");
}

/// Runs from `initial` for t_end. Time in the records starts at t0.
inline Trajectory simulate_from(const DomainConfig& cfg, const IntegratorConfig& icfg, SpectralState initial,
                                double t0 = 0.0, const RecordHook& hook = {}) {
  validate(cfg, icfg);
  if (initial.N1() != icfg.N1 || initial.N2() != icfg.N2) initial = initial.resized(icfg.N1, icfg.N2);
  initial.enforce_reality();
  const double dt = icfg.dt > 0 ? icfg.dt : default_dt(cfg);
  const long nsteps = static_cast<long>(std::ceil(icfg.t_end / dt - 1e-9));
  const bool with_energy = cfg.dT() != 0.0;

  Stepper stepper(cfg, icfg.N1, icfg.N2, dt, icfg.scheme, icfg.linear_only);
  Trajectory traj;
  SpectralState u = std::move(initial);
  double accum = 0.0;
  double rate = with_energy ? dissipation_rate(u, cfg) : 0.0;
  size_t next_snap = 0;
  std::vector<double> snaps = icfg.snapshot_times;
  std::sort(snaps.begin(), snaps.end());

  auto record = [&](long n) {
    const double t = t0 + n * dt;
    TraceRecord r;
    r.t = t;
    r.sup_u1 = sup_norm_u1(u);
    r.midpoint = probe_u1(u, cfg, 0.5 * cfg.L2);
    r.midpoint_lab = probe_u1(u, cfg, 0.5 * cfg.L2 + cfg.T_minus * t);
    if (with_energy) {
      r.energy = energy(u, cfg, accum, t);
    } else {
      r.energy.t = t;
      r.energy.l2_sq = l2_norm_sq(u, cfg);
      r.energy.grad_v_sq = grad_v_sq(u, cfg);
      r.energy.energy = std::numeric_limits<double>::quiet_NaN();
    }
    traj.records.push_back(r);
    if (hook) hook(t, u);
    return r.sup_u1;
  };
  auto snapshot = [&](long n) {
    const double t = t0 + n * dt;
    while (next_snap < snaps.size() && snaps[next_snap] <= t + 0.5 * dt) {
      traj.snapshots.push_back({t, u});
      ++next_snap;
    }
  };

  record(0);
  snapshot(0);
  for (long n = 1; n <= nsteps; ++n) {
    stepper.step(u);
    if (with_energy) {
      const double nr = dissipation_rate(u, cfg);
      accum += 0.5 * dt * (rate + nr);
      rate = nr;
    }
    traj.steps = n;
    // cheap bound on the sup norm first
    double bound = 0.0;
    for (const auto& c : u.component(0).raw()) bound += std::abs(c);
    bool bad = !std::isfinite(bound);
    if (!bad && bound > icfg.blowup_threshold) bad = sup_norm_u1(u) > icfg.blowup_threshold;
    if (bad) {
      traj.blew_up = true;
      traj.message = "sup-norm exceeded " + std::to_string(icfg.blowup_threshold) + " at t = " +
                     std::to_string(t0 + n * dt);
      traj.final_state = u;
      if (icfg.throw_on_blowup) throw BlowUpError(traj.message);
      return traj;
    }
    if (n % icfg.record_every == 0 || n == nsteps) record(n);
    snapshot(n);
  }
  traj.final_state = std::move(u);
  return traj;
}

inline Trajectory simulate(const DomainConfig& cfg, const IntegratorConfig& icfg, const RecordHook& hook = {}) {
  validate(cfg, icfg);
  return simulate_from(cfg, icfg, make_initial_state(cfg, icfg), 0.0, hook);
}

}  // namespace twofluid
