#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "domain.hpp"
#include "mat2.hpp"
#include "spectral_core.hpp"

namespace twofluid {

struct ModeSpectrum {
  ModeIndex k;
  Mat2 M;
  cplx lambda_plus, lambda_minus;
  cplx D;  // discriminant; real for this model
  cplx C1, C2;
  double C3 = 0.0;
};

struct EigenPair {
  cplx plus, minus, D;
};

/// Closed-form eigenvalues at (k1, k2); k2 may be non-integer (strip modes).
/// lambda_plus is the branch with the larger real part (+i sqrt(-D) when D < 0).
inline EigenPair closed_form_eigenvalues(const DomainConfig& cfg, double k1, double k2) {
  const double l = cfg.ell(), L1 = cfg.L1, dT = cfg.dT();
  const double q = k1 * k1 + 4.0 * k2 * k2 / (l * l);
  const double D = k2 * k2 * dT / (l * l * L1) * (4.0 / q - pi * pi * dT / L1);
  const cplx centre(-pi * pi * cfg.nu / (L1 * L1) * q, pi * k2 * dT / (l * L1));
  const cplx root = D >= 0.0 ? cplx(std::sqrt(D), 0.0) : cplx(0.0, std::sqrt(-D));
  return {centre + root, centre - root, cplx(D, 0.0)};
}

/// eigenvalues of a 2x2 matrix from trace and determinant, larger real part first
inline std::pair<cplx, cplx> eigenvalues(const Mat2& M) {
  const cplx h = 0.5 * M.trace();
  const cplx s = std::sqrt(h * h - M.det());
  cplx a = h + s, b = h - s;
  if (b.real() > a.real()) std::swap(a, b);
  return {a, b};
}

inline ModeSpectrum mode_matrix(const DomainConfig& cfg, ModeIndex k) {
  if (k.k1 < 1) throw PreconditionError("mode_matrix: k1 must be >= 1");
  ModeSpectrum s;
  s.k = k;
  s.M = linear_mode_matrix(cfg, k.k1, k.k2);
  const auto c = linear_coefficients(cfg, k.k1, k.k2);
  s.C1 = c.C1;
  s.C2 = c.C2;
  s.C3 = c.C3;
  const auto e = closed_form_eigenvalues(cfg, k.k1, k.k2);
  s.lambda_plus = e.plus;
  s.lambda_minus = e.minus;
  s.D = e.D;
  return s;
}

// ---------------------------------------------------------------------------
// growth indicator d(dT, kappa) and its roots

/// quadratic coefficients of d(., kappa) = a dT^2 + b dT + c
struct IndicatorQuadratic {
  double a, b, c;
};

inline IndicatorQuadratic indicator_quadratic(const DomainConfig& cfg, double kappa) {
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  const double l2 = cfg.ell() * cfg.ell(), L1 = cfg.L1;
  const double s = 4.0 * kappa + l2;
  return {-L1 * L1 * pi * pi / l2, 4.0 * L1 * L1 * L1 / s,
          -cfg.nu * cfg.nu * std::pow(pi, 4) * s * s / (kappa * l2 * l2)};
}

/// d(dT, kappa); same sign as Re lambda_plus at k = (1, sqrt(kappa))
inline double growth_indicator(const DomainConfig& cfg, double dT, double kappa) {
  const auto q = indicator_quadratic(cfg, kappa);
  return (q.a * dT + q.b) * dT + q.c;
}

/// viscosity above which the kappa mode never destabilizes
inline double nu_crit(const DomainConfig& cfg, double kappa) {
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  const double l = cfg.ell(), s = 4.0 * kappa + l * l;
  return 2.0 * std::sqrt(kappa) * l * l * l * cfg.L1 * cfg.L1 / (s * s * pi * pi * pi);
}

/// location of the maximum of d(., kappa)
inline double indicator_argmax(const DomainConfig& cfg, double kappa) {
  const double l2 = cfg.ell() * cfg.ell();
  return 2.0 * l2 * cfg.L1 / ((4.0 * kappa + l2) * pi * pi);
}

/// kappa above which the discriminant is negative at this dT
inline double discriminant_cutoff(const DomainConfig& cfg, double dT) {
  if (dT <= 0.0) return std::numeric_limits<double>::infinity();
  const double l2 = cfg.ell() * cfg.ell();
  return 0.25 * l2 * (4.0 * cfg.L1 / (pi * pi * dT) - 1.0);
}

enum class RegionStatus { absent, point, interval };
enum class Classification { locally_primary, primary, not_primary, unknown };

inline const char* to_string(RegionStatus s) {
  switch (s) {
    case RegionStatus::absent: return "absent";
    case RegionStatus::point: return "point";
    default: return "interval";
  }
}
inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::locally_primary: return "locally_primary";
    case Classification::primary: return "primary";
    case Classification::not_primary: return "not_primary";
    default: return "unknown";
  }
}

struct InstabilityRegion {
  int k2 = 1;
  double dT1 = std::numeric_limits<double>::quiet_NaN();
  double dT2 = std::numeric_limits<double>::quiet_NaN();
  double nu_crit = 0.0;
  double dT_peak = 0.0;  // argmax of d(., k2^2)
  RegionStatus status = RegionStatus::absent;
  Classification classification = Classification::unknown;
};

/// relative distance of nu to nu_crit below which the region counts as a point
inline constexpr double point_region_tol = 1e-10;

/// Roots of d(., kappa) for real kappa > 0.
inline InstabilityRegion instability_region_kappa(const DomainConfig& cfg, double kappa) {
  InstabilityRegion r;
  r.nu_crit = nu_crit(cfg, kappa);
  r.dT_peak = indicator_argmax(cfg, kappa);
  if (cfg.nu > r.nu_crit * (1.0 + point_region_tol)) return r;
  if (std::abs(cfg.nu - r.nu_crit) <= point_region_tol * r.nu_crit) {
    r.status = RegionStatus::point;
    r.dT1 = r.dT2 = r.dT_peak;
    return r;
  }
  const auto q = indicator_quadratic(cfg, kappa);
  const double disc = std::max(q.b * q.b - 4.0 * q.a * q.c, 0.0);
  // b > 0, so the stable form uses the + sign
  const double t = -0.5 * (q.b + std::sqrt(disc));
  const double big = t / q.a, small = q.c / t;
  r.dT1 = std::min(big, small);
  r.dT2 = std::max(big, small);
  r.status = RegionStatus::interval;
  return r;
}

inline InstabilityRegion instability_interval(const DomainConfig& cfg, int k2) {
  if (k2 < 1) throw PreconditionError("instability_interval: k2 must be >= 1");
  auto r = instability_region_kappa(cfg, static_cast<double>(k2) * k2);
  r.k2 = k2;
  return r;
}

// ---------------------------------------------------------------------------
// classification of the k2 = 1 region

struct CertificateEntry {
  int k2;
  RegionStatus status;
  double dT1, dT2;          // roots of d(., k2^2), NaN when absent
  double margin_left;       // -d(dT1(1), k2^2): positive means stable there
  double margin_right;      // -d(dT2(1), k2^2)
  double lhs_left, lhs_right, rhs;  // dT/(nu^2 pi^4) against the closed threshold
};

struct ClassificationReport {
  InstabilityRegion region;
  bool fast_path = false;   // ell <= 2 sqrt 2
  int k2_checked = 0;       // largest k2 examined
  std::vector<CertificateEntry> entries;
  std::string reason;
};

inline ClassificationReport classify_primary_report(const DomainConfig& cfg) {
  cfg.validate();
  ClassificationReport rep;
  rep.region = instability_interval(cfg, 1);
  if (rep.region.status == RegionStatus::absent)
    throw PreconditionError("no 1-instability region: nu exceeds nu_crit(1)");
  const double l = cfg.ell(), l2 = l * l, L1 = cfg.L1, nu = cfg.nu;
  const double dTa = rep.region.dT1, dTb = rep.region.dT2;

  // regions exist only where nu <= nu_crit(kappa); nu_crit falls off past kappa = l^2/28
  const double peak_kappa = l2 / 28.0;
  const double cut = discriminant_cutoff(cfg, std::max(dTa, 1e-300));
  const int hard_cap = 2000000;
  bool capped = false;
  bool violation = false, tie = false, outside = false;
  const double tie_tol = 1e-10;

  for (int k2 = 2;; ++k2) {
    const double kappa = static_cast<double>(k2) * k2;
    if (k2 > hard_cap) {
      capped = true;
      break;
    }
    const bool beyond_existence = kappa > peak_kappa && nu > nu_crit(cfg, kappa) * (1.0 + point_region_tol);
    const bool beyond_cutoff = kappa > cut && k2 > static_cast<int>(std::ceil(std::sqrt(cut))) + 2;
    if (beyond_existence || beyond_cutoff) {
      rep.k2_checked = k2 - 1;
      break;
    }
    auto rk = instability_region_kappa(cfg, kappa);
    CertificateEntry e{};
    e.k2 = k2;
    e.status = rk.status;
    e.dT1 = rk.dT1;
    e.dT2 = rk.dT2;
    e.margin_left = -growth_indicator(cfg, dTa, kappa);
    e.margin_right = -growth_indicator(cfg, dTb, kappa);
    const double den = nu * nu * std::pow(pi, 4);
    e.lhs_left = nu > 0 ? dTa / den : std::numeric_limits<double>::infinity();
    e.lhs_right = nu > 0 ? dTb / den : std::numeric_limits<double>::infinity();
    e.rhs = (4.0 + l2) * (4.0 * kappa + l2) * (l2 * l2 - 16.0 * kappa) / (16.0 * kappa * l2 * l2 * L1 * L1 * L1);
    if (rk.status != RegionStatus::absent) {
      for (double ref : {dTa, dTb})
        for (double root : {rk.dT1, rk.dT2})
          if (std::abs(ref - root) <= tie_tol * std::max(std::abs(ref), 1e-300)) tie = true;
      const double tol_lo = tie_tol * std::max(dTa, 1e-300), tol_hi = tie_tol * dTb;
      if (rk.dT1 < dTa - tol_lo || rk.dT2 > dTb + tol_hi) outside = true;
      if (!tie && (e.margin_left < 0.0 || e.margin_right < 0.0)) violation = true;
      rep.entries.push_back(e);
    }
  }

  auto& cls = rep.region.classification;
  if (nu == 0.0) {
    cls = Classification::unknown;
    rep.reason = "nu = 0: lower roots of every mode coincide at dT = 0";
  } else if (l <= 2.0 * std::sqrt(2.0)) {
    rep.fast_path = true;
    cls = Classification::primary;
    rep.reason = "aspect ratio at most 2 sqrt 2";
  } else if (capped) {
    cls = Classification::unknown;
    rep.reason = "wavenumber enumeration cap reached";
  } else if (violation) {
    cls = Classification::not_primary;
    rep.reason = "another mode is unstable at a threshold of the 1-region";
  } else if (tie) {
    cls = outside ? Classification::not_primary : Classification::unknown;
    rep.reason = outside ? "threshold shared with a region extending beyond the 1-region"
                         : "threshold shared with another mode";
  } else if (outside) {
    cls = Classification::locally_primary;
    rep.reason = "stable next to the 1-region, but another region lies elsewhere";
  } else {
    cls = Classification::primary;
    rep.reason = "all other regions lie inside the 1-region";
  }
  return rep;
}

inline InstabilityRegion classify_primary(const DomainConfig& cfg) { return classify_primary_report(cfg).region; }

// ---------------------------------------------------------------------------
// special aspect ratios

namespace detail {
// safeguarded Newton for a monotone-crossing cubic on [lo, hi] with p(lo) < 0 < p(hi)
template <class P, class DP>
double bracketed_newton(P p, DP dp, double lo, double hi, double rtol) {
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = p(x);
    if (fx == 0.0) return x;
    if (fx < 0.0)
      lo = x;
    else
      hi = x;
    double nx = x - fx / dp(x);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::abs(nx - x) <= rtol * std::abs(nx) || hi - lo <= rtol * std::abs(hi)) return nx;
    x = nx;
  }
  return x;
}
}  // namespace detail

/// Aspect ratio at which the kappa-region touches the point 1-region when nu = nu_crit(1):
/// the positive root of l^6 - 4 kappa l^4 - 80 kappa l^2 - 64 kappa (2 + kappa).
inline double ell_for_degenerate_overlap(double kappa) {
  if (!(kappa > 1.0)) throw DomainError("ell_for_degenerate_overlap requires kappa > 1");
  auto p = [kappa](double s) { return ((s - 4.0 * kappa) * s - 80.0 * kappa) * s - 64.0 * kappa * (2.0 + kappa); };
  auto dp = [kappa](double s) { return (3.0 * s - 8.0 * kappa) * s - 80.0 * kappa; };
  double hi = 1.0;
  while (p(hi) <= 0.0) hi *= 2.0;
  return std::sqrt(detail::bracketed_newton(p, dp, 0.0, hi, 1e-15));
}

/// positive root of 16 (l^2+4)^2 - (l^2-8)(l^2+8)(l^2+16), as a polynomial in s = l^2
inline double ell_star_polynomial(double ell) {
  const double s = ell * ell;
  return 16.0 * (s + 4.0) * (s + 4.0) - (s - 8.0) * (s + 8.0) * (s + 16.0);
}

inline double ell_star() {
  // in s the polynomial is -s^3 + 0 s^2 + ... ; negate so it rises through the root
  auto p = [](double s) { return -(16.0 * (s + 4.0) * (s + 4.0) - (s - 8.0) * (s + 8.0) * (s + 16.0)); };
  auto dp = [](double s) { return -(32.0 * (s + 4.0) - (3.0 * s * s + 32.0 * s - 64.0)); };
  return std::sqrt(detail::bracketed_newton(p, dp, 1.0, 100.0, 1e-15));
}

// ---------------------------------------------------------------------------
// tables

struct SpectrumRow {
  double dT;
  int k1, k2;
  cplx lambda_plus, lambda_minus;
};

/// Closed-form eigenvalues for every dT in `dTs` and k in {1..k1_max} x {-k2_max..k2_max}.
/// Rows are ordered by (dT, k1, k2) regardless of `threads`.
inline std::vector<SpectrumRow> spectrum_sweep(const DomainConfig& cfg, const std::vector<double>& dTs, int k1_max,
                                               int k2_max, int threads = 1) {
  if (k1_max < 1 || k2_max < 0) throw PreconditionError("spectrum_sweep: bad mode ranges");
  const size_t per = static_cast<size_t>(k1_max) * (2 * k2_max + 1);
  std::vector<SpectrumRow> rows(dTs.size() * per);
  auto work = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const auto c = cfg.with_dT(dTs[i]);
      size_t r = i * per;
      for (int k1 = 1; k1 <= k1_max; ++k1)
        for (int k2 = -k2_max; k2 <= k2_max; ++k2, ++r) {
          const auto e = closed_form_eigenvalues(c, k1, k2);
          rows[r] = {dTs[i], k1, k2, e.plus, e.minus};
        }
    }
  };
  threads = std::max(1, std::min<int>(threads, static_cast<int>(dTs.size())));
  if (threads == 1) {
    work(0, dTs.size());
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (dTs.size() + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const size_t b = t * chunk, e = std::min(dTs.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return rows;
}

struct StripRow {
  double k2;
  cplx lambda_plus;
};

/// Re/Im of lambda_plus at k = (1, L2 k2) for real wavenumbers k2 on the infinite strip.
inline std::vector<StripRow> strip_dispersion(const DomainConfig& cfg, double dT, const std::vector<double>& k2s) {
  const auto c = cfg.with_dT(dT);
  std::vector<StripRow> out;
  out.reserve(k2s.size());
  for (double k : k2s) out.push_back({k, closed_form_eigenvalues(c, 1.0, cfg.L2 * k).plus});
  return out;
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(std::max(n, 1));
  if (n <= 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace twofluid
