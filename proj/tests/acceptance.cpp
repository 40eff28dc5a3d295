// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "test_util.hpp"

using namespace twofluid;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string str(double v, int prec = 6) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

DomainConfig pars(double dT = 0.1) {
  DomainConfig c;
  c.L1 = 2.0;
  c.L2 = 2.0;
  c.nu = 9e-4;
  c.T_minus = 0.1;
  return c.with_dT(dT);
}

DomainConfig random_admissible(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> L(0.5, 3.0), f(0.05, 0.95), ell(0.3, 2.8), Tm(-0.3, 0.3);
  DomainConfig c;
  c.L1 = L(rng);
  c.L2 = c.L1 * ell(rng);
  c.T_minus = Tm(rng);
  c.nu = f(rng) * nu_crit(c, 1.0);
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// least squares y = c0 + c1 x, returns {c1, c0, R^2}
std::array<double, 3> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  const double slope = cxy / vx;
  return {slope, (sy - slope * sx) / n, vy > 0 ? cxy * cxy / (vx * vy) : 1.0};
}

// ---------------------------------------------------------------------------

Outcome spectrum_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> K1(1, 16), K2(-16, 16);
  double worst = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const auto cfg = tf_test::random_config(rng);
    const auto ms = mode_matrix(cfg, {K1(rng), K2(rng)});
    Eigen::Matrix2cd M;
    M << ms.M.a, ms.M.b, ms.M.c, ms.M.d;
    const Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(M);
    cplx e0 = es.eigenvalues()(0), e1 = es.eigenvalues()(1);
    if (std::abs(e0 - ms.lambda_plus) > std::abs(e1 - ms.lambda_plus)) std::swap(e0, e1);
    const double scale = std::max(std::abs(ms.lambda_plus), std::abs(ms.lambda_minus));
    worst = std::max({worst, std::abs(e0 - ms.lambda_plus) / scale, std::abs(e1 - ms.lambda_minus) / scale});
  }
  const double el = seconds_since(t0);
  return {worst <= 1e-12 && el < 1.0, "max rel err " + str(worst, 3) + ", " + str(el, 3) + " s"};
}

// real coordinates of a real state: re/im of (k1, k2 > 0), re of (k1, 0)
struct RealCoords {
  int N1, N2;
  int size() const { return 2 * N1 * (2 * N2 + 1); }

  SpectralState state(const std::vector<double>& x) const {
    SpectralState s(N1, N2);
    int i = 0;
    for (int l = 0; l < 2; ++l)
      for (int k1 = 1; k1 <= N1; ++k1) {
        s.at(k1, 0, l) = x[i++];
        for (int k2 = 1; k2 <= N2; ++k2) {
          const cplx c(x[i], x[i + 1]);
          i += 2;
          s.at(k1, k2, l) = c;
          s.at(k1, -k2, l) = std::conj(c);
        }
      }
    return s;
  }

  std::vector<double> coords(const SpectralState& s) const {
    std::vector<double> x;
    for (int l = 0; l < 2; ++l)
      for (int k1 = 1; k1 <= N1; ++k1) {
        x.push_back(s.at(k1, 0, l).real());
        for (int k2 = 1; k2 <= N2; ++k2) {
          x.push_back(s.at(k1, k2, l).real());
          x.push_back(s.at(k1, k2, l).imag());
        }
      }
    return x;
  }
};

Outcome operator_consistency() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = pars(0.1);
  const RealCoords rc{6, 6};
  const int n = rc.size();
  auto rhs = [&](const std::vector<double>& x) {
    const auto u = rc.state(x);
    return rc.coords(apply_linear(u, cfg) + nonlinear_term(u, cfg));
  };
  Eigen::MatrixXd J(n, n);
  const double h = 1e-4;
  for (int j = 0; j < n; ++j) {
    std::vector<double> xp(n, 0.0), xm(n, 0.0);
    xp[j] = h;
    xm[j] = -h;
    const auto fp = rhs(xp), fm = rhs(xm);
    for (int i = 0; i < n; ++i) J(i, j) = (fp[i] - fm[i]) / (2 * h);
  }
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto u = tf_test::random_state(6, 6, rng);
    const auto x = rc.coords(u);
    const Eigen::VectorXd jx = J * Eigen::Map<const Eigen::VectorXd>(x.data(), n);
    const auto lx = rc.coords(apply_linear(u, cfg));
    double err = 0.0, ref = 0.0;
    for (int i = 0; i < n; ++i) {
      err = std::max(err, std::abs(jx(i) - lx[i]));
      ref = std::max(ref, std::abs(lx[i]));
    }
    worst = std::max(worst, err / ref);
  }
  const double el = seconds_since(t0);
  return {worst <= 1e-7 && el < 30.0, "max rel err " + str(worst, 3) + ", " + str(el, 3) + " s"};
}

Outcome threshold_reproduction() {
  const auto r = instability_interval(pars(), 1);
  auto c0 = pars();
  c0.nu = 0.0;
  const auto r0 = instability_interval(c0, 1);
  const double inviscid = 8.0 / (5.0 * pi * pi);
  const bool ok = r.status == RegionStatus::interval && r.dT2 >= 0.1615 && r.dT2 <= 0.1625 &&
                  std::abs(r0.dT2 - inviscid) <= 1e-14;
  return {ok, "dT1 " + str(r.dT1) + ", dT2 " + str(r.dT2, 7) + ", inviscid " + str(r0.dT2, 9) + " vs " +
                  str(inviscid, 9)};
}

Outcome root_values() {
  const double l4 = ell_for_degenerate_overlap(4.0), l9 = ell_for_degenerate_overlap(9.0), ls = ell_star();
  DomainConfig c;
  c.L1 = 1.0;
  c.L2 = 2.0 * std::sqrt(2.0 + 3.0 * std::sqrt(2.0));
  const double rel = std::abs(nu_crit(c, 1.0) / nu_crit(c, 4.0) - 1.0);
  const bool ok = std::abs(l4 - 5.37) <= 0.01 && std::abs(l9 - 7.22) <= 0.01 && std::abs(ls - 4.053) <= 0.005 &&
                  rel <= 1e-12;
  return {ok, "l4 " + str(l4) + ", l9 " + str(l9) + ", l* " + str(ls) + ", nu_crit ratio err " + str(rel, 3)};
}

Outcome normal_form_cross_validation() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5);
  double wb = 0.0, wa = 0.0;
  for (int s = 0; s < 50; ++s) {
    const auto c = random_admissible(rng);
    for (auto w : {Threshold::left, Threshold::right}) {
      const auto bp = bifurcation_point(c, w);
      const cplx b = coeff_b(bp), a = coeff_a(bp);
      wb = std::max(wb, std::abs(coeff_b_numeric(bp, c) - b) / std::abs(b));
      wa = std::max(wa, std::abs(coeff_a_dual(bp) - a) / std::abs(a));
    }
  }
  const double el = seconds_since(t0);
  return {wb <= 1e-8 && wa <= 1e-12 && el < 60.0,
          "b rel err " + str(wb, 3) + ", a dual rel err " + str(wa, 3) + ", " + str(el, 3) + " s"};
}

Outcome sign_laws() {
  std::mt19937_64 rng(6);
  int violations = 0, n = 0;
  for (int s = 0; s < 1000; ++s) {
    const auto c = random_admissible(rng);
    const auto left = bifurcation_point(c, Threshold::left), right = bifurcation_point(c, Threshold::right);
    n += 2;
    if (!(coeff_b(left).real() < 0.0) || !(coeff_a(left).real() > 0.0)) ++violations;
    if (!(coeff_b(right).real() < 0.0) || !(coeff_a(right).real() < 0.0)) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(n) + " thresholds"};
}

Outcome growth_rate() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = pars(0.1);
  IntegratorConfig ic;
  ic.N1 = ic.N2 = 32;
  ic.dt = 0.02;
  ic.t_end = 30.0;
  ic.record_every = 25;
  ic.ic.amplitude = 1e-6;
  const auto tr = simulate(cfg, ic);
  std::vector<double> t, y;
  for (const auto& r : tr.records)
    if (r.t >= 5.0) {
      t.push_back(r.t);
      y.push_back(std::log(r.sup_u1));
    }
  const double rate = linear_fit(t, y)[0];
  const double expected = closed_form_eigenvalues(cfg, 1.0, 1.0).plus.real();
  const double rel = std::abs(rate / expected - 1.0);
  const double el = seconds_since(t0);
  return {rel <= 0.02 && el < 60.0, "fitted " + str(rate) + " vs " + str(expected) + " (" + str(100 * rel, 3) +
                                        "%), " + str(el, 3) + " s"};
}

Outcome hopf_amplitude_frequency() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto base = pars();
  const auto bp = bifurcation_point(base, Threshold::right);
  const double mu1 = -0.01 * bp.dT_c;
  const auto cfg = base.with_dT(bp.dT_c + mu1);
  const auto pred = predicted_cycle(bp, base, mu1);
  const auto vec = eigenvectors(bp);
  const cplx norm = vec.xi[0] * std::conj(vec.eta[0]) + vec.xi[1] * std::conj(vec.eta[1]);

  IntegratorConfig ic;
  ic.N1 = ic.N2 = 32;
  ic.dt = 0.02;
  ic.t_end = 800.0;
  ic.record_every = 5;
  ic.ic.amplitude = 1e-3;
  const double t_measure = 600.0;
  std::vector<double> radius, probe;
  const auto tr = simulate(cfg, ic, [&](double t, const SpectralState& u) {
    if (t < t_measure) return;
    const Vec2 m = u.mode(1, 1);
    radius.push_back(std::abs((m[0] * std::conj(vec.eta[0]) + m[1] * std::conj(vec.eta[1])) / norm));
  });
  for (const auto& r : tr.records)
    if (r.t >= t_measure) probe.push_back(r.midpoint_lab);
  double mean_r = 0.0;
  for (double r : radius) mean_r += r;
  mean_r /= static_cast<double>(radius.size());
  const auto per = acf_period(probe, ic.dt * ic.record_every);
  const double expected_period = 2.0 * base.L2 / (cfg.T_plus + cfg.T_minus);
  const double r_rel = std::abs(mean_r / pred.radius - 1.0);
  const double p_rel = per ? std::abs(per->period / expected_period - 1.0) : std::numeric_limits<double>::infinity();
  const double el = seconds_since(t0);
  return {r_rel <= 0.2 && p_rel <= 0.05,
          "radius " + str(mean_r, 4) + " vs " + str(pred.radius, 4) + " (" + str(100 * r_rel, 3) + "%), lab period " +
              (per ? str(per->period, 5) : std::string("none")) + " vs " + str(expected_period, 5) + " (" +
              str(100 * p_rel, 3) + "%), " + str(el, 3) + " s"};
}

Outcome energy_invariance() {
  const auto cfg = pars(0.1);
  auto drift = [&](double dt, long steps) {
    IntegratorConfig ic;
    ic.N1 = ic.N2 = 8;
    ic.dt = dt;
    ic.t_end = dt * steps;
    ic.record_every = 1;
    ic.ic.kind = IcKind::random;
    ic.ic.amplitude = 0.2;
    double e0 = 0.0, m = 0.0, scale = 0.0;
    bool first = true;
    const auto tr = simulate(cfg, ic);
    for (const auto& r : tr.records) {
      if (first) {
        e0 = r.energy.energy;
        scale = r.energy.l2_sq;
        first = false;
      }
      m = std::max(m, std::abs(r.energy.energy - e0));
    }
    return m / scale;
  };
  const double d1 = drift(0.01, 10000), d2 = drift(0.005, 20000);
  const double ratio = d1 / d2;
  return {ratio >= 3.5, "relative drift " + str(d1, 3) + " (dt 0.01, 1e4 steps) vs " + str(d2, 3) +
                            " (dt 0.005), ratio " + str(ratio, 4)};
}

Outcome global_decay() {
  std::string detail;
  bool ok = true;
  const auto base = pars();
  for (double dT : {-0.1, 1.1 * dT_star(base)}) {
    const auto cfg = base.with_dT(dT);
    IntegratorConfig ic;
    ic.N1 = ic.N2 = 16;
    ic.dt = 0.01;
    ic.t_end = 50.0;
    ic.record_every = 1;
    ic.ic.kind = IcKind::random;
    ic.ic.amplitude = 0.01;
    ic.ic.seed = 2024;
    const auto tr = simulate(cfg, ic);
    const auto d = decay_check(tr.energy_records(), cfg);
    ok = ok && d.pass;
    detail += (detail.empty() ? "" : "; ") + std::string("dT ") + str(dT, 4) + ": worst ratio " +
              str(d.worst_ratio, 4) + " at t " + str(d.worst_time, 4);
  }
  return {ok, detail + " (limit 1.05)"};
}

Outcome poincare_identity() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> N(1, 8);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cfg = tf_test::random_config(rng);
    const auto s = tf_test::random_state(N(rng), N(rng), rng);
    const auto r = poincare_ratios(s, cfg);
    const double b = cfg.L1 * cfg.L1 / (pi * pi);
    const auto [i1, i2] = cross_integrals(s, cfg);
    if (r.r1 > 2.0 * b * (1 + 1e-10)) ++violations;
    if (r.r2 > b * (1 + 1e-10)) ++violations;
    if (cross_identity_residual(s, cfg) > 1e-10 * std::max({1.0, std::abs(i1), std::abs(i2)})) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations in 1000 states"};
}

Outcome continuation_diagram() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = pars();
  const auto reg = instability_interval(cfg, 1);
  const double d1 = reg.dT1, d2 = reg.dT2;
  // each branch is traced from where it bifurcates: up from below the left threshold,
  // down from above the right one
  const std::vector<double> up = {d1 - 0.01, d1 - 0.0015, d1 + 0.0015, d1 + 0.005, 0.01, 0.02,
                                  0.04,      0.06,        0.0646,      0.07,       0.08};
  const std::vector<double> down = {d2 + 0.01, d2 + 0.0015, d2 - 0.0015, d2 - 0.005, 0.15, 0.14, 0.12, 0.1, 0.09};
  SweepProtocol p;  // transient 400, window 200, dt 0.02, N 32
  const auto report = [](const ContinuationPoint& q) {
    std::printf("      dT %-10.6g amplitude %-10.4g limit %-10.4g %-8s period %s\n", q.dT, q.amplitude,
                q.limit_amplitude, to_string(q.classification), q.period ? str(*q.period, 5).c_str() : "-");
    std::fflush(stdout);
  };
  auto pts = sweep(cfg, up, p, {}, report);
  const auto pd = sweep(cfg, down, p, {}, report);
  pts.insert(pts.end(), pd.begin(), pd.end());
  bool ok = true;
  int flagged = 0;
  for (const auto& q : pts) {
    const bool outside = q.dT < d1 - 1e-3 || q.dT > d2 + 1e-3;
    const bool inside = q.dT > d1 && q.dT < d2;
    if (q.blew_up) ok = false;
    if (outside && q.limit_amplitude != 0.0) ok = false;
    if (inside && !(q.limit_amplitude > 0.0)) ok = false;
    if (std::abs(q.dT - 0.0646) <= 0.01 && q.classification == AttractorKind::complex) ++flagged;
  }
  // amplitude^2 per unit distance from the threshold, 0.005 inside it
  auto slope_at = [&](double dT, double dc) {
    for (const auto& q : pts)
      if (std::abs(q.dT - dT) < 1e-12) return q.limit_amplitude * q.limit_amplitude / std::abs(q.dT - dc);
    return std::numeric_limits<double>::quiet_NaN();
  };
  const double sl = slope_at(d1 + 0.005, d1), sr = slope_at(d2 - 0.005, d2);
  ok = ok && sl > sr;
  return {ok, "amplitude^2 slope left " + str(sl, 4) + " vs right " + str(sr, 4) + ", " + std::to_string(flagged) +
                  " non-periodic point(s) flagged near 0.0646, " + str(seconds_since(t0), 4) + " s"};
}

Outcome escape_time_scaling() {
  const auto cfg = pars(0.1);
  const double escape = 0.05;
  std::vector<double> x, t;
  std::string detail;
  for (double delta : {1e-3, 1e-4, 1e-5, 1e-6}) {
    IntegratorConfig ic;
    ic.N1 = ic.N2 = 16;
    ic.dt = 0.02;
    ic.t_end = 300.0;
    ic.record_every = 1;
    ic.ic.amplitude = delta;
    const auto tr = simulate(cfg, ic);
    double te = std::numeric_limits<double>::quiet_NaN();
    for (size_t i = 1; i < tr.records.size(); ++i)
      if (tr.records[i].sup_u1 >= escape) {
        const auto &a = tr.records[i - 1], &b = tr.records[i];
        const double f = std::log(escape / a.sup_u1) / std::log(b.sup_u1 / a.sup_u1);
        te = a.t + f * (b.t - a.t);
        break;
      }
    if (!std::isfinite(te)) return {false, "no escape from delta " + str(delta)};
    x.push_back(std::abs(std::log(delta)));
    t.push_back(te);
    detail += str(te, 5) + " ";
  }
  const auto f = linear_fit(x, t);
  return {f[2] >= 0.99 && f[0] > 0.0, "escape times " + detail + "-> c1 " + str(f[0], 5) + ", c2 " + str(f[1], 5) +
                                          ", R^2 " + str(f[2], 8)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"spectrum oracle", spectrum_oracle},
      {"operator consistency", operator_consistency},
      {"threshold reproduction", threshold_reproduction},
      {"root values", root_values},
      {"normal-form cross-validation", normal_form_cross_validation},
      {"sign laws", sign_laws},
      {"growth rate", growth_rate},
      {"Hopf amplitude and frequency", hopf_amplitude_frequency},
      {"energy invariance", energy_invariance},
      {"global decay", global_decay},
      {"Poincare and identity suites", poincare_identity},
      {"continuation diagram", continuation_diagram},
      {"escape-time scaling", escape_time_scaling},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %d. %s: %s\n", o.pass ? "PASS" : "FAIL", n, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d failed\n", failed);
  return failed == 0 ? 0 : 1;
}
