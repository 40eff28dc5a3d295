#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "domain.hpp"
#include "io.hpp"
#include "spectral_state.hpp"
#include "time_integrator.hpp"

namespace twofluid {

enum class AttractorKind { steady, periodic, complex };

inline const char* to_string(AttractorKind k) {
  switch (k) {
    case AttractorKind::steady: return "steady";
    case AttractorKind::periodic: return "periodic";
    default: return "complex";
  }
}

inline AttractorKind attractor_kind_from_string(const std::string& s) {
  if (s == "steady") return AttractorKind::steady;
  if (s == "periodic") return AttractorKind::periodic;
  if (s == "complex") return AttractorKind::complex;
  throw PreconditionError("unknown attractor kind '" + s + "'");
}

struct ContinuationPoint {
  double dT = 0.0;
  double amplitude = 0.0;        // max over the window of sup |u1|
  std::optional<double> period;  // lab-frame midpoint period, absent when steady
  AttractorKind classification = AttractorKind::steady;
  double limit_amplitude = 0.0;  // 0 when the window trace decays exponentially to the trivial state
  double log_slope = 0.0;        // fitted d/dt log sup |u1| over the window
  double log_fit_r2 = 0.0;
  double acf_peak = 0.0;
  std::optional<double> period_zero_crossing;
  bool reseeded = false;
  bool blew_up = false;
};

struct SweepProtocol {
  double transient = 400.0;
  double window = 200.0;
  double dt = 0.02;
  int N1 = 32, N2 = 32;
  double sample_interval = 0.1;
  double seed_amplitude = 1e-3;
  int seed_k2 = 1;
  double reseed_floor = 1e-8;   // warm-start states below this sup-norm are reseeded
  double blowup_threshold = 1e6;
  bool warm_start = true;       // false: every point starts from a fresh seed
  int threads = 1;              // cold-start only
  double periodic_acf = 0.9;    // autocorrelation peak needed for "periodic"
  double steady_rel_variation = 1e-3;
  double decay_r2 = 0.98;
  double decay_factor = 2.0;    // fitted decay over the window that counts as decaying when R^2 is low
  double decay_max_amplitude = 1e-2;  // only windows below this sup-norm can count as decaying
};

// ---------------------------------------------------------------------------
// trace analysis

struct PeriodEstimate {
  double period;
  double acf_peak;  // normalized autocorrelation at the peak
};

/// Autocorrelation peak after the first negative lobe, refined by a parabola through three lags.
inline std::optional<PeriodEstimate> acf_period(const std::vector<double>& y, double ds) {
  const size_t n = y.size();
  if (n < 8) return std::nullopt;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  std::vector<double> z(n);
  for (size_t i = 0; i < n; ++i) z[i] = y[i] - mean;
  const size_t max_lag = n / 2;
  std::vector<double> r(max_lag + 1);
  for (size_t lag = 0; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (size_t i = 0; i + lag < n; ++i) acc += z[i] * z[i + lag];
    r[lag] = acc / (n - lag);
  }
  if (!(r[0] > 0.0)) return std::nullopt;
  const double r0 = r[0];
  for (auto& v : r) v /= r0;
  size_t lag = 1;
  while (lag <= max_lag && r[lag] >= 0.0) ++lag;
  if (lag > max_lag) return std::nullopt;
  size_t best = 0;
  for (size_t k = lag + 1; k < max_lag; ++k)
    if (r[k] >= r[k - 1] && r[k] >= r[k + 1] && r[k] > 0.0) {
      best = k;
      break;
    }
  if (best == 0) return std::nullopt;
  const double a = r[best - 1], b = r[best], c = r[best + 1];
  const double den = a - 2.0 * b + c;
  const double off = den != 0.0 ? 0.5 * (a - c) / den : 0.0;
  return PeriodEstimate{(best + off) * ds, b - 0.25 * (a - c) * off};
}

/// Mean spacing of upward zero crossings of the mean-removed trace.
inline std::optional<double> zero_crossing_period(const std::vector<double>& y, double ds) {
  if (y.size() < 3) return std::nullopt;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= y.size();
  std::vector<double> t;
  for (size_t i = 0; i + 1 < y.size(); ++i) {
    const double a = y[i] - mean, b = y[i + 1] - mean;
    if (a < 0.0 && b >= 0.0) t.push_back((i + a / (a - b)) * ds);
  }
  if (t.size() < 2) return std::nullopt;
  return (t.back() - t.front()) / (t.size() - 1);
}

/// Least-squares slope and R^2 of log(y) against t.
inline std::pair<double, double> log_linear_fit(const std::vector<double>& t, const std::vector<double>& y) {
  double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
  int n = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (!(y[i] > 0.0)) continue;
    const double ly = std::log(y[i]);
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
    syy += ly * ly;
    ++n;
  }
  if (n < 3) return {0.0, 0.0};
  const double vt = n * stt - st * st, vy = n * syy - sy * sy, c = n * sty - st * sy;
  const double slope = vt > 0 ? c / vt : 0.0;
  const double r2 = (vt > 0 && vy > 0) ? c * c / (vt * vy) : 1.0;
  return {slope, r2};
}

/// Fills amplitude, period and classification from the records inside the window.
inline ContinuationPoint measure_window(const std::vector<TraceRecord>& window, double dT,
                                        const SweepProtocol& p) {
  ContinuationPoint pt;
  pt.dT = dT;
  if (window.size() < 3) throw PreconditionError("measurement window holds fewer than 3 samples");
  std::vector<double> t, sup, mid;
  for (const auto& r : window) {
    t.push_back(r.t);
    sup.push_back(r.sup_u1);
    mid.push_back(r.midpoint_lab);
  }
  const double ds = (t.back() - t.front()) / (t.size() - 1);
  pt.amplitude = *std::max_element(sup.begin(), sup.end());
  const double lo = *std::min_element(sup.begin(), sup.end());
  std::tie(pt.log_slope, pt.log_fit_r2) = log_linear_fit(t, sup);

  // clean exponential, or a beating trace whose fitted decay and envelope both go down
  const size_t q = std::max<size_t>(sup.size() / 4, 1);
  const double head = *std::max_element(sup.begin(), sup.begin() + q);
  const double tail = *std::max_element(sup.end() - q, sup.end());
  const double span = t.back() - t.front();
  const bool clean = pt.log_fit_r2 >= p.decay_r2 && sup.back() < sup.front();
  const bool beating = pt.log_slope * span <= -std::log(p.decay_factor) && tail < head;
  // large-amplitude windows can sit on the slow phase of a bursting attractor
  const bool decaying = pt.log_slope < 0.0 && pt.amplitude <= p.decay_max_amplitude && (clean || beating);
  pt.limit_amplitude = decaying ? 0.0 : pt.amplitude;
  if (decaying || pt.amplitude == 0.0) {
    pt.classification = AttractorKind::steady;
    return pt;
  }
  if (auto est = acf_period(mid, ds)) {
    pt.acf_peak = est->acf_peak;
    if (est->acf_peak >= p.periodic_acf) pt.period = est->period;
  }
  pt.period_zero_crossing = zero_crossing_period(mid, ds);
  const double rel_var = (pt.amplitude - lo) / pt.amplitude;
  // a wave frozen in the comoving frame has a constant sup-norm and a periodic lab-frame probe
  if (pt.period) {
    pt.classification = AttractorKind::periodic;
  } else if (rel_var < p.steady_rel_variation) {
    pt.classification = AttractorKind::steady;
  } else {
    pt.classification = AttractorKind::complex;
  }
  return pt;
}

// ---------------------------------------------------------------------------
// sweep

inline IntegratorConfig protocol_integrator(const SweepProtocol& p) {
  IntegratorConfig ic;
  ic.dt = p.dt;
  ic.t_end = p.transient + p.window;
  ic.N1 = p.N1;
  ic.N2 = p.N2;
  ic.record_every = std::max(1, static_cast<int>(std::lround(p.sample_interval / p.dt)));
  ic.throw_on_blowup = false;
  ic.blowup_threshold = p.blowup_threshold;
  ic.ic.kind = IcKind::eigenmode;
  ic.ic.amplitude = p.seed_amplitude;
  ic.ic.k2 = p.seed_k2;
  return ic;
}

inline void validate(const SweepProtocol& p) {
  if (!(p.transient >= 0.0) || !(p.window > 0.0)) throw PreconditionError("transient >= 0 and window > 0 required");
  if (!(p.dt > 0.0)) throw PreconditionError("dt must be positive");
  if (!(p.sample_interval >= p.dt)) throw PreconditionError("sample interval must be at least dt");
  if (p.N1 < 1 || p.N2 < p.seed_k2 || p.seed_k2 < 0) throw PreconditionError("bad truncation or seed wavenumber");
}

/// One point: run transient + window from `start`, measure, and return the final state.
inline std::pair<ContinuationPoint, SpectralState> continuation_step(const DomainConfig& base, double dT,
                                                                     const SweepProtocol& p,
                                                                     const SpectralState* start) {
  const DomainConfig cfg = base.with_dT(dT);
  const IntegratorConfig ic = protocol_integrator(p);
  const bool reseeded = start && sup_norm_u1(*start) < p.reseed_floor;
  SpectralState init = (start && !reseeded) ? *start : make_initial_state(cfg, ic);
  Trajectory tr = simulate_from(cfg, ic, init);
  if (tr.blew_up) {
    ContinuationPoint pt;
    pt.dT = dT;
    pt.amplitude = std::numeric_limits<double>::quiet_NaN();
    pt.limit_amplitude = pt.amplitude;
    pt.classification = AttractorKind::complex;
    pt.blew_up = true;
    pt.reseeded = reseeded;
    return {pt, make_initial_state(cfg, ic)};
  }
  std::vector<TraceRecord> window;
  const double t_on = p.transient - 1e-9;
  for (const auto& r : tr.records)
    if (r.t >= t_on) window.push_back(r);
  ContinuationPoint pt = measure_window(window, dT, p);
  pt.reseeded = reseeded;
  return {pt, std::move(tr.final_state)};
}

/// dT values from start to end inclusive; the step sign must point from start to end.
inline std::vector<double> sweep_values(double start, double end, double step) {
  if (!std::isfinite(start) || !std::isfinite(end) || !std::isfinite(step) || step == 0.0)
    throw PreconditionError("sweep needs finite start, end and a nonzero step");
  if ((end - start) * step < 0.0) throw PreconditionError("sweep step does not point from start to end");
  std::vector<double> v;
  const long n = static_cast<long>(std::floor((end - start) / step + 1e-9));
  for (long i = 0; i <= n; ++i) v.push_back(start + i * step);
  return v;
}

struct SweepCheckpoint {
  DomainConfig cfg;
  std::vector<double> dTs;
  std::vector<ContinuationPoint> points;
  std::optional<SpectralState> state;  // final state of the last finished point
};

inline io::json to_json(const ContinuationPoint& p) {
  return {{"dT", p.dT},
          {"amplitude", io::num(p.amplitude)},
          {"period", p.period ? io::json(*p.period) : io::json(nullptr)},
          {"classification", to_string(p.classification)},
          {"limit_amplitude", io::num(p.limit_amplitude)},
          {"log_slope", io::num(p.log_slope)},
          {"log_fit_r2", io::num(p.log_fit_r2)},
          {"acf_peak", io::num(p.acf_peak)},
          {"period_zero_crossing", p.period_zero_crossing ? io::json(*p.period_zero_crossing) : io::json(nullptr)},
          {"reseeded", p.reseeded},
          {"blew_up", p.blew_up}};
}

inline ContinuationPoint point_from_json(const io::json& j) {
  ContinuationPoint p;
  p.dT = j.at("dT").get<double>();
  p.amplitude = io::num_or_nan(j.at("amplitude"));
  if (!j.at("period").is_null()) p.period = j.at("period").get<double>();
  p.classification = attractor_kind_from_string(j.at("classification").get<std::string>());
  p.limit_amplitude = io::num_or_nan(j.at("limit_amplitude"));
  p.log_slope = io::num_or_nan(j.at("log_slope"));
  p.log_fit_r2 = io::num_or_nan(j.at("log_fit_r2"));
  p.acf_peak = io::num_or_nan(j.at("acf_peak"));
  if (!j.at("period_zero_crossing").is_null()) p.period_zero_crossing = j.at("period_zero_crossing").get<double>();
  p.reseeded = j.at("reseeded").get<bool>();
  p.blew_up = j.at("blew_up").get<bool>();
  return p;
}

inline io::json to_json(const SweepCheckpoint& c) {
  io::json pts = io::json::array();
  for (const auto& p : c.points) pts.push_back(to_json(p));
  return {{"format", io::state_format},
          {"config", io::to_json(c.cfg)},
          {"dT_values", c.dTs},
          {"points", pts},
          {"state", c.state ? io::state_to_json(*c.state) : io::json(nullptr)}};
}

inline SweepCheckpoint checkpoint_from_json(const io::json& j) {
  if (j.at("format").get<int>() != io::state_format) throw PreconditionError("unsupported checkpoint format");
  SweepCheckpoint c;
  c.cfg = io::config_from_json(j.at("config"));
  c.dTs = j.at("dT_values").get<std::vector<double>>();
  for (const auto& p : j.at("points")) c.points.push_back(point_from_json(p));
  if (!j.at("state").is_null()) c.state = io::state_from_json(j.at("state"));
  return c;
}

using PointHook = std::function<void(const ContinuationPoint&)>;

/// Warm-started sweep over the given dT values in order. With a checkpoint path, progress is
/// written after every point and an existing matching checkpoint is resumed.
inline std::vector<ContinuationPoint> sweep(const DomainConfig& cfg, const std::vector<double>& dTs,
                                            const SweepProtocol& p, const std::string& checkpoint = {},
                                            const PointHook& hook = {}) {
  cfg.validate();
  validate(p);
  if (!(cfg.nu > 0.0)) throw PreconditionError("continuation requires nu > 0");
  if (dTs.empty()) return {};
  for (size_t i = 1; i < dTs.size(); ++i)
    if ((dTs[i] - dTs[i - 1]) * (dTs.back() - dTs.front()) <= 0.0)
      throw PreconditionError("dT values must be strictly monotone");

  SweepCheckpoint ck{cfg, dTs, {}, std::nullopt};
  if (!checkpoint.empty() && std::filesystem::exists(checkpoint)) {
    SweepCheckpoint old = checkpoint_from_json(io::read_json(checkpoint));
    const bool same = io::to_json(old.cfg) == io::to_json(cfg) && old.dTs == dTs;
    if (!same) throw PreconditionError("checkpoint " + checkpoint + " belongs to a different sweep");
    if (old.state && (old.state->N1() != p.N1 || old.state->N2() != p.N2))
      throw PreconditionError("checkpoint truncation differs from the protocol");
    ck = std::move(old);
  }

  if (!p.warm_start) {
    const size_t first = ck.points.size();
    std::vector<ContinuationPoint> out(dTs.size() - first);
    const int nt = std::max(1, std::min<int>(p.threads, static_cast<int>(out.size())));
    auto work = [&](int w) {
      for (size_t i = w; i < out.size(); i += nt) out[i] = continuation_step(cfg, dTs[first + i], p, nullptr).first;
    };
    if (nt == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < nt; ++w) pool.emplace_back(work, w);
      for (auto& th : pool) th.join();
    }
    for (auto& pt : out) {
      ck.points.push_back(pt);
      if (hook) hook(pt);
    }
    if (!checkpoint.empty()) io::write_json(checkpoint, to_json(ck));
    return ck.points;
  }

  for (size_t i = ck.points.size(); i < dTs.size(); ++i) {
    auto [pt, state] = continuation_step(cfg, dTs[i], p, ck.state ? &*ck.state : nullptr);
    ck.points.push_back(pt);
    ck.state = std::move(state);
    if (!checkpoint.empty()) io::write_json(checkpoint, to_json(ck));
    if (hook) hook(pt);
  }
  return ck.points;
}

inline std::vector<ContinuationPoint> sweep(const DomainConfig& cfg, double dT_start, double dT_end, double dT_step,
                                            const SweepProtocol& p, const std::string& checkpoint = {},
                                            const PointHook& hook = {}) {
  return sweep(cfg, sweep_values(dT_start, dT_end, dT_step), p, checkpoint, hook);
}

inline std::string bifurcation_csv(const std::vector<ContinuationPoint>& pts) {
  std::ostringstream o;
  o << "dT,amplitude,period,classification,limit_amplitude,acf_peak,period_zero_crossing,reseeded,blew_up\n";
  for (const auto& p : pts)
    o << io::fmt(p.dT) << ',' << io::fmt(p.amplitude) << ',' << (p.period ? io::fmt(*p.period) : "") << ','
      << to_string(p.classification) << ',' << io::fmt(p.limit_amplitude) << ',' << io::fmt(p.acf_peak) << ','
      << (p.period_zero_crossing ? io::fmt(*p.period_zero_crossing) : "") << ',' << (p.reseeded ? 1 : 0) << ','
      << (p.blew_up ? 1 : 0) << '\n';
  return o.str();
}

}  // namespace twofluid
