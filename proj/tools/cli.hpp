#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twofluid/config.hpp"
#include "twofluid/twofluid.hpp"

namespace twofluid::cli {

inline constexpr const char* tool_version = "0.1.0";

using json = io::json;
namespace fs = std::filesystem;

inline std::string sha256_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw PreconditionError("cannot read " + p.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw NumericalError("sha256 init failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream o;
  for (unsigned i = 0; i < len; ++i) o << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return o.str();
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

// ---------------------------------------------------------------------------
// shared options

struct DomainFlags {
  std::optional<double> L1, L2, nu, T_plus, T_minus;
  std::string config_path;
  std::optional<std::string> out_dir;
  int threads = 1;
};

inline void add_domain_flags(CLI::App* sub, DomainFlags& f) {
  sub->add_option("--L1", f.L1, "channel width (x1, Dirichlet)");
  sub->add_option("--L2", f.L2, "period in x2");
  sub->add_option("--nu", f.nu, "viscosity");
  sub->add_option("--Tplus", f.T_plus, "temperature of species 1");
  sub->add_option("--Tminus", f.T_minus, "temperature of species 2");
  sub->add_option("--config", f.config_path, "key = value config file");
  sub->add_option("--out-dir", f.out_dir, "output directory (default: output.dir or ./out)");
  sub->add_option("--threads", f.threads, "worker threads where supported")->check(CLI::PositiveNumber);
}

/// Parsed configuration: defaults, then the config file, then flags.
struct Resolved {
  DomainConfig domain;
  KeyValueConfig file;
  fs::path out_dir;
};

inline Resolved resolve(const DomainFlags& f) {
  Resolved r;
  if (!f.config_path.empty()) {
    r.file = KeyValueConfig::load(f.config_path);
    r.file.check_known(known_config_keys());
  }
  r.domain = apply(r.file, DomainConfig{});
  if (f.L1) r.domain.L1 = *f.L1;
  if (f.L2) r.domain.L2 = *f.L2;
  if (f.nu) r.domain.nu = *f.nu;
  if (f.T_plus) r.domain.T_plus = *f.T_plus;
  if (f.T_minus) r.domain.T_minus = *f.T_minus;
  r.domain.validate();
  r.out_dir = f.out_dir ? *f.out_dir : r.file.get_string("output.dir", "out");
  return r;
}

/// Collects output files and writes manifest.json next to them.
class Run {
 public:
  Run(std::string command, fs::path dir, const DomainConfig& cfg)
      : command_(std::move(command)), dir_(std::move(dir)), started_(utc_now()) {
    fs::create_directories(dir_);
    params_["domain"] = io::to_json(cfg);
  }
  json& params() { return params_; }
  const fs::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& text) {
    io::write_text((dir_ / name).string(), text);
    files_.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void finish(const std::string& argv_line, std::optional<std::uint64_t> seed = std::nullopt) {
    json outs = json::array();
    for (const auto& f : files_)
      outs.push_back({{"file", f}, {"bytes", fs::file_size(dir_ / f)}, {"sha256", sha256_file(dir_ / f)}});
    json m = {{"tool", "twofluid"},        {"version", tool_version}, {"command", command_},
              {"argv", argv_line},         {"config", params_},       {"started", started_},
              {"finished", utc_now()},     {"outputs", outs}};
    m["seed"] = seed ? json(*seed) : json(nullptr);
    io::write_json((dir_ / "manifest.json").string(), m);
  }

 private:
  std::string command_;
  fs::path dir_;
  std::string started_;
  json params_ = json::object();
  std::vector<std::string> files_;
};

inline json cjson(cplx z) { return {{"re", io::num(z.real())}, {"im", io::num(z.imag())}}; }

inline json region_json(const InstabilityRegion& r) {
  return {{"k2", r.k2},           {"status", to_string(r.status)}, {"dT1", io::num(r.dT1)},
          {"dT2", io::num(r.dT2)}, {"nu_crit", r.nu_crit},         {"dT_peak", r.dT_peak}};
}

/// "a:b:n" -> n points from a to b; a single number -> one point
inline std::vector<double> parse_range(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  auto num = [&](const std::string& t) {
    size_t used = 0;
    double v = 0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != t.size()) throw ConfigError("bad number '" + t + "' in range '" + s + "'");
    return v;
  };
  if (parts.size() == 1) return {num(parts[0])};
  if (parts.size() != 3) throw ConfigError("range must be 'start:end:count', got '" + s + "'");
  const double n = num(parts[2]);
  if (n < 1 || n != std::floor(n)) throw ConfigError("range count must be a positive integer");
  return linspace(num(parts[0]), num(parts[1]), static_cast<int>(n));
}

// ---------------------------------------------------------------------------
// commands

struct SpectrumArgs {
  std::string dT_range = "0:0.45:91";
  int k1_max = 10, k2_max = 10;
  bool continuous = false;
  std::string k2_range = "0:2:401";
};

inline int cmd_spectrum(const DomainFlags& f, const SpectrumArgs& a, const std::string& argv_line, std::ostream& out) {
  auto r = resolve(f);
  if (a.k1_max < 1 || a.k2_max < 0) throw ConfigError("--k1-max must be >= 1 and --k2-max >= 0");
  const auto dTs = parse_range(a.dT_range);
  Run run("spectrum", r.out_dir, r.domain);
  run.params()["dT_range"] = a.dT_range;
  run.params()["k1_max"] = a.k1_max;
  run.params()["k2_max"] = a.k2_max;
  std::ostringstream o;
  o << std::setprecision(17);
  if (!a.continuous) {
    const auto rows = spectrum_sweep(r.domain, dTs, a.k1_max, a.k2_max, f.threads);
    o << "dT,k1,k2,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus\n";
    for (const auto& row : rows)
      o << row.dT << ',' << row.k1 << ',' << row.k2 << ',' << row.lambda_plus.real() << ',' << row.lambda_plus.imag()
        << ',' << row.lambda_minus.real() << ',' << row.lambda_minus.imag() << '\n';
    run.write("spectrum.csv", o.str());
    out << "spectrum: " << rows.size() << " rows -> " << (run.dir() / "spectrum.csv").string() << "\n";
  } else {
    const auto ks = parse_range(a.k2_range);
    run.params()["k2_range"] = a.k2_range;
    o << "dT,k2,re_lambda_plus,im_lambda_plus\n";
    for (double d : dTs)
      for (const auto& row : strip_dispersion(r.domain, d, ks))
        o << d << ',' << row.k2 << ',' << row.lambda_plus.real() << ',' << row.lambda_plus.imag() << '\n';
    run.write("strip_dispersion.csv", o.str());
    out << "strip dispersion -> " << (run.dir() / "strip_dispersion.csv").string() << "\n";
  }
  run.finish(argv_line);
  return 0;
}

struct StabilityArgs {
  int k2_max = 10;
};

inline int cmd_stability(const DomainFlags& f, const StabilityArgs& a, const std::string& argv_line, std::ostream& out) {
  auto r = resolve(f);
  if (a.k2_max < 1) throw ConfigError("--k2-max must be >= 1");
  Run run("stability", r.out_dir, r.domain);
  run.params()["k2_max"] = a.k2_max;
  json j;
  j["ell"] = r.domain.ell();
  j["dT_star"] = dT_star(r.domain);
  json table = json::array();
  std::ostringstream csv;
  csv << std::setprecision(17) << "k2,nu_crit,status,dT1,dT2,dT_peak\n";
  for (int k2 = 1; k2 <= a.k2_max; ++k2) {
    const auto reg = instability_interval(r.domain, k2);
    table.push_back(region_json(reg));
    csv << k2 << ',' << reg.nu_crit << ',' << to_string(reg.status) << ',' << reg.dT1 << ',' << reg.dT2 << ','
        << reg.dT_peak << '\n';
  }
  j["regions"] = table;
  const auto first = instability_interval(r.domain, 1);
  if (first.status == RegionStatus::absent) {
    j["classification"] = nullptr;
    j["reason"] = "no 1-instability region: nu exceeds nu_crit(1)";
    out << "no 1-instability region (nu > nu_crit(1) = " << first.nu_crit << ")\n";
  } else {
    const auto rep = classify_primary_report(r.domain);
    json cert = json::array();
    for (const auto& e : rep.entries)
      cert.push_back({{"k2", e.k2},
                      {"status", to_string(e.status)},
                      {"dT1", io::num(e.dT1)},
                      {"dT2", io::num(e.dT2)},
                      {"margin_left", io::num(e.margin_left)},
                      {"margin_right", io::num(e.margin_right)},
                      {"lhs_left", io::num(e.lhs_left)},
                      {"lhs_right", io::num(e.lhs_right)},
                      {"rhs", io::num(e.rhs)}});
    j["classification"] = to_string(rep.region.classification);
    j["fast_path"] = rep.fast_path;
    j["k2_checked"] = rep.k2_checked;
    j["reason"] = rep.reason;
    j["certificate"] = cert;
    out << "1-instability region: [" << std::setprecision(8) << rep.region.dT1 << ", " << rep.region.dT2
        << "], classification " << to_string(rep.region.classification) << "\n";
  }
  run.write_json("stability.json", j);
  run.write("nu_crit.csv", csv.str());
  run.finish(argv_line);
  return 0;
}

struct HopfArgs {
  std::string which = "both";
  int k2 = 1;
  int numeric_N = 4;
  std::optional<double> mu;
  bool degenerate = false;
};

inline json hopf_point_json(const DomainConfig& cfg, Threshold w, const HopfArgs& a) {
  const auto bp = bifurcation_point(cfg, w, a.k2);
  const auto v = eigenvectors(bp);
  const Mat2 J = critical_matrix(bp);
  const cplx iw(0.0, bp.omega);
  const cplx ca = coeff_a(bp), cad = coeff_a_dual(bp);
  json j = {{"threshold", to_string(w)},
            {"k2", bp.k2},
            {"dT_c", bp.dT_c},
            {"omega", bp.omega},
            {"c", {bp.c1, bp.c2, bp.c3, bp.c4}},
            {"point_region", bp.point_region},
            {"a", cjson(ca)},
            {"a_dual", cjson(cad)},
            {"a_printed", cjson(coeff_a_printed(bp))},
            {"c_relation_residual", bp.c_relation_residual()}};
  const double res_xi = vnorm(J * v.xi - iw * v.xi) / vnorm(v.xi);
  const Mat2 Jh = J.adjoint();
  const double res_eta = vnorm(Jh * v.eta + iw * v.eta) / vnorm(v.eta);
  j["residuals"] = {{"eigenvector", res_xi},
                    {"adjoint_eigenvector", res_eta},
                    {"a_dual_rel", std::abs(ca - cad) / std::abs(ca)}};
  if (bp.nu > 0.0) {
    const cplx b = coeff_b(bp);
    j["b"] = cjson(b);
    j["b_printed"] = cjson(coeff_b_printed(bp));
    if (a.numeric_N > 0) {
      const cplx bn = coeff_b_numeric(bp, cfg, std::max(a.numeric_N, 2 * a.k2 + 2));
      j["b_numeric"] = cjson(bn);
      j["residuals"]["b_numeric_rel"] = std::abs(bn - b) / std::abs(b);
    }
    if (a.mu) {
      // mu is measured into the unstable side from this threshold
      const double mu1 = w == Threshold::left ? *a.mu : -*a.mu;
      const auto p = predicted_cycle(bp, cfg, mu1);
      j["predicted_cycle"] = {{"mu1", mu1},
                              {"dT", bp.dT_c + mu1},
                              {"radius", p.radius},
                              {"frequency_comoving", p.frequency_comoving},
                              {"frequency_lab", io::num(p.frequency_lab)},
                              {"period_lab", io::num(p.period_lab())},
                              {"speed", p.speed}};
    }
  } else {
    j["b"] = nullptr;
  }
  return j;
}

inline int cmd_hopf(const DomainFlags& f, const HopfArgs& a, const std::string& argv_line, std::ostream& out) {
  auto r = resolve(f);
  if (a.which != "left" && a.which != "right" && a.which != "both")
    throw ConfigError("--which must be left, right or both");
  if (a.k2 < 1) throw ConfigError("--k2 must be >= 1");
  if (a.mu && !(*a.mu >= 0.0)) throw ConfigError("--mu must be >= 0 (distance into the unstable side)");
  if (a.degenerate) {
    const auto reg = instability_interval(r.domain, 1);
    if (reg.status != RegionStatus::point)
      throw PreconditionError("--degenerate requires nu = nu_crit(1) = " + io::fmt(reg.nu_crit));
  } else if (!(r.domain.nu > 0.0)) {
    throw PreconditionError("the cubic coefficient needs nu > 0");
  }
  Run run("hopf", r.out_dir, r.domain);
  run.params()["which"] = a.which;
  run.params()["k2"] = a.k2;
  run.params()["numeric_N"] = a.numeric_N;
  run.params()["mu"] = a.mu ? json(*a.mu) : json(nullptr);
  run.params()["degenerate"] = a.degenerate;
  json j;
  if (a.degenerate) {
    const auto d = degenerate_coeffs(r.domain);
    j["degenerate"] = {{"dT_c", d.bp.dT_c}, {"nu_crit", r.domain.nu}, {"a0", d.a0},
                       {"a1", d.a1},        {"a2", d.a2},               {"a3", d.a3},
                       {"frequency_comoving", d.bp.omega}};
    out << "degenerate point at dT = " << std::setprecision(10) << d.bp.dT_c << "\n";
  } else {
    json pts = json::array();
    for (auto w : {Threshold::left, Threshold::right}) {
      if (a.which != "both" && a.which != to_string(w)) continue;
      pts.push_back(hopf_point_json(r.domain, w, a));
      const auto& p = pts.back();
      out << to_string(w) << " threshold dT_c = " << std::setprecision(10) << p["dT_c"].get<double>()
          << "  a = " << p["a"]["re"].get<double>() << " + " << p["a"]["im"].get<double>() << "i"
          << "  Re b = " << p["b"]["re"].get<double>() << "\n";
    }
    j["points"] = pts;
  }
  run.write_json("hopf.json", j);
  run.finish(argv_line);
  return 0;
}

struct SimulateArgs {
  std::optional<double> dT, dt, t_end, amplitude;
  std::optional<int> N, record_every;
  std::optional<std::string> ic, scheme;
  std::optional<std::uint64_t> seed;
  std::vector<double> snapshots;
  bool linear_only = false;
};

inline IntegratorConfig resolve_integrator(const Resolved& r, const SimulateArgs& a) {
  IntegratorConfig ic = apply(r.file, IntegratorConfig{});
  if (a.dt) ic.dt = *a.dt;
  if (a.t_end) ic.t_end = *a.t_end;
  if (a.N) ic.N1 = ic.N2 = *a.N;
  if (a.record_every) ic.record_every = *a.record_every;
  if (a.ic) ic.ic.kind = ic_kind_from_string(*a.ic);
  if (a.scheme) ic.scheme = scheme_from_string(*a.scheme);
  if (a.amplitude) ic.ic.amplitude = *a.amplitude;
  if (a.seed) ic.ic.seed = *a.seed;
  ic.snapshot_times = a.snapshots;
  ic.linear_only = a.linear_only;
  return ic;
}

inline json integrator_json(const IntegratorConfig& ic, const DomainConfig& cfg) {
  return {{"dt", ic.dt > 0 ? ic.dt : default_dt(cfg)},
          {"t_end", ic.t_end},
          {"N1", ic.N1},
          {"N2", ic.N2},
          {"scheme", to_string(ic.scheme)},
          {"record_every", ic.record_every},
          {"linear_only", ic.linear_only},
          {"ic", {{"kind", to_string(ic.ic.kind)}, {"amplitude", ic.ic.amplitude}, {"k2", ic.ic.k2}, {"seed", ic.ic.seed}}},
          {"snapshot_times", ic.snapshot_times}};
}

inline void add_integrator_flags(CLI::App* sub, SimulateArgs& a) {
  sub->add_option("--dT", a.dT, "temperature difference (sets Tplus = Tminus + dT)");
  sub->add_option("--dt", a.dt, "time step");
  sub->add_option("--t-end", a.t_end, "final time");
  sub->add_option("--N", a.N, "truncation order in both directions")->check(CLI::PositiveNumber);
  sub->add_option("--record-every", a.record_every, "steps between trace records")->check(CLI::PositiveNumber);
  sub->add_option("--ic", a.ic, "eigenmode, random or zero");
  sub->add_option("--scheme", a.scheme, "cnab2 or cn_euler");
  sub->add_option("--amplitude", a.amplitude, "initial amplitude");
  sub->add_option("--seed", a.seed, "seed for random initial data");
}

inline int cmd_simulate(const DomainFlags& f, const SimulateArgs& a, const std::string& argv_line, std::ostream& out) {
  auto r = resolve(f);
  if (a.dT) r.domain = r.domain.with_dT(*a.dT);
  const auto ic = resolve_integrator(r, a);
  validate(r.domain, ic);
  Run run("simulate", r.out_dir, r.domain);
  run.params()["integrator"] = integrator_json(ic, r.domain);
  auto tr = simulate(r.domain, ic);
  run.write("traces.csv", io::traces_csv(tr.records));
  for (const auto& s : tr.snapshots) {
    std::ostringstream name;
    name << "snapshot_t" << std::fixed << std::setprecision(3) << s.t << ".csv";
    run.write(name.str(), io::grid_csv(s.state, r.domain));
  }
  run.write_json("final_state.json", io::state_to_json(tr.final_state));
  run.finish(argv_line, ic.ic.seed);
  out << "simulate: " << tr.steps << " steps, final sup|u1| = " << std::setprecision(6)
      << (tr.records.empty() ? 0.0 : tr.records.back().sup_u1) << "\n";
  return 0;
}

struct ContinueArgs {
  double start = 0.0, end = 0.0, step = 0.0;
  std::vector<double> list;
  double transient = 400.0, window = 200.0, dt = 0.02, sample = 0.1, seed_amplitude = 1e-3;
  int N = 32;
  bool cold = false;
  bool resume = false;
};

inline int cmd_continue(const DomainFlags& f, const ContinueArgs& a, const std::string& argv_line, std::ostream& out) {
  auto r = resolve(f);
  std::vector<double> dTs = a.list.empty() ? sweep_values(a.start, a.end, a.step) : a.list;
  SweepProtocol p;
  p.transient = a.transient;
  p.window = a.window;
  p.dt = a.dt;
  p.sample_interval = a.sample;
  p.seed_amplitude = a.seed_amplitude;
  p.N1 = p.N2 = a.N;
  p.warm_start = !a.cold;
  p.threads = f.threads;
  validate(p);
  if (!(r.domain.nu > 0.0)) throw PreconditionError("continuation requires nu > 0");
  Run run("continue", r.out_dir, r.domain);
  run.params()["dT_values"] = dTs;
  run.params()["protocol"] = {{"transient", p.transient}, {"window", p.window}, {"dt", p.dt},
                              {"N", p.N1},                {"sample_interval", p.sample_interval},
                              {"seed_amplitude", p.seed_amplitude}, {"warm_start", p.warm_start}};
  const fs::path ck = run.dir() / "checkpoint.json";
  if (!a.resume && fs::exists(ck)) fs::remove(ck);
  auto pts = sweep(r.domain, dTs, p, ck.string(), [&](const ContinuationPoint& q) {
    out << "dT = " << std::setprecision(6) << q.dT << "  amplitude = " << q.amplitude << "  "
        << to_string(q.classification) << (q.blew_up ? "  (blow-up)" : "") << "\n";
  });
  run.write("bifurcation.csv", bifurcation_csv(pts));
  run.finish(argv_line);
  return 0;
}

inline int cmd_energy(const DomainFlags& f, const SimulateArgs& a, const std::string& argv_line, std::ostream& out) {
  auto r = resolve(f);
  if (a.dT) r.domain = r.domain.with_dT(*a.dT);
  if (r.domain.dT() == 0.0) throw PreconditionError("energy functional undefined at dT = 0");
  auto ic = resolve_integrator(r, a);
  validate(r.domain, ic);
  ic.throw_on_blowup = false;
  Run run("energy", r.out_dir, r.domain);
  run.params()["integrator"] = integrator_json(ic, r.domain);
  auto tr = simulate(r.domain, ic);
  const auto recs = tr.energy_records();
  std::ostringstream csv;
  csv << "t,l2_sq,grad_v_sq,dissipation_accum,energy\n";
  for (const auto& e : recs)
    csv << io::fmt(e.t) << ',' << io::fmt(e.l2_sq) << ',' << io::fmt(e.grad_v_sq) << ','
        << io::fmt(e.dissipation_accum) << ',' << io::fmt(e.energy) << '\n';
  run.write("energy.csv", csv.str());
  double drift = 0.0;
  for (const auto& e : recs) drift = std::max(drift, std::abs(e.energy - recs.front().energy));
  json rep = {{"dT", r.domain.dT()},
              {"dT_star", dT_star(r.domain)},
              {"max_energy_drift", drift},
              {"initial_l2_sq", recs.front().l2_sq},
              {"blew_up", tr.blew_up}};
  const SpectralState init = make_initial_state(r.domain, ic);
  if (init.max_abs() > 0) {
    const auto pr = poincare_ratios(init, r.domain);
    rep["initial_poincare"] = {{"gradV_over_u", pr.r1},
                               {"gradV_bound", 2.0 * r.domain.L1 * r.domain.L1 / (pi * pi)},
                               {"u_over_gradu", pr.r2},
                               {"u_bound", r.domain.L1 * r.domain.L1 / (pi * pi)},
                               {"cross_identity_residual", cross_identity_residual(init, r.domain)}};
  }
  const double dT = r.domain.dT();
  if (dT < 0.0 || dT > dT_star(r.domain)) {
    const auto d = decay_check(recs, r.domain);
    rep["decay"] = {{"gamma_theory", d.gamma_theory}, {"gamma_fit", io::num(d.gamma_fit)},
                    {"worst_ratio", d.worst_ratio},   {"worst_time", d.worst_time},
                    {"pass", d.pass}};
    out << "decay check " << (d.pass ? "passed" : "FAILED") << ": worst ratio " << std::setprecision(6)
        << d.worst_ratio << " at t = " << d.worst_time << "\n";
  } else {
    rep["decay"] = nullptr;
    out << "dT inside [0, dT*]: no decay bound applies; max energy drift " << std::setprecision(6) << drift << "\n";
  }
  run.write_json("energy_report.json", rep);
  run.finish(argv_line, ic.ic.seed);
  return 0;
}

// ---------------------------------------------------------------------------

/// Exit codes: 0 success, 1 numerical failure, 2 usage or parameter error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Two-fluid channel model: spectra, stability, normal forms and simulation", "twofluid"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version);

  DomainFlags df;
  SpectrumArgs spa;
  StabilityArgs sta;
  HopfArgs hpa;
  SimulateArgs sima, ena;
  ContinueArgs cna;

  auto* sp = app.add_subcommand("spectrum", "eigenvalues of the linearization on a dT grid");
  add_domain_flags(sp, df);
  sp->add_option("--dT-range", spa.dT_range, "start:end:count")->capture_default_str();
  sp->add_option("--k1-max", spa.k1_max, "largest k1")->capture_default_str();
  sp->add_option("--k2-max", spa.k2_max, "largest |k2|")->capture_default_str();
  sp->add_flag("--continuous-k2", spa.continuous, "dispersion relation on the infinite strip");
  sp->add_option("--k2-range", spa.k2_range, "start:end:count of real k2 for --continuous-k2")->capture_default_str();

  auto* st = app.add_subcommand("stability", "instability intervals, nu_crit table and classification");
  add_domain_flags(st, df);
  st->add_option("--k2-max", sta.k2_max, "largest k2 in the table")->capture_default_str();

  auto* hp = app.add_subcommand("hopf", "normal-form coefficients at the thresholds");
  add_domain_flags(hp, df);
  hp->add_option("--which", hpa.which, "left, right or both")->capture_default_str();
  hp->add_option("--k2", hpa.k2, "wavenumber of the region")->capture_default_str();
  hp->add_option("--numeric-N", hpa.numeric_N, "truncation for the Galerkin cross-check (0 skips it)")->capture_default_str();
  hp->add_option("--mu", hpa.mu, "distance into the unstable side for the predicted cycle");
  hp->add_flag("--degenerate", hpa.degenerate, "coefficients of the point region (nu = nu_crit(1))");

  auto* sm = app.add_subcommand("simulate", "time integration from a seeded initial state");
  add_domain_flags(sm, df);
  add_integrator_flags(sm, sima);
  sm->add_option("--snapshots", sima.snapshots, "times at which grid dumps are written")->delimiter(',');
  sm->add_flag("--linear-only", sima.linear_only, "drop the advection term");

  auto* cn = app.add_subcommand("continue", "warm-started sweep in dT");
  add_domain_flags(cn, df);
  cn->add_option("--dT-start", cna.start, "first dT");
  cn->add_option("--dT-end", cna.end, "last dT");
  cn->add_option("--dT-step", cna.step, "step (sign gives the direction)");
  cn->add_option("--dT-list", cna.list, "explicit dT values instead of start/end/step")->delimiter(',');
  cn->add_option("--transient", cna.transient, "discarded time per point")->capture_default_str();
  cn->add_option("--window", cna.window, "measurement time per point")->capture_default_str();
  cn->add_option("--dt", cna.dt, "time step")->capture_default_str();
  cn->add_option("--sample", cna.sample, "trace sampling interval")->capture_default_str();
  cn->add_option("--seed-amplitude", cna.seed_amplitude, "eigenfunction seed amplitude")->capture_default_str();
  cn->add_option("--N", cna.N, "truncation order")->capture_default_str()->check(CLI::PositiveNumber);
  cn->add_flag("--cold", cna.cold, "fresh seed at every point (parallel with --threads)");
  cn->add_flag("--resume", cna.resume, "continue from checkpoint.json in the output directory");

  auto* en = app.add_subcommand("energy", "energy functional, Poincare ratios and decay check");
  add_domain_flags(en, df);
  add_integrator_flags(en, ena);

  std::string argv_line;
  for (int i = 0; i < argc; ++i) argv_line += (i ? " " : "") + std::string(argv[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << tool_version << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (sp->parsed()) return cmd_spectrum(df, spa, argv_line, out);
    if (st->parsed()) return cmd_stability(df, sta, argv_line, out);
    if (hp->parsed()) return cmd_hopf(df, hpa, argv_line, out);
    if (sm->parsed()) return cmd_simulate(df, sima, argv_line, out);
    if (cn->parsed()) {
      if (cna.list.empty() && !(cn->count("--dT-start") && cn->count("--dT-end") && cn->count("--dT-step")))
        throw ConfigError("continue needs --dT-list or all of --dT-start, --dT-end, --dT-step");
      return cmd_continue(df, cna, argv_line, out);
    }
    if (en->parsed()) return cmd_energy(df, ena, argv_line, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace twofluid::cli
