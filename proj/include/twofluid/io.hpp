#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "domain.hpp"
#include "spectral_core.hpp"
#include "spectral_state.hpp"
#include "time_integrator.hpp"

namespace twofluid::io {

using json = nlohmann::json;

inline constexpr int state_format = 1;

/// NaN and infinities become null
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double num_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline json to_json(const DomainConfig& c) {
  return {{"L1", c.L1}, {"L2", c.L2}, {"nu", c.nu}, {"T_plus", c.T_plus}, {"T_minus", c.T_minus}};
}

inline DomainConfig config_from_json(const json& j) {
  DomainConfig c;
  c.L1 = j.at("L1").get<double>();
  c.L2 = j.at("L2").get<double>();
  c.nu = j.at("nu").get<double>();
  c.T_plus = j.at("T_plus").get<double>();
  c.T_minus = j.at("T_minus").get<double>();
  return c;
}

/// Full spectral state, every stored mode as [k1, k2, re u1, im u1, re u2, im u2].
inline json state_to_json(const SpectralState& s) {
  json modes = json::array();
  for (int k1 = 1; k1 <= s.N1(); ++k1)
    for (int k2 = -s.N2(); k2 <= s.N2(); ++k2) {
      const cplx a = s.at(k1, k2, 0), b = s.at(k1, k2, 1);
      if (a == cplx{} && b == cplx{}) continue;
      modes.push_back({k1, k2, a.real(), a.imag(), b.real(), b.imag()});
    }
  return {{"format", state_format}, {"N1", s.N1()}, {"N2", s.N2()}, {"complexified", s.complexified()},
          {"modes", modes}};
}

inline SpectralState state_from_json(const json& j) {
  const int fmt = j.at("format").get<int>();
  if (fmt != state_format) throw PreconditionError("unsupported state format " + std::to_string(fmt));
  SpectralState s(j.at("N1").get<int>(), j.at("N2").get<int>(), j.value("complexified", false));
  for (const auto& m : j.at("modes")) {
    const int k1 = m.at(0).get<int>(), k2 = m.at(1).get<int>();
    if (k1 < 1 || k1 > s.N1() || std::abs(k2) > s.N2()) throw PreconditionError("state mode out of range");
    s.at(k1, k2, 0) = cplx(m.at(2).get<double>(), m.at(3).get<double>());
    s.at(k1, k2, 1) = cplx(m.at(4).get<double>(), m.at(5).get<double>());
  }
  return s;
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path);
  return json::parse(in);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + path);
  out << text;
  if (!out) throw PreconditionError("write failed for " + path);
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// CSV

inline std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

/// x1, x2, u1, u2 on the (n1+1) x n2 grid of the comoving frame
inline std::string grid_csv(const SpectralState& s, const DomainConfig& cfg, int n1 = 0, int n2 = 0) {
  if (n1 <= 0) n1 = std::max(2 * s.N1(), 2);
  if (n2 <= 0) n2 = 2 * s.N2() + 1;
  const auto g = synthesize(s, n1, n2);
  std::ostringstream o;
  o << "x1,x2,u1,u2\n";
  for (int j = 0; j <= n1; ++j)
    for (int m = 0; m < n2; ++m)
      o << fmt(j * cfg.L1 / n1) << ',' << fmt(m * cfg.L2 / n2) << ',' << fmt(g.first(j, m)) << ','
        << fmt(g.second(j, m)) << '\n';
  return o.str();
}

inline std::string traces_csv(const std::vector<TraceRecord>& rs) {
  std::ostringstream o;
  o << "t,supnorm_u1,midpoint,midpoint_lab,l2_sq,grad_v_sq,dissipation_accum,energy\n";
  for (const auto& r : rs)
    o << fmt(r.t) << ',' << fmt(r.sup_u1) << ',' << fmt(r.midpoint) << ',' << fmt(r.midpoint_lab) << ','
      << fmt(r.energy.l2_sq) << ',' << fmt(r.energy.grad_v_sq) << ',' << fmt(r.energy.dissipation_accum) << ','
      << fmt(r.energy.energy) << '\n';
  return o.str();
}

}  // namespace twofluid::io
